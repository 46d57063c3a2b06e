#include "romx/core.hpp"

#include <cmath>

namespace romx {

bool all_finite(const Matrix& m) {
  return m.allFinite();
}

Trajectory::Trajectory(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw DimensionError("trajectory must have n >= 1 and T >= 1");
  }
  if (!all_finite(data_)) {
    throw DivergenceError("trajectory contains non-finite entries", 0);
  }
}

void ModelParameters::validate() const {
  if (!(theta3.rho >= 0.0) || !(theta3.nu >= 0.0)) {
    throw ConfigError("theta3 components must be non-negative");
  }
}

Trajectory simulate_from(const FullOrderModel& model, const Vector& x1,
                         const ModelParameters& theta, int T) {
  if (T < 1) throw ConfigError("simulate: T must be >= 1");
  const Index n = model.state_dim();
  if (x1.size() != n) throw DimensionError("simulate: initial state has wrong dimension");
  Matrix out(n, T);
  out.col(0) = x1;
  if (!x1.allFinite()) throw DivergenceError("simulation diverged", 1);
  for (int t = 2; t <= T; ++t) {
    Vector next = model.step(out.col(t - 2), theta, t);
    if (next.size() != n) throw DimensionError("model step returned wrong dimension");
    if (!next.allFinite()) throw DivergenceError("simulation diverged", t);
    out.col(t - 1) = next;
  }
  return Trajectory(std::move(out));
}

Trajectory simulate(const FullOrderModel& model, const ModelParameters& theta, int T) {
  theta.validate();
  return simulate_from(model, model.initial_state(theta), theta, T);
}

double frobenius_error(const Matrix& x, const Matrix& x_tilde) {
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols()) {
    throw DimensionError("frobenius_error: shape mismatch");
  }
  return (x - x_tilde).norm();
}

double frobenius_error(const Trajectory& x, const Trajectory& x_tilde) {
  return frobenius_error(x.data(), x_tilde.data());
}

}  // namespace romx
