#include "romx/rayleigh_benard.hpp"

#include <cmath>
#include <numbers>

namespace romx::rb {
namespace {

constexpr double kPi = std::numbers::pi;

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void check_shape(const Field& f, const Grid& g) {
  if (f.rows() != g.n1 || f.cols() != g.n2) throw DimensionError("field does not match grid");
}

// Explicit-scheme stability limits along the negative real and the imaginary
// axis.
double real_axis_limit(Integrator i) { return i == Integrator::RK4 ? 2.78 : 2.0; }
double imag_axis_limit(Integrator i) { return i == Integrator::RK4 ? 2.8 : 1.0; }

RBState axpy(const RBState& x, double alpha, const RBState& d) {
  return {x.b + alpha * d.b, x.tau + alpha * d.tau};
}

}  // namespace

Grid::Grid(int n1_, int n2_) : n1(n1_), n2(n2_) {
  if (!is_power_of_two(n1) || !is_power_of_two(n2) || n1 < 4 || n2 < 4) {
    throw ConfigError("grid extents must be powers of two >= 4 (got " + std::to_string(n1) +
                      "x" + std::to_string(n2) + ")");
  }
}

Vector RBState::flatten() const {
  Vector x(b.size() + tau.size());
  x.head(b.size()) = b.reshaped();
  x.tail(tau.size()) = tau.reshaped();
  return x;
}

RBState RBState::from_vector(const Vector& x, const Grid& grid) {
  if (x.size() != grid.state_dim()) throw DimensionError("state vector does not match grid");
  const Index p = grid.points();
  return {x.head(p).reshaped(grid.n1, grid.n2), x.tail(p).reshaped(grid.n1, grid.n2)};
}

RBState RBState::zero(const Grid& grid) {
  return {Field::Zero(grid.n1, grid.n2), Field::Zero(grid.n1, grid.n2)};
}

void RBConfig::validate() const {
  Grid(grid.n1, grid.n2);
  if (substeps < 1) throw ConfigError("substeps must be >= 1");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  const double diffusion = std::max(1.0, rho_max) * (4.0 / (grid.h1() * grid.h1()) +
                                                     4.0 / (grid.h2() * grid.h2()));
  if (dt * diffusion > real_axis_limit(integrator)) {
    throw ConfigError("dt violates the diffusive stability bound (dt*lambda_max = " +
                      std::to_string(dt * diffusion) + ")");
  }
  const double transport = rho_max * nu_max / grid.h1() +
                           velocity_max * (1.0 / grid.h1() + 1.0 / grid.h2());
  if (dt * transport > imag_axis_limit(integrator)) {
    throw ConfigError("dt violates the advective stability bound (dt*|omega| = " +
                      std::to_string(dt * transport) + ")");
  }
}

GridOps::GridOps(const Grid& grid) : grid_(grid), fft_(grid.n1, grid.n2) {
  inverse_symbol_.resize(static_cast<std::size_t>(grid.points()));
  for (int k2 = 0; k2 < grid.n2; ++k2) {
    for (int k1 = 0; k1 < grid.n1; ++k1) {
      const double lambda = laplacian_symbol(k1, k2);
      inverse_symbol_[k1 + static_cast<std::size_t>(grid.n1) * k2] =
          (k1 == 0 && k2 == 0) ? 0.0 : 1.0 / lambda;
    }
  }
}

double GridOps::laplacian_symbol(int k1, int k2) const {
  const double h1 = grid_.h1(), h2 = grid_.h2();
  return (2.0 * std::cos(2.0 * kPi * k1 / grid_.n1) - 2.0) / (h1 * h1) +
         (2.0 * std::cos(2.0 * kPi * k2 / grid_.n2) - 2.0) / (h2 * h2);
}

Field GridOps::d1(const Field& f) const {
  check_shape(f, grid_);
  const int n1 = grid_.n1;
  const double s = 0.5 / grid_.h1();
  Field out(f.rows(), f.cols());
  for (Index j = 0; j < f.cols(); ++j) {
    for (int i = 0; i < n1; ++i) {
      out(i, j) = s * (f((i + 1) % n1, j) - f((i + n1 - 1) % n1, j));
    }
  }
  return out;
}

Field GridOps::d2(const Field& f) const {
  check_shape(f, grid_);
  const int n2 = grid_.n2;
  const double s = 0.5 / grid_.h2();
  Field out(f.rows(), f.cols());
  for (int j = 0; j < n2; ++j) {
    out.col(j) = s * (f.col((j + 1) % n2) - f.col((j + n2 - 1) % n2));
  }
  return out;
}

Field GridOps::laplacian(const Field& f) const {
  check_shape(f, grid_);
  const int n1 = grid_.n1, n2 = grid_.n2;
  const double c1 = 1.0 / (grid_.h1() * grid_.h1());
  const double c2 = 1.0 / (grid_.h2() * grid_.h2());
  Field out(f.rows(), f.cols());
  for (int j = 0; j < n2; ++j) {
    const int jp = (j + 1) % n2, jm = (j + n2 - 1) % n2;
    for (int i = 0; i < n1; ++i) {
      const int ip = (i + 1) % n1, im = (i + n1 - 1) % n1;
      out(i, j) = c1 * (f(ip, j) - 2.0 * f(i, j) + f(im, j)) +
                  c2 * (f(i, jp) - 2.0 * f(i, j) + f(i, jm));
    }
  }
  return out;
}

Field GridOps::inverse_laplacian(const Field& f) const {
  check_shape(f, grid_);
  const auto size = static_cast<std::size_t>(grid_.points());
  std::vector<Complex> buf(size);
  for (std::size_t i = 0; i < size; ++i) buf[i] = f.data()[i];
  auto spec = fft_.forward(buf);
  const double scale = 1.0 / static_cast<double>(size);
  for (std::size_t i = 0; i < size; ++i) spec[i] *= inverse_symbol_[i] * scale;
  const auto back = fft_.backward(spec);
  Field out(f.rows(), f.cols());
  for (std::size_t i = 0; i < size; ++i) out.data()[i] = back[i].real();
  return out;
}

Field inverse_laplacian(const Field& field, const GridOps& ops) {
  return ops.inverse_laplacian(field);
}

Velocity velocity_from_buoyancy(const Field& b, const GridOps& ops) {
  const Field psi = ops.inverse_laplacian(b);
  return {ops.d2(psi), -ops.d1(psi)};
}

Field divergence(const Velocity& v, const GridOps& ops) {
  return ops.d1(v.v1) + ops.d2(v.v2);
}

RBState rb_rhs(const RBState& state, const Theta3& theta3, const GridOps& ops) {
  const Field psi = ops.inverse_laplacian(state.b);
  const Field v1 = ops.d2(psi);
  const Field d1psi = ops.d1(psi);  // = -v2, also the d1(lapinv(b)) source
  auto advect = [&](const Field& q) -> Field {
    return v1.cwiseProduct(ops.d1(q)) - d1psi.cwiseProduct(ops.d2(q));
  };

  RBState out;
  out.b = -advect(state.b);
  // Skipped when rho = 0 so that b is bit-for-bit independent of tau.
  if (theta3.rho != 0.0) {
    out.b += theta3.rho * ops.laplacian(state.b);
    if (theta3.nu != 0.0) out.b += (theta3.rho * theta3.nu) * ops.d1(state.tau);
  }
  out.tau = -advect(state.tau) + ops.laplacian(state.tau) + d1psi;
  return out;
}

RBState rb_substep(const RBState& state, const Theta3& theta3, double dt, const GridOps& ops,
                   Integrator integrator) {
  RBState next;
  if (integrator == Integrator::Euler) {
    next = axpy(state, dt, rb_rhs(state, theta3, ops));
  } else {
    const RBState k1 = rb_rhs(state, theta3, ops);
    const RBState k2 = rb_rhs(axpy(state, 0.5 * dt, k1), theta3, ops);
    const RBState k3 = rb_rhs(axpy(state, 0.5 * dt, k2), theta3, ops);
    const RBState k4 = rb_rhs(axpy(state, dt, k3), theta3, ops);
    const double w = dt / 6.0;
    next.b = state.b + w * (k1.b + 2.0 * k2.b + 2.0 * k3.b + k4.b);
    next.tau = state.tau + w * (k1.tau + 2.0 * k2.tau + 2.0 * k3.tau + k4.tau);
  }
  if (!next.b.allFinite() || !next.tau.allFinite()) {
    throw DivergenceError("Rayleigh-Benard substep produced non-finite values", 1);
  }
  return next;
}

RBState rb_macro_step(const RBState& state, const Theta3& theta3, const RBConfig& config,
                      const GridOps& ops) {
  RBState s = state;
  for (int k = 1; k <= config.substeps; ++k) {
    try {
      s = rb_substep(s, theta3, config.dt, ops, config.integrator);
    } catch (const DivergenceError&) {
      throw DivergenceError("Rayleigh-Benard macro step diverged at substep", k);
    }
  }
  return s;
}

InitShape InitShape::from_theta1(const Vector& t) {
  const Index len = t.size();
  if (len != 4 && (len < 7 || (len - 7) % 2 != 0)) {
    throw ConfigError("theta1 must have length 4 or 7 + 2q (got " + std::to_string(len) + ")");
  }
  InitShape s;
  s.a = t(0);
  s.pi_b = t(1);
  s.pi_tau = t(2);
  s.pi_tau_prime = t(3);
  if (len >= 7) {
    s.pi_b_cos = t(4);
    s.pi_tau_sin = t(5);
    s.pi_b_prime = t(6);
    for (Index i = 7; i < len; i += 2) {
      s.beta_b.push_back(t(i));
      s.beta_tau.push_back(t(i + 1));
    }
  }
  return s;
}

Vector InitShape::to_theta1() const {
  Vector t(7 + 2 * static_cast<Index>(beta_b.size()));
  t << a, pi_b, pi_tau, pi_tau_prime, pi_b_cos, pi_tau_sin, pi_b_prime,
      Vector::Zero(2 * static_cast<Index>(beta_b.size()));
  for (std::size_t q = 0; q < beta_b.size(); ++q) {
    t(7 + 2 * static_cast<Index>(q)) = beta_b[q];
    t(8 + 2 * static_cast<Index>(q)) = beta_tau[q];
  }
  return t;
}

RBState rb_init(const ModelParameters& theta, const Grid& grid, const Matrix& perturbation_basis) {
  const InitShape s = InitShape::from_theta1(theta.theta1);
  RBState out = RBState::zero(grid);
  for (int j = 0; j < grid.n2; ++j) {
    const double s2 = j * grid.h2();
    const double base = std::sin(kPi * s2);
    const double vert = std::sin(2.0 * kPi * s2);
    double harm_b = 0.0, harm_tau = 0.0;
    for (std::size_t q = 0; q < s.beta_b.size(); ++q) {
      const double hq = std::sin(2.0 * kPi * static_cast<double>(q + 2) * s2);
      harm_b += s.beta_b[q] * hq;
      harm_tau += s.beta_tau[q] * hq;
    }
    for (int i = 0; i < grid.n1; ++i) {
      const double s1 = i * grid.h1();
      const double sa = std::sin(s.a * s1), ca = std::cos(s.a * s1);
      out.b(i, j) = (s.pi_b * sa + s.pi_b_cos * ca) * base - s.pi_b_prime * vert - harm_b;
      out.tau(i, j) =
          (s.pi_tau * ca + s.pi_tau_sin * sa) * base - s.pi_tau_prime * vert - harm_tau;
    }
  }
  if (theta.theta2.size() > 0) {
    if (perturbation_basis.cols() != theta.theta2.size() ||
        perturbation_basis.rows() != grid.state_dim()) {
      throw ConfigError("theta2 has " + std::to_string(theta.theta2.size()) +
                        " coefficients but the perturbation basis is " +
                        std::to_string(perturbation_basis.rows()) + "x" +
                        std::to_string(perturbation_basis.cols()));
    }
    const Vector eps = perturbation_basis * theta.theta2;
    out = RBState::from_vector(out.flatten() + eps, grid);
  }
  return out;
}

RayleighBenardModel::RayleighBenardModel(RBConfig config, Matrix perturbation_basis)
    : config_(std::move(config)),
      ops_(std::make_shared<const GridOps>(config_.grid)),
      perturbation_basis_(std::move(perturbation_basis)) {
  config_.validate();
}

Vector RayleighBenardModel::initial_state(const ModelParameters& theta) const {
  return rb_init(theta, config_.grid, perturbation_basis_).flatten();
}

Vector RayleighBenardModel::step(const Vector& x, const ModelParameters& theta, int t) const {
  try {
    return rb_macro_step(RBState::from_vector(x, config_.grid), theta.theta3, config_, *ops_)
        .flatten();
  } catch (const DivergenceError& e) {
    throw DivergenceError(std::string(e.what()) + " while computing time index", t);
  }
}

}  // namespace romx::rb
