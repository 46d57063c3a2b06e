// Small models and random generators shared by the test suites.
#pragma once

#include "romx/core.hpp"
#include "romx/parallel.hpp"

#include <random>

namespace romx::test {

inline Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Vector random_vector(Index n, Rng& rng) {
  return random_matrix(n, 1, rng).col(0);
}

inline Matrix random_orthonormal(Index n, Index k, Rng& rng) {
  Eigen::HouseholderQR<Matrix> qr(random_matrix(n, k, rng));
  return qr.householderQ() * Matrix::Identity(n, k);
}

// x_1 = theta1, x_t = A x_{t-1}.
class LinearModel final : public FullOrderModel {
 public:
  explicit LinearModel(Matrix a) : a_(std::move(a)) {}
  Index state_dim() const override { return a_.rows(); }
  Vector initial_state(const ModelParameters& theta) const override { return theta.theta1; }
  Vector step(const Vector& x, const ModelParameters&, int) const override { return a_ * x; }

 private:
  Matrix a_;
};

inline ModelParameters params_with(const Vector& theta1) {
  ModelParameters p;
  p.theta1 = theta1;
  return p;
}

}  // namespace romx::test
