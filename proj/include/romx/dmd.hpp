// ROM-2: best rank-k one-step linear operator u = p p^T b a^+ in factored
// form w diag(sigma) v^T.
#pragma once

#include "romx/core.hpp"
#include "romx/smc.hpp"

#include <filesystem>

namespace romx {

struct LowRankOperator {
  Matrix w;      // n x k, orthonormal columns
  Vector sigma;  // k, non-negative
  Matrix v;      // n x k, orthonormal columns

  Index n() const { return w.rows(); }
  Index k() const { return sigma.size(); }
  Vector apply(const Vector& x) const;
  Matrix apply(const Matrix& x) const;
  Matrix dense() const;
  double spectral_norm() const;
};

/// SVD-based factorization of (a, b) shared by every k.
class DmdDecomposition {
 public:
  DmdDecomposition(const Matrix& a, const Matrix& b, double pinv_tol = 1e-12);

  Index n() const { return n_; }
  Index columns() const { return columns_; }
  Index rank_a() const { return sa_.size(); }

  /// Throws ConfigError unless 1 <= k <= min(n, columns).
  LowRankOperator truncate(Index k) const;

  /// ||b - b a^+ a||_F^2.
  double unconstrained_cost() const { return unconstrained_cost_; }

 private:
  Index n_ = 0;
  Index columns_ = 0;
  Matrix wa_;  // left singular vectors of a (n x r)
  Vector sa_;  // retained singular values of a
  Matrix p_;   // left singular vectors of b v_a
  Vector lam_;
  Matrix q_;
  double unconstrained_cost_ = 0.0;
};

LowRankOperator dmd_fit(const Matrix& a, const Matrix& b, Index k);
LowRankOperator dmd_fit(const WeightedSnapshots& snapshots, Index k);

/// ||b - u a||_F^2.
double dmd_cost(const LowRankOperator& op, const Matrix& a, const Matrix& b);

/// x~_1 = g(theta), x~_t = u x~_{t-1}, run through k-dimensional z_t.
Trajectory dmd_rom_simulate(const LowRankOperator& op, const FullOrderModel& model,
                            const ModelParameters& theta, int T);

/// x~_1 = x_1, x~_t = u x_{t-1}.
Trajectory dmd_star_predict(const LowRankOperator& op, const Trajectory& x);

/// sum_{t=2}^T ||x_t - u x_{t-1}||^2.
double one_step_residual(const LowRankOperator& op, const Trajectory& x);

/// max_{t in 2..T} sum_{k=t}^T (1 + 4(k-1)) ||u||^{2(k-t)}.
double bound_constant(const LowRankOperator& op, int T);
double bound_constant(double spectral_norm, int T);

/// Writes w.romx, sigma.romx (k x 1), v.romx and dmd.txt (n, k) into dir.
void save_low_rank_operator(const std::filesystem::path& dir, const LowRankOperator& op);
LowRankOperator load_low_rank_operator(const std::filesystem::path& dir);

}  // namespace romx
