// Linear-Gaussian toy problems: closed-form surrogate posteriors, the
// data-enhanced mixture, Gaussian KL divergences and a scalar sampling toy
// that runs through the generic SIS code path.
#pragma once

#include "romx/core.hpp"
#include "romx/observation.hpp"
#include "romx/parallel.hpp"
#include "romx/smc.hpp"

#include <vector>

namespace romx {

struct Gaussian {
  Vector mean;
  Matrix cov;
  Index dim() const { return mean.size(); }
};

/// Throws ConfigError unless cov is symmetric positive definite.
void validate_gaussian(const Gaussian& g);

/// KL(p0 || p1) between two non-degenerate Gaussians.
double gaussian_kl(const Gaussian& p0, const Gaussian& p1);

/// p(x) prior, y = h x + zeta w.
struct LinearGaussianInstance {
  Gaussian target;
  Gaussian surrogate;
  Matrix h;
  double zeta = 1.0;
};

/// Posterior of x given y under `prior`.
Gaussian gaussian_posterior(const Gaussian& prior, const Matrix& h, double zeta, const Vector& y);

/// Distribution of y = h x + zeta w with x ~ prior.
Gaussian gaussian_evidence(const Gaussian& prior, const Matrix& h, double zeta);

/// Mixture over y ~ p_Y of the surrogate posteriors (itself Gaussian).
Gaussian enhanced_surrogate(const LinearGaussianInstance& inst);

struct Prop1Result {
  double kl_target_enhanced = 0.0;   // KL(p_X, p^_X)
  double kl_target_surrogate = 0.0;  // KL(p_X, p~_X)
  double kl_obs = 0.0;               // KL(p_Y, p^_Y)
  /// kl_target_surrogate - kl_obs - kl_target_enhanced
  double slack() const { return kl_target_surrogate - kl_obs - kl_target_enhanced; }
};

Prop1Result prop1_evaluate(const LinearGaussianInstance& inst);

/// Random well-conditioned instance with state dimension n and m observations.
LinearGaussianInstance random_instance(Index n, Index m, Rng& rng);

struct Prop1Report {
  std::vector<Prop1Result> results;
  int violations = 0;      // slack < -tol
  int strict = 0;          // slack > strict_tol
  double min_slack = 0.0;
};

/// Runs prop1_evaluate on one random instance per seed, with dimensions
/// cycling through `dims` (pairs of state/observation sizes).
Prop1Report prop1_gaussian_check(const std::vector<std::pair<int, int>>& dims,
                                 const std::vector<std::uint64_t>& seeds, double tol = 1e-9,
                                 double strict_tol = 1e-6);

/// x_1 = theta1; x_t = x_{t-1}. State dimension = theta1 size.
class StaticGaussianModel final : public FullOrderModel {
 public:
  explicit StaticGaussianModel(Index n) : n_(n) {}
  Index state_dim() const override { return n_; }
  Vector initial_state(const ModelParameters& theta) const override;
  Vector step(const Vector& x, const ModelParameters& theta, int t) const override;

 private:
  Index n_;
};

class GaussianPrior final : public SurrogatePrior {
 public:
  explicit GaussianPrior(Gaussian g);
  ModelParameters draw(Rng& rng) const override;
  const Gaussian& distribution() const { return g_; }

 private:
  Gaussian g_;
  Matrix chol_;
};

/// Estimate of E_{p^_X}[x] from D observations y_i ~ p_Y (one hidden draw
/// from the target each), N surrogate particles per observation:
/// (1/D) sum_i sum_j w_ij xi_ij.
Vector enhanced_mean_estimate(const LinearGaussianInstance& inst, int D, int N,
                              std::uint64_t seed, unsigned threads = 1);

}  // namespace romx
