// Importance sampling of the data-enhanced surrogate posterior, MMSE point
// estimates and weighted snapshot assembly.
//
// The surrogate transition kernel is a Dirac measure (a particle trajectory is
// fully determined by its parameters), so sequential importance sampling
// reduces to weighting whole trajectories by their observation likelihood and
// no resampling is performed.
#pragma once

#include "romx/core.hpp"
#include "romx/observation.hpp"
#include "romx/parallel.hpp"

#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace romx {

/// Draws surrogate parameters; x_1 is obtained by pushing them through the
/// model's initial-condition map.
class SurrogatePrior {
 public:
  virtual ~SurrogatePrior() = default;
  virtual ModelParameters draw(Rng& rng) const = 0;
};

struct ParticleEnsemble {
  std::vector<Trajectory> particles;
  Vector weights;      // normalized, sum to 1
  Vector log_weights;  // unnormalized; empty for unweighted prior draws
  Index obs_index = 0;

  std::size_t size() const { return particles.size(); }
  Index n() const { return particles.empty() ? 0 : particles.front().n(); }
  Index T() const { return particles.empty() ? 0 : particles.front().T(); }
};

struct SisOptions {
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Enables the initial-condition projection; nullptr columns = identity.
  bool project_initial = true;
  const Matrix* subspace_basis = nullptr;
  /// Projection is used when zeta <= threshold * peak |y|.
  double projection_threshold = 0.1;
};

/// Normalizes log-weights with log-sum-exp. Throws DegenerateError when every
/// weight underflows.
Vector normalize_log_weights(const Vector& log_weights);

/// B B^T [ (I - h^+ h) x1 + h^+ (y1 + w) ],  w ~ N(0, zeta^2 I).
/// A null basis means B = I.
Vector project_initial(const Vector& x1, const Vector& y1, const LinearObserver& op,
                       const Matrix* subspace_basis, Rng& rng);

/// Same map with an explicit noise realization w.
Vector project_initial_with_noise(const Vector& x1, const Vector& y1, const Vector& w,
                                  const LinearObserver& op, const Matrix* subspace_basis);

bool projection_active(const ObservationSequence& y, const LinearObserver& op,
                       const SisOptions& options);

/// Weighted particles for observation sequence y (index obs_index). Particle j
/// uses the random streams (seed, obs_index, j), so the ensemble does not
/// depend on the thread count. With zeta = 0 the Gaussian likelihood is a
/// Dirac; particles are then weighted uniformly and the data enter only
/// through the initial-condition projection.
ParticleEnsemble sis_posterior(const ObservationSequence& y, const SurrogatePrior& prior,
                               const FullOrderModel& model, const LinearObserver& op, int N,
                               const SisOptions& options, Index obs_index = 0);

/// N unweighted surrogate trajectories (weights 1/N), drawn from the same
/// streams sis_posterior uses for its proposal.
ParticleEnsemble prior_ensemble(const SurrogatePrior& prior, const FullOrderModel& model, int T,
                                int N, std::uint64_t seed, unsigned threads, Index obs_index = 0);

Trajectory mmse_estimate(const ParticleEnsemble& ensemble);

struct CrossCovariance {
  Matrix covariance_part;  // sum_t sum_j w (xi_{t-l} - xhat_{t-l})(xi_t - xhat_t)^T
  Matrix mean_part;        // sum_t xhat_{t-l} xhat_t^T
};

/// Split of sum_{t=1+lag}^T E[x_{t-lag} x_t^T] under the ensemble.
CrossCovariance cross_covariance_decomposition(const ParticleEnsemble& ensemble, int lag);

enum class Strategy { Target, Enhanced, Initial, Point };

std::string_view to_string(Strategy s);
Strategy strategy_from_string(std::string_view name);

/// a = [sqrt(w) xi_{1:T-1} ...], b = [sqrt(w) xi_{2:T} ...], c = [sqrt(w) xi_{1:T} ...].
struct WeightedSnapshots {
  Matrix a;
  Matrix b;
  Matrix c;
};

/// Target and point strategies: one unit-weight trajectory per observation.
WeightedSnapshots snapshots_from_trajectories(std::span<const Trajectory> trajectories);

/// Enhanced and initial strategies: every particle scaled by sqrt(weight).
WeightedSnapshots snapshots_from_ensembles(std::span<const ParticleEnsemble> ensembles);

/// Strategy-checked front end over the two builders above. Target expects the
/// hidden trajectories, Point the MMSE estimates, Enhanced/Initial ensembles.
WeightedSnapshots assemble_snapshots(Strategy strategy, std::span<const Trajectory> trajectories,
                                     std::span<const ParticleEnsemble> ensembles);

}  // namespace romx
