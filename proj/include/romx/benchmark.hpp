// The Rayleigh-Benard benchmark: parameter sets, setups i-v, the four
// sampling strategies and error-versus-k curves for every ROM variant.
#pragma once

#include "romx/core.hpp"
#include "romx/dmd.hpp"
#include "romx/gaussian.hpp"
#include "romx/observation.hpp"
#include "romx/pod.hpp"
#include "romx/rayleigh_benard.hpp"
#include "romx/smc.hpp"

#include <limits>
#include <string>
#include <vector>

namespace romx {

struct SetupSpec {
  std::string id;
  int D = 30;
  int T = 2;
  /// +inf means zeta = 0 (noise-free observations).
  double psnr_db = std::numeric_limits<double>::infinity();
  double gamma = 0.0;
  double rho = 0.0;
  double nu_min = 30.0;
  double nu_max = 30.0;
  int N = 40;
  /// Half-width of the uniform box for the initial-condition amplitudes.
  /// Small enough that one macro step is linear to ~1e-5 at desk scale.
  double amplitude = 0.01;

  /// One of "i", "ii", "iii", "iv", "v".
  static SetupSpec by_id(const std::string& id);
  void validate() const;
};

/// Wavenumbers 2 pi j, j = 1..count.
std::vector<double> wavenumber_set(int count);

struct ParameterSpace {
  rb::Grid grid;
  std::vector<double> wavenumbers_true;
  std::vector<double> wavenumbers_surrogate;
  int vertical_harmonics_true = 1;       // sin(2 pi q s2), q = 1..this
  int vertical_harmonics_surrogate = 2;
  double amplitude = 0.01;               // amplitudes uniform on [-amplitude, amplitude]
  Matrix mode_basis_true;                // n x 10
  Matrix mode_basis_surrogate;           // n x 20, first 10 columns span the true set
  Matrix perturbation_basis;             // n x 40, orthogonal to the surrogate span
  double gamma = 0.0;
  double rho = 0.0;
  double nu_min = 30.0;
  double nu_max = 30.0;
};

/// Explicit (not orthonormalized) mode vectors of the initial-condition
/// family for the given wavenumbers and vertical harmonics.
Matrix initial_mode_matrix(const rb::Grid& grid, const std::vector<double>& wavenumbers,
                           int vertical_harmonics);

/// Throws ConfigError when the grid cannot resolve the mode families (the
/// message reports the achieved rank).
ParameterSpace build_parameter_space(const rb::Grid& grid, const SetupSpec& setup);

enum class ThetaSource { True, Surrogate };

ModelParameters draw_theta(const ParameterSpace& space, ThetaSource which, Rng& rng);

class SurrogateSpacePrior final : public SurrogatePrior {
 public:
  explicit SurrogateSpacePrior(const ParameterSpace& space) : space_(space) {}
  ModelParameters draw(Rng& rng) const override {
    return draw_theta(space_, ThetaSource::Surrogate, rng);
  }

 private:
  const ParameterSpace& space_;
};

enum class RomFamily { Pod, Dmd };
enum class RomVariant { Rom1, Rom1Star, Rom2, Rom2Star };

std::string_view to_string(RomFamily r);
std::string_view to_string(RomVariant r);
RomFamily rom_family_from_string(std::string_view name);

std::vector<int> default_k_grid();

struct BenchmarkOptions {
  rb::Grid grid{16, 16};
  int substeps = 50;
  double dt = 2e-4;
  rb::Integrator integrator = rb::Integrator::RK4;
  int obs_factor1 = 2;
  int obs_factor2 = 1;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::vector<int> k_grid = default_k_grid();
  std::vector<Strategy> strategies{Strategy::Target, Strategy::Enhanced, Strategy::Initial,
                                   Strategy::Point};
  std::vector<RomFamily> roms{RomFamily::Pod, RomFamily::Dmd};
  /// Idealized variants for every strategy instead of the target one only.
  bool star_all_strategies = false;
  /// Initial-condition projection of the enhanced sampler.
  bool project_initial = true;
  double projection_threshold = 0.1;
};

rb::RBConfig rb_config_for(const BenchmarkOptions& options, const SetupSpec& setup);

/// Hidden trajectories and their observations for one setup.
struct GeneratedData {
  ParameterSpace space;
  std::vector<ModelParameters> theta;
  std::vector<Trajectory> x;
  std::vector<ObservationSequence> y;
  double zeta = 0.0;
};

GeneratedData generate_data(const SetupSpec& setup, const BenchmarkOptions& options);

struct ErrorRow {
  RomVariant rom = RomVariant::Rom1;
  Strategy strategy = Strategy::Target;
  int k = 0;
  double mean_error = 0.0;
  std::vector<double> errors;  // per hidden trajectory
};

/// Diagnostics of the two-sided error bounds over every (trajectory, u) pair.
struct SandwichStats {
  long pod_checks = 0;
  long pod_lower_violations = 0;
  double pod_max_ratio = 0.0;  // ||x - x~||^2 / ||x - u u^T x||^2, observed constant
  long dmd_checks = 0;
  long dmd_lower_violations = 0;
  long dmd_upper_violations = 0;
  double dmd_worst_lower = 0.0;  // max residual / error^2 (> 1 means violation)
  double dmd_worst_upper = 0.0;  // max error^2 / (c * residual)
};

struct BenchmarkResult {
  SetupSpec setup;
  std::vector<ErrorRow> rows;  // ordered by (rom, strategy, k)
  SandwichStats sandwich;
  double zeta = 0.0;
  double mean_state_norm = 0.0;  // mean ||x^(i)||_F over the hidden trajectories

  const ErrorRow* find(RomVariant rom, Strategy strategy, int k) const;
};

/// Snapshot matrices for one strategy built from generated data and ensembles.
struct StrategyData {
  std::vector<ParticleEnsemble> enhanced;
  std::vector<ParticleEnsemble> initial;
  std::vector<Trajectory> point;
};

StrategyData sample_strategies(const SetupSpec& setup, const BenchmarkOptions& options,
                               const GeneratedData& data, const FullOrderModel& model,
                               const LinearObserver& op);

WeightedSnapshots strategy_snapshots(Strategy strategy, const GeneratedData& data,
                                     const StrategyData& sampled);

BenchmarkResult run_setup(const SetupSpec& setup, const BenchmarkOptions& options);

}  // namespace romx
