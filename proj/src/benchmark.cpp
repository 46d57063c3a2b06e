#include "romx/benchmark.hpp"

#include "romx/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <random>

namespace romx {

SetupSpec SetupSpec::by_id(const std::string& id) {
  SetupSpec s;
  s.id = id;
  if (id == "i") return s;
  s.psnr_db = 26.0;
  if (id == "ii") return s;
  s.gamma = 1e-3;
  if (id == "iii") return s;
  s.T = 5;
  s.D = 10;
  if (id == "iv") return s;
  s.rho = 0.03;
  s.nu_max = 300.0;
  if (id == "v") return s;
  throw ConfigError("unknown setup '" + id + "' (expected i, ii, iii, iv or v)");
}

void SetupSpec::validate() const {
  if (D < 1) throw ConfigError("setup: D must be >= 1");
  if (T < 2) throw ConfigError("setup: T must be >= 2");
  if (N < 1) throw ConfigError("setup: N must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigError("setup: gamma must be >= 0");
  if (!(rho >= 0.0)) throw ConfigError("setup: rho must be >= 0");
  if (!(nu_min >= 0.0) || !(nu_max >= nu_min)) throw ConfigError("setup: need 0 <= nu_min <= nu_max");
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) throw ConfigError("setup: amplitude must be > 0");
  if (std::isnan(psnr_db)) throw ConfigError("setup: psnr_db is NaN");
}

std::vector<double> wavenumber_set(int count) {
  std::vector<double> out;
  for (int j = 1; j <= count; ++j) out.push_back(2.0 * std::numbers::pi * j);
  return out;
}

namespace {

constexpr Index kPerturbationPerField = 20;

// Bound checks allow this much slack relative to ||x||_F (squared for the
// squared-norm bounds).
constexpr double kSandwichSlack = 1e-8;

// theta1 layout positions of the linear amplitudes.
constexpr Index kPiB = 1, kPiTau = 2, kPiTauPrime = 3, kPiBCos = 4, kPiTauSin = 5, kPiBPrime = 6;

Vector mode_vector(const rb::Grid& grid, double a, Index slot, Index harmonics) {
  ModelParameters p;
  p.theta1 = Vector::Zero(7 + 2 * std::max<Index>(harmonics - 1, 0));
  p.theta1(0) = a;
  p.theta1(slot) = 1.0;
  return rb_init(p, grid).flatten();
}

// Horizontal modes for each wavenumber, then vertical harmonics q_first..q_last
// for b and tau.
Matrix mode_columns(const rb::Grid& grid, const std::vector<double>& wavenumbers, int q_first,
                    int q_last) {
  std::vector<Vector> cols;
  const Index harmonics = std::max(q_last, 1);
  for (double a : wavenumbers) {
    for (Index slot : {kPiB, kPiBCos, kPiTau, kPiTauSin}) {
      cols.push_back(mode_vector(grid, a, slot, harmonics));
    }
  }
  for (int q = q_first; q <= q_last; ++q) {
    if (q == 1) {
      cols.push_back(mode_vector(grid, 0.0, kPiBPrime, harmonics));
      cols.push_back(mode_vector(grid, 0.0, kPiTauPrime, harmonics));
    } else {
      const Index base = 7 + 2 * (q - 2);
      cols.push_back(mode_vector(grid, 0.0, base, harmonics));
      cols.push_back(mode_vector(grid, 0.0, base + 1, harmonics));
    }
  }
  Matrix m(grid.state_dim(), static_cast<Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Index>(j)) = cols[j];
  return m;
}

Matrix orthonormal_modes(const Matrix& m, Index expected, const char* what) {
  const Index rank = numerical_rank(m);
  if (rank != expected) {
    throw ConfigError(std::string(what) + " mode family has numerical rank " +
                      std::to_string(rank) + ", expected " + std::to_string(expected) +
                      " (grid too coarse for the wavenumber set?)");
  }
  Matrix q = m;
  if (orthonormalize_columns(q, 1e-8) != expected) {
    throw ConfigError(std::string(what) + " mode family lost rank during orthonormalization");
  }
  return q;
}

// Real Fourier modes of one field ordered by |k|^2, then k1, then k2.
std::vector<Matrix> fourier_fields(const rb::Grid& grid) {
  struct Wave {
    int k1, k2;
  };
  std::vector<Wave> waves;
  for (int k1 = 0; k1 <= grid.n1 / 2; ++k1) {
    for (int k2 = -grid.n2 / 2 + 1; k2 <= grid.n2 / 2; ++k2) {
      if (k1 == 0 && k2 < 0) continue;
      waves.push_back({k1, k2});
    }
  }
  std::stable_sort(waves.begin(), waves.end(), [](const Wave& l, const Wave& r) {
    const int nl = l.k1 * l.k1 + l.k2 * l.k2, nr = r.k1 * r.k1 + r.k2 * r.k2;
    if (nl != nr) return nl < nr;
    if (l.k1 != r.k1) return l.k1 < r.k1;
    return l.k2 < r.k2;
  });
  std::vector<Matrix> out;
  for (const Wave& w : waves) {
    for (int kind = 0; kind < 2; ++kind) {
      if (w.k1 == 0 && w.k2 == 0 && kind == 1) continue;
      Matrix f(grid.n1, grid.n2);
      for (int j = 0; j < grid.n2; ++j) {
        for (int i = 0; i < grid.n1; ++i) {
          const double phase =
              2.0 * std::numbers::pi * (w.k1 * i * grid.h1() + w.k2 * j * grid.h2());
          f(i, j) = kind == 0 ? std::cos(phase) : std::sin(phase);
        }
      }
      out.push_back(std::move(f));
    }
  }
  return out;
}

Matrix build_perturbation_basis(const rb::Grid& grid, const Matrix& surrogate) {
  const Index p = grid.points();
  const auto fields = fourier_fields(grid);
  Matrix out(grid.state_dim(), 2 * kPerturbationPerField);
  Index have = 0;
  for (int field = 0; field < 2; ++field) {
    Index taken = 0;
    for (const Matrix& f : fields) {
      if (taken == kPerturbationPerField) break;
      Vector v = Vector::Zero(grid.state_dim());
      v.segment(field * p, p) = f.reshaped();
      const double norm0 = v.norm();
      for (int pass = 0; pass < 2; ++pass) {
        v -= surrogate * (surrogate.transpose() * v);
        for (Index i = 0; i < have; ++i) v -= out.col(i).dot(v) * out.col(i);
      }
      if (v.norm() > 1e-3 * norm0) {
        out.col(have++) = v / v.norm();
        ++taken;
      }
    }
    if (taken < kPerturbationPerField) {
      throw ConfigError("grid too small for " + std::to_string(kPerturbationPerField) +
                        " perturbation modes per field");
    }
  }
  return out;
}

}  // namespace

Matrix initial_mode_matrix(const rb::Grid& grid, const std::vector<double>& wavenumbers,
                           int vertical_harmonics) {
  return mode_columns(grid, wavenumbers, 1, vertical_harmonics);
}

ParameterSpace build_parameter_space(const rb::Grid& grid, const SetupSpec& setup) {
  setup.validate();
  ParameterSpace s;
  s.grid = grid;
  s.wavenumbers_true = wavenumber_set(2);
  s.wavenumbers_surrogate = wavenumber_set(4);
  s.vertical_harmonics_true = 1;
  s.vertical_harmonics_surrogate = 2;
  s.amplitude = setup.amplitude;
  s.gamma = setup.gamma;
  s.rho = setup.rho;
  s.nu_min = setup.nu_min;
  s.nu_max = setup.nu_max;

  const Matrix m_true = initial_mode_matrix(grid, s.wavenumbers_true, s.vertical_harmonics_true);
  const std::vector<double> extra(s.wavenumbers_surrogate.begin() + 2,
                                  s.wavenumbers_surrogate.end());
  const Matrix m_extra = mode_columns(grid, extra, s.vertical_harmonics_true + 1,
                                      s.vertical_harmonics_surrogate);
  Matrix m_sur(m_true.rows(), m_true.cols() + m_extra.cols());
  m_sur << m_true, m_extra;

  s.mode_basis_true = orthonormal_modes(m_true, 10, "true");
  s.mode_basis_surrogate = orthonormal_modes(m_sur, 20, "surrogate");
  s.perturbation_basis = build_perturbation_basis(grid, s.mode_basis_surrogate);
  return s;
}

ModelParameters draw_theta(const ParameterSpace& space, ThetaSource which, Rng& rng) {
  const bool truth = which == ThetaSource::True;
  const auto& waves = truth ? space.wavenumbers_true : space.wavenumbers_surrogate;
  const int harmonics = truth ? space.vertical_harmonics_true : space.vertical_harmonics_surrogate;
  std::uniform_int_distribution<std::size_t> pick(0, waves.size() - 1);
  std::uniform_real_distribution<double> amp(-space.amplitude, space.amplitude);

  ModelParameters p;
  p.theta1.resize(7 + 2 * (harmonics - 1));
  p.theta1(0) = waves[pick(rng)];
  for (Index i = 1; i < p.theta1.size(); ++i) p.theta1(i) = amp(rng);

  const Index dim2 = space.perturbation_basis.cols();
  p.theta2 = Vector::Zero(dim2);
  if (space.gamma > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index i = 0; i < dim2; ++i) p.theta2(i) = normal(rng);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = space.gamma * std::pow(unit(rng), 1.0 / static_cast<double>(dim2));
    p.theta2 *= radius / p.theta2.norm();
  }

  p.theta3.rho = space.rho;
  if (space.nu_max > space.nu_min) {
    std::uniform_real_distribution<double> nu(space.nu_min, space.nu_max);
    p.theta3.nu = nu(rng);
  } else {
    p.theta3.nu = space.nu_min;
  }
  return p;
}

std::string_view to_string(RomFamily r) {
  return r == RomFamily::Pod ? "pod" : "dmd";
}

std::string_view to_string(RomVariant r) {
  switch (r) {
    case RomVariant::Rom1: return "ROM-1";
    case RomVariant::Rom1Star: return "ROM-1*";
    case RomVariant::Rom2: return "ROM-2";
    case RomVariant::Rom2Star: return "ROM-2*";
  }
  return "unknown";
}

RomFamily rom_family_from_string(std::string_view name) {
  if (name == "pod" || name == "rom-1" || name == "ROM-1" || name == "rom1") return RomFamily::Pod;
  if (name == "dmd" || name == "rom-2" || name == "ROM-2" || name == "rom2") return RomFamily::Dmd;
  throw ConfigError("unknown rom '" + std::string(name) + "' (expected pod or dmd)");
}

std::vector<int> default_k_grid() {
  return {2, 5, 10, 15, 20, 25, 30, 40, 50, 60};
}

rb::RBConfig rb_config_for(const BenchmarkOptions& options, const SetupSpec& setup) {
  rb::RBConfig c;
  c.grid = options.grid;
  c.substeps = options.substeps;
  c.dt = options.dt;
  c.integrator = options.integrator;
  c.rho_max = std::max(setup.rho, 1e-12);
  c.nu_max = std::max(setup.nu_max, 1.0);
  return c;
}

namespace {

ObservationOperator make_observer(const BenchmarkOptions& options) {
  return build_lowpass(options.grid, options.obs_factor1, options.obs_factor2, 0.0);
}

}  // namespace

GeneratedData generate_data(const SetupSpec& setup, const BenchmarkOptions& options) {
  GeneratedData g;
  g.space = build_parameter_space(options.grid, setup);
  const rb::RayleighBenardModel model(rb_config_for(options, setup), g.space.perturbation_basis);
  const ObservationOperator clean_op = make_observer(options);

  const auto D = static_cast<std::size_t>(setup.D);
  std::vector<std::optional<Trajectory>> xs(D);
  g.theta.resize(D);
  parallel_for(D, options.threads, [&](std::size_t i) {
    Rng rng = make_stream(options.seed, StreamTag::TrueParameters, i, 0);
    g.theta[i] = draw_theta(g.space, ThetaSource::True, rng);
    xs[i].emplace(simulate(model, g.theta[i], setup.T));
  });
  for (auto& x : xs) g.x.push_back(std::move(*x));

  if (std::isinf(setup.psnr_db) && setup.psnr_db > 0) {
    g.zeta = 0.0;
  } else {
    Matrix clean(clean_op.obs_dim(), static_cast<Index>(D) * setup.T);
    for (std::size_t i = 0; i < D; ++i) {
      clean.middleCols(static_cast<Index>(i) * setup.T, setup.T) = clean_op.apply(g.x[i].data());
    }
    g.zeta = calibrate_noise(clean, setup.psnr_db);
  }
  const ObservationOperator op = clean_op.with_zeta(g.zeta);
  for (std::size_t i = 0; i < D; ++i) {
    Rng rng = make_stream(options.seed, StreamTag::ObservationNoise, i, 0);
    g.y.push_back(observe(g.x[i], op, rng));
  }
  return g;
}

const ErrorRow* BenchmarkResult::find(RomVariant rom, Strategy strategy, int k) const {
  for (const auto& r : rows) {
    if (r.rom == rom && r.strategy == strategy && r.k == k) return &r;
  }
  return nullptr;
}

StrategyData sample_strategies(const SetupSpec& setup, const BenchmarkOptions& options,
                               const GeneratedData& data, const FullOrderModel& model,
                               const LinearObserver& op) {
  const auto has = [&](Strategy s) {
    return std::find(options.strategies.begin(), options.strategies.end(), s) !=
           options.strategies.end();
  };
  const bool need_enhanced = has(Strategy::Enhanced) || has(Strategy::Point);
  const SurrogateSpacePrior prior(data.space);
  const auto D = data.x.size();

  StrategyData out;
  if (need_enhanced) {
    SisOptions sis;
    sis.seed = options.seed;
    sis.threads = 1;
    sis.project_initial = options.project_initial;
    sis.projection_threshold = options.projection_threshold;
    sis.subspace_basis = &data.space.mode_basis_surrogate;
    std::vector<std::optional<ParticleEnsemble>> ens(D);
    parallel_for(D, options.threads, [&](std::size_t i) {
      ens[i].emplace(sis_posterior(data.y[i], prior, model, op, setup.N, sis,
                                   static_cast<Index>(i)));
    });
    for (auto& e : ens) out.enhanced.push_back(std::move(*e));
    if (has(Strategy::Point)) {
      for (const auto& e : out.enhanced) out.point.push_back(mmse_estimate(e));
    }
  }
  if (has(Strategy::Initial)) {
    std::vector<std::optional<ParticleEnsemble>> ens(D);
    parallel_for(D, options.threads, [&](std::size_t i) {
      ens[i].emplace(prior_ensemble(prior, model, setup.T, setup.N, options.seed, 1,
                                    static_cast<Index>(i)));
    });
    for (auto& e : ens) out.initial.push_back(std::move(*e));
  }
  return out;
}

WeightedSnapshots strategy_snapshots(Strategy strategy, const GeneratedData& data,
                                     const StrategyData& sampled) {
  switch (strategy) {
    case Strategy::Target: return assemble_snapshots(strategy, data.x, {});
    case Strategy::Point: return assemble_snapshots(strategy, sampled.point, {});
    case Strategy::Enhanced: return assemble_snapshots(strategy, {}, sampled.enhanced);
    case Strategy::Initial: return assemble_snapshots(strategy, {}, sampled.initial);
  }
  throw ConfigError("unknown strategy");
}

namespace {

// Per (trajectory, u) evaluation of one ROM family at one k.
struct PodEval {
  double rom = 0.0, star = 0.0;
};
struct DmdEval {
  double rom = 0.0, star = 0.0, residual = 0.0, bound = 0.0;
};

std::vector<int> usable_k(const std::vector<int>& grid, Index kmax) {
  std::vector<int> out;
  for (int k : grid) {
    if (k >= 1 && k <= kmax) out.push_back(k);
  }
  return out;
}

std::string context(const SetupSpec& s, Strategy st, int k) {
  return " [setup " + s.id + ", strategy " + std::string(to_string(st)) + ", k " +
         std::to_string(k) + "]";
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

BenchmarkResult run_setup(const SetupSpec& setup, const BenchmarkOptions& options) {
  setup.validate();
  if (options.strategies.empty()) throw ConfigError("no strategies selected");
  if (options.roms.empty()) throw ConfigError("no roms selected");
  if (options.k_grid.empty()) throw ConfigError("empty k grid");

  const GeneratedData data = generate_data(setup, options);
  const rb::RayleighBenardModel model(rb_config_for(options, setup), data.space.perturbation_basis);
  const ObservationOperator op = make_observer(options).with_zeta(data.zeta);
  const StrategyData sampled = sample_strategies(setup, options, data, model, op);

  BenchmarkResult result;
  result.setup = setup;
  result.zeta = data.zeta;
  for (const auto& x : data.x) result.mean_state_norm += x.data().norm();
  result.mean_state_norm /= static_cast<double>(data.x.size());

  std::vector<Strategy> strategies;
  for (Strategy s : {Strategy::Target, Strategy::Enhanced, Strategy::Initial, Strategy::Point}) {
    if (std::find(options.strategies.begin(), options.strategies.end(), s) !=
        options.strategies.end()) {
      strategies.push_back(s);
    }
  }
  const bool want_pod = std::find(options.roms.begin(), options.roms.end(), RomFamily::Pod) !=
                        options.roms.end();
  const bool want_dmd = std::find(options.roms.begin(), options.roms.end(), RomFamily::Dmd) !=
                        options.roms.end();
  const std::size_t D = data.x.size();

  std::vector<double> norms;
  for (const auto& x : data.x) norms.push_back(x.data().norm());
  std::vector<ErrorRow> rom1, rom1s, rom2, rom2s;
  SandwichStats& sw = result.sandwich;

  for (Strategy strategy : strategies) {
    const WeightedSnapshots snaps = strategy_snapshots(strategy, data, sampled);
    const bool star = options.star_all_strategies || strategy == Strategy::Target;

    if (want_pod) {
      const PodDecomposition dec(snaps.c);
      const auto ks = usable_k(options.k_grid, std::min(dec.n(), dec.columns()));
      std::vector<PodBasis> bases;
      for (int k : ks) bases.push_back(dec.truncate(k));
      std::vector<PodEval> evals(ks.size() * D);
      parallel_for(evals.size(), options.threads, [&](std::size_t job) {
        const std::size_t ki = job / D, i = job % D;
        const PodBasis& b = bases[ki];
        try {
          const Trajectory xr = pod_rom_simulate(b, model, data.theta[i], setup.T);
          evals[job].rom = frobenius_error(data.x[i], xr);
          evals[job].star = frobenius_error(data.x[i], pod_star_project(b, data.x[i]));
        } catch (const DivergenceError& e) {
          throw DivergenceError(e.what() + context(setup, strategy, ks[ki]), e.step());
        }
      });
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        ErrorRow r{RomVariant::Rom1, strategy, ks[ki], 0.0, {}};
        ErrorRow rs{RomVariant::Rom1Star, strategy, ks[ki], 0.0, {}};
        for (std::size_t i = 0; i < D; ++i) {
          const PodEval& e = evals[ki * D + i];
          r.errors.push_back(e.rom);
          rs.errors.push_back(e.star);
          ++sw.pod_checks;
          if (e.star > e.rom + kSandwichSlack * norms[i]) ++sw.pod_lower_violations;
          if (e.star > 0.0) sw.pod_max_ratio = std::max(sw.pod_max_ratio, (e.rom * e.rom) / (e.star * e.star));
        }
        r.mean_error = mean_of(r.errors);
        rs.mean_error = mean_of(rs.errors);
        rom1.push_back(std::move(r));
        if (star) rom1s.push_back(std::move(rs));
      }
    }

    if (want_dmd) {
      const DmdDecomposition dec(snaps.a, snaps.b);
      const auto ks = usable_k(options.k_grid, std::min(dec.n(), dec.columns()));
      std::vector<LowRankOperator> ops;
      for (int k : ks) ops.push_back(dec.truncate(k));
      std::vector<DmdEval> evals(ks.size() * D);
      parallel_for(evals.size(), options.threads, [&](std::size_t job) {
        const std::size_t ki = job / D, i = job % D;
        const LowRankOperator& u = ops[ki];
        const Trajectory xr = dmd_rom_simulate(u, model, data.theta[i], setup.T);
        evals[job].rom = frobenius_error(data.x[i], xr);
        evals[job].star = frobenius_error(data.x[i], dmd_star_predict(u, data.x[i]));
        evals[job].residual = one_step_residual(u, data.x[i]);
        evals[job].bound = bound_constant(u, setup.T);
      });
      for (std::size_t ki = 0; ki < ks.size(); ++ki) {
        ErrorRow r{RomVariant::Rom2, strategy, ks[ki], 0.0, {}};
        ErrorRow rs{RomVariant::Rom2Star, strategy, ks[ki], 0.0, {}};
        for (std::size_t i = 0; i < D; ++i) {
          const DmdEval& e = evals[ki * D + i];
          r.errors.push_back(e.rom);
          rs.errors.push_back(e.star);
          const double err2 = e.rom * e.rom;
          const double slack2 = kSandwichSlack * norms[i] * norms[i];
          ++sw.dmd_checks;
          if (e.residual > err2 + slack2) ++sw.dmd_lower_violations;
          if (err2 > e.bound * e.residual + slack2) ++sw.dmd_upper_violations;
          if (err2 > 0.0) sw.dmd_worst_lower = std::max(sw.dmd_worst_lower, e.residual / err2);
          if (e.residual > 0.0) {
            sw.dmd_worst_upper = std::max(sw.dmd_worst_upper, err2 / (e.bound * e.residual));
          }
        }
        r.mean_error = mean_of(r.errors);
        rs.mean_error = mean_of(rs.errors);
        rom2.push_back(std::move(r));
        if (star) rom2s.push_back(std::move(rs));
      }
    }
  }

  for (auto* group : {&rom1, &rom1s, &rom2, &rom2s}) {
    for (auto& r : *group) result.rows.push_back(std::move(r));
  }
  return result;
}

}  // namespace romx
