#include "romx/smc.hpp"

#include <cmath>
#include <limits>
#include <optional>

namespace romx {

Vector normalize_log_weights(const Vector& log_weights) {
  if (log_weights.size() == 0) throw ConfigError("no weights to normalize");
  const double max_lw = log_weights.maxCoeff();
  if (!std::isfinite(max_lw)) {
    throw DegenerateError("all particle weights underflow (max log-weight " +
                          std::to_string(max_lw) + ")");
  }
  Vector w = (log_weights.array() - max_lw).exp().matrix();
  const double total = w.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw DegenerateError("all particle weights underflow (max log-weight " +
                          std::to_string(max_lw) + ")");
  }
  return w / total;
}

Vector project_initial_with_noise(const Vector& x1, const Vector& y1, const Vector& w,
                                  const LinearObserver& op, const Matrix* subspace_basis) {
  const Vector observed = op.pseudo_inverse(op.apply(x1));
  Vector v = x1 - observed + op.pseudo_inverse(y1 + w);
  if (subspace_basis != nullptr) {
    const Matrix& B = *subspace_basis;
    if (B.rows() != v.size()) throw DimensionError("projection basis has wrong row count");
    v = B * (B.transpose() * v);
  }
  return v;
}

Vector project_initial(const Vector& x1, const Vector& y1, const LinearObserver& op,
                       const Matrix* subspace_basis, Rng& rng) {
  Vector w = Vector::Zero(op.obs_dim());
  if (op.zeta() > 0.0) {
    std::normal_distribution<double> normal(0.0, op.zeta());
    for (Index i = 0; i < w.size(); ++i) w(i) = normal(rng);
  }
  return project_initial_with_noise(x1, y1, w, op, subspace_basis);
}

bool projection_active(const ObservationSequence& y, const LinearObserver& op,
                       const SisOptions& options) {
  if (!options.project_initial) return false;
  const double peak = y.data().size() > 0 ? y.data().cwiseAbs().maxCoeff() : 0.0;
  return op.zeta() <= options.projection_threshold * peak;
}

ParticleEnsemble sis_posterior(const ObservationSequence& y, const SurrogatePrior& prior,
                               const FullOrderModel& model, const LinearObserver& op, int N,
                               const SisOptions& options, Index obs_index) {
  if (N < 1) throw ConfigError("sis_posterior: N must be >= 1");
  if (y.m() != op.obs_dim()) throw DimensionError("sis_posterior: observation size mismatch");
  const int T = static_cast<int>(y.T());
  const bool project = projection_active(y, op, options);
  const bool degenerate = !(op.zeta() > 0.0);
  const Vector y1 = y.at(1);

  std::vector<std::optional<Trajectory>> slots(static_cast<std::size_t>(N));
  Vector log_w = Vector::Zero(N);
  parallel_for(slots.size(), options.threads, [&](std::size_t j) {
    const auto uj = static_cast<std::uint64_t>(j);
    const auto ui = static_cast<std::uint64_t>(obs_index);
    Rng draw_rng = make_stream(options.seed, StreamTag::SurrogateDraw, ui, uj);
    const ModelParameters theta = prior.draw(draw_rng);
    Vector x1 = model.initial_state(theta);
    if (project) {
      Rng noise_rng = make_stream(options.seed, StreamTag::ProjectionNoise, ui, uj);
      x1 = project_initial(x1, y1, op, options.subspace_basis, noise_rng);
    }
    Trajectory xi = simulate_from(model, x1, theta, T);
    if (!degenerate) {
      double lw = 0.0;
      for (int t = 1; t <= T; ++t) {
        lw += log_likelihood_filtered(y.at(t), op.apply(Vector(xi.state(t))), op.zeta());
      }
      log_w(static_cast<Index>(j)) = lw;
    }
    slots[j].emplace(std::move(xi));
  });

  ParticleEnsemble out;
  out.obs_index = obs_index;
  out.particles.reserve(slots.size());
  for (auto& s : slots) out.particles.push_back(std::move(*s));
  out.log_weights = log_w;
  out.weights = normalize_log_weights(log_w);
  return out;
}

ParticleEnsemble prior_ensemble(const SurrogatePrior& prior, const FullOrderModel& model, int T,
                                int N, std::uint64_t seed, unsigned threads, Index obs_index) {
  if (N < 1) throw ConfigError("prior_ensemble: N must be >= 1");
  std::vector<std::optional<Trajectory>> slots(static_cast<std::size_t>(N));
  parallel_for(slots.size(), threads, [&](std::size_t j) {
    Rng rng = make_stream(seed, StreamTag::SurrogateDraw, static_cast<std::uint64_t>(obs_index),
                          static_cast<std::uint64_t>(j));
    slots[j].emplace(simulate(model, prior.draw(rng), T));
  });
  ParticleEnsemble out;
  out.obs_index = obs_index;
  for (auto& s : slots) out.particles.push_back(std::move(*s));
  out.weights = Vector::Constant(N, 1.0 / N);
  return out;
}

Trajectory mmse_estimate(const ParticleEnsemble& e) {
  if (e.particles.empty()) throw ConfigError("mmse_estimate: empty ensemble");
  if (e.weights.size() != static_cast<Index>(e.particles.size())) {
    throw DimensionError("mmse_estimate: weight count mismatch");
  }
  Matrix mean = Matrix::Zero(e.n(), e.T());
  for (std::size_t j = 0; j < e.particles.size(); ++j) {
    mean += e.weights(static_cast<Index>(j)) * e.particles[j].data();
  }
  return Trajectory(std::move(mean));
}

CrossCovariance cross_covariance_decomposition(const ParticleEnsemble& e, int lag) {
  if (lag != 0 && lag != 1) throw ConfigError("cross_covariance_decomposition: lag must be 0 or 1");
  const Matrix mean = mmse_estimate(e).data();
  const Index n = e.n(), T = e.T();
  CrossCovariance out{Matrix::Zero(n, n), Matrix::Zero(n, n)};
  for (Index t = lag; t < T; ++t) {
    out.mean_part += mean.col(t - lag) * mean.col(t).transpose();
  }
  for (std::size_t j = 0; j < e.particles.size(); ++j) {
    const double w = e.weights(static_cast<Index>(j));
    const Matrix dev = e.particles[j].data() - mean;
    for (Index t = lag; t < T; ++t) {
      out.covariance_part += w * dev.col(t - lag) * dev.col(t).transpose();
    }
  }
  return out;
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Target: return "target";
    case Strategy::Enhanced: return "enhanced";
    case Strategy::Initial: return "initial";
    case Strategy::Point: return "point";
  }
  return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
  if (name == "target") return Strategy::Target;
  if (name == "enhanced") return Strategy::Enhanced;
  if (name == "initial") return Strategy::Initial;
  if (name == "point") return Strategy::Point;
  throw ConfigError("unknown strategy '" + std::string(name) + "'");
}

namespace {

struct Shape {
  Index n = 0;
  Index T = 0;
};

void append_block(WeightedSnapshots& s, Index& ca, Index& cc, const Matrix& x, double scale) {
  const Index T = x.cols();
  if (T > 1) {
    s.a.middleCols(ca, T - 1) = scale * x.leftCols(T - 1);
    s.b.middleCols(ca, T - 1) = scale * x.rightCols(T - 1);
    ca += T - 1;
  }
  s.c.middleCols(cc, T) = scale * x;
  cc += T;
}

WeightedSnapshots allocate(Shape shape, Index count) {
  return {Matrix(shape.n, (shape.T - 1) * count), Matrix(shape.n, (shape.T - 1) * count),
          Matrix(shape.n, shape.T * count)};
}

}  // namespace

WeightedSnapshots snapshots_from_trajectories(std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) throw ConfigError("assemble_snapshots: no trajectories");
  const Shape shape{trajectories.front().n(), trajectories.front().T()};
  WeightedSnapshots s = allocate(shape, static_cast<Index>(trajectories.size()));
  Index ca = 0, cc = 0;
  for (const auto& x : trajectories) {
    if (x.n() != shape.n || x.T() != shape.T) {
      throw DimensionError("assemble_snapshots: trajectories differ in shape");
    }
    append_block(s, ca, cc, x.data(), 1.0);
  }
  return s;
}

WeightedSnapshots snapshots_from_ensembles(std::span<const ParticleEnsemble> ensembles) {
  if (ensembles.empty()) throw ConfigError("assemble_snapshots: no ensembles");
  Index count = 0;
  const Shape shape{ensembles.front().n(), ensembles.front().T()};
  for (const auto& e : ensembles) {
    if (e.particles.empty()) throw ConfigError("assemble_snapshots: empty ensemble");
    count += static_cast<Index>(e.particles.size());
  }
  WeightedSnapshots s = allocate(shape, count);
  Index ca = 0, cc = 0;
  for (const auto& e : ensembles) {
    if (e.weights.size() != static_cast<Index>(e.particles.size())) {
      throw DimensionError("assemble_snapshots: weight count mismatch");
    }
    for (std::size_t j = 0; j < e.particles.size(); ++j) {
      const auto& x = e.particles[j];
      if (x.n() != shape.n || x.T() != shape.T) {
        throw DimensionError("assemble_snapshots: particles differ in shape");
      }
      const double w = e.weights(static_cast<Index>(j));
      if (!(w >= 0.0)) throw DimensionError("assemble_snapshots: negative weight");
      append_block(s, ca, cc, x.data(), std::sqrt(w));
    }
  }
  return s;
}

WeightedSnapshots assemble_snapshots(Strategy strategy, std::span<const Trajectory> trajectories,
                                     std::span<const ParticleEnsemble> ensembles) {
  switch (strategy) {
    case Strategy::Target:
    case Strategy::Point:
      if (!ensembles.empty()) {
        throw ConfigError("target/point snapshots are built from trajectories only");
      }
      return snapshots_from_trajectories(trajectories);
    case Strategy::Enhanced:
    case Strategy::Initial:
      if (!trajectories.empty()) {
        throw ConfigError("enhanced/initial snapshots are built from ensembles only");
      }
      return snapshots_from_ensembles(ensembles);
  }
  throw ConfigError("unknown strategy");
}

}  // namespace romx
