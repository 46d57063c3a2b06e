#include "romx/gaussian.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace romx {

void validate_gaussian(const Gaussian& g) {
  if (g.cov.rows() != g.dim() || g.cov.cols() != g.dim() || g.dim() == 0) {
    throw ConfigError("gaussian: covariance shape does not match mean");
  }
  if ((g.cov - g.cov.transpose()).norm() > 1e-12 * (1.0 + g.cov.norm())) {
    throw ConfigError("gaussian: covariance is not symmetric");
  }
  Eigen::LLT<Matrix> llt(g.cov);
  if (llt.info() != Eigen::Success) throw ConfigError("gaussian: covariance is not positive definite");
}

double gaussian_kl(const Gaussian& p0, const Gaussian& p1) {
  validate_gaussian(p0);
  validate_gaussian(p1);
  if (p0.dim() != p1.dim()) throw DimensionError("gaussian_kl: dimension mismatch");
  const Eigen::LDLT<Matrix> l1(p1.cov);
  const Eigen::LDLT<Matrix> l0(p0.cov);
  const Vector dm = p1.mean - p0.mean;
  const double trace = l1.solve(p0.cov).trace();
  const double quad = dm.dot(l1.solve(dm));
  const double logdet1 = l1.vectorD().array().log().sum();
  const double logdet0 = l0.vectorD().array().log().sum();
  return 0.5 * (trace + quad - static_cast<double>(p0.dim()) + logdet1 - logdet0);
}

namespace {

Matrix noise_cov(Index m, double zeta) {
  return Matrix::Identity(m, m) * (zeta * zeta);
}

Matrix symmetrize(const Matrix& m) {
  return 0.5 * (m + m.transpose());
}

Matrix kalman_gain(const Gaussian& prior, const Matrix& h, double zeta) {
  const Matrix s = h * prior.cov * h.transpose() + noise_cov(h.rows(), zeta);
  return s.ldlt().solve(h * prior.cov).transpose();
}

}  // namespace

Gaussian gaussian_posterior(const Gaussian& prior, const Matrix& h, double zeta, const Vector& y) {
  if (h.cols() != prior.dim() || h.rows() != y.size()) {
    throw DimensionError("gaussian_posterior: dimension mismatch");
  }
  const Matrix k = kalman_gain(prior, h, zeta);
  return {prior.mean + k * (y - h * prior.mean), symmetrize(prior.cov - k * h * prior.cov)};
}

Gaussian gaussian_evidence(const Gaussian& prior, const Matrix& h, double zeta) {
  if (h.cols() != prior.dim()) throw DimensionError("gaussian_evidence: dimension mismatch");
  return {h * prior.mean, symmetrize(h * prior.cov * h.transpose() + noise_cov(h.rows(), zeta))};
}

Gaussian enhanced_surrogate(const LinearGaussianInstance& inst) {
  const Gaussian& s = inst.surrogate;
  const Matrix k = kalman_gain(s, inst.h, inst.zeta);
  const Gaussian py = gaussian_evidence(inst.target, inst.h, inst.zeta);
  // E_y[posterior mean] and Var_y[posterior mean] + posterior covariance.
  return {s.mean + k * (py.mean - inst.h * s.mean),
          symmetrize(s.cov - k * inst.h * s.cov + k * py.cov * k.transpose())};
}

Prop1Result prop1_evaluate(const LinearGaussianInstance& inst) {
  if (!(inst.zeta > 0.0)) throw ConfigError("prop1: zeta must be > 0");
  Prop1Result r;
  r.kl_target_enhanced = gaussian_kl(inst.target, enhanced_surrogate(inst));
  r.kl_target_surrogate = gaussian_kl(inst.target, inst.surrogate);
  r.kl_obs = gaussian_kl(gaussian_evidence(inst.target, inst.h, inst.zeta),
                         gaussian_evidence(inst.surrogate, inst.h, inst.zeta));
  return r;
}

namespace {

Matrix random_matrix(Index r, Index c, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(r, c);
  for (Index j = 0; j < c; ++j)
    for (Index i = 0; i < r; ++i) m(i, j) = normal(rng);
  return m;
}

Gaussian random_gaussian(Index n, Rng& rng) {
  const Matrix a = random_matrix(n, n, rng);
  Gaussian g;
  g.mean = random_matrix(n, 1, rng).col(0);
  g.cov = symmetrize(a * a.transpose() / static_cast<double>(n) + 0.2 * Matrix::Identity(n, n));
  return g;
}

}  // namespace

LinearGaussianInstance random_instance(Index n, Index m, Rng& rng) {
  if (n < 1 || m < 1) throw ConfigError("random_instance: dimensions must be >= 1");
  LinearGaussianInstance inst;
  inst.target = random_gaussian(n, rng);
  inst.surrogate = random_gaussian(n, rng);
  inst.h = random_matrix(m, n, rng);
  std::uniform_real_distribution<double> u(0.3, 1.5);
  inst.zeta = u(rng);
  return inst;
}

Prop1Report prop1_gaussian_check(const std::vector<std::pair<int, int>>& dims,
                                 const std::vector<std::uint64_t>& seeds, double tol,
                                 double strict_tol) {
  if (dims.empty()) throw ConfigError("prop1_gaussian_check: no dimensions given");
  Prop1Report rep;
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto [n, m] = dims[i % dims.size()];
    if (n > 8 || m > 4) throw ConfigError("prop1_gaussian_check: state <= 8, obs <= 4");
    Rng rng = make_stream(seeds[i], StreamTag::Generic, 0, 0);
    const Prop1Result r = prop1_evaluate(random_instance(n, m, rng));
    if (r.slack() < -tol) ++rep.violations;
    if (r.slack() > strict_tol) ++rep.strict;
    rep.min_slack = std::min(rep.min_slack, r.slack());
    rep.results.push_back(r);
  }
  return rep;
}

Vector StaticGaussianModel::initial_state(const ModelParameters& theta) const {
  if (theta.theta1.size() != n_) throw DimensionError("static model: theta1 size mismatch");
  return theta.theta1;
}

Vector StaticGaussianModel::step(const Vector& x, const ModelParameters&, int) const {
  return x;
}

GaussianPrior::GaussianPrior(Gaussian g) : g_(std::move(g)) {
  validate_gaussian(g_);
  chol_ = g_.cov.llt().matrixL();
}

ModelParameters GaussianPrior::draw(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(g_.dim());
  for (Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  ModelParameters p;
  p.theta1 = g_.mean + chol_ * z;
  return p;
}

Vector enhanced_mean_estimate(const LinearGaussianInstance& inst, int D, int N,
                              std::uint64_t seed, unsigned threads) {
  if (D < 1 || N < 1) throw ConfigError("enhanced_mean_estimate: D and N must be >= 1");
  const Index n = inst.target.dim();
  const StaticGaussianModel model(n);
  const GaussianPrior target(inst.target), surrogate(inst.surrogate);
  const DenseObserver op(inst.h, inst.zeta);
  SisOptions opts;
  opts.seed = seed;
  opts.threads = threads;
  opts.project_initial = false;

  Vector sum = Vector::Zero(n);
  for (int i = 0; i < D; ++i) {
    Rng rng_true = make_stream(seed, StreamTag::TrueParameters, static_cast<std::uint64_t>(i), 0);
    const Trajectory x = simulate(model, target.draw(rng_true), 1);
    Rng rng_obs = make_stream(seed, StreamTag::ObservationNoise, static_cast<std::uint64_t>(i), 0);
    const ObservationSequence y = observe(x, op, rng_obs);
    const ParticleEnsemble e = sis_posterior(y, surrogate, model, op, N, opts, i);
    sum += mmse_estimate(e).state(1);
  }
  return sum / static_cast<double>(D);
}

}  // namespace romx
