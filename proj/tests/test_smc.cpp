#include "doctest.h"
#include "helpers.hpp"

#include "romx/gaussian.hpp"
#include "romx/smc.hpp"

#include <cmath>
#include <limits>

using namespace romx;

namespace {

ParticleEnsemble ensemble_of(std::vector<Matrix> xs, Vector w) {
  ParticleEnsemble e;
  for (auto& x : xs) e.particles.emplace_back(std::move(x));
  e.weights = std::move(w);
  return e;
}

// Scalar toy: x ~ N(0, s2) under both target and surrogate, y = x + zeta w.
struct ScalarToy {
  double s2 = 2.0;
  double zeta = 0.8;
  Gaussian prior() const { return {Vector::Zero(1), Matrix::Constant(1, 1, s2)}; }
  double posterior_mean(double y) const { return y * s2 / (s2 + zeta * zeta); }
};

}  // namespace

TEST_CASE("normalize_log_weights") {
  Vector lw(3);
  lw << -1000.0, -1001.0, -1002.0;
  const Vector w = normalize_log_weights(lw);
  CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w(0) / w(1) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  Vector dead = Vector::Constant(3, -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(normalize_log_weights(dead), DegenerateError);
}

TEST_CASE("sis_posterior: flat likelihood, single particle, normalization") {
  const ScalarToy toy;
  const StaticGaussianModel model(1);
  const GaussianPrior prior(toy.prior());
  const DenseObserver flat(Matrix::Zero(1, 1), 1.0);
  const ObservationSequence y(Matrix::Constant(1, 1, 0.3));
  SisOptions o;
  o.seed = 5;
  o.project_initial = false;
  const ParticleEnsemble e = sis_posterior(y, prior, model, flat, 50, o);
  CHECK((e.weights.array() - 1.0 / 50).abs().maxCoeff() <= 1e-15);

  const DenseObserver id(Matrix::Identity(1, 1), 0.5);
  const ParticleEnsemble one = sis_posterior(y, prior, model, id, 1, o);
  CHECK(one.weights.size() == 1);
  CHECK(one.weights(0) == 1.0);

  const ParticleEnsemble many = sis_posterior(y, prior, model, id, 400, o);
  CHECK(std::abs(many.weights.sum() - 1.0) <= 1e-12);
  CHECK_THROWS_AS(sis_posterior(y, prior, model, id, 0, o), ConfigError);
}

TEST_CASE("sis_posterior matches the conjugate posterior mean") {
  const ScalarToy toy;
  const StaticGaussianModel model(1);
  const GaussianPrior prior(toy.prior());
  const DenseObserver h(Matrix::Identity(1, 1), toy.zeta);
  const double yv = 1.1;
  const ObservationSequence y(Matrix::Constant(1, 1, yv));
  SisOptions o;
  o.seed = 77;
  o.project_initial = false;
  const ParticleEnsemble e = sis_posterior(y, prior, model, h, 100000, o);
  const double mu = mmse_estimate(e).data()(0, 0);
  double se2 = 0.0;
  for (std::size_t j = 0; j < e.size(); ++j) {
    const double d = e.particles[j].data()(0, 0) - mu;
    se2 += e.weights(static_cast<Index>(j)) * e.weights(static_cast<Index>(j)) * d * d;
  }
  CHECK(std::abs(mu - toy.posterior_mean(yv)) <= 3.0 * std::sqrt(se2));
}

TEST_CASE("sis_posterior is independent of the thread count") {
  const StaticGaussianModel model(3);
  Gaussian g{Vector::Zero(3), Matrix::Identity(3, 3)};
  const GaussianPrior prior(g);
  const DenseObserver h(Matrix::Identity(2, 3), 0.4);
  const ObservationSequence y(Matrix::Constant(2, 2, 0.2));
  SisOptions o;
  o.seed = 9;
  o.project_initial = false;
  o.threads = 1;
  const ParticleEnsemble a = sis_posterior(y, prior, model, h, 64, o, 3);
  o.threads = 4;
  const ParticleEnsemble b = sis_posterior(y, prior, model, h, 64, o, 3);
  CHECK(a.weights == b.weights);
  for (std::size_t j = 0; j < a.size(); ++j) CHECK(a.particles[j].data() == b.particles[j].data());
}

TEST_CASE("project_initial") {
  Matrix hm(2, 4);
  hm << 1, 0, 0, 0, 0, 1, 0, 0;
  const DenseObserver h(hm, 0.0);
  Matrix B = Matrix::Zero(4, 2);
  B(0, 0) = 1.0;
  B(2, 1) = 1.0;
  Vector x1(4);
  x1 << 0.5, 0.0, -0.3, 0.0;
  const Vector y1 = h.apply(x1);
  const Vector w0 = Vector::Zero(2);
  CHECK((project_initial_with_noise(x1, y1, w0, h, &B) - x1).norm() <= 1e-15);

  // B = I: the pre-projection vector comes back, and it reproduces y_1
  Rng rng = make_stream(31, StreamTag::Generic);
  Matrix hr = test::random_matrix(3, 6, rng);
  const DenseObserver r(hr, 0.0);
  const Vector x = test::random_vector(6, rng);
  const Vector y = test::random_vector(3, rng);
  const Vector pre = project_initial_with_noise(x, y, Vector::Zero(3), r, nullptr);
  const Matrix pinv = hr.completeOrthogonalDecomposition().pseudoInverse();
  const Vector oracle = x - pinv * (hr * x) + pinv * y;
  CHECK((pre - oracle).norm() <= 1e-12);
  CHECK((hr * pre - y).norm() <= 1e-12);
  CHECK((hr * pinv - Matrix::Identity(3, 3)).norm() <= 1e-12);

  // activation threshold
  SisOptions o;
  const ObservationSequence seq(Matrix::Constant(3, 1, 1.0));
  CHECK(projection_active(seq, DenseObserver(hr, 0.05), o));
  CHECK_FALSE(projection_active(seq, DenseObserver(hr, 0.5), o));
  o.project_initial = false;
  CHECK_FALSE(projection_active(seq, DenseObserver(hr, 0.0), o));
}

TEST_CASE("mmse_estimate") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 2, 3, 4;
  b << 5, 6, 7, 8;
  const ParticleEnsemble u = ensemble_of({a, b}, Vector::Constant(2, 0.5));
  CHECK((mmse_estimate(u).data() - (a + b) / 2).norm() <= 1e-15);
  const ParticleEnsemble d = ensemble_of({a, b}, Vector::Unit(2, 1));
  CHECK(mmse_estimate(d).data() == b);
}

TEST_CASE("snapshot assembly") {
  Matrix x(2, 2);
  x << 1, 2, 3, 4;
  const ParticleEnsemble single = ensemble_of({x}, Vector::Ones(1));
  const WeightedSnapshots s = assemble_snapshots(Strategy::Enhanced, {}, std::span(&single, 1));
  CHECK(s.a == x.col(0));
  CHECK(s.b == x.col(1));
  CHECK(s.c == x);

  Matrix p(2, 2), q(2, 2);
  p << 1, 0, 0, 1;
  q << 2, 1, -1, 1;
  Vector w(2);
  w << 0.25, 0.75;
  const ParticleEnsemble pair = ensemble_of({p, q}, w);
  const WeightedSnapshots t = assemble_snapshots(Strategy::Enhanced, {}, std::span(&pair, 1));
  REQUIRE(t.c.cols() == 4);
  CHECK((t.c.leftCols(2) - 0.5 * p).norm() <= 1e-15);
  CHECK((t.c.rightCols(2) - std::sqrt(0.75) * q).norm() <= 1e-15);
  const Matrix ctc = t.c.transpose() * t.c;
  // hand computation: <0.5 p_1, sqrt(.75) q_1> = 0.5 sqrt(.75) (1*2 + 0*-1)
  CHECK(ctc(0, 2) == doctest::Approx(0.5 * std::sqrt(0.75) * 2.0));
  CHECK(ctc(2, 2) == doctest::Approx(0.75 * 5.0));
  CHECK(ctc(1, 3) == doctest::Approx(0.5 * std::sqrt(0.75) * 1.0));

  const ParticleEnsemble uni = ensemble_of({p, q}, Vector::Constant(2, 0.5));
  const WeightedSnapshots e = assemble_snapshots(Strategy::Enhanced, {}, std::span(&uni, 1));
  const WeightedSnapshots i = assemble_snapshots(Strategy::Initial, {}, std::span(&uni, 1));
  CHECK(e.a == i.a);
  CHECK(e.b == i.b);
  CHECK(e.c == i.c);

  const Trajectory tr(x);
  CHECK_THROWS_AS(assemble_snapshots(Strategy::Target, std::span(&tr, 1), std::span(&uni, 1)),
                  ConfigError);
  CHECK_THROWS_AS(assemble_snapshots(Strategy::Enhanced, std::span(&tr, 1), {}), ConfigError);
}

TEST_CASE("weighted second moments are positive semidefinite") {
  Rng rng = make_stream(32, StreamTag::Generic);
  std::vector<Matrix> xs;
  for (int j = 0; j < 7; ++j) xs.push_back(test::random_matrix(5, 3, rng));
  Vector w = test::random_vector(7, rng).cwiseAbs();
  w /= w.sum();
  const ParticleEnsemble e = ensemble_of(xs, w);
  const WeightedSnapshots s = snapshots_from_ensembles(std::span(&e, 1));
  const Matrix g = s.c.transpose() * s.c;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  CHECK(es.eigenvalues().minCoeff() >= -1e-10 * g.trace());
  CHECK((g - g.transpose()).norm() == 0.0);
}

TEST_CASE("cross covariance decomposition") {
  Rng rng = make_stream(33, StreamTag::Generic);
  const Matrix v = test::random_matrix(3, 4, rng);
  const ParticleEnsemble one = ensemble_of({v}, Vector::Ones(1));
  CHECK(cross_covariance_decomposition(one, 1).covariance_part.norm() == 0.0);

  const ParticleEnsemble anti = ensemble_of({v, -v}, Vector::Constant(2, 0.5));
  const CrossCovariance c0 = cross_covariance_decomposition(anti, 0);
  CHECK(c0.mean_part.norm() <= 1e-15);
  CHECK((c0.covariance_part - v * v.transpose()).norm() <= 1e-12);

  std::vector<Matrix> xs;
  for (int j = 0; j < 6; ++j) xs.push_back(test::random_matrix(3, 4, rng));
  Vector w = test::random_vector(6, rng).cwiseAbs();
  w /= w.sum();
  const ParticleEnsemble e = ensemble_of(xs, w);
  for (int lag : {0, 1}) {
    Matrix direct = Matrix::Zero(3, 3);
    for (int j = 0; j < 6; ++j)
      for (Index t = lag; t < 4; ++t) direct += w(j) * xs[j].col(t - lag) * xs[j].col(t).transpose();
    const CrossCovariance cc = cross_covariance_decomposition(e, lag);
    CHECK((cc.covariance_part + cc.mean_part - direct).norm() <= 1e-10);
  }
  CHECK_THROWS_AS(cross_covariance_decomposition(e, 2), ConfigError);
}

TEST_CASE("strategy names round trip") {
  for (Strategy s : {Strategy::Target, Strategy::Enhanced, Strategy::Initial, Strategy::Point})
    CHECK(strategy_from_string(to_string(s)) == s);
  CHECK_THROWS_AS(strategy_from_string("posterior"), ConfigError);
}
