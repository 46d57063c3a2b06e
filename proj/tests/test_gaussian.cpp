#include "doctest.h"
#include "helpers.hpp"
#include "quadrature.hpp"

#include "romx/gaussian.hpp"

#include <cmath>

using namespace romx;

using test::quadrature_prop1;

namespace {

LinearGaussianInstance scalar(double m, double v, double ms, double vs, double h, double zeta) {
  return test::scalar_instance(m, v, ms, vs, h, zeta);
}

}  // namespace

TEST_CASE("Gaussian KL closed form") {
  const Gaussian a{Vector::Constant(1, 1.0), Matrix::Constant(1, 1, 1.0)};
  const Gaussian b{Vector::Constant(1, 0.0), Matrix::Constant(1, 1, 4.0)};
  // 0.5 (s0/s1 + (m1-m0)^2/s1 - 1 + ln(s1/s0))
  CHECK(gaussian_kl(a, b) == doctest::Approx(0.5 * (0.25 + 0.25 - 1 + std::log(4.0))).epsilon(1e-14));
  CHECK(gaussian_kl(a, a) == doctest::Approx(0.0));
  const Gaussian bad{Vector::Zero(2), Matrix::Zero(2, 2)};
  CHECK_THROWS_AS(validate_gaussian(bad), ConfigError);
}

TEST_CASE("scalar instance: inequality is strict and closed forms match quadrature") {
  const auto inst = scalar(1.0, 1.0, 0.0, 4.0, 1.0, 1.0);
  const Prop1Result r = prop1_evaluate(inst);
  CHECK(r.slack() > 1e-6);
  const Prop1Result q = quadrature_prop1(inst);
  CHECK(std::abs(r.kl_target_enhanced - q.kl_target_enhanced) <= 1e-6);
  CHECK(std::abs(r.kl_target_surrogate - q.kl_target_surrogate) <= 1e-6);
  CHECK(std::abs(r.kl_obs - q.kl_obs) <= 1e-6);
}

TEST_CASE("two more scalar quadrature cross-checks") {
  for (const auto& inst : {scalar(-0.5, 0.5, 0.7, 1.5, 2.0, 0.6), scalar(0.2, 2.0, -1.0, 0.8, 0.5, 1.3)}) {
    const Prop1Result r = prop1_evaluate(inst), q = quadrature_prop1(inst);
    CHECK(std::abs(r.kl_target_enhanced - q.kl_target_enhanced) <= 1e-6);
    CHECK(std::abs(r.kl_target_surrogate - q.kl_target_surrogate) <= 1e-6);
    CHECK(std::abs(r.kl_obs - q.kl_obs) <= 1e-6);
  }
}

TEST_CASE("matched surrogate gives equality") {
  Rng rng = make_stream(61, StreamTag::Generic);
  LinearGaussianInstance inst = random_instance(4, 2, rng);
  inst.surrogate = inst.target;
  const Prop1Result r = prop1_evaluate(inst);
  CHECK(std::abs(r.kl_obs) <= 1e-9);
  CHECK(std::abs(r.kl_target_enhanced - r.kl_target_surrogate) <= 1e-9);
}

TEST_CASE("uninformative observations leave the surrogate unchanged") {
  Rng rng = make_stream(62, StreamTag::Generic);
  LinearGaussianInstance inst = random_instance(3, 2, rng);
  inst.zeta = 1e6;
  const Prop1Result r = prop1_evaluate(inst);
  CHECK(r.kl_obs <= 1e-6);
  CHECK(gaussian_kl(enhanced_surrogate(inst), inst.surrogate) <= 1e-6);
}

TEST_CASE("enhanced surrogate equals the Monte Carlo mixture of posteriors") {
  Rng rng = make_stream(63, StreamTag::Generic);
  const LinearGaussianInstance inst = random_instance(3, 2, rng);
  const Gaussian py = gaussian_evidence(inst.target, inst.h, inst.zeta);
  const Matrix ly = py.cov.llt().matrixL();
  Vector mean_sum = Vector::Zero(3);
  Matrix second = Matrix::Zero(3, 3);
  const int M = 200000;
  for (int i = 0; i < M; ++i) {
    const Vector y = py.mean + ly * test::random_vector(2, rng);
    const Gaussian post = gaussian_posterior(inst.surrogate, inst.h, inst.zeta, y);
    mean_sum += post.mean;
    second += post.cov + post.mean * post.mean.transpose();
  }
  const Vector mc_mean = mean_sum / M;
  const Matrix mc_cov = second / M - mc_mean * mc_mean.transpose();
  const Gaussian e = enhanced_surrogate(inst);
  CHECK((mc_mean - e.mean).norm() <= 0.02 * (1.0 + e.mean.norm()));
  CHECK((mc_cov - e.cov).norm() <= 0.03 * e.cov.norm());
}

TEST_CASE("prop1_gaussian_check over random instances") {
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 50; ++s) seeds.push_back(1000 + s);
  const Prop1Report rep = prop1_gaussian_check({{1, 1}, {3, 2}, {8, 4}}, seeds);
  CHECK(rep.results.size() == 50);
  CHECK(rep.violations == 0);
  CHECK(rep.strict >= 45);
  CHECK_THROWS_AS(prop1_gaussian_check({{9, 2}}, seeds), ConfigError);
}

TEST_CASE("enhanced mean estimate is unbiased on a scalar toy") {
  const auto inst = scalar(1.0, 1.0, 0.0, 4.0, 1.0, 1.0);
  const double truth = enhanced_surrogate(inst).mean(0);
  std::vector<double> est;
  for (std::uint64_t r = 0; r < 60; ++r) est.push_back(enhanced_mean_estimate(inst, 10, 200, 500 + r)(0));
  double mean = 0.0;
  for (double v : est) mean += v;
  mean /= est.size();
  double var = 0.0;
  for (double v : est) var += (v - mean) * (v - mean);
  var /= est.size() - 1;
  CHECK(std::abs(mean - truth) <= 3.0 * std::sqrt(var / est.size()));
  CHECK(enhanced_mean_estimate(inst, 5, 50, 3, 1) == enhanced_mean_estimate(inst, 5, 50, 3, 4));
}
