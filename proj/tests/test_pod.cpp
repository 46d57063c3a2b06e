#include "doctest.h"
#include "helpers.hpp"

#include "romx/pod.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace romx;
using test::random_matrix;

namespace {

double projection_cost(const Matrix& u, const Matrix& c) {
  return (c - u * (u.transpose() * c)).squaredNorm();
}

// Classical Gram-Schmidt projector onto span(a).
Matrix gram_schmidt_projector(const Matrix& a) {
  Matrix q = a;
  for (Index j = 0; j < q.cols(); ++j) {
    for (Index i = 0; i < j; ++i) q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    q.col(j).normalize();
  }
  return q * q.transpose();
}

}  // namespace

TEST_CASE("pod_fit: diagonal second moment picks e1") {
  Matrix c(3, 2);
  c << 2, 0, 0, 1, 0, 0;
  const PodBasis b = pod_fit(c, 1);
  CHECK((b.u - Vector::Unit(3, 0)).norm() <= 1e-14);
  CHECK(b.eigenvalues(0) == doctest::Approx(4.0));
}

TEST_CASE("pod_fit: plane projector") {
  Rng rng = make_stream(41, StreamTag::Generic);
  const Matrix q = test::random_orthonormal(6, 2, rng);
  const PodBasis b = pod_fit(q, 2);
  CHECK((b.u * b.u.transpose() - gram_schmidt_projector(q)).norm() <= 1e-10);
}

TEST_CASE("pod_fit beats random orthonormal bases") {
  Rng rng = make_stream(42, StreamTag::Generic);
  const Matrix c = random_matrix(6, 10, rng);
  const PodBasis b = pod_fit(c, 3);
  const double cost = pod_cost(b, c);
  int beaten = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    if (cost < projection_cost(test::random_orthonormal(6, 3, rng), c)) ++beaten;
  }
  CHECK(beaten == 1000);
}

TEST_CASE("optimality certificate, monotone cost, idempotent projector") {
  Rng rng = make_stream(43, StreamTag::Generic);
  for (auto [n, cols] : {std::pair{8, 5}, std::pair{5, 12}, std::pair{7, 7}}) {
    const Matrix c = random_matrix(n, cols, rng);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c * c.transpose());
    Vector ev = es.eigenvalues().reverse();
    const double total = c.squaredNorm();
    double prev = std::numeric_limits<double>::infinity();
    for (Index k = 1; k <= std::min(n, cols); ++k) {
      const PodBasis b = pod_fit(c, k);
      const double cost = pod_cost(b, c);
      const double expected = total - ev.head(k).sum();
      CHECK(std::abs(cost - expected) <= 1e-8 * total);
      CHECK(cost <= prev + 1e-12 * total);
      prev = cost;
      const Matrix p = b.u * b.u.transpose();
      CHECK((p * p - p).norm() <= 1e-10);
      for (Index j = 0; j < b.u.cols(); ++j) {
        Index arg;
        b.u.col(j).cwiseAbs().maxCoeff(&arg);
        CHECK(b.u(arg, j) > 0.0);
      }
    }
  }
}

TEST_CASE("rank-deficient snapshots are padded to an orthonormal basis") {
  Matrix c = Matrix::Zero(5, 4);
  c(0, 0) = 1.0;
  c(1, 1) = 2.0;
  const PodBasis b = pod_fit(c, 4);
  CHECK(b.rank == 2);
  CHECK(b.u.cols() == 4);
  CHECK((b.u.transpose() * b.u - Matrix::Identity(4, 4)).norm() <= 1e-12);
  CHECK(b.eigenvalues(3) == 0.0);
  CHECK(pod_cost(b, c) <= 1e-24);
  CHECK_THROWS_AS(pod_fit(c, 0), ConfigError);
  CHECK_THROWS_AS(pod_fit(c, 5), ConfigError);
  const PodBasis z = pod_fit(Matrix::Zero(3, 2), 2);
  CHECK(z.rank == 0);
  CHECK((z.u.transpose() * z.u - Matrix::Identity(2, 2)).norm() <= 1e-12);
}

TEST_CASE("pod_rom_simulate: identity basis, invariant subspace, 1-D recursion") {
  Rng rng = make_stream(44, StreamTag::Generic);
  const Matrix a = 0.5 * random_matrix(4, 4, rng);
  const test::LinearModel full(a);
  const ModelParameters p = test::params_with(test::random_vector(4, rng));
  PodBasis id{Matrix::Identity(4, 4), Vector::Ones(4), 4, 4};
  CHECK((pod_rom_simulate(id, full, p, 5).data() - simulate(full, p, 5).data()).norm() <= 1e-14);

  // f leaves span(q) invariant and x_1 starts inside it
  const Matrix q = test::random_orthonormal(6, 2, rng);
  const Matrix s2 = 0.7 * random_matrix(2, 2, rng);
  const Matrix inv = q * s2 * q.transpose() + 0.3 * (Matrix::Identity(6, 6) - q * q.transpose());
  const test::LinearModel lm(inv);
  const ModelParameters pq = test::params_with(q * test::random_vector(2, rng));
  PodBasis bq{q, Vector::Ones(2), 2, 2};
  CHECK((pod_rom_simulate(bq, lm, pq, 6).data() - simulate(lm, pq, 6).data()).norm() <= 1e-10);

  // u = e_1 in R^3: z_t = a_11 z_{t-1}
  Matrix a3(3, 3);
  a3 << 0.9, 0.5, -0.2, 0.1, 0.3, 0.4, -0.3, 0.2, 0.6;
  const test::LinearModel m3(a3);
  Vector x1(3);
  x1 << 2.0, -1.0, 0.5;
  PodBasis e1{Matrix::Identity(3, 1), Vector::Ones(1), 1, 1};
  const Trajectory r = pod_rom_simulate(e1, m3, test::params_with(x1), 4);
  for (Index t = 1; t <= 4; ++t) {
    CHECK(r.state(t)(0) == doctest::Approx(2.0 * std::pow(0.9, double(t - 1))).epsilon(1e-14));
    CHECK(r.state(t).tail(2).norm() == 0.0);
  }
}

TEST_CASE("pod_star_project") {
  Rng rng = make_stream(45, StreamTag::Generic);
  const Matrix q = test::random_orthonormal(5, 2, rng);
  PodBasis bq{q, Vector::Ones(2), 2, 2};
  const Trajectory inside(q * random_matrix(2, 3, rng));
  CHECK((pod_star_project(bq, inside).data() - inside.data()).norm() <= 1e-12);

  const Trajectory x(random_matrix(5, 3, rng));
  PodBasis full{test::random_orthonormal(5, 5, rng), Vector::Ones(5), 5, 5};
  CHECK((pod_star_project(full, x).data() - x.data()).norm() <= 1e-12);

  // residual energy equals the discarded eigenvalues of x x^T
  const Matrix xx = random_matrix(6, 8, rng);
  Eigen::SelfAdjointEigenSolver<Matrix> es(xx * xx.transpose());
  const Vector ev = es.eigenvalues().reverse();
  for (Index k = 1; k < 6; ++k) {
    const PodBasis b = pod_fit(xx, k);
    const double resid = frobenius_error(Trajectory(xx), pod_star_project(b, Trajectory(xx)));
    CHECK(std::abs(resid * resid - ev.tail(6 - k).sum()) <= 1e-10 * xx.squaredNorm());
  }
}

TEST_CASE("POD lower error bound holds for Galerkin trajectories") {
  Rng rng = make_stream(46, StreamTag::Generic);
  const test::LinearModel m(0.6 * random_matrix(6, 6, rng));
  for (int trial = 0; trial < 20; ++trial) {
    const ModelParameters p = test::params_with(test::random_vector(6, rng));
    const Trajectory x = simulate(m, p, 4);
    const PodBasis b = pod_fit(random_matrix(6, 5, rng), 1 + trial % 5);
    const double lower = frobenius_error(x, pod_star_project(b, x));
    CHECK(lower <= frobenius_error(x, pod_rom_simulate(b, m, p, 4)) + 1e-8);
  }
}

TEST_CASE("basis persistence round trip") {
  Rng rng = make_stream(47, StreamTag::Generic);
  const PodBasis b = pod_fit(random_matrix(7, 9, rng), 3);
  const auto dir = std::filesystem::temp_directory_path() / "romx_pod_io";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  save_pod_basis(dir, b);
  const PodBasis r = load_pod_basis(dir);
  CHECK(r.u == b.u);
  CHECK(r.k == 3);
  CHECK(r.rank == b.rank);
  CHECK((r.eigenvalues - b.eigenvalues).norm() == 0.0);
  CHECK_THROWS_AS(load_pod_basis(dir / "nope"), IoError);
  std::filesystem::remove_all(dir);
}
