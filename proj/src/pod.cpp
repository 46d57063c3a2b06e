#include "romx/pod.hpp"

#include "romx/linalg.hpp"
#include "romx/matrix_io.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <fstream>
#include <sstream>

namespace romx {
namespace {

// Eigenvalues below this fraction of the largest are treated as round-off.
constexpr double kRankTol = 1e-13;

}  // namespace

PodDecomposition::PodDecomposition(const Matrix& c)
    : n_(c.rows()), columns_(c.cols()), total_energy_(c.squaredNorm()) {
  if (c.size() == 0) throw DimensionError("pod: empty snapshot matrix");
  if (!c.allFinite()) throw DimensionError("pod: snapshot matrix has non-finite entries");
  if (!(total_energy_ > 0.0)) {
    modes_.resize(n_, 0);
    eigenvalues_.resize(0);
    return;
  }

  Vector lambda;
  Matrix vecs;
  const bool small_side = columns_ < n_;
  if (small_side) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c.transpose() * c);
    lambda = es.eigenvalues().reverse();
    vecs = es.eigenvectors().rowwise().reverse();
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(c * c.transpose());
    lambda = es.eigenvalues().reverse();
    vecs = es.eigenvectors().rowwise().reverse();
  }
  const double lmax = lambda(0);
  Index r = 0;
  while (r < lambda.size() && lambda(r) > kRankTol * lmax) ++r;

  Matrix u = small_side ? Matrix(c * vecs.leftCols(r)) : Matrix(vecs.leftCols(r));
  if (small_side) {
    for (Index j = 0; j < r; ++j) u.col(j) /= std::sqrt(lambda(j));
  }
  // Re-orthogonalize: the c v / sqrt(lambda) route loses orthogonality for
  // small eigenvalues.
  Matrix q = u;
  const Index kept = orthonormalize_columns(q, 1e-6);
  if (kept < r) {
    r = kept;
  }
  fix_column_signs(q);
  modes_ = q.leftCols(r);
  eigenvalues_ = lambda.head(r);
}

PodBasis PodDecomposition::truncate(Index k) const {
  const Index kmax = std::min(n_, columns_);
  if (k < 1 || k > kmax) {
    throw ConfigError("pod_fit: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(kmax) + "]");
  }
  PodBasis out;
  out.k = k;
  out.rank = rank();
  const Index keep = std::min(k, rank());
  out.eigenvalues = Vector::Zero(k);
  out.eigenvalues.head(keep) = eigenvalues_.head(keep);
  if (keep == k) {
    out.u = modes_.leftCols(k);
  } else {
    out.u = complete_orthonormal(modes_.leftCols(keep), k);
  }
  return out;
}

PodBasis pod_fit(const Matrix& c, Index k) {
  if (k < 1 || k > std::min(c.rows(), c.cols())) {
    throw ConfigError("pod_fit: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(std::min(c.rows(), c.cols())) + "]");
  }
  return PodDecomposition(c).truncate(k);
}

PodBasis pod_fit(const WeightedSnapshots& snapshots, Index k) {
  return pod_fit(snapshots.c, k);
}

double pod_cost(const PodBasis& basis, const Matrix& c) {
  if (c.rows() != basis.u.rows()) throw DimensionError("pod_cost: dimension mismatch");
  return (c - basis.u * (basis.u.transpose() * c)).squaredNorm();
}

Trajectory pod_rom_simulate(const PodBasis& basis, const FullOrderModel& model,
                            const ModelParameters& theta, int T) {
  if (T < 1) throw ConfigError("pod_rom_simulate: T must be >= 1");
  const Matrix& u = basis.u;
  if (u.rows() != model.state_dim()) throw DimensionError("pod_rom_simulate: basis dimension");
  Matrix out(u.rows(), T);
  Vector z = u.transpose() * model.initial_state(theta);
  out.col(0) = u * z;
  for (int t = 2; t <= T; ++t) {
    Vector fx = model.step(out.col(t - 2), theta, t);
    if (!fx.allFinite()) throw DivergenceError("reduced simulation diverged", t);
    z = u.transpose() * fx;
    out.col(t - 1) = u * z;
  }
  return Trajectory(std::move(out));
}

Trajectory pod_star_project(const PodBasis& basis, const Trajectory& x) {
  if (x.n() != basis.u.rows()) throw DimensionError("pod_star_project: dimension mismatch");
  return Trajectory(basis.u * (basis.u.transpose() * x.data()));
}

void save_pod_basis(const std::filesystem::path& dir, const PodBasis& basis) {
  write_romx(dir / "u.romx", basis.u);
  std::ofstream out(dir / "pod.txt");
  if (!out) throw IoError("cannot write " + (dir / "pod.txt").string());
  out.precision(17);
  out << "k = " << basis.k << "\nrank = " << basis.rank << "\neigenvalues =";
  for (Index i = 0; i < basis.eigenvalues.size(); ++i) out << ' ' << basis.eigenvalues(i);
  out << '\n';
  if (!out) throw IoError("failed writing " + (dir / "pod.txt").string());
}

PodBasis load_pod_basis(const std::filesystem::path& dir) {
  PodBasis b;
  b.u = read_romx(dir / "u.romx");
  b.k = b.u.cols();
  std::ifstream in(dir / "pod.txt");
  if (!in) throw IoError("cannot read " + (dir / "pod.txt").string());
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = line.substr(0, line.find_first_of(" =")), rest = line.substr(eq + 1);
    std::istringstream vs(rest);
    if (key == "rank") {
      vs >> b.rank;
    } else if (key == "eigenvalues") {
      std::vector<double> ev;
      for (double v; vs >> v;) ev.push_back(v);
      b.eigenvalues = Eigen::Map<Vector>(ev.data(), static_cast<Index>(ev.size()));
    }
  }
  if (b.eigenvalues.size() != b.k) throw IoError("pod.txt does not match u.romx");
  return b;
}

}  // namespace romx
