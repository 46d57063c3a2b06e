#include "romx/dmd.hpp"

#include "romx/linalg.hpp"
#include "romx/matrix_io.hpp"

#include <cmath>
#include <fstream>

namespace romx {

Vector LowRankOperator::apply(const Vector& x) const {
  if (x.size() != n()) throw DimensionError("low-rank operator: dimension mismatch");
  return w * sigma.cwiseProduct(v.transpose() * x);
}

Matrix LowRankOperator::apply(const Matrix& x) const {
  if (x.rows() != n()) throw DimensionError("low-rank operator: dimension mismatch");
  return w * (sigma.asDiagonal() * (v.transpose() * x));
}

Matrix LowRankOperator::dense() const {
  return w * sigma.asDiagonal() * v.transpose();
}

double LowRankOperator::spectral_norm() const {
  return sigma.size() == 0 ? 0.0 : sigma.maxCoeff();
}

DmdDecomposition::DmdDecomposition(const Matrix& a, const Matrix& b, double pinv_tol)
    : n_(a.rows()), columns_(a.cols()) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("dmd_fit: a and b must have the same shape");
  }
  if (a.size() == 0) throw DimensionError("dmd_fit: empty snapshot matrices");
  if (!a.allFinite() || !b.allFinite()) throw DimensionError("dmd_fit: non-finite snapshots");

  Eigen::BDCSVD<Matrix> svd_a(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd_a.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0)) throw DegenerateError("dmd_fit: snapshot matrix a is zero");
  Index r = 0;
  while (r < s.size() && s(r) > pinv_tol * s(0)) ++r;
  wa_ = svd_a.matrixU().leftCols(r);
  sa_ = s.head(r);
  const Matrix va = svd_a.matrixV().leftCols(r);

  // b a^+ a b^T = (b v_a)(b v_a)^T, so p comes from the SVD of b v_a.
  const Matrix m = b * va;
  Eigen::BDCSVD<Matrix> svd_m(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  p_ = svd_m.matrixU();
  lam_ = svd_m.singularValues();
  q_ = svd_m.matrixV();
  unconstrained_cost_ = (b - m * va.transpose()).squaredNorm();
}

LowRankOperator DmdDecomposition::truncate(Index k) const {
  const Index kmax = std::min(n_, columns_);
  if (k < 1 || k > kmax) {
    throw ConfigError("dmd_fit: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(kmax) + "]");
  }
  const Index kk = std::min(k, lam_.size());
  // u = p_k lam_k q_k^T s^-1 w_a^T; re-factor the small middle block.
  const Matrix g = lam_.head(kk).asDiagonal() * q_.leftCols(kk).transpose() *
                   sa_.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Matrix> svd_g(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Index kg = svd_g.singularValues().size();

  Matrix w = p_.leftCols(kk) * svd_g.matrixU();
  Matrix v = wa_ * svd_g.matrixV();
  LowRankOperator op;
  op.sigma = Vector::Zero(k);
  op.sigma.head(kg) = svd_g.singularValues();
  if (kg < k) {
    orthonormalize_columns(w, 0.5);
    orthonormalize_columns(v, 0.5);
    w = complete_orthonormal(w, k);
    v = complete_orthonormal(v, k);
  }
  // Sign fix on w, carried to v so u is unchanged.
  for (Index j = 0; j < k; ++j) {
    Index arg = 0;
    w.col(j).cwiseAbs().maxCoeff(&arg);
    if (w(arg, j) < 0.0) {
      w.col(j) = -w.col(j);
      v.col(j) = -v.col(j);
    }
  }
  op.w = std::move(w);
  op.v = std::move(v);
  return op;
}

LowRankOperator dmd_fit(const Matrix& a, const Matrix& b, Index k) {
  if (k < 1 || k > std::min(a.rows(), a.cols())) {
    throw ConfigError("dmd_fit: k = " + std::to_string(k) + " outside [1, " +
                      std::to_string(std::min(a.rows(), a.cols())) + "]");
  }
  return DmdDecomposition(a, b).truncate(k);
}

LowRankOperator dmd_fit(const WeightedSnapshots& snapshots, Index k) {
  return dmd_fit(snapshots.a, snapshots.b, k);
}

double dmd_cost(const LowRankOperator& op, const Matrix& a, const Matrix& b) {
  return (b - op.apply(a)).squaredNorm();
}

Trajectory dmd_rom_simulate(const LowRankOperator& op, const FullOrderModel& model,
                            const ModelParameters& theta, int T) {
  if (T < 1) throw ConfigError("dmd_rom_simulate: T must be >= 1");
  if (op.n() != model.state_dim()) throw DimensionError("dmd_rom_simulate: dimension mismatch");
  Matrix out(op.n(), T);
  out.col(0) = model.initial_state(theta);
  if (T >= 2) {
    const Matrix vw = op.v.transpose() * op.w;
    Vector z = op.sigma.cwiseProduct(op.v.transpose() * out.col(0));
    out.col(1) = op.w * z;
    for (int t = 3; t <= T; ++t) {
      z = op.sigma.cwiseProduct(vw * z);
      out.col(t - 1) = op.w * z;
    }
  }
  return Trajectory(std::move(out));
}

Trajectory dmd_star_predict(const LowRankOperator& op, const Trajectory& x) {
  if (x.n() != op.n()) throw DimensionError("dmd_star_predict: dimension mismatch");
  Matrix out(x.n(), x.T());
  out.col(0) = x.state(1);
  if (x.T() > 1) out.rightCols(x.T() - 1) = op.apply(Matrix(x.data().leftCols(x.T() - 1)));
  return Trajectory(std::move(out));
}

double one_step_residual(const LowRankOperator& op, const Trajectory& x) {
  if (x.T() < 2) return 0.0;
  const Matrix prev = x.data().leftCols(x.T() - 1);
  return (x.data().rightCols(x.T() - 1) - op.apply(prev)).squaredNorm();
}

double bound_constant(double s, int T) {
  if (T < 2) throw ConfigError("bound_constant: T must be >= 2");
  double best = 0.0;
  for (int t = 2; t <= T; ++t) {
    double sum = 0.0;
    for (int k = t; k <= T; ++k) sum += (1.0 + 4.0 * (k - 1)) * std::pow(s, 2.0 * (k - t));
    best = std::max(best, sum);
  }
  return best;
}

double bound_constant(const LowRankOperator& op, int T) {
  return bound_constant(op.spectral_norm(), T);
}

void save_low_rank_operator(const std::filesystem::path& dir, const LowRankOperator& op) {
  write_romx(dir / "w.romx", op.w);
  write_romx(dir / "sigma.romx", Matrix(op.sigma));
  write_romx(dir / "v.romx", op.v);
  std::ofstream out(dir / "dmd.txt");
  if (!out) throw IoError("cannot write " + (dir / "dmd.txt").string());
  out << "n = " << op.n() << "\nk = " << op.k() << '\n';
  if (!out) throw IoError("failed writing " + (dir / "dmd.txt").string());
}

LowRankOperator load_low_rank_operator(const std::filesystem::path& dir) {
  LowRankOperator op;
  op.w = read_romx(dir / "w.romx");
  const Matrix s = read_romx(dir / "sigma.romx");
  op.v = read_romx(dir / "v.romx");
  if (s.cols() != 1 || s.rows() != op.w.cols() || op.v.rows() != op.w.rows() ||
      op.v.cols() != op.w.cols()) {
    throw IoError("inconsistent low-rank operator files in " + dir.string());
  }
  op.sigma = s.col(0);
  return op;
}

}  // namespace romx
