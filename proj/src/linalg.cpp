#include "romx/linalg.hpp"

#include "romx/parallel.hpp"

#include <cstdlib>
#include <string>

namespace romx {

unsigned default_thread_count() {
  if (const char* env = std::getenv("ROMX_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void fix_column_signs(Matrix& u) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index arg = 0;
    u.col(j).cwiseAbs().maxCoeff(&arg);
    if (u(arg, j) < 0.0) u.col(j) = -u.col(j);
  }
}

Index orthonormalize_columns(Matrix& q, double tol) {
  Index kept = 0;
  for (Index j = 0; j < q.cols(); ++j) {
    Vector v = q.col(j);
    const double norm0 = v.norm();
    // Two passes of modified Gram-Schmidt keep orthogonality at round-off.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < kept; ++i) v -= q.col(i).dot(v) * q.col(i);
    }
    const double norm = v.norm();
    if (norm0 > 0.0 && norm > tol * norm0) {
      q.col(kept++) = v / norm;
    }
  }
  q.conservativeResize(Eigen::NoChange, kept);
  return kept;
}

Matrix complete_orthonormal(const Matrix& basis, Index target_cols) {
  const Index n = basis.rows();
  if (target_cols > n) throw DimensionError("cannot complete beyond the ambient dimension");
  Matrix out(n, target_cols);
  out.leftCols(basis.cols()) = basis;
  Index have = basis.cols();
  for (Index e = 0; e < n && have < target_cols; ++e) {
    Vector v = Vector::Unit(n, e);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < have; ++i) v -= out.col(i).dot(v) * out.col(i);
    }
    const double norm = v.norm();
    if (norm > 1e-8) out.col(have++) = v / norm;
  }
  if (have < target_cols) throw DimensionError("orthonormal completion failed");
  return out;
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++r;
  }
  return r;
}

}  // namespace romx
