// Small dense linear-algebra helpers shared by the ROM solvers.
#pragma once

#include "romx/core.hpp"

namespace romx {

/// Flips each column so that its largest-magnitude entry is positive.
void fix_column_signs(Matrix& u);

/// Gram-Schmidt in column order; columns whose residual falls below
/// tol * (original norm) are dropped. Returns the number of columns kept.
Index orthonormalize_columns(Matrix& q, double tol = 1e-10);

/// Extends an orthonormal basis to target_cols columns with the Gram-Schmidt
/// complement of the standard basis e_1, e_2, ...
Matrix complete_orthonormal(const Matrix& basis, Index target_cols);

Index numerical_rank(const Matrix& m, double rel_tol = 1e-10);

}  // namespace romx
