// ROM-1: Galerkin projection onto the leading eigenvectors of c c^T.
#pragma once

#include "romx/core.hpp"
#include "romx/smc.hpp"

#include <filesystem>

namespace romx {

struct PodBasis {
  Matrix u;            // n x k, orthonormal columns
  Vector eigenvalues;  // k retained eigenvalues of c c^T, descending
  Index k = 0;
  Index rank = 0;      // numerical rank of c; columns past it are padding
};

/// Eigendecomposition of c c^T computed once and truncated per k.
class PodDecomposition {
 public:
  explicit PodDecomposition(const Matrix& c);

  Index n() const { return n_; }
  Index columns() const { return columns_; }
  Index rank() const { return modes_.cols(); }
  double total_energy() const { return total_energy_; }
  const Vector& eigenvalues() const { return eigenvalues_; }

  /// Throws ConfigError unless 1 <= k <= min(n, columns).
  PodBasis truncate(Index k) const;

 private:
  Index n_ = 0;
  Index columns_ = 0;
  double total_energy_ = 0.0;
  Matrix modes_;
  Vector eigenvalues_;
};

PodBasis pod_fit(const Matrix& c, Index k);
PodBasis pod_fit(const WeightedSnapshots& snapshots, Index k);

/// ||c - u u^T c||_F^2, the minimized upper-bound objective.
double pod_cost(const PodBasis& basis, const Matrix& c);

/// z_1 = u^T g(theta), z_t = u^T f(u z_{t-1}); returns u z_t.
Trajectory pod_rom_simulate(const PodBasis& basis, const FullOrderModel& model,
                            const ModelParameters& theta, int T);

/// u u^T x_t for every t.
Trajectory pod_star_project(const PodBasis& basis, const Trajectory& x);

/// Writes u.romx and pod.txt (k, rank, eigenvalues) into dir.
void save_pod_basis(const std::filesystem::path& dir, const PodBasis& basis);
PodBasis load_pod_basis(const std::filesystem::path& dir);

}  // namespace romx
