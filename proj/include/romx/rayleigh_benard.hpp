// Doubly periodic 2-D Rayleigh-Benard convection on the unit cell.
//
//   db/dt   = -v.grad(b)   + rho lap(b) + rho nu d1(tau)
//   dtau/dt = -v.grad(tau) + lap(tau)   + d1(lapinv(b)),    v = perp-grad lapinv(b)
//
// Derivatives are second-order central differences, the Laplacian is the
// 5-point stencil and its inverse is applied spectrally with the exact
// inverse symbol of that stencil, so lapinv(lap(f)) = f on zero-mean fields.
#pragma once

#include "romx/core.hpp"
#include "romx/fft.hpp"

#include <memory>

namespace romx::rb {

using Field = Matrix;  // n1 x n2, column-major: entry (i1, i2) sits at s = (i1 h1, i2 h2)

struct Grid {
  int n1 = 32;
  int n2 = 16;

  Grid() = default;
  Grid(int n1, int n2);

  double h1() const { return 1.0 / n1; }
  double h2() const { return 1.0 / n2; }
  Index points() const { return static_cast<Index>(n1) * n2; }
  Index state_dim() const { return 2 * points(); }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Buoyancy and temperature fields. The state vector stacks b over tau.
struct RBState {
  Field b;
  Field tau;

  Vector flatten() const;
  static RBState from_vector(const Vector& x, const Grid& grid);
  static RBState zero(const Grid& grid);
};

struct Velocity {
  Field v1;
  Field v2;
};

enum class Integrator { Euler, RK4 };

struct RBConfig {
  Grid grid;
  int substeps = 50;
  double dt = 2e-4;  // substeps * dt = 0.01 time units per macro step
  Integrator integrator = Integrator::RK4;
  // Ranges the CFL estimate must cover.
  double rho_max = 1.0;
  double nu_max = 300.0;
  double velocity_max = 1.0;

  /// Throws ConfigError when S < 1, dt <= 0 or the explicit-scheme stability
  /// estimate is violated for the configured parameter ranges.
  void validate() const;
};

/// Per-grid operators: stencils plus the cached FFT plan and inverse symbol.
class GridOps {
 public:
  explicit GridOps(const Grid& grid);

  const Grid& grid() const noexcept { return grid_; }

  Field d1(const Field& f) const;
  Field d2(const Field& f) const;
  Field laplacian(const Field& f) const;
  /// Zero-mean solution of lap(phi) = f - mean(f).
  Field inverse_laplacian(const Field& f) const;

  /// Eigenvalue of the 5-point Laplacian for Fourier mode (k1, k2).
  double laplacian_symbol(int k1, int k2) const;

 private:
  Grid grid_;
  Fft2d fft_;
  std::vector<double> inverse_symbol_;
};

Field inverse_laplacian(const Field& field, const GridOps& ops);
Velocity velocity_from_buoyancy(const Field& b, const GridOps& ops);
Field divergence(const Velocity& v, const GridOps& ops);

/// Time derivative of the semi-discrete system.
RBState rb_rhs(const RBState& state, const Theta3& theta3, const GridOps& ops);

RBState rb_substep(const RBState& state, const Theta3& theta3, double dt, const GridOps& ops,
                   Integrator integrator = Integrator::RK4);

/// S substeps: one ROM-visible time index.
RBState rb_macro_step(const RBState& state, const Theta3& theta3, const RBConfig& config,
                      const GridOps& ops);

/// Shape parameters of the initial condition, unpacked from theta1.
///
/// theta1 = (a, pi_b, pi_tau, pi_tau')                         Lorenz form
///        | (..., pi_b^c, pi_tau^s, pi_b')                      companion modes
///        | (..., beta_b_2, beta_tau_2, beta_b_3, beta_tau_3, ...)  vertical harmonics
///
///   b   = pi_b sin(a s1) sin(pi s2) + pi_b^c cos(a s1) sin(pi s2)
///         - pi_b' sin(2 pi s2) - sum_q beta_b_q sin(2 pi q s2)
///   tau = pi_tau cos(a s1) sin(pi s2) + pi_tau^s sin(a s1) sin(pi s2)
///         - pi_tau' sin(2 pi s2) - sum_q beta_tau_q sin(2 pi q s2)
struct InitShape {
  double a = 0.0;
  double pi_b = 0.0;
  double pi_tau = 0.0;
  double pi_tau_prime = 0.0;
  double pi_b_cos = 0.0;
  double pi_tau_sin = 0.0;
  double pi_b_prime = 0.0;
  std::vector<double> beta_b;    // q = 2, 3, ...
  std::vector<double> beta_tau;  // q = 2, 3, ...

  static InitShape from_theta1(const Vector& theta1);
  Vector to_theta1() const;
};

/// Initial fields sampled on the grid. `perturbation_basis` holds one state
/// vector per theta2 coefficient (n x len(theta2)); it may be empty when
/// theta2 is empty.
RBState rb_init(const ModelParameters& theta, const Grid& grid,
                const Matrix& perturbation_basis = Matrix());

class RayleighBenardModel final : public FullOrderModel {
 public:
  explicit RayleighBenardModel(RBConfig config, Matrix perturbation_basis = Matrix());

  Index state_dim() const override { return config_.grid.state_dim(); }
  Vector initial_state(const ModelParameters& theta) const override;
  Vector step(const Vector& x, const ModelParameters& theta, int t) const override;

  const RBConfig& config() const noexcept { return config_; }
  const GridOps& ops() const noexcept { return *ops_; }

 private:
  RBConfig config_;
  std::shared_ptr<const GridOps> ops_;
  Matrix perturbation_basis_;
};

}  // namespace romx::rb
