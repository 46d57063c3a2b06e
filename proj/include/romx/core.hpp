// Full-order model interface, trajectories and the error types shared by
// every romx module.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace romx {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Raised for data that makes a numerical procedure meaningless (all-zero
/// snapshots, underflowing particle weights, zero noise in a likelihood).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// A simulation produced a non-finite state. `step()` is the 1-based time
/// index of the offending state (or substep, when raised by an integrator).
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}
  int step() const noexcept { return step_; }

 private:
  int step_;
};

bool all_finite(const Matrix& m);

/// States x_1..x_T stored as the columns of an n x T matrix.
class Trajectory {
 public:
  explicit Trajectory(Matrix data);

  Index n() const noexcept { return data_.rows(); }
  Index T() const noexcept { return data_.cols(); }
  const Matrix& data() const noexcept { return data_; }

  /// State at 1-based time index t.
  auto state(Index t) const { return data_.col(t - 1); }

 private:
  Matrix data_;
};

struct Theta3 {
  double rho = 0.0;  // Prandtl number
  double nu = 0.0;   // Rayleigh number
};

struct ModelParameters {
  Vector theta1;  // initial-condition shape parameters
  Vector theta2;  // initial-condition perturbation coefficients
  Theta3 theta3;

  void validate() const;
};

/// x_1 = g(theta), x_t = f_t(x_{t-1}, theta).
class FullOrderModel {
 public:
  virtual ~FullOrderModel() = default;

  virtual Index state_dim() const = 0;
  virtual Vector initial_state(const ModelParameters& theta) const = 0;
  virtual Vector step(const Vector& x, const ModelParameters& theta, int t) const = 0;
};

Trajectory simulate(const FullOrderModel& model, const ModelParameters& theta, int T);

/// Same recursion as simulate() but starting from an explicit x_1.
Trajectory simulate_from(const FullOrderModel& model, const Vector& x1,
                         const ModelParameters& theta, int T);

double frobenius_error(const Trajectory& x, const Trajectory& x_tilde);
double frobenius_error(const Matrix& x, const Matrix& x_tilde);

}  // namespace romx
