// Linear-Gaussian observations y_t = h x_t + zeta w_t with h an ideal
// spectral low-pass that downsamples each physical field.
#pragma once

#include "romx/core.hpp"
#include "romx/fft.hpp"
#include "romx/parallel.hpp"
#include "romx/rayleigh_benard.hpp"

namespace romx {

/// A linear observation map h with isotropic Gaussian noise of standard
/// deviation zeta, plus its pseudo-inverse.
class LinearObserver {
 public:
  virtual ~LinearObserver() = default;
  virtual Index state_dim() const = 0;
  virtual Index obs_dim() const = 0;
  virtual double zeta() const = 0;
  virtual Vector apply(const Vector& x) const = 0;
  virtual Vector pseudo_inverse(const Vector& y) const = 0;

  Matrix apply(const Matrix& x) const;  // column-wise
};

/// Explicit matrix h; the pseudo-inverse is precomputed by SVD.
class DenseObserver final : public LinearObserver {
 public:
  DenseObserver(Matrix h, double zeta);

  Index state_dim() const override { return h_.cols(); }
  Index obs_dim() const override { return h_.rows(); }
  double zeta() const override { return zeta_; }
  using LinearObserver::apply;
  Vector apply(const Vector& x) const override;
  Vector pseudo_inverse(const Vector& y) const override;
  const Matrix& matrix() const noexcept { return h_; }

 private:
  Matrix h_;
  Matrix h_pinv_;
  double zeta_;
};

/// Low-pass restriction of the stacked (b, tau) state onto a grid coarsened
/// by (factor1, factor2). Fourier modes the coarse grid can represent are kept
/// (at a coarse Nyquist frequency only the cosine part survives), everything
/// else is zeroed, and the result is sampled on the coarse grid.
class ObservationOperator final : public LinearObserver {
 public:
  ObservationOperator(const rb::Grid& fine, int factor1, int factor2, double zeta = 0.0);

  Index state_dim() const override { return fine_.state_dim(); }
  Index obs_dim() const override { return 2 * static_cast<Index>(c1_) * c2_; }
  int coarse_n1() const { return c1_; }
  int coarse_n2() const { return c2_; }
  const rb::Grid& fine_grid() const { return fine_; }
  double zeta() const override { return zeta_; }

  ObservationOperator with_zeta(double zeta) const;

  using LinearObserver::apply;
  Vector apply(const Vector& x) const override;

  /// Moore-Penrose pseudo-inverse h^+ y: zero-padded spectral prolongation.
  Vector pseudo_inverse(const Vector& y) const override;

  /// Explicit m x n matrix of h (for tests and small problems).
  Matrix dense() const;

 private:
  Matrix restrict_field(const Matrix& f) const;
  Matrix prolong_field(const Matrix& g) const;

  rb::Grid fine_;
  int f1_;
  int f2_;
  int c1_;
  int c2_;
  double zeta_;
  Fft2d fine_fft_;
  Fft2d coarse_fft_;
};

/// Ideal low-pass downsampling by `factor1` along s1 and `factor2` along s2.
ObservationOperator build_lowpass(const rb::Grid& grid, int factor1, int factor2,
                                  double zeta = 0.0);

/// m x T matrix of observations.
class ObservationSequence {
 public:
  explicit ObservationSequence(Matrix data);
  const Matrix& data() const noexcept { return data_; }
  Index m() const noexcept { return data_.rows(); }
  Index T() const noexcept { return data_.cols(); }
  auto at(Index t) const { return data_.col(t - 1); }

 private:
  Matrix data_;
};

ObservationSequence observe(const Trajectory& x, const LinearObserver& op, Rng& rng);

/// log N(y_t; h x_t, zeta^2 I). Throws DegenerateError when zeta = 0.
double log_likelihood(const Vector& y_t, const Vector& x_t, const LinearObserver& op);

/// Same quantity from an already-filtered state h x_t.
double log_likelihood_filtered(const Vector& y_t, const Vector& hx_t, double zeta);

/// zeta = peak |clean_obs| / 10^(psnr_db / 20).
double calibrate_noise(const Matrix& clean_obs, double psnr_db);

}  // namespace romx
