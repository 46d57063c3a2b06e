#include "romx/observation.hpp"

#include <cmath>
#include <numbers>

namespace romx {
namespace {

// Coarse-to-fine frequency map along one axis. A coarse bin maps to one fine
// bin, except the coarse Nyquist bin which collects the +c/2 and -c/2 fine
// bins (the sampled cosine) when the axis is actually coarsened.
struct AxisMap {
  int fine = 0;
  int coarse = 0;
  bool coarsened = false;

  bool is_nyquist(int q) const { return coarsened && coarse % 2 == 0 && q == coarse / 2; }
  int primary(int q) const { return q <= coarse / 2 ? q : fine - (coarse - q); }
  int mirror(int q) const { return fine - q; }  // only meaningful at Nyquist
};

}  // namespace

ObservationOperator::ObservationOperator(const rb::Grid& fine, int factor1, int factor2,
                                         double zeta)
    : fine_(fine),
      f1_(factor1),
      f2_(factor2),
      c1_(factor1 > 0 ? fine.n1 / factor1 : 0),
      c2_(factor2 > 0 ? fine.n2 / factor2 : 0),
      zeta_(zeta),
      fine_fft_(fine.n1, fine.n2),
      coarse_fft_(std::max(c1_, 1), std::max(c2_, 1)) {
  if (factor1 < 1 || factor2 < 1 || fine.n1 % factor1 != 0 || fine.n2 % factor2 != 0) {
    throw ConfigError("observation factors (" + std::to_string(factor1) + "," +
                      std::to_string(factor2) + ") must divide the grid extents " +
                      std::to_string(fine.n1) + "x" + std::to_string(fine.n2));
  }
  if (factor1 * factor2 == 1) throw ConfigError("observation operator must reduce dimension");
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw ConfigError("zeta must be >= 0");
}

ObservationOperator ObservationOperator::with_zeta(double zeta) const {
  return ObservationOperator(fine_, f1_, f2_, zeta);
}

Matrix ObservationOperator::restrict_field(const Matrix& f) const {
  const int n1 = fine_.n1, n2 = fine_.n2;
  std::vector<Complex> buf(static_cast<std::size_t>(n1) * n2);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = f.data()[i];
  const auto spec = fine_fft_.forward(buf);
  const AxisMap ax1{n1, c1_, f1_ > 1}, ax2{n2, c2_, f2_ > 1};
  auto at = [&](int k1, int k2) { return spec[k1 + static_cast<std::size_t>(n1) * k2]; };

  std::vector<Complex> coarse(static_cast<std::size_t>(c1_) * c2_);
  for (int q2 = 0; q2 < c2_; ++q2) {
    int k2s[2] = {ax2.primary(q2), ax2.mirror(q2)};
    const int n_k2 = ax2.is_nyquist(q2) ? 2 : 1;
    for (int q1 = 0; q1 < c1_; ++q1) {
      int k1s[2] = {ax1.primary(q1), ax1.mirror(q1)};
      const int n_k1 = ax1.is_nyquist(q1) ? 2 : 1;
      Complex sum = 0.0;
      for (int a = 0; a < n_k1; ++a)
        for (int b = 0; b < n_k2; ++b) sum += at(k1s[a], k2s[b]);
      coarse[q1 + static_cast<std::size_t>(c1_) * q2] = sum;
    }
  }
  // fine DFT -> coarse samples: divide by the fine point count.
  const auto back = coarse_fft_.backward(coarse);
  const double scale = 1.0 / static_cast<double>(buf.size());
  Matrix out(c1_, c2_);
  for (std::size_t i = 0; i < back.size(); ++i) out.data()[i] = back[i].real() * scale;
  return out;
}

Matrix ObservationOperator::prolong_field(const Matrix& g) const {
  const int n1 = fine_.n1, n2 = fine_.n2;
  std::vector<Complex> buf(static_cast<std::size_t>(c1_) * c2_);
  for (std::size_t i = 0; i < buf.size(); ++i) buf[i] = g.data()[i];
  const auto coarse = coarse_fft_.forward(buf);
  const AxisMap ax1{n1, c1_, f1_ > 1}, ax2{n2, c2_, f2_ > 1};

  std::vector<Complex> spec(static_cast<std::size_t>(n1) * n2, Complex(0.0));
  for (int q2 = 0; q2 < c2_; ++q2) {
    int k2s[2] = {ax2.primary(q2), ax2.mirror(q2)};
    const int n_k2 = ax2.is_nyquist(q2) ? 2 : 1;
    for (int q1 = 0; q1 < c1_; ++q1) {
      int k1s[2] = {ax1.primary(q1), ax1.mirror(q1)};
      const int n_k1 = ax1.is_nyquist(q1) ? 2 : 1;
      const Complex share = coarse[q1 + static_cast<std::size_t>(c1_) * q2] /
                            static_cast<double>(n_k1 * n_k2);
      for (int a = 0; a < n_k1; ++a)
        for (int b = 0; b < n_k2; ++b) spec[k1s[a] + static_cast<std::size_t>(n1) * k2s[b]] = share;
    }
  }
  const auto back = fine_fft_.backward(spec);
  const double scale = 1.0 / static_cast<double>(buf.size());
  Matrix out(n1, n2);
  for (std::size_t i = 0; i < back.size(); ++i) out.data()[i] = back[i].real() * scale;
  return out;
}

Vector ObservationOperator::apply(const Vector& x) const {
  if (x.size() != state_dim()) throw DimensionError("observation: state dimension mismatch");
  const rb::RBState s = rb::RBState::from_vector(x, fine_);
  const Index m = static_cast<Index>(c1_) * c2_;
  Vector y(2 * m);
  y.head(m) = restrict_field(s.b).reshaped();
  y.tail(m) = restrict_field(s.tau).reshaped();
  return y;
}

Matrix LinearObserver::apply(const Matrix& x) const {
  if (x.rows() != state_dim()) throw DimensionError("observation: state dimension mismatch");
  Matrix y(obs_dim(), x.cols());
  for (Index t = 0; t < x.cols(); ++t) y.col(t) = apply(Vector(x.col(t)));
  return y;
}

DenseObserver::DenseObserver(Matrix h, double zeta) : h_(std::move(h)), zeta_(zeta) {
  if (h_.size() == 0) throw DimensionError("observation matrix is empty");
  if (!(zeta >= 0.0) || !std::isfinite(zeta)) throw ConfigError("zeta must be >= 0");
  h_pinv_ = h_.completeOrthogonalDecomposition().pseudoInverse();
}

Vector DenseObserver::apply(const Vector& x) const {
  if (x.size() != state_dim()) throw DimensionError("observation: state dimension mismatch");
  return h_ * x;
}

Vector DenseObserver::pseudo_inverse(const Vector& y) const {
  if (y.size() != obs_dim()) throw DimensionError("pseudo-inverse: observation dimension mismatch");
  return h_pinv_ * y;
}

Vector ObservationOperator::pseudo_inverse(const Vector& y) const {
  if (y.size() != obs_dim()) throw DimensionError("pseudo-inverse: observation dimension mismatch");
  const Index m = static_cast<Index>(c1_) * c2_;
  const Index p = fine_.points();
  Vector x(2 * p);
  x.head(p) = prolong_field(y.head(m).reshaped(c1_, c2_)).reshaped();
  x.tail(p) = prolong_field(y.tail(m).reshaped(c1_, c2_)).reshaped();
  return x;
}

Matrix ObservationOperator::dense() const {
  Matrix h(obs_dim(), state_dim());
  for (Index j = 0; j < state_dim(); ++j) h.col(j) = apply(Vector(Vector::Unit(state_dim(), j)));
  return h;
}

ObservationOperator build_lowpass(const rb::Grid& grid, int factor1, int factor2, double zeta) {
  return ObservationOperator(grid, factor1, factor2, zeta);
}

ObservationSequence::ObservationSequence(Matrix data) : data_(std::move(data)) {
  if (!data_.allFinite()) throw DimensionError("observation sequence has non-finite entries");
}

ObservationSequence observe(const Trajectory& x, const LinearObserver& op, Rng& rng) {
  if (x.n() != op.state_dim()) throw DimensionError("observe: state dimension mismatch");
  Matrix y = op.apply(x.data());
  if (op.zeta() > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index t = 0; t < y.cols(); ++t)
      for (Index r = 0; r < y.rows(); ++r) y(r, t) += op.zeta() * normal(rng);
  }
  return ObservationSequence(std::move(y));
}

double log_likelihood_filtered(const Vector& y_t, const Vector& hx_t, double zeta) {
  if (!(zeta > 0.0)) {
    throw DegenerateError("log_likelihood: zeta = 0 gives a degenerate (Dirac) likelihood");
  }
  if (y_t.size() != hx_t.size()) throw DimensionError("log_likelihood: dimension mismatch");
  const double m = static_cast<double>(y_t.size());
  const double z2 = zeta * zeta;
  return -(y_t - hx_t).squaredNorm() / (2.0 * z2) -
         0.5 * m * std::log(2.0 * std::numbers::pi * z2);
}

double log_likelihood(const Vector& y_t, const Vector& x_t, const LinearObserver& op) {
  if (!(op.zeta() > 0.0)) {
    throw DegenerateError("log_likelihood: zeta = 0 gives a degenerate (Dirac) likelihood");
  }
  return log_likelihood_filtered(y_t, op.apply(x_t), op.zeta());
}

double calibrate_noise(const Matrix& clean_obs, double psnr_db) {
  const double peak = clean_obs.size() > 0 ? clean_obs.cwiseAbs().maxCoeff() : 0.0;
  if (!(peak > 0.0)) throw DegenerateError("calibrate_noise: clean observations are all zero");
  if (std::isinf(psnr_db) && psnr_db > 0) return 0.0;
  return peak / std::pow(10.0, psnr_db / 20.0);
}

}  // namespace romx
