// Thin wrapper over FFTW complex 2-D transforms on column-major grids.
#pragma once

#include <complex>
#include <vector>

namespace romx {

using Complex = std::complex<double>;

/// Unnormalized 2-D DFT of an n1 x n2 column-major array (index i1 + n1*i2).
/// Plans are created once per shape and shared; execute() is thread-safe.
class Fft2d {
 public:
  Fft2d(int n1, int n2);

  int n1() const noexcept { return n1_; }
  int n2() const noexcept { return n2_; }

  std::vector<Complex> forward(const std::vector<Complex>& in) const;
  std::vector<Complex> backward(const std::vector<Complex>& in) const;

 private:
  int n1_;
  int n2_;
  void* forward_plan_;
  void* backward_plan_;
};

}  // namespace romx
