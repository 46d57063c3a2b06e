#include "romx/fft.hpp"

#include "romx/core.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace romx {
namespace {

struct PlanPair {
  fftw_plan forward;
  fftw_plan backward;
};

// FFTW planning is not thread-safe; executing an existing plan on new arrays
// is. Plans live for the whole process.
std::mutex& plan_mutex() {
  static std::mutex m;
  return m;
}

PlanPair plans_for(int n1, int n2) {
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(plan_mutex());
  auto it = cache.find({n1, n2});
  if (it != cache.end()) return it->second;
  std::vector<Complex> a(static_cast<std::size_t>(n1) * n2), b(a.size());
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  // Column-major (i1 fastest) is FFTW's row-major with dimensions swapped.
  PlanPair p{fftw_plan_dft_2d(n2, n1, pa, pb, FFTW_FORWARD, flags),
             fftw_plan_dft_2d(n2, n1, pa, pb, FFTW_BACKWARD, flags)};
  if (!p.forward || !p.backward) throw Error("FFTW planning failed");
  cache.emplace(std::make_pair(n1, n2), p);
  return p;
}

std::vector<Complex> run(void* plan, const std::vector<Complex>& in, std::size_t size) {
  if (in.size() != size) throw DimensionError("FFT input has wrong size");
  std::vector<Complex> src(in);
  std::vector<Complex> out(size);
  fftw_execute_dft(static_cast<fftw_plan>(plan), reinterpret_cast<fftw_complex*>(src.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

}  // namespace

Fft2d::Fft2d(int n1, int n2) : n1_(n1), n2_(n2) {
  if (n1 < 1 || n2 < 1) throw ConfigError("FFT extents must be positive");
  const PlanPair p = plans_for(n1, n2);
  forward_plan_ = p.forward;
  backward_plan_ = p.backward;
}

std::vector<Complex> Fft2d::forward(const std::vector<Complex>& in) const {
  return run(forward_plan_, in, static_cast<std::size_t>(n1_) * n2_);
}

std::vector<Complex> Fft2d::backward(const std::vector<Complex>& in) const {
  return run(backward_plan_, in, static_cast<std::size_t>(n1_) * n2_);
}

}  // namespace romx
