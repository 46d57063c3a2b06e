// Counter-based random streams and a schedule-independent parallel loop.
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

namespace romx {

using Rng = std::mt19937_64;

/// Purposes of the independent random streams derived from a master seed.
enum class StreamTag : std::uint64_t {
  TrueParameters = 1,
  ObservationNoise = 2,
  SurrogateDraw = 3,
  ProjectionNoise = 4,
  Generic = 5,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// The stream is a pure function of (seed, tag, i, j), so draws do not depend
/// on which thread consumes them or in which order.
inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t i = 0,
                       std::uint64_t j = 0) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(tag));
  h = splitmix64(h ^ (i + 0x632be59bd9b4e019ULL));
  h = splitmix64(h ^ (j + 0x8cb92ba72f3d8dd7ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

/// Number of worker threads: ROMX_THREADS if set and positive, otherwise the
/// hardware concurrency.
unsigned default_thread_count();

/// Runs body(idx) for idx in [0, count). Each index writes only to its own
/// output slot, so results are identical for any thread count. The first
/// exception thrown by a body is rethrown on the calling thread.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  pool.reserve(n);
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace romx
