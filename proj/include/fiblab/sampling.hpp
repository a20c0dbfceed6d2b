#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "fiblab/linalg.hpp"

namespace fiblab {

struct SamplerCfg {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: FIBLAB_THREADS, else hardware concurrency
};

/// Seed of sample `index` in stream `stream`; independent of thread count.
std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t stream, std::uint64_t index);

using Rng = std::mt19937_64;

/// Uniform point on the sphere of radius r (normalized Gaussian).
Vec sphere_point(Rng& rng, int n, double radius);

/// Radius log-uniform in (lo, hi].
double log_uniform_radius(Rng& rng, double lo, double hi);

/// Uniform point in the ball of radius r.
Vec ball_point(Rng& rng, int n, double radius);

int resolve_threads(int requested);

/// Runs fn(i) for i in [0, count) on `threads` workers. Each index is handled
/// exactly once; callers store results by index so merges are deterministic.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(threads)), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace fiblab
