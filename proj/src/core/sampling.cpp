#include "fiblab/sampling.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace fiblab {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t sample_seed(std::uint64_t global_seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(global_seed) ^ stream) ^ index);
}

Vec sphere_point(Rng& rng, int n, double radius) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec v(n);
  do {
    for (int k = 0; k < n; ++k) v(k) = normal(rng);
  } while (v.norm() < 1e-12);
  return v * (radius / v.norm());
}

double log_uniform_radius(Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // u in [0,1) maps to (lo, hi]
  const double u = unit(rng);
  return hi * std::pow(lo / hi, u);
}

Vec ball_point(Rng& rng, int n, double radius) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = radius * std::pow(unit(rng), 1.0 / n);
  return sphere_point(rng, n, r);
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("FIBLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace fiblab
