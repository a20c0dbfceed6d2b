// Compiled with -mavx2; only reached after a runtime CPU check.

#include <immintrin.h>

#pragma GCC diagnostic ignored "-Wignored-attributes"

#include <vector>

#include "fiblab/kernels.hpp"
#include "pairwise.hpp"

namespace fiblab::kernels {

namespace {
constexpr std::size_t kLanes = 4;
}

void eval_avx2(const PolyTable& table, const double* points, std::size_t stride,
               std::size_t begin, std::size_t end, double* out) {
  const int n = table.n;
  const int width = table.max_exponent + 1;
  std::vector<__m256d> powers(static_cast<std::size_t>(n) * width);
  std::vector<__m256d> scratch(table.terms());
  const auto add = [](__m256d a, __m256d b) { return _mm256_add_pd(a, b); };
  const __m256d zero = _mm256_setzero_pd();

  std::size_t i = begin;
  for (; i + kLanes <= end; i += kLanes) {
    for (int k = 0; k < n; ++k) {
      const __m256d xk = _mm256_loadu_pd(points + k * stride + i);
      __m256d* pw = &powers[static_cast<std::size_t>(k) * width];
      pw[0] = _mm256_set1_pd(1.0);
      for (int e = 1; e < width; ++e) pw[e] = _mm256_mul_pd(pw[e - 1], xk);
    }
    for (std::size_t j = 0; j < table.polys(); ++j) {
      const std::size_t t0 = table.offsets[j];
      const std::size_t t1 = table.offsets[j + 1];
      for (std::size_t t = t0; t < t1; ++t) {
        const std::uint8_t* e = &table.exponents[t * n];
        __m256d m = _mm256_set1_pd(table.coeffs[t]);
        for (int k = 0; k < n; ++k)
          m = _mm256_mul_pd(m, powers[static_cast<std::size_t>(k) * width + e[k]]);
        scratch[t - t0] = m;
      }
      _mm256_storeu_pd(out + j * stride + i, pairwise_sum(scratch.data(), t1 - t0, zero, add));
    }
  }
  if (i < end) eval_scalar(table, points, stride, i, end, out);
}

}  // namespace fiblab::kernels
