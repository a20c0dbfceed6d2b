#include <vector>

#include "fiblab/kernels.hpp"
#include "pairwise.hpp"

namespace fiblab::kernels {

void eval_scalar(const PolyTable& table, const double* points, std::size_t stride,
                 std::size_t begin, std::size_t end, double* out) {
  const int n = table.n;
  const int width = table.max_exponent + 1;
  std::vector<double> powers(static_cast<std::size_t>(n) * width);
  std::vector<double> scratch(table.terms());
  const auto add = [](double a, double b) { return a + b; };

  for (std::size_t i = begin; i < end; ++i) {
    for (int k = 0; k < n; ++k) {
      const double xk = points[k * stride + i];
      double* pw = &powers[static_cast<std::size_t>(k) * width];
      pw[0] = 1.0;
      for (int e = 1; e < width; ++e) pw[e] = pw[e - 1] * xk;
    }
    for (std::size_t j = 0; j < table.polys(); ++j) {
      const std::size_t t0 = table.offsets[j];
      const std::size_t t1 = table.offsets[j + 1];
      for (std::size_t t = t0; t < t1; ++t) {
        const std::uint8_t* e = &table.exponents[t * n];
        double m = table.coeffs[t];
        for (int k = 0; k < n; ++k) m = m * powers[static_cast<std::size_t>(k) * width + e[k]];
        scratch[t - t0] = m;
      }
      out[j * stride + i] = pairwise_sum(scratch.data(), t1 - t0, 0.0, add);
    }
  }
}

}  // namespace fiblab::kernels
