#pragma once

// Batched evaluation of a family of polynomials in n variables.
//
// A PolyTable holds every polynomial a PolynomialMap needs (its p components
// followed by the p*n partial derivatives), flattened for the inner loops.
// Points are passed in structure-of-arrays layout: coordinate k of point i is
// points[k * stride + i]. Results are written to out[poly * stride + i].
//
// The scalar kernel is the reference. SIMD variants evaluate several points
// per instruction (one point per lane) and perform the exact same sequence of
// roundings, so their output is bit-identical to the reference.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fiblab::kernels {

struct PolyTable {
  int n = 0;                          // number of variables
  int max_exponent = 0;               // largest exponent of any variable
  std::vector<std::size_t> offsets;   // term range of polynomial j: [offsets[j], offsets[j+1])
  std::vector<double> coeffs;         // one per term
  std::vector<std::uint8_t> exponents;  // n per term

  std::size_t polys() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t terms() const { return coeffs.size(); }
};

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Variant used by eval(). Chosen once from the CPU, overridable through the
/// FIBLAB_ISA environment variable ("scalar" or "avx2") or set_isa().
Isa active_isa();
void set_isa(Isa isa);

/// Evaluates every polynomial of `table` at points [begin, end).
void eval_scalar(const PolyTable& table, const double* points, std::size_t stride,
                 std::size_t begin, std::size_t end, double* out);
void eval_avx2(const PolyTable& table, const double* points, std::size_t stride,
               std::size_t begin, std::size_t end, double* out);

/// Dispatches to the active variant over all `stride` points.
void eval(const PolyTable& table, const double* points, std::size_t stride, double* out);

}  // namespace fiblab::kernels
