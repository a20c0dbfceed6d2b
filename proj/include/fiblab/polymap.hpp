#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "fiblab/kernels.hpp"
#include "fiblab/linalg.hpp"

namespace fiblab {

struct Term {
  double coeff = 0.0;
  std::vector<int> exponents;
};

using Polynomial = std::vector<Term>;

/// A polynomial map germ f: R^n -> R^p with f(0) = 0 and 2 <= p <= n.
///
/// Terms are kept in lexicographic order of their exponent vectors, so the
/// pairwise summation in the evaluation kernels is reproducible. Partial
/// derivatives are differentiated symbolically at construction. Immutable
/// after construction; all member functions are safe to call concurrently.
class PolynomialMap {
 public:
  /// Validates the invariants and throws InputError naming the offending
  /// component/term. A component with no nonzero term is rejected unless
  /// `allow_constant_zero` is set.
  PolynomialMap(int n, std::vector<Polynomial> components, std::string name = {},
                bool allow_constant_zero = false);

  int n() const { return n_; }
  int p() const { return static_cast<int>(components_.size()); }
  const std::string& name() const { return name_; }
  bool allow_constant_zero() const { return allow_constant_zero_; }
  const std::vector<Polynomial>& components() const { return components_; }
  const Polynomial& derivative(int i, int j) const { return derivatives_[i * n_ + j]; }
  int degree() const;

  Vec eval(const Vec& x) const;
  Mat jacobian(const Vec& x) const;

  /// f(x) and Df_x for many points at once through the SIMD-dispatched kernel.
  /// Bit-identical to calling eval/jacobian per point.
  void eval_batch(const std::vector<Vec>& points, std::vector<Vec>* values,
                  std::vector<Mat>* jacobians) const;

  /// Same map with every coefficient multiplied by c.
  PolynomialMap scaled(double c) const;

 private:
  void check_dim(const Vec& x) const;

  int n_;
  std::vector<Polynomial> components_;
  std::vector<Polynomial> derivatives_;  // row-major p x n
  std::string name_;
  bool allow_constant_zero_;
  kernels::PolyTable values_table_;
  kernels::PolyTable jacobian_table_;
  kernels::PolyTable full_table_;
};

Vec eval(const PolynomialMap& map, const Vec& x);
Mat jacobian(const PolynomialMap& map, const Vec& x);

/// Parses the JSON map fragment
///   {"n":2,"p":2,"components":[[{"c":1,"e":[2,0]},...],...]}
/// with optional "name" and "allow_constant_zero".
PolynomialMap parse_map(std::string_view text);

}  // namespace fiblab
