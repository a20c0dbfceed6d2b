#pragma once

#include <optional>

#include "fiblab/linalg.hpp"
#include "fiblab/polymap.hpp"

namespace fiblab {

/// First-order data of f at a point off V.
///
/// h = ||f||^2 and H = ||x||^2 are the functions whose level sets are the
/// tubes and the spheres; Phi = f/||f|| and F = ||x|| Phi is the
/// spherefication. `aug` is the Jacobian of x -> (f(x), ||x||^2), whose
/// critical points form the set where fibers of f and F share tangent spaces.
struct Jet {
  Vec x;
  Vec fx;
  Mat J;        // p x n
  double h = 0.0;
  Vec grad_h;   // 2 J^T f
  double H = 0.0;
  Vec grad_H;   // 2x
  Vec phi;
  Vec Fx;
  Mat DF;       // p x n, columns from the closed formula
  Mat aug;      // (p+1) x n
  double norm_x = 0.0;
  double norm_f = 0.0;

  int n() const { return static_cast<int>(x.size()); }
  int p() const { return static_cast<int>(fx.size()); }
};

/// 1e-9 * (1 + ||x||).
double default_floor(const Vec& x);

/// Throws PointError(OnZeroSet) when ||f(x)|| <= floor.
Jet jet(const PolynomialMap& map, const Vec& x, std::optional<double> floor = std::nullopt);

/// Builds a jet from already-evaluated f(x) and Df_x (batched scans).
Jet jet_from_values(const Vec& x, const Vec& fx, const Mat& J,
                    std::optional<double> floor = std::nullopt);

/// Tolerance scale max(1, ||J||_F, ||x||, 1/||f(x)||).
double scale(const Jet& jet);

}  // namespace fiblab
