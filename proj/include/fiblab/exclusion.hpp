#pragma once

#include <string>
#include <vector>

#include "fiblab/linalg.hpp"

namespace fiblab {

/// Quantitative standoff from f^{-1}(Delta) used by every sampler.
///
/// A point is usable when Phi(x) is farther than `angle` radians from each
/// discriminant direction and ||f(x)|| > standoff * ||x|| * ||Df_x||_F. The
/// second test is scale-free: the ratio is homogeneous of degree 0 for
/// homogeneous maps, so it behaves the same on every sphere.
struct ExclusionZone {
  std::vector<Vec> directions;  // unit vectors in R^p (the set A)
  double angle = 0.05;
  double standoff = 0.05;

  /// Smallest angle from phi to any direction; +inf when there are none.
  double angular_distance(const Vec& phi) const;

  /// ||f|| / (||x|| ||J||_F).
  static double standoff_ratio(const Vec& x, const Vec& fx, const Mat& J);

  /// Empty when the point is usable, otherwise "zero-set standoff" or
  /// "discriminant proximity".
  std::string reject_reason(const Vec& x, const Vec& fx, const Mat& J) const;
};

}  // namespace fiblab
