#include "fiblab/exclusion.hpp"

#include <algorithm>
#include <limits>

namespace fiblab {

double ExclusionZone::angular_distance(const Vec& phi) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec& d : directions) best = std::min(best, linalg::angle(phi, d));
  return best;
}

double ExclusionZone::standoff_ratio(const Vec& x, const Vec& fx, const Mat& J) {
  const double denom = x.norm() * J.norm();
  if (denom == 0.0) return fx.norm() > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return fx.norm() / denom;
}

std::string ExclusionZone::reject_reason(const Vec& x, const Vec& fx, const Mat& J) const {
  const double nf = fx.norm();
  if (!(nf > 0.0) || standoff_ratio(x, fx, J) <= standoff) return "zero-set standoff";
  if (angular_distance(fx / nf) <= angle) return "discriminant proximity";
  return {};
}

}  // namespace fiblab
