#include "fiblab/pencil.hpp"

namespace fiblab::pencil {

Vec d_spherefication(const Jet& jet, const Vec& v) {
  const SplitVector s = radial_spherical_split(jet, v);
  return s.radial + s.spherical;
}

double d_spherefication_norm_sq(const Jet& jet, const Vec& v) {
  const Vec u = jet.J * v;
  const double xv = jet.x.dot(v);
  const double fu = jet.Fx.dot(u);
  return xv * xv / jet.H + (jet.H * u.squaredNorm() - fu * fu) / jet.h;
}

SplitVector radial_spherical_split(const Jet& jet, const Vec& v) {
  const Vec u = jet.J * v;
  SplitVector s;
  s.radial = (jet.x.dot(v) / jet.H) * jet.Fx;
  s.spherical = -(jet.Fx.dot(u) / jet.h) * jet.fx + (jet.norm_x / jet.norm_f) * u;
  return s;
}

double pencil_tangent_residual(const Jet& jet, const Vec& v) {
  const Vec u = jet.J * v;
  return (u - jet.fx * (jet.fx.dot(u) / jet.h)).norm();
}

bool is_tangent(const Jet& jet, const Vec& v, double rel_tol) {
  return pencil_tangent_residual(jet, v) <= rel_tol * scale(jet) * v.norm();
}

}  // namespace fiblab::pencil
