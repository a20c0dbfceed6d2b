#include "fiblab/jet.hpp"

#include <algorithm>
#include <cstdio>

#include "fiblab/error.hpp"
#include "fiblab/pencil.hpp"

namespace fiblab {

double default_floor(const Vec& x) { return 1e-9 * (1.0 + x.norm()); }

Jet jet(const PolynomialMap& map, const Vec& x, std::optional<double> floor) {
  return jet_from_values(x, map.eval(x), map.jacobian(x), floor);
}

Jet jet_from_values(const Vec& x, const Vec& fx, const Mat& J, std::optional<double> floor) {
  Jet j;
  j.x = x;
  j.fx = fx;
  j.J = J;
  j.norm_x = x.norm();
  j.norm_f = fx.norm();
  const double fl = floor.value_or(default_floor(x));
  if (!(j.norm_f > fl)) {
    char msg[128];
    std::snprintf(msg, sizeof msg, "on-zero-set: ||f(x)|| = %.3g <= floor %.3g", j.norm_f, fl);
    throw PointError(ErrorKind::OnZeroSet, msg, x);
  }
  j.h = fx.squaredNorm();
  j.grad_h = 2.0 * (J.transpose() * fx);
  j.H = x.squaredNorm();
  j.grad_H = 2.0 * x;
  j.phi = fx / j.norm_f;
  j.Fx = j.norm_x * j.phi;

  const int n = j.n();
  const int p = j.p();
  j.DF.resize(p, n);
  for (int c = 0; c < n; ++c) j.DF.col(c) = pencil::d_spherefication(j, Vec::Unit(n, c));

  j.aug.resize(p + 1, n);
  j.aug.topRows(p) = J;
  j.aug.row(p) = j.grad_H.transpose();
  return j;
}

double scale(const Jet& jet) {
  return std::max({1.0, jet.J.norm(), jet.norm_x, 1.0 / jet.norm_f});
}

}  // namespace fiblab
