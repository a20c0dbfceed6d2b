#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fiblab/exclusion.hpp"
#include "fiblab/jet.hpp"
#include "fiblab/lifting.hpp"
#include "fiblab/polymap.hpp"
#include "fiblab/sampling.hpp"

namespace fiblab::test {

struct RandomCase {
  PolynomialMap map;
  Vec x;
};

// Random map with n <= 6, p <= 3, degree <= 4, no constant terms.
inline PolynomialMap random_map(Rng& rng) {
  std::uniform_int_distribution<int> dn(2, 6);
  const int n = dn(rng);
  std::uniform_int_distribution<int> dp(2, std::min(3, n));
  const int p = dp(rng);
  std::uniform_int_distribution<int> terms(1, 4);
  std::uniform_int_distribution<int> deg(1, 4);
  std::uniform_int_distribution<int> var(0, n - 1);
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::vector<Polynomial> comps(p);
  for (auto& poly : comps) {
    const int t = terms(rng);
    for (int k = 0; k < t; ++k) {
      Term term;
      term.coeff = coeff(rng);
      term.exponents.assign(n, 0);
      const int d = deg(rng);
      for (int j = 0; j < d; ++j) ++term.exponents[var(rng)];
      poly.push_back(term);
    }
  }
  return PolynomialMap(n, comps, "random");
}

// Seeded suite of (map, point) pairs with ||f(x)|| > min_f.
inline std::vector<RandomCase> random_suite(std::size_t count, std::uint64_t seed = 0, double min_f = 1e-3) {
  std::vector<RandomCase> out;
  Rng rng(seed);
  while (out.size() < count) {
    PolynomialMap map = random_map(rng);
    for (int tries = 0; tries < 20; ++tries) {
      Vec x = ball_point(rng, map.n(), 1.0);
      if (map.eval(x).norm() > min_f) {
        out.push_back({map, x});
        break;
      }
    }
  }
  return out;
}

template <class F>
Mat central_jacobian(F&& f, const Vec& x, double h) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vec e = Vec::Zero(x.size());
    e(j) = h;
    J.col(j) = (f(x + e) - f(x - e)) / (2.0 * h);
  }
  return J;
}

inline Vec spherefication(const PolynomialMap& map, const Vec& x) {
  const Vec fx = map.eval(x);
  return x.norm() * fx / fx.norm();
}

inline double rel_err(const Mat& a, const Mat& b) {
  const double nb = b.norm();
  return nb > 1e-8 ? (a - b).norm() / nb : (a - b).norm();
}

// Images of the coordinate axes under the quadrics catalog map, the rays of its
// discriminant.
inline ExclusionZone quadrics_zone() {
  ExclusionZone zone;
  Vec a(2), b(2), c(2);
  a << 1, 0;
  b << -1, 1;
  c << -1, -1;
  zone.directions = {a, b.normalized(), c.normalized()};
  return zone;
}

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) out(i++) = d;
  return out;
}

inline Vec gaussian(Rng& rng, int n) {
  std::normal_distribution<double> g;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

// Component of v orthogonal to the columns of `span`.
inline Vec orthogonal_part(const Vec& v, const Mat& span) {
  const Eigen::HouseholderQR<Mat> qr(span);
  const Mat q = qr.householderQ() * Mat::Identity(span.rows(), span.cols());
  return v - q * (q.transpose() * v);
}

// v1 + a r against v2 + b s with r, s not antiparallel, v1, v2 normal to
// span(r, s) and a, b > 0. Returns the number of pairs flagged opposite.
inline std::size_t nod1_violations(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> pos(1e-3, 10.0);
  std::uniform_int_distribution<int> dim(3, 6);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const int n = dim(rng);
    const Vec r = gaussian(rng, n);
    Vec s = gaussian(rng, n);
    while (linalg::cosine(r, s) < -1 + 1e-6) s = gaussian(rng, n);
    Mat span(n, 2);
    span << r, s;
    const Vec v1 = orthogonal_part(gaussian(rng, n), span);
    const Vec v2 = orthogonal_part(gaussian(rng, n), span);
    if (lifting::opposite_directions(v1 + pos(rng) * r, v2 + pos(rng) * s, 1e-9)) ++bad;
  }
  return bad;
}

// r + k against s = -c r with k normal to r. |k|/|r| is log-uniform in
// [1e-2, 1e2]: below about 4.5e-5 the pair is within the 1e-9 cosine band of
// antiparallel even though it is not exactly so.
inline std::size_t nod2_violations(std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> pos(1e-3, 10.0);
  std::uniform_int_distribution<int> dim(2, 6);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const int n = dim(rng);
    const Vec r = gaussian(rng, n);
    const Vec s = -pos(rng) * r;
    Mat span(n, 1);
    span << r;
    Vec k = orthogonal_part(gaussian(rng, n), span);
    k *= r.norm() * log_uniform_radius(rng, 1e-2, 1e2) / k.norm();
    if (lifting::opposite_directions(r + k, s, 1e-9)) ++bad;
  }
  return bad;
}

}  // namespace fiblab::test
