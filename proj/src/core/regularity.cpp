#include "fiblab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fiblab/error.hpp"

namespace fiblab::regularity {

namespace {

constexpr std::uint64_t kDregStream = 0x445247;   // "DRG"
constexpr std::uint64_t kTransStream = 0x545253;  // "TRS"
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(const Vec& s, int k) {
  if (s.size() == 0 || !(s(0) > 0.0)) return 0.0;
  return k >= 1 && k <= s.size() ? s(k - 1) / s(0) : 0.0;
}

Mat tangent_basis(const Vec& x) {
  Mat a(x.size(), 1);
  a.col(0) = x;
  return linalg::orthonormal_complement(a);
}

double margin_from_values(const Vec& x, const Vec& fx, const Mat& J, const ExclusionZone& zone) {
  if (!(fx.norm() > default_floor(x))) return kNaN;
  if (!zone.reject_reason(x, fx, J).empty()) return kNaN;
  return dreg_margin(jet_from_values(x, fx, J));
}

Vec retract(const Vec& y, double r) { return y * (r / y.norm()); }

struct Descent {
  Vec x;
  double margin = 0.0;
};

// Projected descent on the sphere of radius ||x0||. Unusable points count as
// +inf so the search never crosses into the exclusion zone.
Descent descend(const PolynomialMap& map, const Vec& x0, double m0, const ExclusionZone& zone,
                const AdversarialCfg& cfg, double floor_margin) {
  const double r = x0.norm();
  auto objective = [&](const Vec& y) {
    const double m = margin_at(map, y, zone);
    return std::isnan(m) ? std::numeric_limits<double>::infinity() : m;
  };
  Descent best{x0, m0};
  double step = cfg.initial_step * r;
  const double h = cfg.fd_step * r;
  for (int it = 0; it < cfg.iterations && best.margin > floor_margin; ++it) {
    const Mat B = tangent_basis(best.x);
    Vec g = Vec::Zero(B.cols());
    for (Eigen::Index k = 0; k < B.cols(); ++k) {
      const double up = objective(retract(best.x + h * B.col(k), r));
      const double dn = objective(retract(best.x - h * B.col(k), r));
      if (std::isfinite(up) && std::isfinite(dn))
        g(k) = (up - dn) / (2.0 * h);
      else if (std::isfinite(up))
        g(k) = (up - best.margin) / h;
      else if (std::isfinite(dn))
        g(k) = (best.margin - dn) / h;
    }
    if (!(g.norm() > 0.0)) break;
    const Vec dir = (B * g).normalized();
    bool moved = false;
    while (step > 1e-12 * r) {
      const Vec cand = retract(best.x - step * dir, r);
      const double mc = objective(cand);
      if (mc < best.margin) {
        best = {cand, mc};
        step = std::min(1.5 * step, r);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return best;
}

double quantile(std::vector<double> sorted, double q) {
  if (sorted.empty()) return kNaN;
  const auto idx = static_cast<std::size_t>(std::floor(q * static_cast<double>(sorted.size() - 1)));
  return sorted[idx];
}

}  // namespace

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

double dreg_margin(const Jet& jet) { return ratio(linalg::singular_values(jet.DF), jet.p()); }

double sphere_margin(const Jet& jet) {
  const int p = jet.p();
  const Mat proj = Mat::Identity(p, p) - jet.phi * jet.phi.transpose();
  // A = ||x|| DPhi on the tangent space of the sphere. In the frames
  // (x/||x||, T_x S) and (Phi, T_Phi S) DF is block lower triangular with a 1
  // in the radial corner and A in the other, so DF is onto iff A has rank p-1.
  // The radial singular value 1 is the reference scale.
  const Mat a = jet.norm_x * (proj * jet.J / jet.norm_f) * tangent_basis(jet.x);
  const Vec s = linalg::singular_values(a);
  if (s.size() < p - 1) return 0.0;
  return s(p - 2) / std::max(1.0, s(0));
}

MarginAgreement cross_check(const Jet& jet, double zero_tol) {
  MarginAgreement out;
  out.submersion = dreg_margin(jet);
  out.sphere = sphere_margin(jet);
  out.agree = (out.submersion < zero_tol) == (out.sphere < zero_tol);
  return out;
}

double margin_at(const PolynomialMap& map, const Vec& x, const ExclusionZone& zone) {
  return margin_from_values(x, map.eval(x), map.jacobian(x), zone);
}

RegularityReport dreg_scan(const PolynomialMap& map, double eps, const SamplerCfg& sampler,
                           const ExclusionZone& zone, const Thresholds& thresholds,
                           const AdversarialCfg& adversarial, bool keep_samples) {
  if (!(eps > 0.0)) throw InputError("epsilon: must be positive");
  RegularityReport rep;
  rep.map_name = map.name();
  rep.epsilon = eps;
  rep.thresholds = thresholds;
  rep.drawn = sampler.samples;

  std::vector<Vec> points(sampler.samples);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Rng rng(sample_seed(sampler.seed, kDregStream, i));
    points[i] = sphere_point(rng, map.n(), log_uniform_radius(rng, eps / 100.0, eps));
  }
  std::vector<Vec> values;
  std::vector<Mat> jacobians;
  map.eval_batch(points, &values, &jacobians);

  std::vector<double> margins(points.size(), kNaN);
  parallel_for(points.size(), sampler.threads, [&](std::size_t i) {
    margins[i] = margin_from_values(points[i], values[i], jacobians[i], zone);
  });

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < points.size(); ++i)
    if (!std::isnan(margins[i])) order.push_back(i);
  rep.used = order.size();
  if (order.empty())
    throw InputError("dreg_scan: every sample fell inside the zero-set floor or exclusion zone");

  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return margins[a] < margins[b]; });
  std::vector<double> sorted;
  sorted.reserve(order.size());
  for (std::size_t i : order) sorted.push_back(margins[i]);
  rep.min = sorted.front();
  rep.p1 = quantile(sorted, 0.01);
  rep.median = quantile(sorted, 0.5);

  for (std::size_t i : order) {
    if (margins[i] >= thresholds.fail) break;
    rep.witnesses.push_back({points[i], points[i].norm(), margins[i]});
  }
  if (keep_samples) {
    for (std::size_t i = 0; i < points.size(); ++i)
      if (!std::isnan(margins[i])) rep.samples.push_back({points[i], points[i].norm(), margins[i]});
  }

  const std::size_t starts = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, adversarial.restarts)),
                                                   order.size());
  std::vector<Descent> found(starts);
  parallel_for(starts, sampler.threads, [&](std::size_t k) {
    const std::size_t i = order[k];
    found[k] = descend(map, points[i], margins[i], zone, adversarial, thresholds.fail * 1e-6);
  });

  rep.adversarial_min = rep.min;
  rep.adversarial_argmin = points[order.front()];
  for (const Descent& d : found) {
    if (d.margin < rep.adversarial_min) {
      rep.adversarial_min = d.margin;
      rep.adversarial_argmin = d.x;
    }
    if (d.margin < thresholds.fail) rep.witnesses.push_back({d.x, d.x.norm(), d.margin});
  }

  if (!rep.witnesses.empty())
    rep.verdict = Verdict::Fail;
  else if (rep.adversarial_min > thresholds.pass)
    rep.verdict = Verdict::Pass;
  else
    rep.verdict = Verdict::Inconclusive;
  return rep;
}

double fiber_sphere_transversality(const Jet& jet, double eps, double full_rank) {
  if (jet.n() <= jet.p())
    throw InputError("fiber_sphere_transversality: requires n > p (fibers of an n = p map are points)");
  if (!(std::abs(jet.norm_x - eps) <= 1e-9 * std::max(1.0, eps)))
    throw InputError("fiber_sphere_transversality: point is not on the sphere of radius epsilon");
  const double s = ratio(linalg::singular_values(jet.J), jet.p());
  if (!(s > full_rank))
    throw PointError(ErrorKind::CriticalPoint, "critical point: Df_x is not surjective", jet.x, s);
  return (linalg::kernel_projector(jet.J) * jet.x).norm() / jet.norm_x;
}

TransversalityReport transversality_scan(const PolynomialMap& map, double eps, const SamplerCfg& sampler,
                                         const ExclusionZone& zone) {
  if (!(eps > 0.0)) throw InputError("epsilon: must be positive");
  TransversalityReport rep;
  rep.epsilon = eps;
  rep.drawn = sampler.samples;
  if (map.n() <= map.p()) return rep;

  std::vector<Vec> points(sampler.samples);
  for (std::size_t i = 0; i < points.size(); ++i) {
    Rng rng(sample_seed(sampler.seed, kTransStream, i));
    points[i] = sphere_point(rng, map.n(), eps);
  }
  std::vector<Vec> values;
  std::vector<Mat> jacobians;
  map.eval_batch(points, &values, &jacobians);

  std::vector<double> margins(points.size(), kNaN);
  std::vector<char> critical(points.size(), 0);
  parallel_for(points.size(), sampler.threads, [&](std::size_t i) {
    if (!(values[i].norm() > default_floor(points[i]))) return;
    if (!zone.reject_reason(points[i], values[i], jacobians[i]).empty()) return;
    try {
      margins[i] = fiber_sphere_transversality(jet_from_values(points[i], values[i], jacobians[i]), eps);
    } catch (const PointError&) {
      critical[i] = 1;
    }
  });

  rep.min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (critical[i]) ++rep.critical;
    if (std::isnan(margins[i])) continue;
    ++rep.used;
    if (margins[i] < rep.min) {
      rep.min = margins[i];
      rep.argmin = points[i];
    }
  }
  return rep;
}

std::string margins_csv(const RegularityReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "radius,margin\n";
  for (const auto& s : report.samples) out << s.radius << ',' << s.margin << '\n';
  return out.str();
}

}  // namespace fiblab::regularity
