#include "fiblab/discriminant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fiblab/error.hpp"

namespace fiblab::discriminant {

namespace {

constexpr std::uint64_t kSearchStream = 0x445343;  // "DSC"

struct Polished {
  Vec x;
  double margin = 1.0;
  bool ok = false;
};

// Gauss-Newton on the system Df_x^T u = 0, (|u|^2 - 1)/2 = 0 in the unknowns
// (x, u), started from the left singular vector of sigma_p. Its solutions are
// exactly the critical points paired with a left null vector. The derivative
// of Df_x^T u in x comes from central differences of the exact Jacobian.
Polished polish(const PolynomialMap& map, Vec x, double radius, const SearchCfg& cfg) {
  const int p = map.p();
  const int n = map.n();
  const double h = 1e-5 * radius;

  auto residual = [&](const Vec& y, const Vec& u) {
    Vec r(n + 1);
    r.head(n) = map.jacobian(y).transpose() * u;
    r(n) = 0.5 * (u.squaredNorm() - 1.0);
    return r;
  };

  Vec u;
  {
    Eigen::JacobiSVD<Mat> svd(map.jacobian(x), Eigen::ComputeThinU);
    u = svd.matrixU().col(p - 1);
  }
  Vec r = residual(x, u);
  for (int it = 0; it < cfg.iterations && r.norm() > 1e-300; ++it) {
    Mat G = Mat::Zero(n + 1, n + p);
    for (int k = 0; k < n; ++k) {
      const Vec e = Vec::Unit(n, k) * h;
      G.block(0, k, n, 1) = (map.jacobian(x + e) - map.jacobian(x - e)).transpose() * u / (2.0 * h);
    }
    G.block(0, n, n, p) = map.jacobian(x).transpose();
    G.block(n, n, 1, p) = u.transpose();
    Vec step = linalg::min_norm_solve(G, -r, 1e-12).x;
    if (step.head(n).norm() > 0.25 * radius) step *= 0.25 * radius / step.head(n).norm();

    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      Vec xc = x + step.head(n);
      if (xc.norm() > radius) xc *= radius / xc.norm();
      const Vec uc = u + step.tail(p);
      const Vec rc = residual(xc, uc);
      if (rc.norm() < r.norm()) {
        x = xc;
        u = uc;
        r = rc;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  Polished out;
  out.x = x;
  const CriticalMargin cm = critical_margin(map, x);
  out.margin = cm.margin;
  out.ok = !cm.totally_degenerate && cm.margin < cfg.keep_margin && x.norm() > 0.0;
  return out;
}

double angle_to(const Vec& d, const Vec& e) { return linalg::angle(d, e); }

std::vector<RayCluster> cluster_by_shell(const DiscriminantReport& rep, double inner, double outer,
                                         std::size_t* count) {
  std::vector<Vec> dirs;
  for (const auto& s : rep.samples)
    if (s.direction.size() > 0 && s.radius > inner && s.radius <= outer) dirs.push_back(s.direction);
  *count = dirs.size();
  return cluster_directions(dirs, rep.cluster_angle);
}

bool covers(const std::vector<RayCluster>& a, const std::vector<RayCluster>& b, double threshold) {
  for (const auto& cb : b) {
    bool hit = false;
    for (const auto& ca : a) hit = hit || angle_to(ca.direction, cb.direction) < threshold;
    if (!hit) return false;
  }
  return true;
}

}  // namespace

CriticalMargin critical_margin(const Mat& J) {
  const Vec s = linalg::singular_values(J);
  if (s.size() == 0 || !(s(0) > 0.0)) return {0.0, true};
  return {s(J.rows() - 1) / s(0), false};
}

CriticalMargin critical_margin(const PolynomialMap& map, const Vec& x) {
  return critical_margin(map.jacobian(x));
}

std::vector<RayCluster> cluster_directions(const std::vector<Vec>& directions, double threshold,
                                           std::vector<int>* assignment, std::size_t* ambiguous) {
  std::vector<Vec> seeds;
  std::vector<Vec> sums;
  std::vector<std::size_t> counts;
  std::vector<int> assign(directions.size(), -1);
  std::size_t amb = 0;
  for (std::size_t i = 0; i < directions.size(); ++i) {
    int hit = -1;
    int hits = 0;
    for (std::size_t c = 0; c < seeds.size(); ++c) {
      if (angle_to(seeds[c], directions[i]) < threshold) {
        if (hit < 0) hit = static_cast<int>(c);
        ++hits;
      }
    }
    if (hits > 1) ++amb;
    if (hit < 0) {
      hit = static_cast<int>(seeds.size());
      seeds.push_back(directions[i]);
      sums.push_back(Vec::Zero(directions[i].size()));
      counts.push_back(0);
    }
    sums[hit] += directions[i];
    ++counts[hit];
    assign[i] = hit;
  }
  std::vector<RayCluster> out(seeds.size());
  for (std::size_t c = 0; c < seeds.size(); ++c) {
    out[c].direction = sums[c].normalized();
    out[c].members = counts[c];
  }
  for (std::size_t i = 0; i < directions.size(); ++i) {
    RayCluster& c = out[assign[i]];
    c.spread = std::max(c.spread, angle_to(c.direction, directions[i]));
  }
  if (assignment) *assignment = std::move(assign);
  if (ambiguous) *ambiguous = amb;
  return out;
}

DiscriminantReport sample_discriminant(const PolynomialMap& map, double radius, const SamplerCfg& sampler,
                                       const SearchCfg& cfg) {
  if (!(radius > 0.0)) throw InputError("discriminant: ball radius must be positive");
  DiscriminantReport rep;
  rep.map_name = map.name();
  rep.ball_radius = radius;
  rep.cluster_angle = cfg.cluster_angle;
  rep.starts = cfg.starts;

  std::vector<Polished> found(cfg.starts);
  parallel_for(cfg.starts, sampler.threads, [&](std::size_t i) {
    Rng rng(sample_seed(sampler.seed, kSearchStream, i));
    found[i] = polish(map, ball_point(rng, map.n(), radius), radius, cfg);
  });

  for (const Polished& c : found) {
    if (!c.ok) continue;
    DeltaSample s;
    s.x = c.x;
    s.margin = c.margin;
    s.image = map.eval(c.x);
    s.radius = s.image.norm();
    bool duplicate = false;
    for (const auto& prev : rep.samples)
      duplicate = duplicate || (prev.image - s.image).norm() <= cfg.dedup * (1.0 + s.radius);
    if (duplicate) continue;
    if (s.radius >= cfg.min_image_radius) s.direction = s.image / s.radius;
    rep.samples.push_back(std::move(s));
  }

  std::vector<Vec> dirs;
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < rep.samples.size(); ++i) {
    if (rep.samples[i].direction.size() == 0) continue;
    dirs.push_back(rep.samples[i].direction);
    owner.push_back(i);
  }
  std::vector<int> assign;
  rep.clusters = cluster_directions(dirs, cfg.cluster_angle, &assign, &rep.ambiguous);
  for (std::size_t k = 0; k < owner.size(); ++k) rep.samples[owner[k]].cluster = assign[k];
  return rep;
}

std::vector<double> default_radii(const DiscriminantReport& report, int count) {
  double rmax = 0.0;
  for (const auto& s : report.samples)
    if (s.direction.size() > 0) rmax = std::max(rmax, s.radius);
  if (!(rmax > 0.0)) rmax = report.ball_radius;
  std::vector<double> radii(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) radii[k] = rmax * std::ldexp(1.0, k - (count - 1));
  return radii;
}

DiscriminantReport linearity_check(DiscriminantReport report, const std::vector<double>& radii) {
  if (radii.size() < 2) throw InputError("linearity_check: need at least two shell radii");
  std::vector<double> r = radii;
  std::sort(r.begin(), r.end());
  if (!(r.front() > 0.0)) throw InputError("linearity_check: shell radii must be positive");

  report.shells.clear();
  const std::vector<RayCluster>* reference = nullptr;
  bool all_agree = true;
  report.eta = 0.0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    Shell sh;
    sh.inner = k == 0 ? 0.0 : r[k - 1];
    sh.outer = r[k];
    sh.clusters = cluster_by_shell(report, sh.inner, sh.outer, &sh.samples);
    report.shells.push_back(std::move(sh));
  }
  for (std::size_t k = 0; k < report.shells.size(); ++k) {
    Shell& sh = report.shells[k];
    if (sh.samples > 0) {
      if (!reference)
        reference = &sh.clusters;
      else
        sh.agrees = covers(*reference, sh.clusters, report.cluster_angle) &&
                    covers(sh.clusters, *reference, report.cluster_angle);
    }
    all_agree = all_agree && sh.agrees;
    if (all_agree) report.eta = sh.outer;
  }

  for (auto& s : report.samples) {
    s.shell = -1;
    for (std::size_t k = 0; k < report.shells.size(); ++k)
      if (s.radius > report.shells[k].inner && s.radius <= report.shells[k].outer) s.shell = static_cast<int>(k);
  }

  std::vector<Vec> agreed;
  for (const auto& s : report.samples)
    if (s.direction.size() > 0 && s.radius <= report.eta) agreed.push_back(s.direction);
  std::size_t ambiguous = 0;
  report.directions.clear();
  for (const auto& c : cluster_directions(agreed, report.cluster_angle, nullptr, &ambiguous))
    report.directions.push_back(c.direction);
  report.linear = all_agree && report.ambiguous == 0 && ambiguous == 0;
  return report;
}

std::string samples_csv(const DiscriminantReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "radius";
  const std::size_t p = report.samples.empty() ? 0 : static_cast<std::size_t>(report.samples.front().image.size());
  for (std::size_t i = 0; i < p; ++i) out << ",u" << (i + 1);
  out << ",cluster\n";
  for (const auto& s : report.samples) {
    out << s.radius;
    const Vec d = s.direction.size() > 0 ? s.direction : Vec::Zero(static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < d.size(); ++i) out << ',' << d(i);
    out << ',' << s.cluster << '\n';
  }
  return out.str();
}

}  // namespace fiblab::discriminant
