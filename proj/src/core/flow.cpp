#include "fiblab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fiblab/error.hpp"
#include "fiblab/milnorfield.hpp"

namespace fiblab::flow {

namespace {

constexpr std::uint64_t kTubeStream = 0x545542;  // "TUB"

// Dormand-Prince 5(4) coefficients.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct FieldEval {
  Vec w;
  lifting::Case label = lifting::Case::TransverseGeneric;
  Status status = Status::Reached;  // Reached means the evaluation succeeded
  std::string reason;
};

FieldEval evaluate(const PolynomialMap& map, const Vec& x, const FlowOpts& opts, double sign) {
  FieldEval out;
  try {
    const Jet j = jet(map, x);
    const milnorfield::FieldSample s = milnorfield::milnor_vector(j, opts.tols, nullptr, opts.construction);
    out.label = s.label.kind;
    if (!(s.ip_sphere > 0.0)) {
      out.status = Status::TransversalityLost;
      out.reason = "transversality lost: <w~, grad H> <= 0";
      return out;
    }
    out.w = (sign * 2.0 * j.norm_x / s.ip_sphere) * s.w_tilde;
  } catch (const Error& e) {
    out.status = Status::FieldError;
    out.reason = e.what();
  }
  return out;
}

struct StepResult {
  bool ok = false;
  Vec y5;
  Vec k7;
  lifting::Case label7 = lifting::Case::TransverseGeneric;
  double err = 0.0;
  FieldEval failed;
};

StepResult rk_step(const PolynomialMap& map, const Vec& y, const Vec& k1, double h, const FlowOpts& opts,
                   double sign) {
  StepResult r;
  auto eval = [&](const Vec& z, Vec& k) {
    FieldEval f = evaluate(map, z, opts, sign);
    if (f.status != Status::Reached) {
      r.failed = std::move(f);
      return false;
    }
    k = std::move(f.w);
    r.label7 = f.label;
    return true;
  };
  Vec k2, k3, k4, k5, k6, k7;
  if (!eval(y + h * (a21 * k1), k2)) return r;
  if (!eval(y + h * (a31 * k1 + a32 * k2), k3)) return r;
  if (!eval(y + h * (a41 * k1 + a42 * k2 + a43 * k3), k4)) return r;
  if (!eval(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), k5)) return r;
  if (!eval(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6)) return r;
  r.y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  if (!eval(r.y5, k7)) return r;
  const Vec err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double sc = opts.atol + opts.rtol * std::max(std::abs(y(i)), std::abs(r.y5(i)));
    acc += (err(i) / sc) * (err(i) / sc);
  }
  r.err = std::sqrt(acc / static_cast<double>(y.size()));
  r.k7 = std::move(k7);
  r.ok = true;
  return r;
}

FlowStep make_step(const PolynomialMap& map, double t, const Vec& x) {
  FlowStep s;
  s.t = t;
  s.x = x;
  s.r = x.norm();
  const Vec fx = map.eval(x);
  s.fnorm = fx.norm();
  s.phi = s.fnorm > 0.0 ? Vec(fx / s.fnorm) : Vec::Zero(fx.size());
  return s;
}

FlowTrace run(const PolynomialMap& map, const Vec& x0, double target, const FlowOpts& opts, double sign) {
  FlowTrace tr;
  tr.x0 = x0;
  tr.target = target;
  // Signed distance to the event: negative before, nonnegative once crossed.
  auto gap = [&](const Vec& y) { return sign * (y.norm() - target); };

  FieldEval first = evaluate(map, x0, opts, sign);
  tr.steps.push_back(make_step(map, 0.0, x0));
  if (first.status != Status::Reached) {
    tr.status = first.status;
    tr.failure = first.reason;
    tr.x_end = x0;
    return tr;
  }
  ++tr.cases[static_cast<std::size_t>(first.label)];

  Vec y = x0;
  Vec k1 = first.w;
  double t = 0.0;
  double h = std::max(0.01 * target, std::abs(target - x0.norm()) * 0.01);
  const double h_min = 1e-14 * std::max(1.0, target);
  const Vec phi0 = tr.steps.front().phi;

  auto push = [&](double tt, const Vec& x, lifting::Case label) {
    FlowStep s = make_step(map, tt, x);
    const FlowStep& prev = tr.steps.back();
    if (!(sign * (s.r - prev.r) > 0.0)) tr.monotone_r = false;
    if (!(sign * (s.fnorm - prev.fnorm) > 0.0)) tr.monotone_h = false;
    tr.phi_drift = std::max(tr.phi_drift, (s.phi - phi0).norm());
    ++tr.cases[static_cast<std::size_t>(label)];
    tr.steps.push_back(std::move(s));
  };

  while (true) {
    if (tr.steps.size() > opts.max_steps) {
      tr.status = Status::NoConvergence;
      tr.failure = "no convergence: step limit exceeded";
      break;
    }
    if (h < h_min) {
      tr.status = Status::FieldError;
      tr.failure = "step size underflow";
      break;
    }
    StepResult st = rk_step(map, y, k1, h, opts, sign);
    if (!st.ok) {
      ++tr.rejected;
      if (st.failed.status == Status::TransversalityLost && h <= 1e-6 * target) {
        tr.status = st.failed.status;
        tr.failure = st.failed.reason;
        break;
      }
      if (h <= 1e-8 * target) {
        tr.status = st.failed.status;
        tr.failure = st.failed.reason;
        break;
      }
      h *= 0.25;
      continue;
    }
    const double factor = st.err > 0.0 ? 0.9 * std::pow(st.err, -0.2) : 5.0;
    if (st.err > 1.0) {
      ++tr.rejected;
      h *= std::max(0.2, factor);
      continue;
    }

    if (gap(st.y5) >= 0.0) {
      // Bisection on the step length for the crossing of ||x|| = target.
      double lo = 0.0, hi = h;
      Vec y_hit = st.y5;
      lifting::Case label = st.label7;
      bool located = std::abs(gap(st.y5)) <= opts.event_tol * target;
      double t_hit = t + h;
      for (int it = 0; it < 200 && !located; ++it) {
        const double mid = 0.5 * (lo + hi);
        StepResult sm = rk_step(map, y, k1, mid, opts, sign);
        if (!sm.ok) {
          tr.status = sm.failed.status;
          tr.failure = sm.failed.reason;
          tr.x_end = y;
          tr.t_end = t;
          return tr;
        }
        const double g = gap(sm.y5);
        y_hit = sm.y5;
        label = sm.label7;
        t_hit = t + mid;
        if (std::abs(g) <= opts.event_tol * target) {
          located = true;
        } else if (g > 0.0) {
          hi = mid;
        } else {
          lo = mid;
        }
        if (hi - lo < 1e-17 * std::max(1.0, target)) located = true;
      }
      push(t_hit, y_hit, label);
      tr.x_end = y_hit;
      tr.t_end = t_hit;
      tr.status = Status::Reached;
      break;
    }

    t += h;
    y = st.y5;
    k1 = st.k7;
    push(t, y, st.label7);
    if (!opts.zone.directions.empty()) {
      const double ang = opts.zone.angular_distance(tr.steps.back().phi);
      if (ang <= opts.zone.angle) {
        tr.status = Status::DiscriminantProximity;
        tr.failure = "discriminant proximity";
        break;
      }
    }
    h *= std::min(5.0, std::max(0.2, factor));
  }
  if (tr.x_end.size() == 0) {
    tr.x_end = y;
    tr.t_end = t;
  }
  return tr;
}

}  // namespace

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Reached: return "reached";
    case Status::TransversalityLost: return "transversality lost";
    case Status::DiscriminantProximity: return "discriminant proximity";
    case Status::NoConvergence: return "no convergence";
    case Status::FieldError: return "field error";
  }
  return "unknown";
}

Vec normalized_field(const PolynomialMap& map, const Vec& x, const FlowOpts& opts, lifting::Case* label) {
  const Jet j = jet(map, x);
  const milnorfield::FieldSample s = milnorfield::milnor_vector(j, opts.tols, nullptr, opts.construction);
  if (!(s.ip_sphere > 0.0))
    throw PointError(ErrorKind::DRegularityFailure, "transversality lost: <w~, grad H> <= 0", x);
  if (label) *label = s.label.kind;
  return (2.0 * j.norm_x / s.ip_sphere) * s.w_tilde;
}

FlowTrace integrate(const PolynomialMap& map, const Vec& x0, double eps, const FlowOpts& opts) {
  if (x0.size() != map.n()) throw InputError("x0: expected " + std::to_string(map.n()) + " coordinates");
  if (!(x0.norm() < eps)) throw InputError("x0: must lie strictly inside the ball of radius epsilon");
  return run(map, x0, eps, opts, 1.0);
}

FlowTrace integrate_backward(const PolynomialMap& map, const Vec& x0, double radius, const FlowOpts& opts) {
  if (x0.size() != map.n()) throw InputError("x0: expected " + std::to_string(map.n()) + " coordinates");
  if (!(radius > 0.0 && radius < x0.norm())) throw InputError("radius: must lie in (0, ||x0||)");
  return run(map, x0, radius, opts, -1.0);
}

std::optional<Vec> project_to_tube(const PolynomialMap& map, const Vec& y, double delta, double eps) {
  Vec x = y;
  for (int it = 0; it < 100; ++it) {
    const Vec fx = map.eval(x);
    const double nf = fx.norm();
    if (!(nf > 0.0)) return std::nullopt;
    const double q = nf - delta;
    if (std::abs(q) <= 1e-13 * delta) {
      if (!(x.norm() < eps)) return std::nullopt;
      return x;
    }
    const Vec g = map.jacobian(x).transpose() * fx / nf;
    const double g2 = g.squaredNorm();
    if (!(g2 > 0.0)) return std::nullopt;
    Vec step = (q / g2) * g;
    if (step.norm() > 0.5 * eps) step *= 0.5 * eps / step.norm();
    x -= step;
    if (!(x.norm() < 2.0 * eps)) return std::nullopt;
  }
  return std::nullopt;
}

EquivalenceReport inflate_tube(const PolynomialMap& map, double eps, double delta, const SeedCfg& seeds,
                               const FlowOpts& opts, const ExclusionZone& dreg_zone, double drift_tol) {
  if (!(eps > 0.0)) throw InputError("epsilon: must be positive");
  if (!(delta > 0.0 && delta <= eps / 10.0)) throw InputError("delta: must satisfy 0 < delta <= epsilon/10");
  if (seeds.count == 0) throw InputError("seeds: must be positive");

  EquivalenceReport rep;
  rep.map_name = map.name();
  rep.epsilon = eps;
  rep.delta = delta;
  rep.drift_tol = drift_tol;
  rep.round_trip_tol = 1e-6 * eps;

  rep.dreg = regularity::dreg_scan(map, eps, SamplerCfg{seeds.dreg_samples, seeds.seed, seeds.threads}, dreg_zone);
  if (rep.dreg->verdict != regularity::Verdict::Pass) {
    rep.refused = true;
    std::ostringstream msg;
    msg.precision(17);
    msg << "d-regularity " << regularity::to_string(rep.dreg->verdict) << " at epsilon " << eps;
    if (!rep.dreg->witnesses.empty()) {
      const auto& w = rep.dreg->witnesses.front();
      msg << "; witness x = (";
      for (Eigen::Index i = 0; i < w.x.size(); ++i) msg << (i ? "," : "") << w.x(i);
      msg << ") with margin " << w.margin;
    } else {
      msg << "; adversarial minimum " << rep.dreg->adversarial_min;
    }
    rep.refusal = msg.str();
    return rep;
  }

  const std::size_t attempts = 2 * seeds.count;
  rep.attempts = attempts;
  std::vector<std::optional<Vec>> landed(attempts);
  parallel_for(attempts, seeds.threads, [&](std::size_t i) {
    Rng rng(sample_seed(seeds.seed, kTubeStream, i));
    auto x = project_to_tube(map, ball_point(rng, map.n(), eps), delta, eps);
    if (x && !opts.zone.directions.empty()) {
      const Vec fx = map.eval(*x);
      if (opts.zone.angular_distance(fx / fx.norm()) <= opts.zone.angle) x.reset();
    }
    landed[i] = std::move(x);
  });

  std::vector<std::pair<std::size_t, Vec>> chosen;
  for (std::size_t i = 0; i < attempts && chosen.size() < seeds.count; ++i)
    if (landed[i]) chosen.emplace_back(i, *landed[i]);
  if (chosen.size() < seeds.count)
    throw InputError("tube unreachable: only " + std::to_string(chosen.size()) + " of " +
                     std::to_string(attempts) + " seed attempts reached ||f|| = delta");

  rep.seeds.resize(chosen.size());
  parallel_for(chosen.size(), seeds.threads, [&](std::size_t k) {
    SeedOutcome& out = rep.seeds[k];
    out.index = chosen[k].first;
    out.trace = integrate(map, chosen[k].second, eps, opts);
    if (!out.trace.reached()) {
      out.failure = out.trace.failure;
      return;
    }
    if (!out.trace.monotone_r || !out.trace.monotone_h) {
      out.failure = "lost monotonicity";
      return;
    }
    const FlowTrace back = integrate_backward(map, out.trace.x_end, chosen[k].second.norm(), opts);
    if (!back.reached()) {
      out.failure = "backward flow: " + back.failure;
      return;
    }
    out.round_trip = (back.x_end - chosen[k].second).norm();
    if (!(out.round_trip < rep.round_trip_tol)) out.failure = "round trip error above 1e-6 * epsilon";
  });

  for (const SeedOutcome& s : rep.seeds) {
    rep.max_drift = std::max(rep.max_drift, s.trace.phi_drift);
    rep.max_round_trip = std::max(rep.max_round_trip, s.round_trip);
    rep.rejected_steps += s.trace.rejected;
    for (std::size_t c = 0; c < rep.cases.size(); ++c) rep.cases[c] += s.trace.cases[c];
    if (!s.failure.empty()) ++rep.failures;
  }
  rep.pass = rep.failures == 0 && rep.max_drift < drift_tol;
  return rep;
}

std::string traces_csv(const EquivalenceReport& report) {
  std::ostringstream out;
  out.precision(17);
  const int n = report.seeds.empty() ? 0 : static_cast<int>(report.seeds.front().trace.x0.size());
  out << "seed,t";
  for (int i = 0; i < n; ++i) out << ",x" << (i + 1);
  out << ",r,fnorm\n";
  for (const auto& s : report.seeds) {
    for (const auto& st : s.trace.steps) {
      out << s.index << ',' << st.t;
      for (Eigen::Index i = 0; i < st.x.size(); ++i) out << ',' << st.x(i);
      out << ',' << st.r << ',' << st.fnorm << '\n';
    }
  }
  return out.str();
}

}  // namespace fiblab::flow
