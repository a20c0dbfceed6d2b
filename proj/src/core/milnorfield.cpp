#include "fiblab/milnorfield.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "fiblab/error.hpp"
#include "fiblab/pencil.hpp"

namespace fiblab::milnorfield {

namespace {

using lifting::Case;
using lifting::Lift;

constexpr std::uint64_t kNodStream = 0x4e4f44;     // "NOD"
constexpr std::uint64_t kFieldStream = 0x464c44;   // "FLD"
constexpr double kTangencyTol = 1e-7;
constexpr double kNormalFirstMargin = 1e-3;

void assemble(const Jet& jet, FieldSample& s) {
  const auto& L = s.lifts;
  s.w_tilde = jet.grad_H.norm() * L.w_f + L.alpha * jet.grad_h.norm() * L.w_F;
  s.ip_tube = s.w_tilde.dot(jet.grad_h);
  s.ip_sphere = s.w_tilde.dot(jet.grad_H);
  s.tangency_residual = pencil::pencil_tangent_residual(jet, s.w_tilde);
  s.scale = scale(jet);
  s.valid = true;
  s.invalid_reason.clear();
  if (!(s.ip_tube > 0.0)) {
    s.valid = false;
    s.invalid_reason = "not transverse to tube";
  } else if (!(s.ip_sphere > 0.0)) {
    s.valid = false;
    s.invalid_reason = "not transverse to sphere";
  } else if (!(s.tangency_residual < kTangencyTol * s.scale)) {
    s.valid = false;
    s.invalid_reason = "not tangent to pencil";
  }
}

void set_lifts(lifting::LiftPair& pair, const Lift& f, const Lift& F) {
  pair.w_f = f.w;
  pair.v_f = f.v;
  pair.alpha = f.coeff;
  pair.residual_f = f.residual;
  pair.w_F = F.w;
  pair.v_F = F.v;
  pair.beta = F.coeff;
  pair.residual_F = F.residual;
}

double worst_ip(const FieldSample& s) { return std::min(s.ip_tube, s.ip_sphere); }

bool in_band(double margin, double tol) { return margin >= tol && margin <= 10.0 * tol; }

}  // namespace

double transversality_margin(const Jet& jet, const FieldSample& s) {
  const double wn = s.w_tilde.norm();
  if (!(wn > 0.0)) return -1.0;
  return std::min(s.ip_tube / (wn * jet.grad_h.norm()), s.ip_sphere / (wn * jet.grad_H.norm()));
}

FieldSample milnor_vector(const Jet& jet, const lifting::Tolerances& tols,
                          std::vector<lifting::KeypropViolation>* violations, Construction construction) {
  // Normal lifts always exist at a d-regular point off V; they also serve as
  // the fallback construction and feed mu.
  const Lift nf = lifting::normal_lift_f(jet, tols);
  const Lift nF = lifting::normal_lift_F(jet, tols);

  FieldSample normal;
  normal.x = jet.x;
  normal.label = lifting::classify_point(jet, tols);
  set_lifts(normal.lifts, nf, nF);
  normal.lifts.label = normal.label;
  assemble(jet, normal);

  const bool prefer_normal = construction == Construction::NormalFirst && normal.valid &&
                             transversality_margin(jet, normal) > kNormalFirstMargin;
  if (normal.label.kind != Case::TransverseGeneric || prefer_normal) {
    if (normal.label.kind == Case::ExceptionalMf || 1.0 - std::abs(linalg::cosine(nf.w, nF.w)) < tols.collinear)
      normal.lifts.mu = lifting::mu(jet, nf.w, violations, tols);
    return normal;
  }

  std::optional<FieldSample> constrained;
  try {
    FieldSample c = normal;
    set_lifts(c.lifts, lifting::constrained_lift(jet, lifting::Which::FLift, tols),
              lifting::constrained_lift(jet, lifting::Which::SpherefiedLift, tols));
    c.lifts.constrained = true;
    assemble(jet, c);
    constrained = std::move(c);
  } catch (const PointError& e) {
    if (e.kind() != ErrorKind::SubcaseMisclassification) throw;
  }

  if (!constrained) {
    // Behaves as a point of M(f): the normal lifts must be collinear there.
    const double gap = (nF.w - nF.w.dot(nf.w) / nf.w.squaredNorm() * nf.w).norm();
    if (!(gap < 1e-6 * scale(jet)))
      throw PointError(ErrorKind::SubcaseMisclassification,
                       "subcase misclassification: constrained lift inconsistent and normal lifts "
                       "not collinear",
                       jet.x);
    normal.reclassified = true;
    normal.label.kind = Case::ExceptionalMf;
    normal.lifts.label = normal.label;
    normal.lifts.mu = lifting::mu(jet, nf.w, violations, tols);
    return normal;
  }

  const double collinear_margin = 1.0 - std::abs(normal.label.collinear_cos);
  if (in_band(collinear_margin, tols.collinear) || in_band(normal.label.aug_sigma_min, tols.rank)) {
    constrained->blended = true;
    if (worst_ip(normal) > worst_ip(*constrained) && normal.valid) {
      normal.blended = true;
      return normal;
    }
  }
  return *constrained;
}

double ip_tube_closed_form(const Jet& jet, const FieldSample& s) {
  const double alpha = s.lifts.alpha;
  const double gh = jet.grad_h.norm();
  const double gH = jet.grad_H.norm();
  const double cos_t = linalg::cosine(jet.grad_H, jet.grad_h);
  const Vec v_hat_F = s.lifts.w_F - jet.grad_H;
  return alpha * gH * gh * gh * (1.0 + cos_t) + alpha * gh * v_hat_F.dot(jet.grad_h);
}

double ip_sphere_closed_form(const Jet& jet, const FieldSample& s) {
  const double alpha = s.lifts.alpha;
  const double gh = jet.grad_h.norm();
  const double gH = jet.grad_H.norm();
  const double cos_t = linalg::cosine(jet.grad_H, jet.grad_h);
  const Vec v_hat_f = s.lifts.w_f - alpha * jet.grad_h;
  return alpha * gh * gH * gH * (1.0 + cos_t) + gH * v_hat_f.dot(jet.grad_H);
}

namespace {

struct Drawn {
  std::vector<Vec> points;
  std::vector<Vec> values;
  std::vector<Mat> jacobians;
};

Drawn draw_annulus(const PolynomialMap& map, const Annulus& region, const SamplerCfg& sampler,
                   std::uint64_t stream) {
  if (!(region.eps_min > 0.0) || !(region.eps_max >= region.eps_min))
    throw InputError("annulus: require 0 < eps_min <= eps_max");
  Drawn d;
  d.points.resize(sampler.samples);
  for (std::size_t i = 0; i < sampler.samples; ++i) {
    Rng rng(sample_seed(sampler.seed, stream, i));
    const double r = log_uniform_radius(rng, region.eps_min, region.eps_max);
    d.points[i] = sphere_point(rng, map.n(), r);
  }
  map.eval_batch(d.points, &d.values, &d.jacobians);
  return d;
}

bool usable(const Drawn& d, std::size_t i, const Annulus& region, const ExclusionZone& zone) {
  if (!(d.values[i].norm() > region.f_floor)) return false;
  return zone.reject_reason(d.points[i], d.values[i], d.jacobians[i]).empty();
}

}  // namespace

NodReport nod_scan(const PolynomialMap& map, const Annulus& region, const SamplerCfg& sampler,
                   const ExclusionZone& zone, double tol) {
  const Drawn d = draw_annulus(map, region, sampler, kNodStream);
  const std::size_t count = d.points.size();
  std::vector<double> cosines(count, std::numeric_limits<double>::quiet_NaN());
  parallel_for(count, sampler.threads, [&](std::size_t i) {
    if (!usable(d, i, region, zone)) return;
    const Vec grad_h = 2.0 * (d.jacobians[i].transpose() * d.values[i]);
    cosines[i] = linalg::cosine(grad_h, 2.0 * d.points[i]);
  });

  NodReport rep;
  rep.drawn = count;
  rep.tol = tol;
  for (std::size_t i = 0; i < count; ++i) {
    if (std::isnan(cosines[i])) continue;
    ++rep.used;
    if (rep.used == 1 || cosines[i] < rep.min_cosine) {
      rep.min_cosine = cosines[i];
      rep.argmin = d.points[i];
    }
    if (cosines[i] < -1.0 + tol) rep.violations.push_back({d.points[i], cosines[i]});
  }
  if (rep.used == 0) throw InputError("nod_scan: every sample fell inside the zero-set floor or exclusion zone");
  return rep;
}

FieldScanReport field_scan(const PolynomialMap& map, const Annulus& region, const SamplerCfg& sampler,
                           const ExclusionZone& zone, const lifting::Tolerances& tols,
                           bool keep_samples) {
  const Drawn d = draw_annulus(map, region, sampler, kFieldStream);
  const std::size_t count = d.points.size();

  struct Slot {
    bool used = false;
    std::optional<FieldSample> sample;
    std::string error;
    std::vector<lifting::KeypropViolation> violations;
    double angle = 0.0;
  };
  std::vector<Slot> slots(count);
  parallel_for(count, sampler.threads, [&](std::size_t i) {
    if (!usable(d, i, region, zone)) return;
    Slot& s = slots[i];
    s.used = true;
    s.angle = zone.angular_distance(d.values[i].normalized());
    try {
      const Jet j = jet_from_values(d.points[i], d.values[i], d.jacobians[i]);
      s.sample = milnor_vector(j, tols, &s.violations);
    } catch (const Error& e) {
      s.error = e.what();
    }
  });

  FieldScanReport rep;
  rep.drawn = count;
  rep.min_angle_to_discriminant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < count; ++i) {
    Slot& s = slots[i];
    if (!s.used) continue;
    ++rep.used;
    rep.min_angle_to_discriminant = std::min(rep.min_angle_to_discriminant, s.angle);
    for (auto& v : s.violations) rep.keyprop_violations.push_back(std::move(v));
    if (!s.sample) {
      ++rep.errors;
      rep.error_messages.push_back(s.error);
      continue;
    }
    FieldSample& f = *s.sample;
    ++rep.case_counts[static_cast<std::size_t>(f.label.kind)];
    if (f.blended) ++rep.blended;
    if (f.reclassified) ++rep.reclassified;
    if (f.valid)
      ++rep.valid;
    else
      rep.invalid.push_back(f);
    if (keep_samples) rep.samples.push_back(std::move(f));
  }
  if (rep.used == 0) throw InputError("field_scan: every sample fell inside the zero-set floor or exclusion zone");
  return rep;
}

}  // namespace fiblab::milnorfield
