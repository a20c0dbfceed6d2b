#include "fiblab/lifting.hpp"

#include <cmath>
#include <cstdio>

#include "fiblab/error.hpp"

namespace fiblab::lifting {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

double normalized_sigma(const Vec& s, int k) {
  if (s.size() == 0 || s(0) == 0.0) return 0.0;
  return k <= s.size() ? s(k - 1) / s(0) : 0.0;
}

Mat gradient_pair(const Jet& jet) {
  Mat g(jet.n(), 2);
  g.col(0) = jet.grad_h;
  g.col(1) = jet.grad_H;
  return g;
}

bool collinear(const Vec& a, const Vec& b, double tol) {
  return 1.0 - std::abs(linalg::cosine(a, b)) < tol;
}

}  // namespace

std::string_view to_string(Case c) {
  switch (c) {
    case Case::Collinear: return "Collinear";
    case Case::TransverseGeneric: return "TransverseGeneric";
    case Case::ExceptionalMf: return "ExceptionalMf";
  }
  return "unknown";
}

bool opposite_directions(const Vec& u, const Vec& v, double tol) {
  if (u.norm() == 0.0 || v.norm() == 0.0) throw InputError("opposite_directions: zero vector");
  return linalg::cosine(u, v) < -1.0 + tol;
}

Lift normal_lift_f(const Jet& jet, const Tolerances& tols) {
  const double s = normalized_sigma(linalg::singular_values(jet.J), jet.p());
  if (!(s > tols.full_rank))
    throw PointError(ErrorKind::CriticalPoint, "critical point: Df_x is not surjective (sigma_p/sigma_1 = " +
                                                   sci(s) + ")",
                     jet.x, s);
  const Vec target = 2.0 * jet.fx;
  const auto sol = linalg::min_norm_solve(jet.J, target, tols.solve_rank);
  Lift lift;
  lift.w = sol.x;
  lift.coeff = lift.w.dot(jet.grad_h) / jet.grad_h.squaredNorm();
  lift.v = lift.w - lift.coeff * jet.grad_h;
  lift.residual = sol.residual;
  return lift;
}

Lift normal_lift_F(const Jet& jet, const Tolerances& tols) {
  const double s = normalized_sigma(linalg::singular_values(jet.DF), jet.p());
  if (!(s > tols.full_rank))
    throw PointError(ErrorKind::DRegularityFailure,
                     "d-regularity failure witness: DF_x is not surjective (sigma_p/sigma_1 = " +
                         sci(s) + ")",
                     jet.x, s);
  const Vec target = 2.0 * jet.Fx;
  const auto sol = linalg::min_norm_solve(jet.DF, target, tols.solve_rank);
  Lift lift;
  lift.w = sol.x;
  lift.coeff = lift.w.dot(jet.grad_H) / jet.grad_H.squaredNorm();
  lift.v = lift.w - jet.grad_H;
  lift.residual = sol.residual;
  return lift;
}

Lift constrained_lift(const Jet& jet, Which which, const Tolerances& tols) {
  if (collinear(jet.grad_h, jet.grad_H, tols.collinear))
    throw PointError(ErrorKind::CollinearGradients,
                     "constrained lift: grad h and grad H are collinear at this point", jet.x);
  const Mat basis = linalg::orthonormal_complement(gradient_pair(jet));

  const bool f_lift = which == Which::FLift;
  const Mat& D = f_lift ? jet.J : jet.DF;
  const Vec& grad = f_lift ? jet.grad_h : jet.grad_H;
  const Vec target = 2.0 * (f_lift ? jet.fx : jet.Fx);
  const double coeff = f_lift ? 4.0 * jet.h / jet.grad_h.squaredNorm() : 1.0;

  const Vec rhs = target - coeff * (D * grad);
  const auto sol = linalg::min_norm_solve(D * basis, rhs, tols.solve_rank);

  Lift lift;
  lift.v = basis * sol.x;
  lift.coeff = coeff;
  lift.w = lift.v + coeff * grad;
  lift.residual = (D * lift.w - target).norm();
  if (!(lift.residual < tols.contract * scale(jet)))
    throw PointError(ErrorKind::SubcaseMisclassification,
                     "subcase misclassification: restricted lift system inconsistent (residual " +
                         sci(lift.residual) + ")",
                     jet.x);
  return lift;
}

CaseLabel classify_point(const Jet& jet, const Tolerances& tols) {
  CaseLabel label;
  label.collinear_cos = linalg::cosine(jet.grad_h, jet.grad_H);
  label.aug_sigma_min = normalized_sigma(linalg::singular_values(jet.aug), jet.p() + 1);
  label.df_sigma_min = normalized_sigma(linalg::singular_values(jet.J), jet.p());
  if (1.0 - std::abs(label.collinear_cos) < tols.collinear)
    label.kind = Case::Collinear;
  else if (label.aug_sigma_min < tols.rank)
    label.kind = Case::ExceptionalMf;
  else
    label.kind = Case::TransverseGeneric;
  return label;
}

double mu(const Jet& jet, const Vec& w_f, std::vector<KeypropViolation>* violations,
          const Tolerances& tols) {
  const double denom = jet.grad_H.dot(w_f);
  if (!(std::abs(denom) > tols.mu_floor * jet.grad_H.norm() * w_f.norm()))
    throw PointError(ErrorKind::MuUndefined, "mu undefined: <grad H, w_f> vanishes", jet.x);
  const double value = jet.grad_H.squaredNorm() / denom;
  if (value <= 0.0 && violations) violations->push_back({jet.x, value});
  return value;
}

LiftPair lift_pair(const Jet& jet, const Tolerances& tols, std::vector<KeypropViolation>* violations) {
  const Lift lf = normal_lift_f(jet, tols);
  const Lift lF = normal_lift_F(jet, tols);
  LiftPair pair;
  pair.w_f = lf.w;
  pair.v_f = lf.v;
  pair.alpha = lf.coeff;
  pair.residual_f = lf.residual;
  pair.w_F = lF.w;
  pair.v_F = lF.v;
  pair.beta = lF.coeff;
  pair.residual_F = lF.residual;
  pair.label = classify_point(jet, tols);
  if (pair.label.kind == Case::ExceptionalMf || collinear(lf.w, lF.w, tols.collinear))
    pair.mu = mu(jet, lf.w, violations, tols);
  return pair;
}

}  // namespace fiblab::lifting
