#pragma once

// Liftings of the radial field grad g(y) = 2y through f and through its
// spherefication F, point classification, and the collinearity coefficient mu.

#include <optional>
#include <string_view>
#include <vector>

#include "fiblab/jet.hpp"

namespace fiblab::lifting {

struct Tolerances {
  double collinear = 1e-10;  // Collinear when |cos(grad h, grad H)| > 1 - collinear
  double rank = 1e-8;        // M(f) when sigma_{p+1}(aug) < rank * sigma_max(aug)
  double solve_rank = 1e-8;  // pseudo-inverse cutoff, relative to sigma_max
  double full_rank = 1e-8;   // Df_x / DF_x accepted as surjective above this sigma_p/sigma_1
  double contract = 1e-9;    // lift residual bound, times scale(jet)
  double mu_floor = 1e-12;   // |<grad H, w_f>| below this * ||grad H|| ||w_f|| leaves mu undefined
};

enum class Case { Collinear, TransverseGeneric, ExceptionalMf };

std::string_view to_string(Case c);

struct CaseLabel {
  Case kind = Case::TransverseGeneric;
  double collinear_cos = 0.0;  // cos of the angle between grad h and grad H
  double aug_sigma_min = 0.0;  // sigma_{p+1}(aug) / sigma_max(aug)
  double df_sigma_min = 0.0;   // sigma_p(Df) / sigma_1(Df)
};

/// w = v + coeff * grad, with v orthogonal to grad.
struct Lift {
  Vec w;
  Vec v;
  double coeff = 0.0;
  double residual = 0.0;  // ||D(w) - 2 target||
};

enum class Which { FLift, SpherefiedLift };

struct KeypropViolation {
  Vec x;
  double mu = 0.0;
};

struct LiftPair {
  Vec w_f, v_f;
  double alpha = 0.0;
  Vec w_F, v_F;
  double beta = 0.0;
  CaseLabel label;
  std::optional<double> mu;
  double residual_f = 0.0;
  double residual_F = 0.0;
  bool constrained = false;  // true when v_f, v_F were confined to T(N_x cap S_x)
};

/// cos(u, v) < -1 + tol. Throws InputError on a zero vector.
bool opposite_directions(const Vec& u, const Vec& v, double tol);

/// Minimal-norm solution of Df_x w = 2 f(x). Throws PointError(CriticalPoint)
/// when Df_x is not surjective.
Lift normal_lift_f(const Jet& jet, const Tolerances& tols = {});

/// Minimal-norm solution of DF_x w = 2 F(x). Throws
/// PointError(DRegularityFailure) carrying x and sigma_p/sigma_1 of DF_x.
Lift normal_lift_F(const Jet& jet, const Tolerances& tols = {});

/// Lift whose v-part lies in L_x = {v : <v, grad h> = 0 = <v, grad H>} and is
/// orthogonal to L_x cap ker D. Throws CollinearGradients when L_x is not of
/// codimension two and SubcaseMisclassification when the restricted system is
/// inconsistent (the point behaves as a point of M(f)).
Lift constrained_lift(const Jet& jet, Which which, const Tolerances& tols = {});

CaseLabel classify_point(const Jet& jet, const Tolerances& tols = {});

/// ||grad H||^2 / <grad H, w_f>. A nonpositive value is appended to
/// `violations` (when given) and still returned. Throws MuUndefined when the
/// denominator vanishes.
double mu(const Jet& jet, const Vec& w_f, std::vector<KeypropViolation>* violations = nullptr,
          const Tolerances& tols = {});

/// Normal lifts, classification and mu (when the point is in M(f) or the two
/// lifts are collinear).
LiftPair lift_pair(const Jet& jet, const Tolerances& tols = {},
                   std::vector<KeypropViolation>* violations = nullptr);

}  // namespace fiblab::lifting
