#pragma once

// The vector field  w~ = ||grad H|| w_f + alpha ||grad h|| w_F  assembled
// pointwise with case-dispatched lifts, plus sampled diagnostics.

#include <array>
#include <string>
#include <vector>

#include "fiblab/exclusion.hpp"
#include "fiblab/lifting.hpp"
#include "fiblab/polymap.hpp"
#include "fiblab/sampling.hpp"

namespace fiblab::milnorfield {

struct FieldSample {
  Vec x;
  Vec w_tilde;
  lifting::CaseLabel label;
  double ip_tube = 0.0;            // <w~, grad h>
  double ip_sphere = 0.0;          // <w~, grad H>
  double tangency_residual = 0.0;  // pencil tangency of w~
  double scale = 1.0;
  lifting::LiftPair lifts;         // the lifts w~ was built from
  bool reclassified = false;       // constrained lift failed, fell back to M(f) handling
  bool blended = false;            // near a case boundary; both constructions compared
  bool valid = false;
  std::string invalid_reason;
};

enum class Construction {
  CaseDispatch,  // normal lifts for Collinear / M(f), constrained lifts for the generic case
  NormalFirst,   // normal lifts wherever the resulting w~ is valid, else CaseDispatch
};

/// Throws PointError for d-regularity failures and critical points, and for a
/// point that fails the constrained lift and whose normal lifts are not
/// collinear either.
FieldSample milnor_vector(const Jet& jet, const lifting::Tolerances& tols = {},
                          std::vector<lifting::KeypropViolation>* violations = nullptr,
                          Construction construction = Construction::CaseDispatch);

/// min(cos(w~, grad h), cos(w~, grad H)).
double transversality_margin(const Jet& jet, const FieldSample& s);

/// The two inner products recomputed from alpha, the gradients, the angle
/// between them and the v-parts of the lifts.
double ip_tube_closed_form(const Jet& jet, const FieldSample& s);
double ip_sphere_closed_form(const Jet& jet, const FieldSample& s);

struct Annulus {
  double eps_min = 0.1;
  double eps_max = 0.5;
  double f_floor = 1e-9;
};

struct NodViolation {
  Vec x;
  double cosine = 0.0;
};

struct NodReport {
  std::size_t drawn = 0;
  std::size_t used = 0;
  double min_cosine = 1.0;
  Vec argmin;
  double tol = 1e-9;
  std::vector<NodViolation> violations;
};

/// Samples the annulus and records the most negative cos(grad h, grad H).
/// Throws InputError when no sample survives the floor and exclusion zone.
NodReport nod_scan(const PolynomialMap& map, const Annulus& region, const SamplerCfg& sampler,
                   const ExclusionZone& zone = {}, double tol = 1e-9);

struct FieldScanReport {
  std::size_t drawn = 0;
  std::size_t used = 0;
  std::size_t valid = 0;
  std::size_t errors = 0;  // samples where the field could not be evaluated
  std::array<std::size_t, 3> case_counts{};  // indexed by lifting::Case
  std::size_t blended = 0;
  std::size_t reclassified = 0;
  std::vector<lifting::KeypropViolation> keyprop_violations;
  std::vector<FieldSample> invalid;          // full witness records
  std::vector<std::string> error_messages;
  double min_angle_to_discriminant = 0.0;    // over used samples
  std::vector<FieldSample> samples;          // every used sample, when requested
  bool all_valid() const { return used > 0 && valid == used && errors == 0; }
};

FieldScanReport field_scan(const PolynomialMap& map, const Annulus& region, const SamplerCfg& sampler,
                           const ExclusionZone& zone = {}, const lifting::Tolerances& tols = {},
                           bool keep_samples = false);

}  // namespace fiblab::milnorfield
