#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "fiblab/exclusion.hpp"
#include "fiblab/jet.hpp"
#include "fiblab/polymap.hpp"
#include "fiblab/sampling.hpp"

namespace fiblab::regularity {

/// sigma_p(DF_x) / sigma_1(DF_x).
double dreg_margin(const Jet& jet);

/// sigma_{p-1} / max(1, sigma_1) of ||x|| DPhi_x restricted to the tangent
/// space of the sphere through x. DPhi_x is formed directly as
/// (I - Phi Phi^T) Df_x / ||f||, not from DF_x, so the two margins are
/// independent computations.
double sphere_margin(const Jet& jet);

struct MarginAgreement {
  double submersion = 0.0;  // dreg_margin
  double sphere = 0.0;      // sphere_margin
  bool agree = true;        // both below zero_tol, or both above it
};

MarginAgreement cross_check(const Jet& jet, double zero_tol = 1e-10);

struct Thresholds {
  double pass = 1e-2;
  double fail = 1e-6;
};

struct AdversarialCfg {
  int restarts = 32;
  int iterations = 200;
  double fd_step = 1e-7;      // relative to the radius
  double initial_step = 0.1;  // relative to the radius
};

enum class Verdict { Pass, Fail, Inconclusive };

std::string_view to_string(Verdict v);

struct MarginSample {
  Vec x;
  double radius = 0.0;
  double margin = 0.0;
};

struct RegularityReport {
  std::string map_name;
  double epsilon = 0.0;
  std::size_t drawn = 0;
  std::size_t used = 0;
  double min = 0.0;     // over the random samples only
  double p1 = 0.0;
  double median = 0.0;
  double adversarial_min = 0.0;  // over samples and descents
  Vec adversarial_argmin;
  Thresholds thresholds;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<MarginSample> witnesses;  // margin < thresholds.fail
  std::vector<MarginSample> samples;    // filled when requested
};

/// Margin at x when x is usable (off the floor and exclusion zone), else NaN.
double margin_at(const PolynomialMap& map, const Vec& x, const ExclusionZone& zone);

/// Radii log-uniform in (eps/100, eps], directions uniform; descent restarts
/// from the worst samples. Throws InputError when every sample is excluded.
RegularityReport dreg_scan(const PolynomialMap& map, double eps, const SamplerCfg& sampler,
                           const ExclusionZone& zone = {}, const Thresholds& thresholds = {},
                           const AdversarialCfg& adversarial = {}, bool keep_samples = false);

/// ||projection of x onto ker Df_x|| / ||x|| for x on the sphere of radius eps.
/// Requires n > p; throws PointError(CriticalPoint) when Df_x is not surjective.
double fiber_sphere_transversality(const Jet& jet, double eps, double full_rank = 1e-8);

struct TransversalityReport {
  double epsilon = 0.0;
  std::size_t drawn = 0;
  std::size_t used = 0;
  std::size_t critical = 0;
  double min = 0.0;
  Vec argmin;
};

/// Samples the sphere of radius eps off the exclusion zone.
TransversalityReport transversality_scan(const PolynomialMap& map, double eps, const SamplerCfg& sampler,
                                         const ExclusionZone& zone = {});

/// "radius,margin" rows, one per kept sample.
std::string margins_csv(const RegularityReport& report);

}  // namespace fiblab::regularity
