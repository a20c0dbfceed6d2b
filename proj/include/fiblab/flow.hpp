#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fiblab/exclusion.hpp"
#include "fiblab/lifting.hpp"
#include "fiblab/milnorfield.hpp"
#include "fiblab/polymap.hpp"
#include "fiblab/regularity.hpp"
#include "fiblab/sampling.hpp"

namespace fiblab::flow {

struct FlowOpts {
  double rtol = 1e-8;
  double atol = 1e-10;
  std::size_t max_steps = 100000;
  double event_tol = 1e-10;  // relative to the target radius
  lifting::Tolerances tols;
  milnorfield::Construction construction = milnorfield::Construction::NormalFirst;
  ExclusionZone zone{{}, 0.05, 0.0};  // angular exclusion only; no zero-set standoff along traces
};

struct FlowStep {
  double t = 0.0;
  Vec x;
  double r = 0.0;
  double fnorm = 0.0;
  Vec phi;
};

enum class Status { Reached, TransversalityLost, DiscriminantProximity, NoConvergence, FieldError };

std::string_view to_string(Status s);

struct FlowTrace {
  Vec x0;
  double target = 0.0;  // radius where the event fires
  std::vector<FlowStep> steps;  // accepted steps, starting with x0
  Vec x_end;
  double t_end = 0.0;
  double phi_drift = 0.0;
  bool monotone_r = true;
  bool monotone_h = true;
  std::size_t rejected = 0;
  std::array<std::size_t, 3> cases{};  // indexed by lifting::Case, at accepted points
  Status status = Status::NoConvergence;
  std::string failure;
  bool reached() const { return status == Status::Reached; }
};

/// w~ rescaled to unit radial speed: w~ * 2||x|| / <w~, grad H>. Throws
/// PointError when the field cannot be evaluated or ip_sphere <= 0.
Vec normalized_field(const PolynomialMap& map, const Vec& x, const FlowOpts& opts = {},
                     lifting::Case* label = nullptr);

/// Integrates forward from x0 until ||x|| = eps.
FlowTrace integrate(const PolynomialMap& map, const Vec& x0, double eps, const FlowOpts& opts = {});

/// Integrates the negated field from x0 until ||x|| = radius (< ||x0||).
FlowTrace integrate_backward(const PolynomialMap& map, const Vec& x0, double radius, const FlowOpts& opts = {});

struct SeedCfg {
  std::size_t count = 100;
  std::uint64_t seed = 0;
  int threads = 0;
  std::size_t dreg_samples = 2000;
};

/// Newton projection of y onto {||f|| = delta}. Empty when it fails to
/// converge or leaves the ball of radius eps.
std::optional<Vec> project_to_tube(const PolynomialMap& map, const Vec& y, double delta, double eps);

struct SeedOutcome {
  std::size_t index = 0;
  FlowTrace trace;
  double round_trip = 0.0;  // ||backward(tau(x0)) - x0||
  std::string failure;      // empty when the seed passed
};

struct EquivalenceReport {
  std::string map_name;
  double epsilon = 0.0;
  double delta = 0.0;
  double drift_tol = 1e-5;
  double round_trip_tol = 0.0;  // 1e-6 * epsilon
  bool refused = false;
  std::string refusal;
  std::optional<regularity::RegularityReport> dreg;
  std::size_t attempts = 0;
  std::vector<SeedOutcome> seeds;
  double max_drift = 0.0;
  double max_round_trip = 0.0;
  std::size_t failures = 0;
  std::size_t rejected_steps = 0;
  std::array<std::size_t, 3> cases{};
  bool pass = false;
};

/// Requires 0 < delta <= eps/10. Runs dreg_scan at eps first and refuses
/// unless it passes. Throws InputError("tube unreachable") when fewer than
/// half of the 2*count seed attempts land on the tube.
EquivalenceReport inflate_tube(const PolynomialMap& map, double eps, double delta, const SeedCfg& seeds,
                               const FlowOpts& opts = {}, const ExclusionZone& dreg_zone = {},
                               double drift_tol = 1e-5);

/// "seed,t,x1..xn,r,fnorm" rows for every accepted step.
std::string traces_csv(const EquivalenceReport& report);

}  // namespace fiblab::flow
