#pragma once

// Critical set, its image, ray clustering of image directions and the
// shell-by-shell linearity test.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fiblab/polymap.hpp"
#include "fiblab/sampling.hpp"

namespace fiblab::discriminant {

struct CriticalMargin {
  double margin = 0.0;  // sigma_p(Df) / sigma_1(Df)
  bool totally_degenerate = false;
};

CriticalMargin critical_margin(const Mat& J);
CriticalMargin critical_margin(const PolynomialMap& map, const Vec& x);

struct SearchCfg {
  std::size_t starts = 512;
  int iterations = 200;
  double keep_margin = 1e-9;      // polished points below this are critical
  double min_image_radius = 1e-6; // images closer to 0 carry no direction
  double dedup = 1e-10;
  double cluster_angle = 1e-3;
};

struct DeltaSample {
  Vec x;           // critical point
  double margin = 0.0;
  Vec image;       // f(x)
  double radius = 0.0;
  Vec direction;   // image / radius
  int shell = -1;
  int cluster = -1;
};

struct RayCluster {
  Vec direction;
  std::size_t members = 0;
  double spread = 0.0;  // largest member angle from the direction
};

struct Shell {
  double inner = 0.0;
  double outer = 0.0;
  std::size_t samples = 0;
  std::vector<RayCluster> clusters;
  bool agrees = true;
};

struct DiscriminantReport {
  std::string map_name;
  double ball_radius = 0.0;
  double cluster_angle = 1e-3;
  std::size_t starts = 0;
  std::vector<DeltaSample> samples;
  std::vector<RayCluster> clusters;  // over every sample
  std::vector<Shell> shells;
  std::size_t ambiguous = 0;         // samples within threshold of two clusters
  std::optional<bool> linear;        // unset until linearity_check
  double eta = 0.0;
  std::vector<Vec> directions;       // the set A
};

/// Multi-start Newton descent of the critical margin from random ball points,
/// followed by f-images and deduplication. An empty report means no critical
/// value off the origin.
DiscriminantReport sample_discriminant(const PolynomialMap& map, double radius, const SamplerCfg& sampler,
                                       const SearchCfg& cfg = {});

/// Greedy angular clustering in index order.
std::vector<RayCluster> cluster_directions(const std::vector<Vec>& directions, double threshold,
                                           std::vector<int>* assignment = nullptr,
                                           std::size_t* ambiguous = nullptr);

/// Geometric shell radii rmax/2^(count-1), ..., rmax over the sampled images.
std::vector<double> default_radii(const DiscriminantReport& report, int count = 4);

/// Throws InputError when fewer than two radii are given.
DiscriminantReport linearity_check(DiscriminantReport report, const std::vector<double>& radii);

/// "radius,u1,...,up,cluster" rows.
std::string samples_csv(const DiscriminantReport& report);

}  // namespace fiblab::discriminant
