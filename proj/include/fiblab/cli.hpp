#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fiblab/lifting.hpp"
#include "fiblab/polymap.hpp"
#include "fiblab/regularity.hpp"

namespace fiblab::cli {

struct CatalogEntry {
  std::string name;
  std::string description;
  std::string map_json;
  double epsilon = 1.0;
  double delta = 0.05;
};

const std::vector<CatalogEntry>& catalog_entries();

/// Throws InputError listing the catalog when the name is unknown.
const CatalogEntry& catalog_entry(const std::string& name);
PolynomialMap catalog_map(const std::string& name);

struct RunConfig {
  std::shared_ptr<const PolynomialMap> map;
  std::string map_label;  // catalog name or "inline"
  double epsilon = 1.0;
  double delta = 0.05;
  std::optional<double> eta;

  lifting::Tolerances lift;
  regularity::Thresholds dreg;
  double nod_tol = 1e-9;
  double drift_tol = 1e-5;
  double rtol = 1e-8;
  double atol = 1e-10;
  double exclusion_angle = 0.05;
  double standoff = 0.05;
  double cluster_angle = 1e-3;

  std::size_t samples = 10000;      // nod, field and regularity scans
  std::size_t seeds = 100;          // tube seeds
  std::size_t starts = 512;         // critical-point searches
  std::size_t dreg_samples = 2000;  // regularity check inside the flow refusal test
  std::uint64_t seed = 0;

  std::string out_dir = "fiblab_out";
  bool strict = false;
  int threads = 0;
};

/// Defaults from the catalog entry when `map` is a catalog name.
RunConfig config_from_catalog(const std::string& name);

/// Parses a RunConfig document; see README for the schema.
RunConfig parse_config(const nlohmann::json& doc);

/// File path when it exists, otherwise a catalog name.
RunConfig load_config(const std::string& path_or_name);

/// Enforces 0 < delta <= epsilon/10 and positive tolerances.
void validate(const RunConfig& cfg);

/// Resolved configuration as JSON (no output directory, no thread count).
nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Exit codes: 0 success, 1 a verdict failed or was inconclusive under
/// --strict, 2 input error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fiblab::cli
