#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "fiblab/cli.hpp"
#include "fiblab/error.hpp"
#include "fiblab/serialize.hpp"

namespace fiblab::cli {

namespace {

void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& known, const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) throw InputError(where + it.key() + ": unknown field");
}

double number(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number()) throw InputError(where + ": expected a number");
  return v.get<double>();
}

std::size_t count(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer() || v.get<long long>() < 1) throw InputError(where + ": expected a positive integer");
  return v.get<std::size_t>();
}

template <class T, class Get>
void maybe(const nlohmann::json& obj, const char* key, T& dst, Get get, const std::string& where) {
  if (auto it = obj.find(key); it != obj.end()) dst = get(*it, where + key);
}

void require_positive(double v, const char* name) {
  if (!(v > 0.0)) throw InputError(std::string("tolerances.") + name + ": must be positive");
}

}  // namespace

RunConfig config_from_catalog(const std::string& name) {
  const CatalogEntry& e = catalog_entry(name);
  RunConfig cfg;
  cfg.map = std::make_shared<const PolynomialMap>(parse_map(e.map_json));
  cfg.map_label = e.name;
  cfg.epsilon = e.epsilon;
  cfg.delta = e.delta;
  return cfg;
}

RunConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw InputError("config: expected a JSON object");
  reject_unknown(doc, {"map", "epsilon", "delta", "eta", "tolerances", "sampler", "output", "strict", "threads"},
                 "");
  const auto map_it = doc.find("map");
  if (map_it == doc.end()) throw InputError("map: missing");

  RunConfig cfg;
  if (map_it->is_string()) {
    cfg = config_from_catalog(map_it->get<std::string>());
  } else {
    cfg.map = std::make_shared<const PolynomialMap>(map_from_json(*map_it, "map"));
    cfg.map_label = cfg.map->name().empty() ? "inline" : cfg.map->name();
  }

  maybe(doc, "epsilon", cfg.epsilon, number, "");
  maybe(doc, "delta", cfg.delta, number, "");
  if (auto it = doc.find("eta"); it != doc.end()) cfg.eta = number(*it, "eta");
  if (auto it = doc.find("output"); it != doc.end()) {
    if (!it->is_string()) throw InputError("output: expected a string");
    cfg.out_dir = it->get<std::string>();
  }
  if (auto it = doc.find("strict"); it != doc.end()) {
    if (!it->is_boolean()) throw InputError("strict: expected a boolean");
    cfg.strict = it->get<bool>();
  }
  if (auto it = doc.find("threads"); it != doc.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) throw InputError("threads: expected an integer >= 0");
    cfg.threads = it->get<int>();
  }

  if (auto it = doc.find("sampler"); it != doc.end()) {
    const auto& s = *it;
    if (!s.is_object()) throw InputError("sampler: expected an object");
    reject_unknown(s, {"samples", "seeds", "starts", "dreg_samples", "seed"}, "sampler.");
    maybe(s, "samples", cfg.samples, count, "sampler.");
    maybe(s, "seeds", cfg.seeds, count, "sampler.");
    maybe(s, "starts", cfg.starts, count, "sampler.");
    maybe(s, "dreg_samples", cfg.dreg_samples, count, "sampler.");
    if (auto sd = s.find("seed"); sd != s.end()) {
      if (!sd->is_number_unsigned()) throw InputError("sampler.seed: expected a non-negative integer");
      cfg.seed = sd->get<std::uint64_t>();
    }
  }

  if (auto it = doc.find("tolerances"); it != doc.end()) {
    const auto& t = *it;
    if (!t.is_object()) throw InputError("tolerances: expected an object");
    reject_unknown(t,
                   {"collinear", "rank", "solve_rank", "full_rank", "contract", "mu_floor", "nod", "dreg_pass",
                    "dreg_fail", "drift", "rtol", "atol", "exclusion_angle", "standoff", "cluster_angle"},
                   "tolerances.");
    const std::string w = "tolerances.";
    maybe(t, "collinear", cfg.lift.collinear, number, w);
    maybe(t, "rank", cfg.lift.rank, number, w);
    maybe(t, "solve_rank", cfg.lift.solve_rank, number, w);
    maybe(t, "full_rank", cfg.lift.full_rank, number, w);
    maybe(t, "contract", cfg.lift.contract, number, w);
    maybe(t, "mu_floor", cfg.lift.mu_floor, number, w);
    maybe(t, "nod", cfg.nod_tol, number, w);
    maybe(t, "dreg_pass", cfg.dreg.pass, number, w);
    maybe(t, "dreg_fail", cfg.dreg.fail, number, w);
    maybe(t, "drift", cfg.drift_tol, number, w);
    maybe(t, "rtol", cfg.rtol, number, w);
    maybe(t, "atol", cfg.atol, number, w);
    maybe(t, "exclusion_angle", cfg.exclusion_angle, number, w);
    maybe(t, "standoff", cfg.standoff, number, w);
    maybe(t, "cluster_angle", cfg.cluster_angle, number, w);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path_or_name) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::is_regular_file(path_or_name, ec)) {
    std::ifstream in(path_or_name);
    if (!in) throw InputError("config: cannot read '" + path_or_name + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError("config: '" + path_or_name + "' is not valid JSON (" + e.what() + ")");
    }
    return parse_config(doc);
  }
  for (const auto& e : catalog_entries())
    if (e.name == path_or_name) return config_from_catalog(path_or_name);
  std::ostringstream msg;
  msg << "config: '" << path_or_name << "' is neither a readable file nor a catalog entry; catalog:";
  for (const auto& e : catalog_entries()) msg << ' ' << e.name;
  throw InputError(msg.str());
}

void validate(const RunConfig& cfg) {
  if (!cfg.map) throw InputError("map: missing");
  if (!(cfg.epsilon > 0.0)) throw InputError("epsilon: must be positive");
  if (!(cfg.delta > 0.0)) throw InputError("delta: must be positive");
  if (!(cfg.delta <= cfg.epsilon / 10.0)) throw InputError("delta: must satisfy delta <= epsilon/10");
  if (cfg.eta && !(*cfg.eta > 0.0)) throw InputError("eta: must be positive");
  require_positive(cfg.lift.collinear, "collinear");
  require_positive(cfg.lift.rank, "rank");
  require_positive(cfg.lift.solve_rank, "solve_rank");
  require_positive(cfg.lift.full_rank, "full_rank");
  require_positive(cfg.lift.contract, "contract");
  require_positive(cfg.lift.mu_floor, "mu_floor");
  require_positive(cfg.nod_tol, "nod");
  require_positive(cfg.dreg.pass, "dreg_pass");
  require_positive(cfg.dreg.fail, "dreg_fail");
  require_positive(cfg.drift_tol, "drift");
  require_positive(cfg.rtol, "rtol");
  require_positive(cfg.atol, "atol");
  require_positive(cfg.exclusion_angle, "exclusion_angle");
  require_positive(cfg.standoff, "standoff");
  require_positive(cfg.cluster_angle, "cluster_angle");
  if (!(cfg.dreg.fail < cfg.dreg.pass)) throw InputError("tolerances.dreg_fail: must be below dreg_pass");
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json out;
  out["map_label"] = cfg.map_label;
  out["map"] = fiblab::to_json(*cfg.map);
  out["epsilon"] = cfg.epsilon;
  out["delta"] = cfg.delta;
  out["eta"] = cfg.eta ? nlohmann::ordered_json(*cfg.eta) : nlohmann::ordered_json(nullptr);
  out["sampler"] = {{"samples", cfg.samples},
                    {"seeds", cfg.seeds},
                    {"starts", cfg.starts},
                    {"dreg_samples", cfg.dreg_samples},
                    {"seed", cfg.seed}};
  out["tolerances"] = {{"collinear", cfg.lift.collinear},
                       {"rank", cfg.lift.rank},
                       {"solve_rank", cfg.lift.solve_rank},
                       {"full_rank", cfg.lift.full_rank},
                       {"contract", cfg.lift.contract},
                       {"mu_floor", cfg.lift.mu_floor},
                       {"nod", cfg.nod_tol},
                       {"dreg_pass", cfg.dreg.pass},
                       {"dreg_fail", cfg.dreg.fail},
                       {"drift", cfg.drift_tol},
                       {"rtol", cfg.rtol},
                       {"atol", cfg.atol},
                       {"exclusion_angle", cfg.exclusion_angle},
                       {"standoff", cfg.standoff},
                       {"cluster_angle", cfg.cluster_angle}};
  out["strict"] = cfg.strict;
  return out;
}

}  // namespace fiblab::cli
