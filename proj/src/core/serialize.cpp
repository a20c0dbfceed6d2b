#include "fiblab/serialize.hpp"

#include <cmath>

#include "fiblab/error.hpp"

namespace fiblab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::OnZeroSet: return "on-zero-set";
    case ErrorKind::CriticalPoint: return "critical point";
    case ErrorKind::DRegularityFailure: return "d-regularity failure";
    case ErrorKind::SubcaseMisclassification: return "subcase misclassification";
    case ErrorKind::CollinearGradients: return "collinear gradients";
    case ErrorKind::MuUndefined: return "mu undefined";
  }
  return "unknown";
}

namespace {

const nlohmann::json& field(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw InputError(where + "." + key + ": missing");
  return *it;
}

int integer(const nlohmann::json& v, const std::string& where) {
  if (!v.is_number_integer()) throw InputError(where + ": expected an integer");
  const auto value = v.get<long long>();
  if (value < 0 || value > 1'000'000) throw InputError(where + ": out of range");
  return static_cast<int>(value);
}

json case_counts(const std::array<std::size_t, 3>& counts) {
  json out = json::object();
  for (std::size_t c = 0; c < counts.size(); ++c)
    out[std::string(lifting::to_string(static_cast<lifting::Case>(c)))] = counts[c];
  return out;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

PolynomialMap map_from_json(const nlohmann::json& doc, const std::string& where) {
  if (!doc.is_object()) throw InputError(where + ": expected an object");
  const int n = integer(field(doc, "n", where), where + ".n");
  const auto& comps = field(doc, "components", where);
  if (!comps.is_array()) throw InputError(where + ".components: expected an array");
  if (auto it = doc.find("p"); it != doc.end()) {
    const int p = integer(*it, where + ".p");
    if (p != static_cast<int>(comps.size()))
      throw InputError(where + ".p: " + std::to_string(p) + " does not match the " +
                       std::to_string(comps.size()) + " listed components");
  }
  std::string name;
  if (auto it = doc.find("name"); it != doc.end()) {
    if (!it->is_string()) throw InputError(where + ".name: expected a string");
    name = it->get<std::string>();
  }
  bool allow_zero = false;
  if (auto it = doc.find("allow_constant_zero"); it != doc.end()) {
    if (!it->is_boolean()) throw InputError(where + ".allow_constant_zero: expected a boolean");
    allow_zero = it->get<bool>();
  }

  std::vector<Polynomial> components;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string ci = where + ".components[" + std::to_string(i) + "]";
    if (!comps[i].is_array()) throw InputError(ci + ": expected an array of terms");
    Polynomial poly;
    for (std::size_t t = 0; t < comps[i].size(); ++t) {
      const std::string ti = ci + "[" + std::to_string(t) + "]";
      const auto& term = comps[i][t];
      if (!term.is_object()) throw InputError(ti + ": expected an object {\"c\":..., \"e\":[...]}");
      const auto& c = field(term, "c", ti);
      if (!c.is_number()) throw InputError(ti + ".c: expected a number");
      const auto& e = field(term, "e", ti);
      if (!e.is_array()) throw InputError(ti + ".e: expected an array");
      Term out;
      out.coeff = c.get<double>();
      for (std::size_t k = 0; k < e.size(); ++k) out.exponents.push_back(integer(e[k], ti + ".e[" + std::to_string(k) + "]"));
      poly.push_back(std::move(out));
    }
    components.push_back(std::move(poly));
  }
  try {
    return PolynomialMap(n, std::move(components), name, allow_zero);
  } catch (const InputError& e) {
    throw InputError(where + "." + e.what());
  }
}

json to_json(const PolynomialMap& map) {
  json out = json::object();
  if (!map.name().empty()) out["name"] = map.name();
  out["n"] = map.n();
  out["p"] = map.p();
  json comps = json::array();
  for (const auto& poly : map.components()) {
    json terms = json::array();
    for (const auto& t : poly) terms.push_back({{"c", t.coeff}, {"e", t.exponents}});
    comps.push_back(std::move(terms));
  }
  out["components"] = std::move(comps);
  if (map.allow_constant_zero()) out["allow_constant_zero"] = true;
  return out;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(finite_or_null(v(i)));
  return out;
}

json to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vec(m.row(r).transpose())));
  return out;
}

json jet_to_json(const Jet& j) {
  return {{"x", to_json(j.x)},           {"fx", to_json(j.fx)},   {"J", to_json(j.J)},
          {"grad_h", to_json(j.grad_h)}, {"grad_H", to_json(j.grad_H)}, {"phi", to_json(j.phi)},
          {"Fx", to_json(j.Fx)},         {"DF", to_json(j.DF)},   {"aug", to_json(j.aug)}};
}

json to_json(const lifting::CaseLabel& label) {
  return {{"case", lifting::to_string(label.kind)},
          {"collinear_cos", label.collinear_cos},
          {"aug_sigma_min", label.aug_sigma_min},
          {"df_sigma_min", label.df_sigma_min}};
}

json to_json(const lifting::LiftPair& l) {
  json out = {{"w_f", to_json(l.w_f)}, {"v_f", to_json(l.v_f)}, {"alpha", l.alpha},
              {"w_F", to_json(l.w_F)}, {"v_F", to_json(l.v_F)}, {"beta", l.beta},
              {"case", to_json(l.label)}};
  out["mu"] = l.mu ? json(*l.mu) : json(nullptr);
  out["residual_f"] = l.residual_f;
  out["residual_F"] = l.residual_F;
  out["constrained"] = l.constrained;
  return out;
}

json to_json(const lifting::KeypropViolation& v) { return {{"x", to_json(v.x)}, {"mu", v.mu}}; }

json to_json(const milnorfield::FieldSample& s) {
  return {{"x", to_json(s.x)},
          {"w_tilde", to_json(s.w_tilde)},
          {"case", to_json(s.label)},
          {"ip_tube", s.ip_tube},
          {"ip_sphere", s.ip_sphere},
          {"tangency_residual", s.tangency_residual},
          {"scale", s.scale},
          {"valid", s.valid},
          {"invalid_reason", s.invalid_reason},
          {"blended", s.blended},
          {"reclassified", s.reclassified},
          {"lifts", to_json(s.lifts)}};
}

json to_json(const milnorfield::NodReport& r) {
  json viol = json::array();
  for (const auto& v : r.violations) viol.push_back({{"x", to_json(v.x)}, {"cosine", v.cosine}});
  return {{"drawn", r.drawn},   {"used", r.used},         {"min_cosine", r.min_cosine},
          {"argmin", to_json(r.argmin)}, {"tol", r.tol}, {"violations", std::move(viol)}};
}

json to_json(const milnorfield::FieldScanReport& r) {
  json invalid = json::array();
  for (const auto& s : r.invalid) invalid.push_back(to_json(s));
  json keyprop = json::array();
  for (const auto& v : r.keyprop_violations) keyprop.push_back(to_json(v));
  return {{"drawn", r.drawn},
          {"used", r.used},
          {"valid", r.valid},
          {"errors", r.errors},
          {"error_messages", r.error_messages},
          {"cases", case_counts(r.case_counts)},
          {"blended", r.blended},
          {"reclassified", r.reclassified},
          {"min_angle_to_discriminant", finite_or_null(r.min_angle_to_discriminant)},
          {"keyprop_violations", std::move(keyprop)},
          {"invalid", std::move(invalid)}};
}

json to_json(const regularity::RegularityReport& r) {
  json wit = json::array();
  for (const auto& w : r.witnesses) wit.push_back({{"x", to_json(w.x)}, {"radius", w.radius}, {"margin", w.margin}});
  return {{"map", r.map_name},
          {"epsilon", r.epsilon},
          {"drawn", r.drawn},
          {"used", r.used},
          {"margin", {{"min", r.min}, {"p1", r.p1}, {"median", r.median}}},
          {"adversarial_min", r.adversarial_min},
          {"adversarial_argmin", to_json(r.adversarial_argmin)},
          {"thresholds", {{"pass", r.thresholds.pass}, {"fail", r.thresholds.fail}}},
          {"verdict", regularity::to_string(r.verdict)},
          {"witnesses", std::move(wit)}};
}

json to_json(const regularity::TransversalityReport& r) {
  return {{"epsilon", r.epsilon},
          {"drawn", r.drawn},
          {"used", r.used},
          {"critical", r.critical},
          {"min", r.used > 0 ? json(r.min) : json(nullptr)},
          {"argmin", to_json(r.argmin)}};
}

json to_json(const discriminant::DiscriminantReport& r) {
  auto clusters = [](const std::vector<discriminant::RayCluster>& cs) {
    json out = json::array();
    for (const auto& c : cs)
      out.push_back({{"direction", to_json(c.direction)}, {"members", c.members}, {"spread", c.spread}});
    return out;
  };
  json shells = json::array();
  for (const auto& s : r.shells)
    shells.push_back({{"inner", s.inner},
                      {"outer", s.outer},
                      {"samples", s.samples},
                      {"agrees", s.agrees},
                      {"clusters", clusters(s.clusters)}});
  json dirs = json::array();
  for (const auto& d : r.directions) dirs.push_back(to_json(d));
  return {{"map", r.map_name},
          {"ball_radius", r.ball_radius},
          {"starts", r.starts},
          {"critical_samples", r.samples.size()},
          {"cluster_angle", r.cluster_angle},
          {"clusters", clusters(r.clusters)},
          {"ambiguous", r.ambiguous},
          {"shells", std::move(shells)},
          {"linear", r.linear ? json(*r.linear) : json(nullptr)},
          {"eta", r.eta},
          {"directions", std::move(dirs)}};
}

json trace_summary(const flow::FlowTrace& t) {
  return {{"x0", to_json(t.x0)},
          {"x_end", to_json(t.x_end)},
          {"t_end", t.t_end},
          {"steps", t.steps.size()},
          {"rejected", t.rejected},
          {"phi_drift", t.phi_drift},
          {"monotone_r", t.monotone_r},
          {"monotone_h", t.monotone_h},
          {"cases", case_counts(t.cases)},
          {"status", flow::to_string(t.status)},
          {"failure", t.failure}};
}

json to_json(const flow::FlowStep& s) {
  return {{"t", s.t}, {"x", to_json(s.x)}, {"r", s.r}, {"fnorm", s.fnorm}, {"phi", to_json(s.phi)}};
}

json to_json(const flow::EquivalenceReport& r) {
  json out = {{"map", r.map_name}, {"epsilon", r.epsilon}, {"delta", r.delta}};
  out["refused"] = r.refused;
  if (r.refused) out["refusal"] = r.refusal;
  if (r.dreg) out["dreg"] = to_json(*r.dreg);
  json seeds = json::array();
  for (const auto& s : r.seeds) {
    json item = trace_summary(s.trace);
    item["index"] = s.index;
    item["round_trip"] = s.round_trip;
    item["failure"] = s.failure;
    seeds.push_back(std::move(item));
  }
  out["attempts"] = r.attempts;
  out["seeds"] = std::move(seeds);
  out["max_phi_drift"] = r.max_drift;
  out["drift_tol"] = r.drift_tol;
  out["max_round_trip"] = r.max_round_trip;
  out["round_trip_tol"] = r.round_trip_tol;
  out["rejected_steps"] = r.rejected_steps;
  out["cases"] = case_counts(r.cases);
  out["failures"] = r.failures;
  out["verdict"] = r.refused ? "refused" : (r.pass ? "pass" : "fail");
  return out;
}

}  // namespace fiblab
