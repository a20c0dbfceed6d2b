#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <map>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fiblab/cli.hpp"
#include "fiblab/discriminant.hpp"
#include "fiblab/error.hpp"
#include "fiblab/flow.hpp"
#include "fiblab/kernels.hpp"
#include "fiblab/milnorfield.hpp"
#include "fiblab/regularity.hpp"
#include "fiblab/serialize.hpp"

namespace fiblab::cli {

namespace {

using fiblab::to_json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string fmt(const Vec& v) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v(i));
  return s + ")";
}

struct Overrides {
  std::optional<std::string> out;
  bool strict = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<std::size_t> samples;
  std::optional<std::size_t> seeds;
};

void apply(RunConfig& cfg, const Overrides& o) {
  if (o.out) cfg.out_dir = *o.out;
  if (o.strict) cfg.strict = true;
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.epsilon) cfg.epsilon = *o.epsilon;
  if (o.delta) cfg.delta = *o.delta;
  if (o.samples) cfg.samples = *o.samples;
  if (o.seeds) cfg.seeds = *o.seeds;
  validate(cfg);
}

class Session {
 public:
  Session(RunConfig cfg, std::string command, std::ostream& out)
      : cfg_(std::move(cfg)), out_(out) {
    summary_["command"] = std::move(command);
    summary_["config"] = to_json(cfg_);
    out_ << "fiblab " << summary_["command"].get<std::string>() << ": " << cfg_.map_label << " (n=" << map().n()
         << ", p=" << map().p() << "), epsilon=" << fmt(cfg_.epsilon) << ", delta=" << fmt(cfg_.delta)
         << ", seed=" << cfg_.seed << "\n";
  }

  const PolynomialMap& map() const { return *cfg_.map; }
  const RunConfig& cfg() const { return cfg_; }
  SamplerCfg sampler() const { return {cfg_.samples, cfg_.seed, cfg_.threads}; }

  ExclusionZone zone() const { return {directions_, cfg_.exclusion_angle, cfg_.standoff}; }

  void verdict(const std::string& property, const std::string& value, const std::string& detail) {
    summary_["verdicts"][property] = value;
    if (value != "pass") all_pass_ = false;
    out_ << "  [" << value << "] " << property << ": " << detail << "\n";
  }

  void note(const std::string& line) { out_ << "  " << line << "\n"; }

  discriminant::DiscriminantReport discriminant() {
    discriminant::SearchCfg sc;
    sc.starts = cfg_.starts;
    sc.cluster_angle = cfg_.cluster_angle;
    auto rep = discriminant::sample_discriminant(map(), cfg_.epsilon, sampler(), sc);
    std::vector<double> radii;
    if (cfg_.eta)
      radii = {*cfg_.eta / 8, *cfg_.eta / 4, *cfg_.eta / 2, *cfg_.eta};
    else
      radii = discriminant::default_radii(rep);
    rep = discriminant::linearity_check(std::move(rep), radii);
    directions_ = rep.directions;
    summary_["discriminant"] = to_json(rep);
    note("discriminant: " + std::to_string(rep.samples.size()) + " critical samples, " +
         std::to_string(rep.directions.size()) + " ray directions, " +
         (rep.linear.value_or(false) ? "linear" : "not linear") + " up to eta = " + fmt(rep.eta));
    artifacts_["discriminant.csv"] = discriminant::samples_csv(rep);
    return rep;
  }

  regularity::RegularityReport dreg(bool stream_samples) {
    auto rep = regularity::dreg_scan(map(), cfg_.epsilon, sampler(), zone(), cfg_.dreg, {}, true);
    summary_["dreg"] = to_json(rep);
    std::string detail = "min margin " + fmt(rep.min) + ", adversarial minimum " + fmt(rep.adversarial_min);
    if (!rep.witnesses.empty()) detail += ", witness x = " + fmt(rep.witnesses.front().x);
    verdict("pencil members transverse to small spheres (d-regularity)", std::string(regularity::to_string(rep.verdict)),
            detail);
    artifacts_["margins.csv"] = regularity::margins_csv(rep);
    if (stream_samples) {
      std::string lines;
      for (const auto& s : rep.samples)
        lines += json({{"x", fiblab::to_json(s.x)}, {"radius", s.radius}, {"margin", s.margin}}).dump() + "\n";
      artifacts_["samples.jsonl"] = std::move(lines);
    }
    return rep;
  }

  void nod_and_field() {
    const milnorfield::Annulus region{cfg_.epsilon / 10.0, cfg_.epsilon, 1e-9};
    const auto nod = milnorfield::nod_scan(map(), region, sampler(), zone(), cfg_.nod_tol);
    summary_["nod"] = to_json(nod);
    verdict("grad h and grad H never point in opposite directions", nod.violations.empty() ? "pass" : "fail",
            "min cosine " + fmt(nod.min_cosine) + " over " + std::to_string(nod.used) + " samples");

    const auto field = milnorfield::field_scan(map(), region, sampler(), zone(), cfg_.lift, true);
    summary_["field"] = to_json(field);
    verdict("w~ transverse to tubes and spheres, tangent to pencil members", field.all_valid() ? "pass" : "fail",
            std::to_string(field.valid) + "/" + std::to_string(field.used) + " samples valid, " +
                std::to_string(field.errors) + " evaluation errors");
    verdict("mu > 0 wherever the lifts are collinear", field.keyprop_violations.empty() ? "pass" : "fail",
            std::to_string(field.keyprop_violations.size()) + " violations");
    std::string lines;
    for (const auto& s : field.samples) lines += fiblab::to_json(s).dump() + "\n";
    artifacts_["samples.jsonl"] = std::move(lines);
  }

  void transversality() {
    if (map().n() <= map().p()) {
      note("fiber/sphere transversality: not applicable (n = p)");
      return;
    }
    SamplerCfg s = sampler();
    const auto rep = regularity::transversality_scan(map(), cfg_.epsilon, s, zone());
    summary_["transversality"] = to_json(rep);
    const bool ok = rep.used > 0 && rep.min > 0.0;
    verdict("fibers meet the sphere transversely", ok ? "pass" : "inconclusive",
            "min margin " + (rep.used > 0 ? fmt(rep.min) : std::string("n/a")) + " over " + std::to_string(rep.used) +
                " samples");
  }

  flow::EquivalenceReport flow(bool steps_jsonl) {
    flow::FlowOpts opts;
    opts.rtol = cfg_.rtol;
    opts.atol = cfg_.atol;
    opts.tols = cfg_.lift;
    opts.zone = ExclusionZone{directions_, cfg_.exclusion_angle, 0.0};
    flow::SeedCfg seeds{cfg_.seeds, cfg_.seed, cfg_.threads, cfg_.dreg_samples};
    auto rep = flow::inflate_tube(map(), cfg_.epsilon, cfg_.delta, seeds, opts, zone(), cfg_.drift_tol);
    summary_["equivalence"] = to_json(rep);
    if (rep.refused) {
      verdict("Phi constant along integral curves of w~ (tube-to-sphere inflation)", "fail",
              "refused: " + rep.refusal);
    } else {
      verdict("Phi constant along integral curves of w~ (tube-to-sphere inflation)", rep.pass ? "pass" : "fail",
              std::to_string(rep.seeds.size() - rep.failures) + "/" + std::to_string(rep.seeds.size()) +
                  " traces ok, max drift " + fmt(rep.max_drift) + ", max round trip " + fmt(rep.max_round_trip));
    }
    artifacts_["traces.csv"] = flow::traces_csv(rep);
    if (steps_jsonl) {
      std::string lines;
      for (const auto& s : rep.seeds) {
        for (const auto& st : s.trace.steps) {
          json rec = fiblab::to_json(st);
          rec["seed"] = s.index;
          lines += rec.dump() + "\n";
        }
      }
      artifacts_["samples.jsonl"] = std::move(lines);
    }
    return rep;
  }

  json& summary() { return summary_; }

  int finish() {
    summary_["all_pass"] = all_pass_;
    artifacts_["summary.json"] = summary_.dump(2) + "\n";
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg_.out_dir, ec);
    if (ec) throw InputError("output: cannot create directory '" + cfg_.out_dir + "'");
    for (const auto& [name, body] : artifacts_) {
      std::ofstream f(fs::path(cfg_.out_dir) / name, std::ios::binary);
      if (!f) throw InputError("output: cannot write '" + (fs::path(cfg_.out_dir) / name).string() + "'");
      f << body;
    }
    out_ << "  artifacts written to " << cfg_.out_dir << "\n";
    return cfg_.strict && !all_pass_ ? 1 : 0;
  }

 private:
  RunConfig cfg_;
  std::ostream& out_;
  json summary_ = json::object();
  std::vector<Vec> directions_;
  std::map<std::string, std::string> artifacts_;
  bool all_pass_ = true;
};

int analyze(RunConfig cfg, const std::string& command, std::ostream& out) {
  Session s(std::move(cfg), command, out);
  s.discriminant();
  s.dreg(false);
  s.nod_and_field();
  s.transversality();
  s.flow(false);
  return s.finish();
}

Vec parse_point(const std::string& text, int n) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InputError("--point: '" + item + "' is not a number");
    }
  }
  if (static_cast<int>(values.size()) != n)
    throw InputError("--point: expected " + std::to_string(n) + " coordinates, got " + std::to_string(values.size()));
  return Eigen::Map<Vec>(values.data(), n);
}

int lift(RunConfig cfg, const std::string& point, std::ostream& out) {
  const Vec x = parse_point(point, cfg.map->n());
  Session s(std::move(cfg), "lift", out);
  const Jet j = jet(s.map(), x);
  std::vector<lifting::KeypropViolation> violations;
  const auto pair = lifting::lift_pair(j, s.cfg().lift, &violations);
  const auto sample = milnorfield::milnor_vector(j, s.cfg().lift, &violations);
  s.summary()["jet"] = jet_to_json(j);
  s.summary()["lifts"] = to_json(pair);
  s.summary()["field"] = to_json(sample);
  s.note("x = " + fmt(x) + ", case " + std::string(lifting::to_string(sample.label.kind)));
  s.note("w_f = " + fmt(pair.w_f));
  s.note("alpha = " + fmt(pair.alpha));
  s.note("w_F = " + fmt(pair.w_F));
  s.note("beta = " + fmt(pair.beta));
  if (pair.mu) s.note("mu = " + fmt(*pair.mu));
  s.note("w~ = " + fmt(sample.w_tilde));
  s.verdict("w~ transverse to tubes and spheres, tangent to pencil members", sample.valid ? "pass" : "fail",
            "<w~, grad h> = " + fmt(sample.ip_tube) + ", <w~, grad H> = " + fmt(sample.ip_sphere) +
                ", tangency residual " + fmt(sample.tangency_residual));
  if (pair.mu || sample.lifts.mu)
    s.verdict("mu > 0 wherever the lifts are collinear", violations.empty() ? "pass" : "fail",
              std::to_string(violations.size()) + " violations");
  return s.finish();
}

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--out", o.out, "Output directory for artifacts");
  sub->add_flag("--strict", o.strict, "Exit 1 when any verdict is fail or inconclusive");
  sub->add_option("--seed", o.seed, "Global seed");
  sub->add_option("--threads", o.threads, "Worker threads (0: FIBLAB_THREADS or hardware)")->check(CLI::NonNegativeNumber);
  sub->add_option("--epsilon", o.epsilon, "Sphere radius");
  sub->add_option("--delta", o.delta, "Tube radius");
  sub->add_option("--samples", o.samples, "Samples per scan")->check(CLI::PositiveNumber);
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fiblab: Milnor fibration laboratory for polynomial maps"};
  app.name("fiblab");
  app.require_subcommand(1);
  Overrides o;
  std::string config;
  std::string point;
  std::string example;

  auto* analyze_cmd = app.add_subcommand("analyze", "Run every scan and the flow equivalence");
  analyze_cmd->add_option("config", config, "Config file or catalog name")->required();
  add_common(analyze_cmd, o);

  auto* dreg_cmd = app.add_subcommand("dreg", "d-regularity scan");
  dreg_cmd->add_option("config", config, "Config file or catalog name")->required();
  add_common(dreg_cmd, o);

  auto* lift_cmd = app.add_subcommand("lift", "Lifts and w~ at one point");
  lift_cmd->add_option("config", config, "Config file or catalog name")->required();
  lift_cmd->add_option("--point", point, "Comma-separated coordinates")->required();
  add_common(lift_cmd, o);

  auto* flow_cmd = app.add_subcommand("flow", "Tube-to-sphere inflation");
  flow_cmd->add_option("config", config, "Config file or catalog name")->required();
  flow_cmd->add_option("--seeds", o.seeds, "Number of tube seeds")->check(CLI::PositiveNumber);
  add_common(flow_cmd, o);

  auto* disc_cmd = app.add_subcommand("discriminant", "Critical set, discriminant and linearity");
  disc_cmd->add_option("config", config, "Config file or catalog name")->required();
  add_common(disc_cmd, o);

  auto* ex_cmd = app.add_subcommand("examples", "Built-in catalog");
  ex_cmd->require_subcommand(1);
  auto* ex_list = ex_cmd->add_subcommand("list", "List catalog maps");
  auto* ex_run = ex_cmd->add_subcommand("run", "Analyze a catalog map");
  ex_run->add_option("name", example, "Catalog name")->required();
  ex_run->add_option("--seeds", o.seeds, "Number of tube seeds")->check(CLI::PositiveNumber);
  add_common(ex_run, o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ex_list) {
      for (const auto& e : catalog_entries())
        out << e.name << "\t" << e.description << "\t(epsilon=" << fmt(e.epsilon) << ", delta=" << fmt(e.delta)
            << ")\n";
      return 0;
    }
    RunConfig cfg = *ex_run ? config_from_catalog(example) : load_config(config);
    apply(cfg, o);
    if (*ex_run) return analyze(std::move(cfg), "examples run", out);
    if (*analyze_cmd) return analyze(std::move(cfg), "analyze", out);
    if (*lift_cmd) return lift(std::move(cfg), point, out);
    Session s(std::move(cfg), *dreg_cmd ? "dreg" : *flow_cmd ? "flow" : "discriminant", out);
    s.discriminant();
    if (*dreg_cmd) s.dreg(true);
    if (*flow_cmd) s.flow(true);
    return s.finish();
  } catch (const PointError& e) {
    err << "error: " << e.what() << " at x = " << fmt(e.point()) << "\n";
    return 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace fiblab::cli
