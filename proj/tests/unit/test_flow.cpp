#include <doctest.h>

#include <cmath>

#include "fiblab/cli.hpp"
#include "fiblab/error.hpp"
#include "fiblab/flow.hpp"
#include "support.hpp"

using namespace fiblab;
using namespace fiblab::flow;
using fiblab::test::vec;

namespace {

bool same_steps(const FlowTrace& a, const FlowTrace& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (a.steps[i].t != b.steps[i].t) return false;
    if (!(a.steps[i].x.array() == b.steps[i].x.array()).all()) return false;
  }
  return true;
}

std::vector<Vec> quadrics_seeds(std::size_t count) {
  const auto map = cli::catalog_map("quadrics-3-2");
  std::vector<Vec> out;
  Rng rng(77);
  while (out.size() < count) {
    if (auto x = project_to_tube(map, ball_point(rng, 3, 0.5), 0.005, 0.5)) out.push_back(*x);
  }
  return out;
}

}  // namespace

TEST_CASE("square map flows radially") {
  const auto map = cli::catalog_map("square");
  const FlowTrace tr = integrate(map, vec({0.5, 0}), 1.0);
  REQUIRE(tr.reached());
  CHECK((tr.x_end - vec({1, 0})).norm() < 1e-7);
  CHECK(tr.phi_drift < 1e-15);
  CHECK(tr.monotone_r);
  CHECK(tr.monotone_h);
  // Unit radial speed: the event time equals the radial distance travelled.
  CHECK(tr.t_end == doctest::Approx(0.5).epsilon(1e-8));

  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const Vec x0 = ball_point(rng, 2, 0.9);
    if (x0.norm() < 0.01) continue;
    const FlowTrace t = integrate(map, x0, 1.0);
    REQUIRE(t.reached());
    CHECK((t.x_end - x0.normalized()).norm() < 1e-7);
    CHECK(t.phi_drift < 1e-12);
  }
}

TEST_CASE("identity flows radially") {
  const auto map = cli::catalog_map("identity-2");
  const Vec u = vec({0.6, -0.8});
  const FlowTrace tr = integrate(map, 0.3 * u, 1.0);
  REQUIRE(tr.reached());
  CHECK((tr.x_end - u).norm() < 1e-7);
  CHECK(tr.phi_drift < 1e-15);
  CHECK(std::abs(tr.x_end.norm() - 1.0) <= 1e-7);
}

TEST_CASE("normalized field has unit radial speed") {
  const auto map = cli::catalog_map("quadrics-3-2");
  for (const Vec& x : quadrics_seeds(20)) {
    const Vec w = normalized_field(map, x);
    // d||x||/dt = <w, x>/||x||.
    CHECK(w.dot(x) / x.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("quadrics traces keep Phi constant and converge under tighter tolerances") {
  const auto map = cli::catalog_map("quadrics-3-2");
  FlowOpts loose, tight;
  tight.rtol = loose.rtol / 10;
  tight.atol = loose.atol / 10;
  double max_loose = 0.0, max_tight = 0.0;
  for (const Vec& x0 : quadrics_seeds(10)) {
    const FlowTrace a = integrate(map, x0, 0.5, loose);
    const FlowTrace b = integrate(map, x0, 0.5, tight);
    REQUIRE(a.reached());
    REQUIRE(b.reached());
    CHECK(a.phi_drift < 1e-5);
    CHECK(std::abs(a.x_end.norm() - 0.5) <= 1e-7 * 0.5);
    CHECK((a.x_end - b.x_end).norm() < 1e-5);
    CHECK(a.monotone_r);
    CHECK(a.monotone_h);
    max_loose = std::max(max_loose, a.phi_drift);
    max_tight = std::max(max_tight, b.phi_drift);
  }
  CHECK(max_tight < max_loose);
}

TEST_CASE("backward flow returns to the seed") {
  const auto map = cli::catalog_map("quadrics-3-2");
  const Vec x0 = quadrics_seeds(1).front();
  const FlowTrace fwd = integrate(map, x0, 0.5);
  REQUIRE(fwd.reached());
  const FlowTrace back = integrate_backward(map, fwd.x_end, x0.norm());
  REQUIRE(back.reached());
  CHECK((back.x_end - x0).norm() < 1e-6 * 0.5);
  CHECK(back.monotone_r);
}

TEST_CASE("integration input errors") {
  const auto map = cli::catalog_map("square");
  CHECK_THROWS_AS(integrate(map, vec({1.5, 0}), 1.0), InputError);
  CHECK_THROWS_AS(integrate(map, vec({0.5, 0, 0}), 1.0), InputError);
  CHECK_THROWS_AS(integrate_backward(map, vec({0.5, 0}), 0.9), InputError);
}

TEST_CASE("trace on the zero set reports a field error") {
  const FlowTrace tr = integrate(cli::catalog_map("square"), vec({0, 0}) + vec({1e-12, 0}), 1.0);
  CHECK_FALSE(tr.reached());
  CHECK(tr.status == Status::FieldError);
  CHECK_FALSE(tr.failure.empty());
}

TEST_CASE("Newton projection lands on the tube") {
  const auto map = cli::catalog_map("quadrics-3-2");
  for (const Vec& x : quadrics_seeds(50)) {
    CHECK(std::abs(map.eval(x).norm() - 0.005) <= 1e-9);
    CHECK(x.norm() < 0.5);
  }
}

TEST_CASE("tube inflation for the square map") {
  SeedCfg seeds;
  seeds.count = 100;
  const auto rep = inflate_tube(cli::catalog_map("square"), 1.0, 0.05, seeds);
  CHECK_FALSE(rep.refused);
  CHECK(rep.pass);
  CHECK(rep.seeds.size() == 100);
  CHECK(rep.max_drift < 1e-6);
  CHECK(rep.max_round_trip < 1e-6);
  for (const auto& s : rep.seeds) {
    CHECK(std::abs(s.trace.x0.norm() * s.trace.x0.norm() - 0.05) < 1e-9);
    CHECK((s.trace.x_end - s.trace.x0.normalized()).norm() < 1e-7);
  }
  CHECK(traces_csv(rep).rfind("seed,t,x1,x2,r,fnorm\n", 0) == 0);
}

TEST_CASE("tube inflation for the quadrics map") {
  SeedCfg seeds;
  seeds.count = 100;
  FlowOpts opts;
  opts.zone.directions = test::quadrics_zone().directions;
  const auto rep = inflate_tube(cli::catalog_map("quadrics-3-2"), 0.5, 0.005, seeds, opts, test::quadrics_zone());
  CHECK_FALSE(rep.refused);
  CHECK(rep.pass);
  CHECK(rep.failures == 0);
  CHECK(rep.max_drift < 1e-5);
  CHECK(rep.max_round_trip < 1e-6 * 0.5);
  for (const auto& s : rep.seeds) {
    CHECK(s.trace.monotone_r);
    CHECK(s.trace.monotone_h);
  }
}

TEST_CASE("tube inflation is deterministic across thread counts") {
  SeedCfg a, b;
  a.count = b.count = 12;
  a.threads = 1;
  b.threads = 4;
  const auto map = cli::catalog_map("quadrics-3-2");
  FlowOpts opts;
  opts.zone.directions = test::quadrics_zone().directions;
  const auto ra = inflate_tube(map, 0.5, 0.005, a, opts, test::quadrics_zone());
  const auto rb = inflate_tube(map, 0.5, 0.005, b, opts, test::quadrics_zone());
  CHECK(ra.pass);
  REQUIRE(ra.seeds.size() == rb.seeds.size());
  for (std::size_t i = 0; i < ra.seeds.size(); ++i) CHECK(same_steps(ra.seeds[i].trace, rb.seeds[i].trace));
  CHECK(traces_csv(ra) == traces_csv(rb));
}

TEST_CASE("non-d-regular map is refused with a witness") {
  SeedCfg seeds;
  seeds.count = 10;
  const auto rep = inflate_tube(cli::catalog_map("nondreg-4-3"), 0.5, 0.005, seeds);
  CHECK(rep.refused);
  CHECK_FALSE(rep.pass);
  REQUIRE(rep.dreg.has_value());
  CHECK_FALSE(rep.dreg->witnesses.empty());
  CHECK(rep.refusal.find("witness") != std::string::npos);
  CHECK(rep.seeds.empty());
}

TEST_CASE("tube inflation input errors") {
  SeedCfg seeds;
  seeds.count = 10;
  const auto sq = cli::catalog_map("square");
  CHECK_THROWS_AS(inflate_tube(sq, 1.0, 0.2, seeds), InputError);
  CHECK_THROWS_AS(inflate_tube(sq, 1.0, 0.0, seeds), InputError);
  // ||f|| never exceeds 1e-3 in the unit ball, so delta = 0.1 is out of reach.
  const auto tiny = cli::catalog_map("identity-2").scaled(1e-3);
  try {
    inflate_tube(tiny, 1.0, 0.1, seeds);
    FAIL("expected tube unreachable");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("tube unreachable") != std::string::npos);
  }
}
