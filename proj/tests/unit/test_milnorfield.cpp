#include <doctest.h>

#include <cmath>

#include "fiblab/cli.hpp"
#include "fiblab/error.hpp"
#include "fiblab/milnorfield.hpp"
#include "fiblab/pencil.hpp"
#include "support.hpp"

using namespace fiblab;
using namespace fiblab::milnorfield;
using fiblab::lifting::Case;
using fiblab::test::vec;

TEST_CASE("field of the square map at (1,0)") {
  const Jet j = jet(cli::catalog_map("square"), vec({1, 0}));
  const FieldSample s = milnor_vector(j);
  // Hand assembly: |grad H| w_f + alpha |grad h| w_F = 2 (1,0) + (1/4) 4 (2,0).
  const Vec expect = 2.0 * vec({1, 0}) + 0.25 * 4.0 * vec({2, 0});
  CHECK((s.w_tilde - expect).norm() < 1e-14);
  CHECK((s.w_tilde - vec({4, 0})).norm() < 1e-14);
  CHECK(s.ip_tube == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(s.ip_sphere == doctest::Approx(8.0).epsilon(1e-14));
  CHECK(s.label.kind == Case::Collinear);
  CHECK(s.valid);
}

TEST_CASE("field of the identity is 8|x| x") {
  const auto map = cli::catalog_map("identity-2");
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vec x = ball_point(rng, 2, 1.0);
    if (x.norm() < 1e-3) continue;
    const FieldSample s = milnor_vector(jet(map, x));
    CHECK((s.w_tilde - 8 * x.norm() * x).norm() < 1e-12 * x.norm() * x.norm());
    CHECK(s.ip_tube > 0);
    CHECK(s.ip_sphere > 0);
    REQUIRE(s.lifts.mu.has_value());
    CHECK(*s.lifts.mu == doctest::Approx(1.0));
  }
}

TEST_CASE("quadrics at (1,1,1) uses the constrained construction") {
  const Jet j = jet(cli::catalog_map("quadrics-3-2"), vec({1, 1, 1}));
  const FieldSample s = milnor_vector(j);
  CHECK(s.label.kind == Case::TransverseGeneric);
  CHECK(s.lifts.constrained);
  CHECK(s.tangency_residual < 1e-7 * s.scale);
  CHECK(s.ip_tube > 0);
  CHECK(s.ip_sphere > 0);
  CHECK(s.valid);
  // Recompute the tangency residual independently.
  const Vec Dw = j.J * s.w_tilde;
  const Vec along = j.fx * (j.fx.dot(Dw) / j.h);
  CHECK(std::abs((Dw - along).norm() - s.tangency_residual) < 1e-12 * s.scale);
}

TEST_CASE("normal-first construction keeps the same diagnostics") {
  const Jet j = jet(cli::catalog_map("quadrics-3-2"), vec({1, 1, 1}));
  const FieldSample s = milnor_vector(j, {}, nullptr, Construction::NormalFirst);
  CHECK(s.valid);
  CHECK_FALSE(s.lifts.constrained);
  CHECK(transversality_margin(j, s) > 1e-3);
}

TEST_CASE("d-regularity failure propagates as a witness") {
  Mat J(2, 3);
  J << 0, 1, 0, 1, 0, 0;
  const Jet j = jet_from_values(vec({1, 0, 0}), vec({1, 0}), J);
  try {
    milnor_vector(j);
    FAIL("expected a d-regularity failure");
  } catch (const PointError& e) {
    CHECK(e.kind() == ErrorKind::DRegularityFailure);
  }
}

TEST_CASE("closed forms of the two inner products") {
  std::size_t checked = 0;
  for (const auto& c : test::random_suite(1000, 41)) {
    const Jet j = jet(c.map, c.x);
    try {
      const FieldSample s = milnor_vector(j);
      const double tol = 1e-8 * s.scale * std::max(1.0, s.w_tilde.norm() * j.grad_h.norm());
      CHECK(std::abs(ip_tube_closed_form(j, s) - s.ip_tube) < tol);
      const double tol_s = 1e-8 * s.scale * std::max(1.0, s.w_tilde.norm() * j.grad_H.norm());
      CHECK(std::abs(ip_sphere_closed_form(j, s) - s.ip_sphere) < tol_s);
      ++checked;
    } catch (const PointError&) {
    }
  }
  CHECK(checked > 800);

  // Collinear points: the closed form reduces to the positive first term.
  const auto square = cli::catalog_map("square");
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Jet j = jet(square, ball_point(rng, 2, 1.0));
    const FieldSample s = milnor_vector(j);
    REQUIRE(s.label.kind == Case::Collinear);
    CHECK(std::abs(ip_tube_closed_form(j, s) - s.ip_tube) < 1e-8 * s.scale * std::max(1.0, s.ip_tube));
  }
}

TEST_CASE("classification labels do not depend on the coefficient scale") {
  for (const auto& c : test::random_suite(500, 42)) {
    const Jet j = jet(c.map, c.x);
    const auto base = lifting::classify_point(j).kind;
    for (double k : {0.2, 3.0, 17.0}) {
      const Jet js = jet(c.map.scaled(k), c.x);
      CHECK(lifting::classify_point(js).kind == base);
    }
  }
}

TEST_CASE("nod scans") {
  SamplerCfg cfg;
  cfg.samples = 2000;
  const auto sq = nod_scan(cli::catalog_map("square"), {0.1, 1.0, 1e-9}, cfg);
  CHECK(sq.min_cosine == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sq.violations.empty());
  CHECK(sq.used == sq.drawn);

  const auto id = nod_scan(cli::catalog_map("identity-2"), {0.1, 1.0, 1e-9}, cfg);
  CHECK(id.min_cosine == doctest::Approx(1.0).epsilon(1e-12));

  cfg.samples = 10000;
  const auto q = nod_scan(cli::catalog_map("quadrics-3-2"), {0.1, 0.5, 1e-9}, cfg);
  CHECK(q.violations.empty());
  CHECK(q.used > 5000);
  CHECK(q.min_cosine > -1 + 1e-9);
}

TEST_CASE("nod scan with everything excluded is an input error") {
  SamplerCfg cfg;
  cfg.samples = 50;
  ExclusionZone zone;
  zone.standoff = 1e9;
  CHECK_THROWS_AS(nod_scan(cli::catalog_map("square"), {0.1, 1.0, 1e-9}, cfg, zone), InputError);
  CHECK_THROWS_AS(nod_scan(cli::catalog_map("square"), {0.0, 1.0, 1e-9}, cfg), InputError);
}

TEST_CASE("field scans are valid on the catalog d-regular maps") {
  SamplerCfg cfg;
  cfg.samples = 3000;
  for (const char* name : {"square", "quadrics-3-2", "identity-2", "projection-3-2"}) {
    INFO(name);
    const auto rep = field_scan(cli::catalog_map(name), {0.05, 0.5, 1e-9}, cfg, {}, {}, true);
    CHECK(rep.all_valid());
    CHECK(rep.keyprop_violations.empty());
    CHECK(rep.samples.size() == rep.used);
    for (const auto& s : rep.samples) {
      CHECK(s.ip_tube > 0);
      CHECK(s.ip_sphere > 0);
      CHECK(s.tangency_residual < 1e-7 * s.scale);
    }
  }
}

TEST_CASE("field scans are deterministic across thread counts") {
  SamplerCfg a, b;
  a.samples = b.samples = 500;
  a.threads = 1;
  b.threads = 4;
  const auto map = cli::catalog_map("quadrics-3-2");
  const auto ra = field_scan(map, {0.05, 0.5, 1e-9}, a, {}, {}, true);
  const auto rb = field_scan(map, {0.05, 0.5, 1e-9}, b, {}, {}, true);
  REQUIRE(ra.samples.size() == rb.samples.size());
  for (std::size_t i = 0; i < ra.samples.size(); ++i)
    CHECK((ra.samples[i].w_tilde.array() == rb.samples[i].w_tilde.array()).all());
  CHECK(ra.case_counts == rb.case_counts);
}

TEST_CASE("exclusion zone is honoured by field scans") {
  SamplerCfg cfg;
  cfg.samples = 2000;
  ExclusionZone zone;
  zone.directions = {vec({1, 0}), vec({-1, 1}) / std::sqrt(2.0), vec({-1, -1}) / std::sqrt(2.0)};
  const auto rep = field_scan(cli::catalog_map("quadrics-3-2"), {0.05, 0.5, 1e-9}, cfg, zone, {}, true);
  CHECK(rep.min_angle_to_discriminant > zone.angle);
  for (const auto& s : rep.samples) {
    const Jet j = jet(cli::catalog_map("quadrics-3-2"), s.x);
    CHECK(zone.angular_distance(j.phi) > zone.angle);
  }
}
