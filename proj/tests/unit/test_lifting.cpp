#include <doctest.h>

#include <cmath>

#include "fiblab/cli.hpp"
#include "fiblab/error.hpp"
#include "fiblab/lifting.hpp"
#include "support.hpp"

using namespace fiblab;
using namespace fiblab::lifting;
using fiblab::test::vec;

TEST_CASE("opposite_directions") {
  CHECK(opposite_directions(vec({1, 0}), vec({-2, 0}), 1e-9));
  CHECK_FALSE(opposite_directions(vec({1, 0}), vec({0, 1}), 1e-9));
  CHECK(opposite_directions(vec({1, 1}), vec({-1, -1 + 1e-12}), 1e-9));
  CHECK_THROWS_AS(opposite_directions(vec({0, 0}), vec({1, 0}), 1e-9), InputError);
}

TEST_CASE("normal lifts of the identity") {
  const auto map = cli::catalog_map("identity-2");
  const Vec x = vec({0.3, -0.7});
  const Jet j = jet(map, x);
  const Lift lf = normal_lift_f(j);
  CHECK((lf.w - 2 * x).norm() < 1e-14);
  CHECK(lf.v.norm() < 1e-14);
  CHECK(lf.coeff == doctest::Approx(1.0).epsilon(1e-14));
  const Lift lF = normal_lift_F(j);
  CHECK((lF.w - 2 * x).norm() < 1e-14);
  CHECK(lF.v.norm() < 1e-14);
  CHECK(lF.coeff == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("normal lifts of the square map at (1,0)") {
  const Jet j = jet(cli::catalog_map("square"), vec({1, 0}));
  const Lift lf = normal_lift_f(j);
  CHECK((lf.w - vec({1, 0})).norm() < 1e-15);
  CHECK(lf.v.norm() < 1e-15);
  CHECK(lf.coeff == doctest::Approx(0.25).epsilon(1e-15));
  const Lift lF = normal_lift_F(j);
  CHECK((lF.w - vec({2, 0})).norm() < 1e-15);
  CHECK(lF.v.norm() < 1e-15);
  CHECK(lF.coeff == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("rank failures raise the matching point errors") {
  const auto nondreg = cli::catalog_map("nondreg-4-3");
  try {
    normal_lift_f(jet(nondreg, vec({0, 0, 1, 1})));
    FAIL("expected a critical point error");
  } catch (const PointError& e) {
    CHECK(e.kind() == ErrorKind::CriticalPoint);
  }

  // Df is surjective but maps the sphere's tangent space onto the line of f,
  // so DF has rank one.
  Mat J(2, 3);
  J << 0, 1, 0, 1, 0, 0;
  const Jet j = jet_from_values(vec({1, 0, 0}), vec({1, 0}), J);
  CHECK_NOTHROW(normal_lift_f(j));
  try {
    normal_lift_F(j);
    FAIL("expected a d-regularity failure");
  } catch (const PointError& e) {
    CHECK(e.kind() == ErrorKind::DRegularityFailure);
    CHECK((e.point() - j.x).norm() == 0.0);
    CHECK(e.sigma_min() < 1e-12);
  }
}

TEST_CASE("constrained lift at (1,1,1) on the quadrics map") {
  const Jet j = jet(cli::catalog_map("quadrics-3-2"), vec({1, 1, 1}));
  // Oracle: L_x is spanned by (0,1,-1)/sqrt(2), the cross product of grad h and grad H.
  const Vec b = vec({0, 1, -1}) / std::sqrt(2.0);
  const double alpha = 4 * j.h / j.grad_h.squaredNorm();
  const Vec rhs = 2 * j.fx - alpha * (j.J * j.grad_h);
  const Vec jb = j.J * b;
  const double t = jb.dot(rhs) / jb.squaredNorm();
  const Vec expect = t * b + alpha * j.grad_h;

  const Lift lf = constrained_lift(j, Which::FLift);
  CHECK((lf.w - expect).norm() < 1e-12);
  CHECK((j.J * lf.w - vec({-2, 0})).norm() < 1e-9);
  CHECK(std::abs(lf.v.dot(j.grad_h)) < 1e-12);
  CHECK(std::abs(lf.v.dot(j.grad_H)) < 1e-12);
  CHECK(lf.residual < 1e-9);

  const Lift lF = constrained_lift(j, Which::SpherefiedLift);
  CHECK((j.DF * lF.w - 2 * j.Fx).norm() < 1e-9);
  CHECK(std::abs(lF.v.dot(j.grad_H)) < 1e-12);
  CHECK(std::abs(lF.v.dot(j.grad_h)) < 1e-12);
  CHECK(lF.coeff == 1.0);
}

TEST_CASE("constrained lift is refused on collinear gradients") {
  const Jet j = jet(cli::catalog_map("identity-2"), vec({0.4, 0.1}));
  try {
    constrained_lift(j, Which::FLift);
    FAIL("expected an error");
  } catch (const PointError& e) {
    CHECK(e.kind() == ErrorKind::CollinearGradients);
  }
}

TEST_CASE("classification examples") {
  Rng rng(9);
  const auto square = cli::catalog_map("square");
  for (int i = 0; i < 100; ++i) {
    const Vec x = ball_point(rng, 2, 1.0);
    CHECK(classify_point(jet(square, x)).kind == Case::Collinear);
  }

  const Jet q = jet(cli::catalog_map("quadrics-3-2"), vec({1, 1, 1}));
  CHECK(std::abs(q.aug.determinant() - 32.0) < 1e-12);
  const CaseLabel ql = classify_point(q);
  CHECK(ql.kind == Case::TransverseGeneric);
  CHECK(ql.aug_sigma_min > 1e-2);

  const Jet pj = jet(cli::catalog_map("projection-3-2"), vec({0.6, 0.8, 0}));
  const CaseLabel pl = classify_point(pj);
  CHECK(pl.kind == Case::Collinear);
  CHECK(pl.aug_sigma_min < 1e-15);
  CHECK(pl.df_sigma_min == doctest::Approx(1.0));
}

TEST_CASE("mu on the projection map") {
  const auto proj = cli::catalog_map("projection-3-2");
  const Jet j = jet(proj, vec({0.6, 0.8, 0}));
  const Lift lf = normal_lift_f(j);
  CHECK((lf.w - vec({1.2, 1.6, 0})).norm() < 1e-14);
  CHECK(mu(j, lf.w) == doctest::Approx(1.0).epsilon(1e-12));

  Rng rng(10);
  std::vector<KeypropViolation> violations;
  for (int i = 0; i < 1000; ++i) {
    Vec x = ball_point(rng, 3, 1.0);
    x(2) = 0.0;
    if (x.norm() < 1e-3) continue;
    const Jet jz = jet(proj, x);
    const LiftPair lp = lift_pair(jz, {}, &violations);
    REQUIRE(lp.mu.has_value());
    CHECK(std::abs(*lp.mu - 1.0) < 1e-9);
    const double lhs = jz.grad_H.dot(lp.w_f) * jz.grad_h.dot(lp.w_F);
    const double rhs = 4 * jz.h * jz.grad_H.squaredNorm();
    CHECK(std::abs(lhs - rhs) <= 1e-6 * std::abs(rhs));
  }
  CHECK(violations.empty());

  CHECK(mu(jet(cli::catalog_map("identity-2"), vec({0.2, 0.5})), 2 * vec({0.2, 0.5})) ==
        doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("mu records nonpositive values and refuses a vanishing denominator") {
  const Jet j = jet(cli::catalog_map("identity-2"), vec({1, 0}));
  std::vector<KeypropViolation> violations;
  CHECK(mu(j, vec({-1, 0}), &violations) < 0);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].mu == doctest::Approx(-2.0));
  try {
    mu(j, vec({0, 1}));
    FAIL("expected an error");
  } catch (const PointError& e) {
    CHECK(e.kind() == ErrorKind::MuUndefined);
  }
}

TEST_CASE("nod1: sums of positive multiples of non-antiparallel vectors with normal parts") {
  CHECK(test::nod1_violations(100000, 101) == 0);
}

TEST_CASE("nod2: antiparallel pair perturbed by a normal vector") {
  CHECK(test::nod2_violations(100000, 102) == 0);
}

TEST_CASE("the predicate flags exact opposition in the generators' families") {
  // The families the two suites sample from sit next to these limits.
  CHECK(opposite_directions(test::vec({1, 0, 0}), test::vec({-3, 0, 0}), 1e-9));
  CHECK(opposite_directions(test::vec({1, 1e-6, 0}), test::vec({-3, 0, 0}), 1e-9));
}

TEST_CASE("lift contracts on the random suite") {
  std::size_t lifted = 0, constrained = 0;
  for (const auto& c : test::random_suite(1000, 31)) {
    const Jet j = jet(c.map, c.x);
    const double s = scale(j);
    try {
      const Lift lf = normal_lift_f(j);
      CHECK((j.J * lf.w - 2 * j.fx).norm() < 1e-9 * s);
      CHECK(std::abs(lf.v.dot(j.grad_h)) < 1e-9 * s);
      const double alpha = 4 * j.h / j.grad_h.squaredNorm();
      CHECK(std::abs(lf.coeff - alpha) <= 1e-9 * alpha);
      // Minimal norm: no component in ker Df.
      const Mat K = linalg::kernel_projector(j.J);
      CHECK((K * lf.w).norm() < 1e-9 * s * std::max(1.0, lf.w.norm()));

      const Lift lF = normal_lift_F(j);
      CHECK((j.DF * lF.w - 2 * j.Fx).norm() < 1e-9 * s);
      CHECK(std::abs(lF.coeff - 1.0) < 1e-9);
      CHECK(std::abs(lF.v.dot(j.grad_H)) < 1e-9 * s);
      ++lifted;

      if (classify_point(j).kind == Case::TransverseGeneric) {
        const Lift cf = constrained_lift(j, Which::FLift);
        CHECK(cf.residual < 1e-9 * s);
        CHECK(std::abs(cf.v.dot(j.grad_h)) < 1e-9 * s * std::max(1.0, cf.v.norm()));
        CHECK(std::abs(cf.v.dot(j.grad_H)) < 1e-9 * s * std::max(1.0, cf.v.norm()));
        // v-bar is orthogonal to L_x cap ker Df: oracle from a dense basis.
        Mat grads(j.n(), 2);
        grads << j.grad_h, j.grad_H;
        const Mat L = linalg::orthonormal_complement(grads);
        if (L.cols() > 0) {
          const Eigen::JacobiSVD<Mat> svd(j.J * L, Eigen::ComputeFullV);
          const Vec sv = svd.singularValues();
          int rank = 0;
          for (Eigen::Index k = 0; k < sv.size(); ++k)
            if (sv(k) > 1e-8 * sv(0)) ++rank;
          const Mat kerL = L * svd.matrixV().rightCols(L.cols() - rank);
          CHECK((kerL.transpose() * cf.v).norm() < 1e-8 * s * std::max(1.0, cf.v.norm()));
        }
        ++constrained;
      }
    } catch (const PointError&) {
      // rank-deficient points are outside the contract
    }
  }
  CHECK(lifted > 900);
  CHECK(constrained > 100);
}

TEST_CASE("collinear lifts carry mu consistently") {
  const auto square = cli::catalog_map("square");
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    const Jet j = jet(square, ball_point(rng, 2, 0.5));
    const double s = scale(j);
    const LiftPair lp = lift_pair(j);
    REQUIRE(lp.mu.has_value());
    CHECK((lp.w_F - *lp.mu * lp.w_f).norm() < 1e-6 * s);
    const double direct = j.grad_H.squaredNorm() / j.grad_H.dot(lp.w_f);
    CHECK(std::abs(*lp.mu - direct) <= 1e-6 * std::abs(direct));
    CHECK(*lp.mu > 0);
  }
}

TEST_CASE("no keyprop violations for the d-regular catalog maps in the half ball") {
  for (const char* name : {"square", "quadrics-3-2", "identity-2", "projection-3-2"}) {
    const auto map = cli::catalog_map(name);
    Rng rng(13);
    std::vector<KeypropViolation> violations;
    int evaluated = 0;
    for (int i = 0; i < 2000; ++i) {
      const Vec x = ball_point(rng, map.n(), 0.5);
      if (map.eval(x).norm() < 1e-6) continue;
      try {
        lift_pair(jet(map, x), {}, &violations);
        ++evaluated;
      } catch (const PointError&) {
      }
    }
    INFO(name);
    CHECK(evaluated > 1000);
    CHECK(violations.empty());
  }
}
