#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "collider/grid.hpp"
#include "collider/monte_carlo.hpp"
#include "support.hpp"

using namespace collider;
using namespace collider::models::names;
using Catch::Approx;

TEST_CASE("analytic collider coefficient matches the population regression") {
  for (double b : {-2.0, 0.0, 0.5, 1.0, 1.05, 3.0, 5.0}) {
    for (double a1 : {0.0, 0.5, 2.8, 5.0}) {
      for (double a2 : {-1.0, 0.0, 0.5, 2.0, 5.0}) {
        const CompiledSem sem = compile(models::sodium_spec(sodium_coefficients(b, 2.0, a1, a2)));
        const double pop = population_ols(sem, kSbp, {kSodium, kAge, kProteinuria}).at(kSodium);
        CHECK(analytic_collider_coef(b, a1, a2) == Approx(pop).margin(1e-9));
      }
    }
  }
  CHECK(analytic_collider_coef(1.05, 2.8, 2.0) == Approx(-0.91).margin(1e-12));
  CHECK(analytic_collider_coef(1.0, 0.0, 0.0) == 1.0);
}

TEST_CASE("analytic standard error matches replicate spread") {
  Scenario sc;
  sc.n = 2000;
  sc.replicates = 400;
  sc.seed = 3;
  const McSummary s = run_mc(sc);
  double m = 0, v = 0;
  for (double c : s.collider_coefs) m += c;
  m /= static_cast<double>(s.collider_coefs.size());
  for (double c : s.collider_coefs) v += (c - m) * (c - m);
  const double sd = std::sqrt(v / static_cast<double>(s.collider_coefs.size() - 1));
  const double se = analytic_collider_se(sc.beta1, sc.alpha1, sc.alpha2, sc.n);
  CHECK(sd == Approx(se).epsilon(0.15));
  CHECK(s.mean_collider_se == Approx(se).epsilon(0.05));
}

TEST_CASE("run_mc aggregates replicates") {
  Scenario sc;
  sc.n = 1000;
  sc.replicates = 50;
  const McSummary s = run_mc(sc);
  REQUIRE(s.collider_coefs.size() == 50);
  double mt = 0, mc = 0, ms = 0, gap = 0, rel = 0;
  for (std::size_t r = 0; r < 50; ++r) {
    mt += s.true_coefs[r];
    mc += s.collider_coefs[r];
    ms += s.collider_ses[r];
    gap += s.true_coefs[r] - std::abs(s.collider_coefs[r]);
    rel += (s.true_coefs[r] - std::abs(s.collider_coefs[r])) / s.true_coefs[r];
  }
  CHECK(s.mean_true_model_coef == Approx(mt / 50).epsilon(1e-12));
  CHECK(s.mean_collider_model_coef == Approx(mc / 50).epsilon(1e-12));
  CHECK(s.mean_collider_se == Approx(ms / 50).epsilon(1e-12));
  CHECK(s.mean_abs_gap == Approx(gap / 50).epsilon(1e-12));
  CHECK(s.relbias_pct == Approx(100.0 * rel / 50).epsilon(1e-12));
  CHECK(s.bias_simple == Approx(s.mean_collider_model_coef - 1.05).epsilon(1e-12));
  CHECK(s.ci_low == Approx(s.mean_collider_model_coef - 1.96 * s.mean_collider_se).epsilon(1e-12));
  CHECK(s.ci_high == Approx(s.mean_collider_model_coef + 1.96 * s.mean_collider_se).epsilon(1e-12));
  CHECK(s.analytic_collider_coef == Approx(-0.91).margin(1e-12));
  CHECK(std::abs(s.mean_true_model_coef - 1.05) < 0.05);
  CHECK(std::abs(s.mean_collider_model_coef + 0.91) < 0.05);
}

TEST_CASE("monte carlo output does not depend on thread count") {
  Scenario sc;
  sc.n = 500;
  sc.replicates = 37;
  sc.seed = 99;
  const McSummary one = run_mc(sc, 1);
  for (unsigned t : {2u, 3u, 8u}) {
    const McSummary many = run_mc(sc, t);
    CHECK(many.collider_coefs == one.collider_coefs);
    CHECK(many.true_coefs == one.true_coefs);
    CHECK(many.collider_ses == one.collider_ses);
    CHECK(many.relbias_pct == one.relbias_pct);
  }
  const auto grid = parse_grid("0.5:2:0.5");
  const auto s1 = run_sweep({1.0, 2.0}, grid, 300, 5, 1);
  const auto s4 = run_sweep({1.0, 2.0}, grid, 300, 5, 4);
  REQUIRE(s1.size() == s4.size());
  for (std::size_t i = 0; i < s1.size(); ++i) CHECK(s1[i].estimated_coef == s4[i].estimated_coef);

  Scenario other = sc;
  other.seed = 100;
  CHECK(run_mc(other).collider_coefs != one.collider_coefs);
}

TEST_CASE("sweep rows follow the grid layout") {
  const auto betas = parse_grid("1:5");
  const auto alphas = parse_grid("0.5:5:0.5");
  REQUIRE(betas.size() == 5);
  REQUIRE(alphas.size() == 10);
  CHECK(alphas.back() == 5.0);
  const auto rows = run_sweep(betas, alphas, 1000, 777);
  REQUIRE(rows.size() == 50);
  for (std::size_t c = 0; c < rows.size(); ++c) {
    CHECK(rows[c].beta1 == betas[c / 10]);
    CHECK(rows[c].alpha == alphas[c % 10]);
    CHECK(rows[c].analytic_coef == analytic_collider_coef(rows[c].beta1, rows[c].alpha, rows[c].alpha));
    CHECK(rows[c].abs_bias == rows[c].beta1 - rows[c].estimated_coef);
    CHECK(std::abs(rows[c].estimated_coef - rows[c].analytic_coef) < 4.0 * rows[c].estimated_se);
  }
  CHECK_ERROR_KIND(run_sweep({}, alphas, 1000, 1), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(run_sweep(betas, alphas, 5, 1), ErrorKind::InvalidArgument);
}

TEST_CASE("sign flip boundary is the square root of beta1") {
  for (double b : {0.25, 1.0, 1.05, 2.0, 3.0, 4.0, 5.0, 50.0}) {
    const double a = sign_flip_boundary(b);
    CHECK(a == Approx(std::sqrt(b)).margin(1e-9));
    CHECK(analytic_collider_coef(b, a - 1e-6, a - 1e-6) > 0.0);
    CHECK(analytic_collider_coef(b, a + 1e-6, a + 1e-6) < 0.0);
  }
  CHECK_ERROR_KIND(sign_flip_boundary(0.0), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(sign_flip_boundary(-1.0), ErrorKind::InvalidArgument);
  CHECK_ERROR_KIND(sign_flip_boundary(20000.0), ErrorKind::NoRoot);
}

TEST_CASE("grid parsing") {
  CHECK(parse_grid("1,2.5,3") == std::vector<double>{1.0, 2.5, 3.0});
  CHECK(parse_grid("1:3") == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(parse_grid("0:1:0.25") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  CHECK(parse_grid("0.1:0.3:0.1").size() == 3);
  CHECK_ERROR_KIND(parse_grid(""), ErrorKind::ParseError);
  CHECK_ERROR_KIND(parse_grid("1:x"), ErrorKind::ParseError);
  CHECK_ERROR_KIND(parse_grid("3:1"), ErrorKind::ParseError);
  CHECK_ERROR_KIND(parse_grid("1:3:0"), ErrorKind::ParseError);
}

TEST_CASE("scenario validation") {
  Scenario sc;
  sc.replicates = 0;
  CHECK_ERROR_KIND(run_mc(sc), ErrorKind::InvalidArgument);
  sc.replicates = 1;
  sc.n = 3;
  CHECK_ERROR_KIND(run_mc(sc), ErrorKind::InvalidArgument);
  sc.n = 100;
  sc.alpha1 = std::nan("");
  CHECK_ERROR_KIND(run_mc(sc), ErrorKind::InvalidArgument);
}
