#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "collider/estimators.hpp"
#include "collider/models.hpp"
#include "collider/qr.hpp"
#include "collider/rng.hpp"
#include "collider/sem.hpp"
#include "support.hpp"

using namespace collider;
using namespace collider::models::names;
using Catch::Approx;

namespace {

const Dataset& sodium_data() {
  static const Dataset d = generate(compile(models::sodium_spec()), 1000, 777);
  return d;
}

Dataset logistic_data(std::size_t n, std::uint64_t seed, double b0, double b1, double b2) {
  Xoshiro256 rng(seed);
  std::vector<double> x1(n), x2(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = rng.standard_normal();
    x2[i] = rng.normal(2.0, 3.0);
    const double p = 1.0 / (1.0 + std::exp(-(b0 + b1 * x1[i] + b2 * x2[i])));
    y[i] = rng.uniform() < p ? 1.0 : 0.0;
  }
  Dataset d(n);
  d.add_column("x1", std::move(x1));
  d.add_column("x2", std::move(x2));
  d.add_column("y", std::move(y), true);
  return d;
}

}  // namespace

TEST_CASE("householder qr reproduces the factored matrix") {
  Eigen::MatrixXd a(5, 3);
  a << 1, 2, 3, 4, 5, 6, 7, 8, 10, 1, 0, 1, 2, 1, 0;
  const HouseholderQr qr(a);
  const Eigen::VectorXd b = (Eigen::VectorXd(5) << 1, -2, 3, 0.5, 4).finished();
  double rss = 0;
  const Eigen::VectorXd sol = qr.solve(b, &rss);
  const Eigen::VectorXd ref = a.colPivHouseholderQr().solve(b);
  CHECK((sol - ref).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(rss == Approx((b - a * ref).squaredNorm()).epsilon(1e-10));
  CHECK((qr.inverse_gram() - (a.transpose() * a).inverse()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK_FALSE(qr.rank_deficient(1e-10));

  Eigen::MatrixXd c = a;
  c.col(2) = c.col(0) + 2.0 * c.col(1);
  CHECK(HouseholderQr(c).rank_deficient(1e-10));
}

TEST_CASE("ols residuals are orthogonal to the design") {
  const Dataset& d = sodium_data();
  for (const auto& regs : std::vector<std::vector<std::string>>{
           {kSodium}, {kSodium, kAge}, {kSodium, kAge, kProteinuria}, {}}) {
    const OlsFit fit = fit_ols(d, kSbp, regs);
    const Eigen::MatrixXd x = design_matrix(d, regs);
    const Eigen::VectorXd r = response_vector(d, kSbp) - x * fit.coefficients.values;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double scale = x.col(j).norm() * r.norm();
      CHECK(std::abs(x.col(j).dot(r)) <= 1e-10 * scale);
    }
    CHECK(fit.rss == Approx(r.squaredNorm()).epsilon(1e-10));
    CHECK(fit.sigma2 == Approx(fit.rss / static_cast<double>(fit.n - fit.p)).epsilon(1e-14));
    const double dn = static_cast<double>(fit.n);
    const double ll = -0.5 * dn * (std::log(2.0 * M_PI * fit.rss / dn) + 1.0);
    CHECK(fit.loglik == Approx(ll).epsilon(1e-12));
    CHECK(fit.aic == Approx(-2.0 * ll + 2.0 * static_cast<double>(fit.p + 1)).epsilon(1e-12));
  }
}

TEST_CASE("ols matches normal equations and population values") {
  const Dataset& d = sodium_data();
  const OlsFit fit = fit_ols(d, kSbp, {kSodium, kAge, kProteinuria});
  const Eigen::MatrixXd x = design_matrix(d, fit.regressors);
  const Eigen::VectorXd y = response_vector(d, kSbp);
  const Eigen::VectorXd ne = (x.transpose() * x).ldlt().solve(x.transpose() * y);
  CHECK((fit.coefficients.values - ne).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(fit.coefficients.names.front() == kIntercept);
  CHECK(fit.label() == "sbp_in_mmHg ~ Sodium_gr + Age_years + Proteinuria_in_mg");

  CHECK(std::abs(fit.coef(kSodium) - -0.910) < 3.0 * fit.se(kSodium));
  CHECK(fit.coef(kSodium) < 0.0);
  const OlsFit crude = fit_ols(d, kSbp, {kSodium});
  CHECK(std::abs(crude.coef(kSodium) - 3.6287) < 3.0 * crude.se(kSodium));
}

TEST_CASE("ols error kinds") {
  const Dataset& d = sodium_data();
  CHECK_ERROR_KIND(fit_ols(d, kSbp, {kSodium, kSodium}), ErrorKind::RankDeficient);
  CHECK_ERROR_KIND(fit_ols(d, kSbp, {"Salt"}), ErrorKind::UnknownVariable);
  CHECK_ERROR_KIND(fit_ols(d, "Salt", {kSodium}), ErrorKind::UnknownVariable);
  CHECK_ERROR_KIND(fit_ols(d, kSbp, {kSbp}), ErrorKind::PerfectFit);

  Dataset tiny(2);
  tiny.add_column("x", {1.0, 2.0});
  tiny.add_column("y", {1.0, 3.0});
  CHECK_ERROR_KIND(fit_ols(tiny, "y", {"x"}), ErrorKind::InsufficientData);

  Dataset flat(4);
  flat.add_column("x", {1.0, 1.0, 1.0, 1.0});
  flat.add_column("y", {1.0, 3.0, 2.0, 5.0});
  CHECK_ERROR_KIND(fit_ols(flat, "y", {"x"}), ErrorKind::RankDeficient);
}

TEST_CASE("logistic score agrees with finite differences") {
  const Dataset d = logistic_data(500, 21, -0.5, 1.0, 0.3);
  const Eigen::MatrixXd x = design_matrix(d, {"x1", "x2"});
  const Eigen::VectorXd y = response_vector(d, "y");
  Xoshiro256 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd beta(3);
    for (Eigen::Index j = 0; j < 3; ++j) beta(j) = rng.normal(0.0, 1.0);
    const Eigen::VectorXd g = logistic_score(x, y, beta);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double h = 1e-5 * std::max(1.0, std::abs(beta(j)));
      Eigen::VectorXd up = beta, dn = beta;
      up(j) += h;
      dn(j) -= h;
      const double fd = (logistic_loglik(x, y, up) - logistic_loglik(x, y, dn)) / (2.0 * h);
      CHECK(std::abs(fd - g(j)) <= 1e-4 * std::max(1.0, std::abs(g(j))));
    }
  }
}

TEST_CASE("logistic regression recovers coefficients") {
  const Dataset d = logistic_data(20000, 3, -0.5, 1.0, 0.3);
  const LogisticFit fit = fit_logistic(d, "y", {"x1", "x2"});
  CHECK(fit.converged);
  CHECK(fit.max_abs_score < 1e-6);
  CHECK(std::abs(fit.coef(kIntercept) - -0.5) < 4.0 * fit.std_errors(0));
  CHECK(std::abs(fit.coef("x1") - 1.0) < 4.0 * fit.std_errors(1));
  CHECK(std::abs(fit.coef("x2") - 0.3) < 4.0 * fit.std_errors(2));
  CHECK(fit.odds_ratio("x1") == Approx(std::exp(fit.coef("x1"))).epsilon(1e-14));
  CHECK(fit.ci_low(1) < fit.odds_ratios(1));
  CHECK(fit.odds_ratios(1) < fit.ci_high(1));
  CHECK(fit.aic == Approx(fit.deviance + 6.0).epsilon(1e-14));
  for (std::size_t i = 1; i < fit.deviance_trace.size(); ++i) {
    CHECK(fit.deviance_trace[i] <= fit.deviance_trace[i - 1] * (1.0 + 1e-12) + 1e-12);
  }
  // The MLE maximizes the likelihood: nudging any coefficient lowers it.
  const Eigen::MatrixXd x = design_matrix(d, {"x1", "x2"});
  const Eigen::VectorXd y = response_vector(d, "y");
  const double best = logistic_loglik(x, y, fit.coefficients.values);
  CHECK(best == Approx(fit.loglik).epsilon(1e-10));
  for (Eigen::Index j = 0; j < 3; ++j) {
    Eigen::VectorXd b = fit.coefficients.values;
    b(j) += 0.01;
    CHECK(logistic_loglik(x, y, b) < best);
  }
}

TEST_CASE("logistic fits on the sodium model") {
  const Dataset& d = sodium_data();
  const LogisticFit crude = fit_logistic(d, kHypertension, {kSodium});
  const LogisticFit adjusted = fit_logistic(d, kHypertension, {kSodium, kAge});
  const LogisticFit collider = fit_logistic(d, kHypertension, {kSodium, kAge, kProteinuria});
  CHECK(crude.converged);
  CHECK(adjusted.converged);
  CHECK(collider.converged);
  CHECK(collider.max_abs_score < 1e-8);
  CHECK(adjusted.odds_ratio(kSodium) > 1.0);
  CHECK(collider.odds_ratio(kSodium) < 0.1);
  CHECK(collider.aic < adjusted.aic);

  const auto rows = forest_rows({crude, adjusted, collider}, kSodium);
  REQUIRE(rows.size() == 3);
  CHECK(rows[2].label == collider.label());
  CHECK(rows[2].odds_ratio == collider.odds_ratio(kSodium));
  CHECK_ERROR_KIND(forest_rows({crude, adjusted}, kAge), ErrorKind::TermMissing);
}

TEST_CASE("logistic error kinds") {
  Dataset sep(6);
  sep.add_column("x", {1, 2, 3, 4, 5, 6});
  sep.add_column("y", {0, 0, 0, 1, 1, 1}, true);
  CHECK_ERROR_KIND(fit_logistic(sep, "y", {"x"}), ErrorKind::Separation);

  Dataset one(4);
  one.add_column("x", {1, 2, 3, 4});
  one.add_column("y", {1, 1, 1, 1}, true);
  CHECK_ERROR_KIND(fit_logistic(one, "y", {"x"}), ErrorKind::Separation);

  Dataset cont(4);
  cont.add_column("x", {1, 2, 3, 4});
  cont.add_column("y", {0.5, 1, 0, 1});
  CHECK_ERROR_KIND(fit_logistic(cont, "y", {"x"}), ErrorKind::NotBinary);

  Dataset overlap(6);
  overlap.add_column("x", {1, 2, 3, 4, 5, 6});
  overlap.add_column("x2", {2, 4, 6, 8, 10, 12});
  overlap.add_column("y", {0, 1, 0, 1, 0, 1}, true);
  CHECK_ERROR_KIND(fit_logistic(overlap, "y", {"x", "x2"}), ErrorKind::RankDeficient);
  CHECK_NOTHROW(fit_logistic(overlap, "y", {"x"}));
}

TEST_CASE("partial curves pin other regressors at their medians") {
  const Dataset& d = sodium_data();
  const OlsFit fit = fit_ols(d, kSbp, {kSodium, kAge, kProteinuria});
  const PartialCurve c = partial_curve(fit, d, kSodium, 50);
  REQUIRE(c.grid.size() == 50);
  const auto sod = d.column(kSodium);
  CHECK(c.grid.front() == *std::min_element(sod.begin(), sod.end()));
  CHECK(c.grid.back() == *std::max_element(sod.begin(), sod.end()));
  REQUIRE(c.pinned.size() == 2);
  CHECK(c.pinned[0].first == kAge);
  CHECK(c.pinned[0].second == median(d.column(kAge)));
  for (std::size_t g = 1; g < c.grid.size(); ++g) {
    CHECK(c.grid[g] > c.grid[g - 1]);
    CHECK(c.predicted[g] - c.predicted[g - 1] ==
          Approx(fit.coef(kSodium) * (c.grid[g] - c.grid[g - 1])).margin(1e-9));
  }
  for (std::size_t g = 0; g < c.grid.size(); ++g) {
    CHECK(c.ci_low[g] <= c.predicted[g]);
    CHECK(c.predicted[g] <= c.ci_high[g]);
  }
  CHECK_ERROR_KIND(partial_curve(fit, d, kHypertension, 50), ErrorKind::UnknownRegressor);
  CHECK_ERROR_KIND(partial_curve(fit, d, kSodium, 1), ErrorKind::InvalidArgument);
}
