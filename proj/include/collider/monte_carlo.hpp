#pragma once

// Replicated collider-bias experiments and their closed-form oracle.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collider/error.hpp"
#include "collider/estimators.hpp"
#include "collider/models.hpp"
#include "collider/parallel.hpp"
#include "collider/rng.hpp"
#include "collider/sem.hpp"

namespace collider {

/// Population coefficient of sodium in SBP ~ sodium + age + proteinuria for the
/// sodium model with unit error variances on SBP and proteinuria:
///   beta1 - alpha2 (alpha1 + alpha2 beta1) / (1 + alpha2^2)
/// alpha1: sodium -> proteinuria, alpha2: SBP -> proteinuria.
inline double analytic_collider_coef(double beta1, double alpha1, double alpha2) {
  return beta1 - alpha2 * (alpha1 + alpha2 * beta1) / (1.0 + alpha2 * alpha2);
}

inline models::SodiumCoefficients sodium_coefficients(double beta1, double beta2, double alpha1, double alpha2) {
  return {beta1, beta2, alpha1, alpha2};
}

/// Large-sample standard error of the sodium coefficient in the collider model
/// at sample size n: sqrt(sigma^2 [Sigma_xx^{-1}]_sodium / n).
inline double analytic_collider_se(double beta1, double alpha1, double alpha2, std::size_t n, double beta2 = 2.0) {
  using namespace models::names;
  const CompiledSem sem = compile(models::sodium_spec(sodium_coefficients(beta1, beta2, alpha1, alpha2)));
  const ImpliedMoments m = implied_moments(sem);
  const std::vector<std::string> xs{kSodium, kAge, kProteinuria};
  Eigen::Matrix3d sxx;
  Eigen::Vector3d sxy;
  for (int i = 0; i < 3; ++i) {
    sxy(i) = m.covariance(xs[i], kSbp);
    for (int j = 0; j < 3; ++j) sxx(i, j) = m.covariance(xs[i], xs[j]);
  }
  const Eigen::Matrix3d inv = sxx.inverse();
  const double resid = m.variance(kSbp) - sxy.dot(inv * sxy);
  return std::sqrt(resid * inv(0, 0) / static_cast<double>(n));
}

struct Scenario {
  double beta1 = 1.05;   // sodium -> SBP
  double beta2 = 2.00;   // age -> SBP
  double alpha1 = 2.8;   // sodium -> proteinuria
  double alpha2 = 2.0;   // SBP -> proteinuria
  std::size_t n = 10000;
  std::size_t replicates = 1000;
  std::uint64_t seed = 50472;

  void validate() const {
    if (n < 10) throw Error(ErrorKind::InvalidArgument, "n must be at least 10");
    if (replicates < 1) throw Error(ErrorKind::InvalidArgument, "at least one replicate is required");
    for (double c : {beta1, beta2, alpha1, alpha2}) {
      if (!std::isfinite(c)) throw Error(ErrorKind::InvalidArgument, "coefficients must be finite");
    }
  }
};

struct McSummary {
  Scenario scenario;
  double analytic_collider_coef = 0.0;
  double mean_true_model_coef = 0.0;
  double mean_collider_model_coef = 0.0;
  double mean_collider_se = 0.0;
  double ci_low = 0.0;    // mean collider coef - 1.96 mean se
  double ci_high = 0.0;   // mean collider coef + 1.96 mean se
  double mean_abs_gap = 0.0;         // mean(true - |collider|)
  double relbias_pct = 0.0;  // 100 mean((true - |collider|) / true)
  double bias_simple = 0.0;       // mean(collider) - beta1
  /// Per-replicate series, in replicate order.
  std::vector<double> true_coefs;
  std::vector<double> collider_coefs;
  std::vector<double> collider_ses;
};

/// Replicate r draws its dataset with seed derive_seed(scenario.seed, r) and
/// fits SBP ~ sodium + age ("true") and SBP ~ sodium + age + proteinuria
/// ("collider"). Aggregation runs in replicate order after all fits finish,
/// so the summary does not depend on `threads`.
inline McSummary run_mc(const Scenario& sc, unsigned threads = 1) {
  using namespace models::names;
  sc.validate();
  const CompiledSem sem = compile(models::sodium_spec(sodium_coefficients(sc.beta1, sc.beta2, sc.alpha1, sc.alpha2)));
  McSummary s;
  s.scenario = sc;
  s.analytic_collider_coef = analytic_collider_coef(sc.beta1, sc.alpha1, sc.alpha2);
  s.true_coefs.resize(sc.replicates);
  s.collider_coefs.resize(sc.replicates);
  s.collider_ses.resize(sc.replicates);

  parallel_for(sc.replicates, threads, [&](std::size_t r) {
    try {
      const Dataset data = generate(sem, sc.n, derive_seed(sc.seed, r));
      const OlsFit true_fit = fit_ols(data, kSbp, {kSodium, kAge});
      const OlsFit collider_fit = fit_ols(data, kSbp, {kSodium, kAge, kProteinuria});
      s.true_coefs[r] = true_fit.coef(kSodium);
      s.collider_coefs[r] = collider_fit.coef(kSodium);
      s.collider_ses[r] = collider_fit.se(kSodium);
    } catch (const Error& e) {
      throw Error(e.kind(), "replicate " + std::to_string(r) + ": " + e.message());
    }
  });

  const double count = static_cast<double>(sc.replicates);
  double sum_true = 0, sum_col = 0, sum_se = 0, sum_bias = 0, sum_rel = 0;
  for (std::size_t r = 0; r < sc.replicates; ++r) {
    const double t = s.true_coefs[r];
    const double c = s.collider_coefs[r];
    sum_true += t;
    sum_col += c;
    sum_se += s.collider_ses[r];
    sum_bias += t - std::abs(c);
    sum_rel += (t - std::abs(c)) / t;
  }
  s.mean_true_model_coef = sum_true / count;
  s.mean_collider_model_coef = sum_col / count;
  s.mean_collider_se = sum_se / count;
  s.ci_low = s.mean_collider_model_coef - 1.96 * s.mean_collider_se;
  s.ci_high = s.mean_collider_model_coef + 1.96 * s.mean_collider_se;
  s.mean_abs_gap = sum_bias / count;
  s.relbias_pct = 100.0 * sum_rel / count;
  s.bias_simple = s.mean_collider_model_coef - sc.beta1;
  return s;
}

struct SweepRow {
  double beta1 = 0.0;
  double alpha = 0.0;           // alpha1 = alpha2
  double estimated_coef = 0.0;  // sodium coefficient in the collider model
  double estimated_se = 0.0;
  double analytic_coef = 0.0;
  double abs_bias = 0.0;  // beta1 - estimated_coef
};

/// One simulated dataset per (beta1, alpha) cell, row-major with beta1 as the
/// outer index. Cell c uses seed derive_seed(seed, c).
inline std::vector<SweepRow> run_sweep(const std::vector<double>& beta1_values, const std::vector<double>& alpha_values,
                                       std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  using namespace models::names;
  if (beta1_values.empty() || alpha_values.empty()) throw Error(ErrorKind::InvalidArgument, "sweep grids must be non-empty");
  if (n < 10) throw Error(ErrorKind::InvalidArgument, "n must be at least 10");
  const std::size_t cells = beta1_values.size() * alpha_values.size();
  std::vector<SweepRow> rows(cells);
  parallel_for(cells, threads, [&](std::size_t c) {
    const double b = beta1_values[c / alpha_values.size()];
    const double a = alpha_values[c % alpha_values.size()];
    try {
      const CompiledSem sem = compile(models::sodium_spec(sodium_coefficients(b, 2.0, a, a)));
      const Dataset data = generate(sem, n, derive_seed(seed, c));
      const OlsFit fit = fit_ols(data, kSbp, {kSodium, kAge, kProteinuria});
      SweepRow& row = rows[c];
      row.beta1 = b;
      row.alpha = a;
      row.estimated_coef = fit.coef(kSodium);
      row.estimated_se = fit.se(kSodium);
      row.analytic_coef = analytic_collider_coef(b, a, a);
      row.abs_bias = b - row.estimated_coef;
    } catch (const Error& e) {
      throw Error(e.kind(), "cell (beta1=" + format_real(b) + ", alpha=" + format_real(a) + "): " + e.message());
    }
  });
  return rows;
}

/// Smallest alpha in (0, 100] where analytic_collider_coef(beta1, alpha, alpha)
/// reaches zero: a 0.01-step scan locates the first sign change, bisection
/// narrows it below 1e-12.
inline double sign_flip_boundary(double beta1) {
  if (!(beta1 > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta1 must be positive");
  auto f = [beta1](double a) { return analytic_collider_coef(beta1, a, a); };
  constexpr double kStep = 0.01;
  double lo = 0.0;
  double f_lo = beta1;
  for (int k = 1; k <= 10000; ++k) {
    const double hi = k * kStep;
    const double f_hi = f(hi);
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) != (f_hi > 0.0)) {
      double a = lo, b = hi;
      while (b - a > 1e-12) {
        const double mid = 0.5 * (a + b);
        if ((f(mid) > 0.0) == (f_lo > 0.0)) a = mid;
        else b = mid;
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    f_lo = f_hi;
  }
  throw Error(ErrorKind::NoRoot, "no sign change for alpha in (0, 100] at beta1 = " + format_real(beta1));
}

}  // namespace collider
