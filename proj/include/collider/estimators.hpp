#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "collider/dataset.hpp"
#include "collider/error.hpp"
#include "collider/qr.hpp"
#include "collider/sem.hpp"

namespace collider {

/// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

/// Design matrix [1, regressors...] from dataset columns.
inline Eigen::MatrixXd design_matrix(const Dataset& data, const std::vector<std::string>& regressors) {
  const auto n = static_cast<Eigen::Index>(data.rows());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(regressors.size()) + 1);
  x.col(0).setOnes();
  for (std::size_t j = 0; j < regressors.size(); ++j) {
    if (!data.has(regressors[j])) throw Error(ErrorKind::UnknownVariable, "no column '" + regressors[j] + "'");
    const auto col = data.column(regressors[j]);
    x.col(static_cast<Eigen::Index>(j) + 1) = Eigen::Map<const Eigen::VectorXd>(col.data(), n);
  }
  return x;
}

inline Eigen::VectorXd response_vector(const Dataset& data, const std::string& outcome) {
  if (!data.has(outcome)) throw Error(ErrorKind::UnknownVariable, "no column '" + outcome + "'");
  const auto col = data.column(outcome);
  return Eigen::Map<const Eigen::VectorXd>(col.data(), static_cast<Eigen::Index>(col.size()));
}

inline std::string formula(const std::string& outcome, const std::vector<std::string>& regressors) {
  std::string f = outcome + " ~ ";
  if (regressors.empty()) return f + "1";
  for (std::size_t i = 0; i < regressors.size(); ++i) f += (i ? " + " : "") + regressors[i];
  return f;
}

struct OlsFit {
  std::string outcome;
  std::vector<std::string> regressors;  // without the intercept
  Coefficients coefficients;            // "(Intercept)" first
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd covariance;           // sigma^2 (X^T X)^{-1}
  double rss = 0.0;
  double sigma2 = 0.0;                  // RSS / (n - p)
  std::size_t n = 0;
  std::size_t p = 0;                    // coefficient count incl. intercept
  double loglik = 0.0;                  // Gaussian, variance at its MLE RSS/n
  double aic = 0.0;                     // -2 loglik + 2 (p + 1)

  std::string label() const { return formula(outcome, regressors); }
  double coef(const std::string& term) const { return coefficients.at(term); }
  double se(const std::string& term) const { return std_errors(index_of(term)); }
  Eigen::Index index_of(const std::string& term) const {
    const auto& names = coefficients.names;
    auto it = std::find(names.begin(), names.end(), term);
    if (it == names.end()) throw Error(ErrorKind::TermMissing, "'" + term + "' not in " + label());
    return it - names.begin();
  }
};

/// Ordinary least squares with intercept, solved by Householder QR.
inline OlsFit fit_ols(const Dataset& data, const std::string& outcome, const std::vector<std::string>& regressors) {
  const Eigen::VectorXd y = response_vector(data, outcome);
  const Eigen::MatrixXd x = design_matrix(data, regressors);
  const auto n = static_cast<std::size_t>(x.rows());
  const auto p = static_cast<std::size_t>(x.cols());
  if (n <= p) {
    throw Error(ErrorKind::InsufficientData,
                std::to_string(n) + " observations for " + std::to_string(p) + " coefficients");
  }
  const HouseholderQr qr(x);
  if (qr.rank_deficient(kRankTolerance)) {
    throw Error(ErrorKind::RankDeficient, "collinear design in " + formula(outcome, regressors));
  }
  OlsFit fit;
  fit.outcome = outcome;
  fit.regressors = regressors;
  fit.n = n;
  fit.p = p;
  fit.coefficients.names.push_back(kIntercept);
  fit.coefficients.names.insert(fit.coefficients.names.end(), regressors.begin(), regressors.end());
  fit.coefficients.values = qr.solve(y, &fit.rss);
  if (fit.rss <= 1e-24 * std::max(1.0, y.squaredNorm())) {
    throw Error(ErrorKind::PerfectFit, formula(outcome, regressors) + " leaves no residual variance");
  }
  const double dn = static_cast<double>(n);
  fit.sigma2 = fit.rss / (dn - static_cast<double>(p));
  fit.covariance = fit.sigma2 * qr.inverse_gram();
  fit.std_errors = fit.covariance.diagonal().cwiseSqrt();
  fit.loglik = -0.5 * dn * (std::log(2.0 * std::numbers::pi) + std::log(fit.rss / dn) + 1.0);
  fit.aic = -2.0 * fit.loglik + 2.0 * (static_cast<double>(p) + 1.0);
  return fit;
}

struct LogisticFit {
  std::string outcome;
  std::vector<std::string> regressors;
  Coefficients coefficients;
  Eigen::VectorXd std_errors;  // Wald, from the inverse information
  Eigen::VectorXd odds_ratios;
  Eigen::VectorXd ci_low;      // exp(coef - 1.96 se)
  Eigen::VectorXd ci_high;     // exp(coef + 1.96 se)
  Eigen::MatrixXd covariance;
  double deviance = 0.0;
  double loglik = 0.0;
  double aic = 0.0;            // -2 loglik + 2 p
  double max_abs_score = 0.0;  // score of the standardized design
  std::size_t n = 0;
  std::size_t p = 0;
  bool converged = false;
  int iterations = 0;
  std::vector<double> deviance_trace;  // deviance at the start and after each iteration

  std::string label() const { return formula(outcome, regressors); }
  Eigen::Index index_of(const std::string& term) const {
    const auto& names = coefficients.names;
    auto it = std::find(names.begin(), names.end(), term);
    if (it == names.end()) throw Error(ErrorKind::TermMissing, "'" + term + "' not in " + label());
    return it - names.begin();
  }
  double coef(const std::string& term) const { return coefficients.at(term); }
  double odds_ratio(const std::string& term) const { return odds_ratios(index_of(term)); }
};

struct LogisticOptions {
  int max_iter = 50;
  double tol = 1e-8;
  /// Largest |coef| * sd(x) tolerated when the fit also classifies every
  /// observation correctly.
  double separation_limit = 30.0;
};

namespace detail {

inline double log1pexp(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

/// -2 log-likelihood of Bernoulli outcomes with logit eta.
inline double logistic_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) d += log1pexp(eta(i)) - y(i) * eta(i);
  return 2.0 * d;
}

inline double sigmoid(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace detail

/// Bernoulli log-likelihood (natural log) at coefficients beta.
inline double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  return -0.5 * detail::logistic_deviance(y, x * beta);
}

/// Score vector X^T (y - mu).
inline Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd resid(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) resid(i) = y(i) - detail::sigmoid(eta(i));
  return x.transpose() * resid;
}

/// Logistic regression by iteratively reweighted least squares. Iterations run
/// on the standardized design (regressors centred and scaled to unit sd) and
/// results are mapped back, which keeps the weighted problems well conditioned
/// whatever the units. Each step solves min |W^{1/2} (Z d - W^{-1}(y - mu))| by
/// Householder QR; steps are halved until the deviance does not increase
/// (beyond 1e-12 relative rounding slack).
/// `max_abs_score` and the convergence test refer to the standardized score.
inline LogisticFit fit_logistic(const Dataset& data, const std::string& outcome,
                                const std::vector<std::string>& regressors, const LogisticOptions& opt = {}) {
  const Eigen::VectorXd y = response_vector(data, outcome);
  const Eigen::MatrixXd x = design_matrix(data, regressors);
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  const std::string label = formula(outcome, regressors);

  double ones = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) != 0.0 && y(i) != 1.0) throw Error(ErrorKind::NotBinary, "'" + outcome + "' holds non-0/1 values");
    ones += y(i);
  }
  if (n <= p) throw Error(ErrorKind::InsufficientData, std::to_string(n) + " observations for " + std::to_string(p) + " coefficients");
  if (ones == 0.0 || ones == static_cast<double>(n)) {
    throw Error(ErrorKind::Separation, "'" + outcome + "' has a single class; the likelihood has no maximum");
  }
  if (HouseholderQr(x).rank_deficient(kRankTolerance)) throw Error(ErrorKind::RankDeficient, "collinear design in " + label);

  // z = [1, (x_j - m_j) / s_j]; beta = A gamma.
  Eigen::VectorXd center = Eigen::VectorXd::Zero(p), scale = Eigen::VectorXd::Ones(p);
  Eigen::MatrixXd z = x;
  for (Eigen::Index j = 1; j < p; ++j) {
    center(j) = x.col(j).mean();
    scale(j) = std::sqrt((x.col(j).array() - center(j)).square().sum() / static_cast<double>(n - 1));
    if (!(scale(j) > 0.0)) throw Error(ErrorKind::RankDeficient, "constant regressor '" + regressors[static_cast<std::size_t>(j - 1)] + "'");
    z.col(j) = (x.col(j).array() - center(j)) / scale(j);
  }
  Eigen::MatrixXd to_raw = Eigen::MatrixXd::Identity(p, p);
  for (Eigen::Index j = 1; j < p; ++j) {
    to_raw(j, j) = 1.0 / scale(j);
    to_raw(0, j) = -center(j) / scale(j);
  }

  // Start from the intercept-only MLE.
  const double ybar = ones / static_cast<double>(n);
  Eigen::VectorXd gamma = Eigen::VectorXd::Zero(p);
  gamma(0) = std::log(ybar / (1.0 - ybar));

  LogisticFit fit;
  fit.outcome = outcome;
  fit.regressors = regressors;
  fit.n = static_cast<std::size_t>(n);
  fit.p = static_cast<std::size_t>(p);

  Eigen::VectorXd eta = z * gamma;
  double dev = detail::logistic_deviance(y, eta);
  fit.deviance_trace.push_back(dev);

  // On the standardized scale |gamma_j| is |beta_j| * sd(x_j).
  auto separated = [&](const Eigen::VectorXd& g, const Eigen::VectorXd& e, double d) {
    if (d < 1e-8 * static_cast<double>(n)) return true;
    if (g.tail(p - 1).cwiseAbs().maxCoeff() <= opt.separation_limit) return false;
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((y(i) == 1.0 && e(i) < 0.0) || (y(i) == 0.0 && e(i) > 0.0)) return false;
    }
    return true;
  };

  Eigen::VectorXd mu(n), w(n), score(p);
  auto refresh = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      mu(i) = detail::sigmoid(eta(i));
      w(i) = mu(i) * (1.0 - mu(i));
    }
    score = z.transpose() * (y - mu);
  };
  refresh();

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    if (score.cwiseAbs().maxCoeff() < opt.tol) {
      fit.converged = true;
      break;
    }
    if (p > 1 && separated(gamma, eta, dev)) throw Error(ErrorKind::Separation, label + ": outcome is separated by the regressors");
    Eigen::MatrixXd zw = z;
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double sw = std::sqrt(std::max(w(i), 1e-300));
      zw.row(i) *= sw;
      rhs(i) = (y(i) - mu(i)) / sw;
    }
    const HouseholderQr qr(std::move(zw));
    if (qr.rank_deficient(kRankTolerance)) {
      throw Error(ErrorKind::Separation, label + ": weighted design degenerated (fitted probabilities at 0/1)");
    }
    const Eigen::VectorXd step = qr.solve(rhs);
    // Near the optimum a Newton step moves the deviance by less than its
    // rounding error, so descent is judged up to that slack.
    const double slack = 1e-12 * (1.0 + dev);
    double frac = 1.0;
    Eigen::VectorXd next = gamma + step;
    Eigen::VectorXd next_eta = z * next;
    double next_dev = detail::logistic_deviance(y, next_eta);
    for (int halving = 0; halving < 40 && !(next_dev <= dev + slack); ++halving) {
      frac *= 0.5;
      next = gamma + frac * step;
      next_eta = z * next;
      next_dev = detail::logistic_deviance(y, next_eta);
    }
    if (!(next_dev <= dev + slack)) break;  // no descent possible; report as not converged
    gamma = std::move(next);
    eta = std::move(next_eta);
    dev = next_dev;
    fit.deviance_trace.push_back(dev);
    fit.iterations = iter + 1;
    refresh();
  }
  if (!fit.converged && score.cwiseAbs().maxCoeff() < opt.tol) fit.converged = true;
  if (p > 1 && separated(gamma, eta, dev)) throw Error(ErrorKind::Separation, label + ": outcome is separated by the regressors");

  Eigen::MatrixXd zw = z;
  for (Eigen::Index i = 0; i < n; ++i) zw.row(i) *= std::sqrt(w(i));
  const HouseholderQr info(std::move(zw));
  if (info.rank_deficient(kRankTolerance)) throw Error(ErrorKind::Separation, label + ": information matrix is singular");

  const Eigen::VectorXd beta = to_raw * gamma;
  fit.coefficients.names.push_back(kIntercept);
  fit.coefficients.names.insert(fit.coefficients.names.end(), regressors.begin(), regressors.end());
  fit.coefficients.values = beta;
  fit.covariance = to_raw * info.inverse_gram() * to_raw.transpose();
  fit.std_errors = fit.covariance.diagonal().cwiseSqrt();
  fit.odds_ratios = beta.array().exp();
  fit.ci_low = (beta.array() - 1.96 * fit.std_errors.array()).exp();
  fit.ci_high = (beta.array() + 1.96 * fit.std_errors.array()).exp();
  fit.deviance = dev;
  fit.loglik = -0.5 * dev;
  fit.aic = dev + 2.0 * static_cast<double>(p);
  fit.max_abs_score = score.cwiseAbs().maxCoeff();
  return fit;
}

struct PartialCurve {
  std::string focal;
  std::vector<double> grid;
  std::vector<double> predicted;
  std::vector<double> ci_low;
  std::vector<double> ci_high;
  /// Values the other regressors are pinned at (their medians), in fit order.
  std::vector<std::pair<std::string, double>> pinned;
};

/// Predicted outcome over an even grid spanning the observed focal range, with
/// every other regressor held at its median, and pointwise 95% bands from the
/// coefficient covariance.
inline PartialCurve partial_curve(const OlsFit& fit, const Dataset& data, const std::string& focal,
                                  std::size_t grid_size) {
  const auto it = std::find(fit.regressors.begin(), fit.regressors.end(), focal);
  if (it == fit.regressors.end()) throw Error(ErrorKind::UnknownRegressor, "'" + focal + "' is not in " + fit.label());
  if (grid_size < 2) throw Error(ErrorKind::InvalidArgument, "grid_size must be at least 2");
  const auto focal_index = static_cast<Eigen::Index>(it - fit.regressors.begin()) + 1;

  PartialCurve curve;
  curve.focal = focal;
  Eigen::VectorXd row(static_cast<Eigen::Index>(fit.p));
  row(0) = 1.0;
  for (std::size_t j = 0; j < fit.regressors.size(); ++j) {
    const auto& name = fit.regressors[j];
    if (name == focal) continue;
    const double m = median(data.column(name));
    row(static_cast<Eigen::Index>(j) + 1) = m;
    curve.pinned.emplace_back(name, m);
  }
  const auto col = data.column(focal);
  const auto [lo_it, hi_it] = std::minmax_element(col.begin(), col.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  for (std::size_t g = 0; g < grid_size; ++g) {
    const double t = static_cast<double>(g) / static_cast<double>(grid_size - 1);
    const double v = g + 1 == grid_size ? hi : lo + t * (hi - lo);
    row(focal_index) = v;
    const double pred = row.dot(fit.coefficients.values);
    const double se = std::sqrt(std::max(0.0, row.dot(fit.covariance * row)));
    curve.grid.push_back(v);
    curve.predicted.push_back(pred);
    curve.ci_low.push_back(pred - kZ95 * se);
    curve.ci_high.push_back(pred + kZ95 * se);
  }
  return curve;
}

struct ForestRow {
  std::string label;
  double odds_ratio = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// One odds-ratio row per fit for `term`, in input order.
inline std::vector<ForestRow> forest_rows(const std::vector<LogisticFit>& fits, const std::string& term) {
  std::vector<ForestRow> rows;
  for (const auto& f : fits) {
    const auto& names = f.coefficients.names;
    auto it = std::find(names.begin(), names.end(), term);
    if (it == names.end()) throw Error(ErrorKind::TermMissing, "'" + term + "' missing from fit " + f.label());
    const auto i = it - names.begin();
    rows.push_back({f.label(), f.odds_ratios(i), f.ci_low(i), f.ci_high(i)});
  }
  return rows;
}

}  // namespace collider
