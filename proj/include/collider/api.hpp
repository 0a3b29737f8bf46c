#pragma once

// Request handlers behind the HTTP explorer service. Each handler is a pure
// function of its input, so identical requests produce identical bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "collider/estimators.hpp"
#include "collider/figures.hpp"
#include "collider/grid.hpp"
#include "collider/models.hpp"
#include "collider/monte_carlo.hpp"
#include "collider/report.hpp"
#include "collider/rng.hpp"

#ifndef COLLIDER_VERSION
#define COLLIDER_VERSION "0.1.0"
#endif

namespace collider::api {

using nlohmann::json;

inline constexpr std::size_t kMinN = 100;
inline constexpr std::size_t kMaxN = 100000;
inline constexpr std::size_t kMaxSweepCells = 200;
inline constexpr std::size_t kCurveGrid = 50;
inline constexpr std::uint64_t kDefaultSeed = 777;

struct Response {
  int status = 200;
  json body;

  std::string text() const { return body.dump(); }
};

struct SimulateRequest {
  double beta1 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  std::size_t n = 1000;
  std::uint64_t seed = kDefaultSeed;
  bool include_points = false;
  std::size_t max_points = 1000;
};

inline json request_to_json(const SimulateRequest& r) {
  return {{"beta1", r.beta1}, {"alpha1", r.alpha1}, {"alpha2", r.alpha2}, {"n", r.n},
          {"seed", r.seed}, {"include_points", r.include_points}, {"max_points", r.max_points}};
}

inline Response validation_error(const json& fields) {
  return {400, {{"error", "ValidationError"}, {"fields", fields}}};
}

inline Response model_error(const Error& e) {
  const int status = e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::ParseError ? 400 : 422;
  return {status, {{"error", std::string(e.name())}, {"message", e.message()}}};
}

/// Field-level validation. Returns the parsed request or fills `errors`.
inline SimulateRequest parse_simulate(const json& in, json& errors) {
  SimulateRequest r;
  errors = json::object();
  if (!in.is_object()) {
    errors["body"] = "request body must be a JSON object";
    return r;
  }
  auto real = [&](const char* key, double& out, double lo, double hi) {
    if (!in.contains(key)) {
      errors[key] = std::string(key) + " is required";
    } else if (!in[key].is_number()) {
      errors[key] = std::string(key) + " must be a number";
    } else {
      out = in[key].get<double>();
      if (!std::isfinite(out) || out < lo || out > hi) {
        errors[key] = std::string(key) + " must lie in [" + format_real(lo) + ", " + format_real(hi) + "]";
      }
    }
  };
  real("beta1", r.beta1, -100.0, 100.0);
  real("alpha1", r.alpha1, -100.0, 100.0);
  real("alpha2", r.alpha2, -100.0, 100.0);

  if (in.contains("n")) {
    const auto& v = in["n"];
    if (!v.is_number_integer()) {
      errors["n"] = "n must be an integer";
    } else if (v.get<long long>() < static_cast<long long>(kMinN)) {
      errors["n"] = "n below minimum " + std::to_string(kMinN);
    } else if (v.get<long long>() > static_cast<long long>(kMaxN)) {
      errors["n"] = "n above maximum " + std::to_string(kMaxN);
    } else {
      r.n = v.get<std::size_t>();
    }
  }
  if (in.contains("seed")) {
    const auto& v = in["seed"];
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
      errors["seed"] = "seed must be a non-negative integer";
    } else {
      r.seed = v.get<std::uint64_t>();
    }
  }
  if (in.contains("include_points")) {
    if (!in["include_points"].is_boolean()) errors["include_points"] = "include_points must be a boolean";
    else r.include_points = in["include_points"].get<bool>();
  }
  if (in.contains("max_points")) {
    const auto& v = in["max_points"];
    if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > static_cast<long long>(kMaxN)) {
      errors["max_points"] = "max_points must be an integer in [1, " + std::to_string(kMaxN) + "]";
    } else {
      r.max_points = v.get<std::size_t>();
    }
  }
  for (const auto& [key, _] : in.items()) {
    static const std::vector<std::string> known{"beta1", "alpha1", "alpha2", "n", "seed", "include_points", "max_points"};
    if (std::find(known.begin(), known.end(), key) == known.end()) errors[key] = "unknown field";
  }
  return r;
}

/// Deterministic subsample of min(k, n) row indices, in increasing order.
inline std::vector<std::size_t> subsample_indices(std::size_t n, std::size_t k, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (k >= n) return idx;
  Xoshiro256 rng(derive_seed(seed, 0x5CA77E5ULL));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline json simulate_payload(const SimulateRequest& req) {
  using namespace models::names;
  const CompiledSem sem = compile(models::sodium_spec(sodium_coefficients(req.beta1, 2.0, req.alpha1, req.alpha2)));
  const Dataset data = generate(sem, req.n, req.seed);

  const std::vector<std::string> crude{kSodium};
  const std::vector<std::string> adjusted{kSodium, kAge};
  const std::vector<std::string> collider{kSodium, kAge, kProteinuria};
  const OlsFit ols_crude = fit_ols(data, kSbp, crude);
  const OlsFit ols_adjusted = fit_ols(data, kSbp, adjusted);
  const OlsFit ols_collider = fit_ols(data, kSbp, collider);
  const std::vector<LogisticFit> logit{fit_logistic(data, kHypertension, crude),
                                       fit_logistic(data, kHypertension, adjusted),
                                       fit_logistic(data, kHypertension, collider)};

  const double true_coef = ols_adjusted.coef(kSodium);
  const double collider_coef = ols_collider.coef(kSodium);
  json out;
  out["request"] = request_to_json(req);
  out["spec_digest"] = sem.digest();
  out["version"] = COLLIDER_VERSION;
  out["fits"] = {{"crude", ols_to_json(ols_crude)},
                 {"age_adjusted", ols_to_json(ols_adjusted)},
                 {"collider_adjusted", ols_to_json(ols_collider)}};
  out["logistic_fits"] = {{"crude", logistic_to_json(logit[0])},
                          {"age_adjusted", logistic_to_json(logit[1])},
                          {"collider_adjusted", logistic_to_json(logit[2])}};
  out["forest"] = forest_to_json(forest_rows(logit, kSodium));
  out["analytic_collider_coef"] = analytic_collider_coef(req.beta1, req.alpha1, req.alpha2);
  out["sign_flipped"] = collider_coef * req.beta1 < 0.0;
  out["bias"] = {{"simple", collider_coef - req.beta1},
                 {"abs_bias", req.beta1 - collider_coef},
                 {"abs_gap", true_coef - std::abs(collider_coef)},
                 {"relbias_pct", 100.0 * (true_coef - std::abs(collider_coef)) / true_coef}};
  out["curves"] = {{"crude", curve_to_json(partial_curve(ols_crude, data, kSodium, kCurveGrid))},
                   {"age_adjusted", curve_to_json(partial_curve(ols_adjusted, data, kSodium, kCurveGrid))},
                   {"collider_adjusted", curve_to_json(partial_curve(ols_collider, data, kSodium, kCurveGrid))}};
  if (req.include_points) {
    const auto sod = data.column(kSodium);
    const auto sbp = data.column(kSbp);
    json xs = json::array(), ys = json::array();
    for (std::size_t i : subsample_indices(data.rows(), req.max_points, req.seed)) {
      xs.push_back(sod[i]);
      ys.push_back(sbp[i]);
    }
    out["points"] = {{"x", kSodium}, {"y", kSbp}, {"xs", xs}, {"ys", ys}};
  }
  return out;
}

/// POST /api/simulate
inline Response simulate(const json& body) {
  json errors;
  const SimulateRequest req = parse_simulate(body, errors);
  if (!errors.empty()) return validation_error(errors);
  try {
    return {200, simulate_payload(req)};
  } catch (const Error& e) {
    return model_error(e);
  }
}

inline Response simulate_text(const std::string& text) {
  json body;
  try {
    body = json::parse(text);
  } catch (const json::parse_error&) {
    return validation_error({{"body", "request body is not valid JSON"}});
  }
  return simulate(body);
}

/// GET /api/sweep?beta1=..&alphas=..[&n=..][&seed=..]
inline Response sweep(const std::map<std::string, std::string>& query) {
  json errors = json::object();
  std::vector<double> betas, alphas;
  std::size_t n = 1000;
  std::uint64_t seed = kDefaultSeed;
  auto grid = [&](const char* key, std::vector<double>& out) {
    auto it = query.find(key);
    if (it == query.end()) {
      errors[key] = std::string(key) + " is required";
      return;
    }
    try {
      out = parse_grid(it->second);
    } catch (const Error& e) {
      errors[key] = e.message();
    }
  };
  grid("beta1", betas);
  grid("alphas", alphas);
  auto integer = [&](const char* key, auto& out, long long lo, long long hi) {
    auto it = query.find(key);
    if (it == query.end()) return;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(it->second, &used);
      if (used != it->second.size() || v < lo || v > hi) throw std::out_of_range(key);
      out = static_cast<std::remove_reference_t<decltype(out)>>(v);
    } catch (const std::exception&) {
      errors[key] = std::string(key) + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]";
    }
  };
  integer("n", n, static_cast<long long>(kMinN), static_cast<long long>(kMaxN));
  integer("seed", seed, 0, std::numeric_limits<long long>::max());
  if (errors.empty() && betas.size() * alphas.size() > kMaxSweepCells) {
    errors["alphas"] = "grid has " + std::to_string(betas.size() * alphas.size()) + " cells; limit is " +
                       std::to_string(kMaxSweepCells);
  }
  if (!errors.empty()) return validation_error(errors);
  try {
    return {200, {{"n", n}, {"seed", seed}, {"rows", sweep_to_json(run_sweep(betas, alphas, n, seed))}}};
  } catch (const Error& e) {
    return model_error(e);
  }
}

/// GET /api/dag
inline Response dag() {
  const Dag g = figures::sodium();
  json verdicts = json::array();
  for (const NameSet& adjust : {NameSet{}, NameSet{"AGE"}, NameSet{"AGE", "PRO"}}) {
    verdicts.push_back({{"adjust", adjust},
                        {"verdict", verdict_to_json(check_adjustment_set(g, "SOD", "SBP", adjust))},
                        {"paths", path_report(g, "SOD", "SBP", adjust)}});
  }
  return {200, {{"dag", dag_to_json(g)}, {"exposure", "SOD"}, {"outcome", "SBP"}, {"verdicts", verdicts}}};
}

/// GET /healthz
inline Response health() { return {200, {{"status", "ok"}, {"version", COLLIDER_VERSION}}}; }

}  // namespace collider::api
