#pragma once

// JSON/CSV renderings of graphs, fits and Monte Carlo results.
//
// JSON reals go through nlohmann's shortest round-trip formatter, so every
// value reads back bit-identical; CSV reals use 17 significant digits.

#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "collider/dag.hpp"
#include "collider/dataset.hpp"
#include "collider/estimators.hpp"
#include "collider/monte_carlo.hpp"

namespace collider {

using nlohmann::json;

inline Dag dag_from_json(const json& doc) {
  try {
    std::vector<std::string> nodes = doc.at("nodes").get<std::vector<std::string>>();
    EdgeList edges;
    for (const auto& e : doc.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw Error(ErrorKind::ParseError, "edges must be [from, to] pairs");
      edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
    }
    return Dag::build(nodes, edges);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, std::string("DAG document: ") + e.what());
  }
}

inline json dag_to_json(const Dag& dag) {
  json edges = json::array();
  for (const auto& [from, to] : dag.edges()) edges.push_back({from, to});
  return {{"nodes", dag.nodes()}, {"edges", edges}};
}

inline json path_to_json(const Path& path) {
  json dirs = json::array();
  for (auto d : path.directions) dirs.push_back(d == EdgeDirection::Forward ? "forward" : "backward");
  return {{"nodes", path.nodes}, {"directions", dirs}, {"text", path.to_string()}};
}

inline json verdict_to_json(const AdjustmentVerdict& v) {
  json out = {{"valid", v.valid},
              {"open_backdoor_paths", json::array()},
              {"opened_collider_paths", json::array()},
              {"descendants_of_exposure_in_set", v.descendants_of_exposure_in_set}};
  for (const auto& p : v.open_backdoor_paths) out["open_backdoor_paths"].push_back(path_to_json(p));
  for (const auto& p : v.opened_collider_paths) out["opened_collider_paths"].push_back(path_to_json(p));
  return out;
}

/// Every exposure-outcome path with its status under `adjust`.
inline json path_report(const Dag& dag, const std::string& exposure, const std::string& outcome, const NameSet& adjust) {
  json rows = json::array();
  for (const auto& p : enumerate_paths(dag, exposure, outcome)) {
    json row = path_to_json(p);
    row["kind"] = p.is_directed() ? "causal" : (p.starts_into_source() ? "backdoor" : "noncausal");
    row["blocked"] = is_path_blocked(dag, p, adjust);
    rows.push_back(row);
  }
  return rows;
}

inline json ols_to_json(const OlsFit& fit) {
  json terms = json::array();
  for (std::size_t i = 0; i < fit.coefficients.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    terms.push_back({{"name", fit.coefficients.names[i]}, {"coef", fit.coefficients.values(k)}, {"se", fit.std_errors(k)}});
  }
  return {{"family", "gaussian"}, {"outcome", fit.outcome}, {"terms", terms}, {"n", fit.n}, {"p", fit.p},
          {"rss", fit.rss}, {"aic", fit.aic}, {"loglik", fit.loglik}};
}

inline json logistic_to_json(const LogisticFit& fit) {
  json terms = json::array();
  for (std::size_t i = 0; i < fit.coefficients.names.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    terms.push_back({{"name", fit.coefficients.names[i]},
                     {"coef", fit.coefficients.values(k)},
                     {"se", fit.std_errors(k)},
                     {"or", fit.odds_ratios(k)},
                     {"ci", {fit.ci_low(k), fit.ci_high(k)}}});
  }
  return {{"family", "binomial"}, {"outcome", fit.outcome}, {"terms", terms},  {"n", fit.n},
          {"p", fit.p},           {"deviance", fit.deviance}, {"aic", fit.aic}, {"loglik", fit.loglik},
          {"converged", fit.converged}, {"iterations", fit.iterations}};
}

inline json curve_to_json(const PartialCurve& c) {
  json pinned = json::object();
  for (const auto& [name, v] : c.pinned) pinned[name] = v;
  return {{"focal", c.focal}, {"grid", c.grid}, {"predicted", c.predicted},
          {"ci_low", c.ci_low}, {"ci_high", c.ci_high}, {"pinned", pinned}};
}

inline json forest_to_json(const std::vector<ForestRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"label", r.label}, {"or", r.odds_ratio}, {"ci_low", r.ci_low}, {"ci_high", r.ci_high}});
  }
  return out;
}

inline json scenario_to_json(const Scenario& sc) {
  return {{"beta1", sc.beta1}, {"beta2", sc.beta2}, {"alpha1", sc.alpha1}, {"alpha2", sc.alpha2},
          {"n", sc.n},         {"replicates", sc.replicates}, {"seed", sc.seed}};
}

inline json mc_to_json(const McSummary& s, bool include_series = false) {
  json out = {{"scenario", scenario_to_json(s.scenario)},
              {"analytic_collider_coef", s.analytic_collider_coef},
              {"mean_true_model_coef", s.mean_true_model_coef},
              {"mean_collider_model_coef", s.mean_collider_model_coef},
              {"mean_collider_se", s.mean_collider_se},
              {"ci_low", s.ci_low},
              {"ci_high", s.ci_high},
              {"mean_abs_gap", s.mean_abs_gap},
              {"relbias_pct", s.relbias_pct},
              {"bias_simple", s.bias_simple}};
  if (include_series) {
    out["true_coefs"] = s.true_coefs;
    out["collider_coefs"] = s.collider_coefs;
    out["collider_ses"] = s.collider_ses;
  }
  return out;
}

inline json sweep_to_json(const std::vector<SweepRow>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"beta1", r.beta1}, {"alpha", r.alpha}, {"estimate", r.estimated_coef}, {"se", r.estimated_se},
                   {"analytic", r.analytic_coef}, {"abs_bias", r.abs_bias}});
  }
  return out;
}

/// Header `beta1,alpha,estimate,analytic,abs_bias`, one line per cell.
inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "beta1,alpha,estimate,analytic,abs_bias\n";
  for (const auto& r : rows) {
    out << format_real(r.beta1) << ',' << format_real(r.alpha) << ',' << format_real(r.estimated_coef) << ','
        << format_real(r.analytic_coef) << ',' << format_real(r.abs_bias) << '\n';
  }
}

inline json summaries_to_json(const std::vector<Summary>& rows) {
  json out = json::array();
  for (const auto& s : rows) {
    out.push_back({{"name", s.name}, {"min", s.min}, {"q1", s.q1}, {"median", s.median},
                   {"mean", s.mean}, {"q3", s.q3}, {"max", s.max}});
  }
  return out;
}

inline void write_summaries_csv(const std::vector<Summary>& rows, std::ostream& out) {
  out << "variable,min,q1,median,mean,q3,max\n";
  for (const auto& s : rows) {
    out << s.name << ',' << format_real(s.min) << ',' << format_real(s.q1) << ',' << format_real(s.median) << ','
        << format_real(s.mean) << ',' << format_real(s.q3) << ',' << format_real(s.max) << '\n';
  }
}

}  // namespace collider
