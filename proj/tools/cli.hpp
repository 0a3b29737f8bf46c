#pragma once

// Command-line front end. Exit codes: 0 success, 2 usage or input-file
// errors, 3 numeric/model failures.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "collider/api.hpp"
#include "collider/dag.hpp"
#include "collider/dataset.hpp"
#include "collider/estimators.hpp"
#include "collider/grid.hpp"
#include "collider/http.hpp"
#include "collider/monte_carlo.hpp"
#include "collider/report.hpp"
#include "collider/sem.hpp"
#include "collider/sem_io.hpp"

namespace collider::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitModel = 3;

/// Thrown for problems with flags or input files (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(tok);
  }
  return out;
}

struct Options {
  std::string format;  // empty: csv for generate/sweep, json otherwise
  std::string out_path;
  unsigned threads = default_threads();
  int verbosity = 0;
};

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Collider-bias simulation laboratory"};
    app.require_subcommand(1);
    app.set_version_flag("--version", COLLIDER_VERSION);

    Options opt;
    auto common = [&](CLI::App* sub) {
      sub->add_option("--format", opt.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
      sub->add_option("-o,--out", opt.out_path, "Write output here instead of stdout");
      sub->add_option("--threads", opt.threads, "Worker threads (never changes output)")->check(CLI::PositiveNumber);
      sub->add_flag("-v,--verbose", "Print provenance to stderr");
    };

    // generate
    std::string spec_path;
    std::size_t n = 1000;
    std::uint64_t seed = api::kDefaultSeed;
    auto* gen = app.add_subcommand("generate", "Simulate a dataset from a SEM spec file (CSV)");
    gen->add_option("--spec", spec_path, "SEM spec (TOML subset or JSON)")->required();
    gen->add_option("-n", n, "Observations")->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
    gen->add_option("--seed", seed, "Seed (default 777)");
    common(gen);

    // fit
    std::string data_path, outcome, regressors, family = "gaussian";
    auto* fit = app.add_subcommand("fit", "Fit a regression to a CSV dataset (JSON report)");
    fit->add_option("--data", data_path, "Dataset CSV")->required();
    fit->add_option("--outcome", outcome, "Outcome column")->required();
    fit->add_option("--regressors", regressors, "Comma-separated regressor columns");
    fit->add_option("--family", family, "gaussian or logistic")->check(CLI::IsMember({"gaussian", "logistic"}));
    std::string curve_focal;
    std::size_t curve_grid = 50;
    fit->add_option("--curve", curve_focal, "Also emit a partial-regression curve for this regressor (gaussian)");
    fit->add_option("--curve-grid", curve_grid, "Curve grid size")->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
    common(fit);

    // mc
    Scenario sc;
    bool series = false;
    auto* mc = app.add_subcommand("mc", "Replicated collider-bias Monte Carlo (JSON summary)");
    mc->add_option("--beta1", sc.beta1, "Sodium -> SBP effect");
    mc->add_option("--beta2", sc.beta2, "Age -> SBP effect");
    mc->add_option("--alpha1", sc.alpha1, "Sodium -> proteinuria");
    mc->add_option("--alpha2", sc.alpha2, "SBP -> proteinuria");
    mc->add_option("-n", sc.n, "Observations per replicate")->check(CLI::Range(std::size_t{10}, std::size_t{100000000}));
    mc->add_option("-R,--replicates", sc.replicates, "Replicates")->check(CLI::Range(std::size_t{1}, std::size_t{10000000}));
    mc->add_option("--seed", sc.seed, "Master seed (default 50472)");
    mc->add_flag("--series", series, "Include per-replicate coefficient series");
    common(mc);

    // sweep
    std::string beta_grid = "1:5", alpha_grid = "0.5:5:0.5";
    std::size_t sweep_n = 1000;
    std::uint64_t sweep_seed = api::kDefaultSeed;
    auto* sw = app.add_subcommand("sweep", "Collider-coefficient sweep over (beta1, alpha) cells");
    sw->add_option("--beta1", beta_grid, "Grid: a,b,c or start:end[:step]");
    sw->add_option("--alpha", alpha_grid, "Grid for alpha1 = alpha2");
    sw->add_option("-n", sweep_n, "Observations per cell")->check(CLI::Range(std::size_t{10}, std::size_t{100000000}));
    sw->add_option("--seed", sweep_seed, "Seed (default 777)");
    common(sw);

    // dag-check
    std::string dag_path, exposure, dag_outcome, adjust;
    auto* dc = app.add_subcommand("dag-check", "Audit an adjustment set with the back-door criterion");
    dc->add_option("dag", dag_path, "DAG JSON file")->required();
    dc->add_option("--exposure", exposure, "Exposure node")->required();
    dc->add_option("--outcome", dag_outcome, "Outcome node")->required();
    dc->add_option("--adjust", adjust, "Comma-separated adjustment set");
    common(dc);

    // describe
    std::string vars;
    bool spearman = false;
    auto* desc = app.add_subcommand("describe", "Six-number summaries (and Spearman matrix) of a dataset");
    auto* desc_data = desc->add_option("--data", data_path, "Dataset CSV");
    auto* desc_spec = desc->add_option("--spec", spec_path, "Or simulate from this SEM spec");
    desc_data->excludes(desc_spec);
    desc->add_option("-n", n, "Observations when simulating")->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
    desc->add_option("--seed", seed, "Seed when simulating (default 777)");
    desc->add_flag("--spearman", spearman, "Include the Spearman rank-correlation matrix (json only)");
    desc->add_option("--vars", vars, "Columns for the Spearman matrix (default: all)");
    common(desc);

    // serve
    std::string host = "127.0.0.1", static_dir;
    int port = 8080;
    auto* serve = app.add_subcommand("serve", "Run the HTTP explorer API");
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
    serve->add_option("--static", static_dir, "Directory served at /");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out_, err_);
      return code == 0 ? kExitOk : kExitUsage;
    }

    for (const auto* sub : app.get_subcommands()) opt.verbosity = static_cast<int>(sub->count("--verbose"));
    if (opt.format.empty()) opt.format = (*gen || *sw) ? "csv" : "json";
    try {
      if (*gen) return cmd_generate(spec_path, n, seed, opt);
      if (*fit) return cmd_fit(data_path, outcome, split_list(regressors), family, curve_focal, curve_grid, opt);
      if (*mc) return cmd_mc(sc, series, opt);
      if (*sw) return cmd_sweep(beta_grid, alpha_grid, sweep_n, sweep_seed, opt);
      if (*dc) return cmd_dag_check(dag_path, exposure, dag_outcome, split_list(adjust), opt);
      if (*desc) return cmd_describe(data_path, spec_path, n, seed, spearman, split_list(vars), opt);
      if (*serve) return cmd_serve(host, port, static_dir);
    } catch (const UsageError& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitUsage;
    } catch (const Error& e) {
      err_ << "error: " << e.what() << '\n';
      return kExitModel;
    }
    return kExitUsage;
  }

 private:
  json provenance(std::optional<std::uint64_t> seed, const std::string& digest) const {
    json p = {{"version", COLLIDER_VERSION}};
    if (seed) p["seed"] = *seed;
    if (!digest.empty()) p["spec_digest"] = digest;
    return p;
  }

  // JSON reports carry provenance inline; CSV streams report it on stderr.
  void note_provenance(const json& p, const Options& opt) const {
    if (opt.verbosity > 0) err_ << "# provenance: " << p.dump() << '\n';
  }

  template <typename Writer>
  void emit(const Options& opt, Writer&& write) const {
    if (opt.out_path.empty()) {
      write(out_);
      return;
    }
    std::ofstream file(opt.out_path, std::ios::binary);
    if (!file) throw UsageError("cannot write '" + opt.out_path + "'");
    write(file);
  }

  void emit_json(const Options& opt, const json& doc) const {
    emit(opt, [&](std::ostream& os) { os << doc.dump(2) << '\n'; });
  }

  static SemSpec load_spec(const std::string& path) {
    try {
      return load_sem_spec(path);
    } catch (const Error& e) {
      throw UsageError(path + ": " + e.what());
    }
  }

  static Dataset load_dataset(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open '" + path + "'");
    try {
      return read_csv(in);
    } catch (const Error& e) {
      throw UsageError(path + ": " + e.what());
    }
  }

  int cmd_generate(const std::string& spec_path, std::size_t n, std::uint64_t seed, const Options& opt) const {
    const CompiledSem sem = [&] {
      try {
        return compile(load_spec(spec_path));
      } catch (const Error& e) {
        throw UsageError(spec_path + ": " + e.what());
      }
    }();
    const Dataset data = generate(sem, n, seed, opt.threads);
    note_provenance(provenance(seed, sem.digest()), opt);
    if (opt.format == "json") {
      json cols = json::object();
      for (const auto& name : data.names()) {
        const auto c = data.column(name);
        cols[name] = std::vector<double>(c.begin(), c.end());
      }
      emit_json(opt, {{"provenance", provenance(seed, sem.digest())}, {"n", data.rows()}, {"columns", cols}});
    } else {
      emit(opt, [&](std::ostream& os) { write_csv(data, os); });
    }
    return kExitOk;
  }

  int cmd_fit(const std::string& data_path, const std::string& outcome, const std::vector<std::string>& regressors,
              const std::string& family, const std::string& curve_focal, std::size_t curve_grid,
              const Options& opt) const {
    const Dataset data = load_dataset(data_path);
    json report;
    if (family == "logistic") {
      report = logistic_to_json(fit_logistic(data, outcome, regressors));
    } else {
      const OlsFit fit = fit_ols(data, outcome, regressors);
      report = ols_to_json(fit);
      if (!curve_focal.empty()) report["curve"] = curve_to_json(partial_curve(fit, data, curve_focal, curve_grid));
    }
    report["provenance"] = provenance(std::nullopt, {});
    report["provenance"]["data"] = data_path;
    emit_json(opt, report);
    return kExitOk;
  }

  int cmd_mc(const Scenario& sc, bool series, const Options& opt) const {
    const McSummary s = run_mc(sc, opt.threads);
    const json prov = provenance(sc.seed, compile(models::sodium_spec(
                                                      sodium_coefficients(sc.beta1, sc.beta2, sc.alpha1, sc.alpha2)))
                                              .digest());
    if (opt.format == "csv") {
      note_provenance(prov, opt);
      emit(opt, [&](std::ostream& os) {
        os << "replicate,true_coef,collider_coef,collider_se\n";
        for (std::size_t r = 0; r < s.true_coefs.size(); ++r) {
          os << r << ',' << format_real(s.true_coefs[r]) << ',' << format_real(s.collider_coefs[r]) << ','
             << format_real(s.collider_ses[r]) << '\n';
        }
      });
      return kExitOk;
    }
    json doc = mc_to_json(s, series);
    doc["provenance"] = prov;
    emit_json(opt, doc);
    return kExitOk;
  }

  int cmd_sweep(const std::string& beta_grid, const std::string& alpha_grid, std::size_t n, std::uint64_t seed,
                const Options& opt) const {
    std::vector<double> betas, alphas;
    try {
      betas = parse_grid(beta_grid);
      alphas = parse_grid(alpha_grid);
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const auto rows = run_sweep(betas, alphas, n, seed, opt.threads);
    const json prov = provenance(seed, {});
    if (opt.format == "csv") {
      note_provenance(prov, opt);
      emit(opt, [&](std::ostream& os) { write_sweep_csv(rows, os); });
    } else {
      emit_json(opt, {{"provenance", prov}, {"n", n}, {"rows", sweep_to_json(rows)}});
    }
    return kExitOk;
  }

  int cmd_dag_check(const std::string& path, const std::string& exposure, const std::string& outcome,
                    const std::vector<std::string>& adjust_list, const Options& opt) const {
    const Dag dag = [&] {
      try {
        return dag_from_json(json::parse(read_text_file(path)));
      } catch (const json::exception& e) {
        throw UsageError(path + ": " + e.what());
      } catch (const Error& e) {
        throw UsageError(path + ": " + e.what());
      }
    }();
    const NameSet adjust(adjust_list.begin(), adjust_list.end());
    const AdjustmentVerdict v = check_adjustment_set(dag, exposure, outcome, adjust);
    const json paths = path_report(dag, exposure, outcome, adjust);
    if (opt.format == "csv") {
      emit(opt, [&](std::ostream& os) {
        os << "path,kind,status\n";
        for (const auto& p : paths) {
          os << p["text"].get<std::string>() << ',' << p["kind"].get<std::string>() << ','
             << (p["blocked"].get<bool>() ? "blocked" : "open") << '\n';
        }
        os << "# verdict," << (v.valid ? "valid" : "invalid") << '\n';
      });
    } else {
      emit_json(opt, {{"provenance", provenance(std::nullopt, {})},
                      {"exposure", exposure},
                      {"outcome", outcome},
                      {"adjust", adjust},
                      {"verdict", verdict_to_json(v)},
                      {"paths", paths}});
    }
    return kExitOk;
  }

  int cmd_describe(const std::string& data_path, const std::string& spec_path, std::size_t n, std::uint64_t seed,
                   bool spearman, std::vector<std::string> vars, const Options& opt) const {
    Dataset data;
    json prov;
    if (!data_path.empty()) {
      data = load_dataset(data_path);
      prov = provenance(std::nullopt, {});
    } else if (!spec_path.empty()) {
      const CompiledSem sem = [&] {
        try {
          return compile(load_spec(spec_path));
        } catch (const Error& e) {
          throw UsageError(spec_path + ": " + e.what());
        }
      }();
      data = generate(sem, n, seed, opt.threads);
      prov = provenance(seed, sem.digest());
    } else {
      throw UsageError("describe needs --data or --spec");
    }
    const auto rows = describe(data);
    if (opt.format == "csv") {
      note_provenance(prov, opt);
      emit(opt, [&](std::ostream& os) { write_summaries_csv(rows, os); });
      return kExitOk;
    }
    json doc = {{"provenance", prov}, {"n", data.rows()}, {"summaries", summaries_to_json(rows)}};
    if (spearman) {
      if (vars.empty()) vars = data.names();
      const Eigen::MatrixXd rho = spearman_matrix(data, vars);
      json m = json::array();
      for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < rho.cols(); ++j) row.push_back(rho(i, j));
        m.push_back(row);
      }
      doc["spearman"] = {{"vars", vars}, {"matrix", m}};
    }
    emit_json(opt, doc);
    return kExitOk;
  }

  int cmd_serve(const std::string& host, int port, const std::string& static_dir) const {
    httplib::Server server;
    api::register_routes(server, static_dir);
    err_ << "listening on http://" << host << ':' << port << '\n';
    if (!server.listen(host, port)) throw UsageError("cannot bind " + host + ":" + std::to_string(port));
    return kExitOk;
  }

  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace collider::cli
