#pragma once

// Linear-Gaussian structural equation models: compilation, seeded
// observational/interventional sampling, and the exact population moments and
// regression coefficients implied by a model.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "collider/dag.hpp"
#include "collider/dataset.hpp"
#include "collider/error.hpp"
#include "collider/parallel.hpp"
#include "collider/rng.hpp"

namespace collider {

struct ParentTerm {
  std::string var;
  double coef = 0.0;
  friend bool operator==(const ParentTerm&, const ParentTerm&) = default;
};

struct Noise {
  double mean = 0.0;
  double sd = 1.0;
  friend bool operator==(const Noise&, const Noise&) = default;
};

/// name := intercept + sum(coef * parent) + Normal(noise.mean, noise.sd)
struct Assignment {
  std::string name;
  double intercept = 0.0;
  std::vector<ParentTerm> parents;
  Noise noise;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

enum class Comparison { Greater, GreaterEqual };

/// name := 1 if source (op) cutoff else 0
struct Indicator {
  std::string name;
  std::string source;
  double cutoff = 0.0;
  Comparison op = Comparison::Greater;
  friend bool operator==(const Indicator&, const Indicator&) = default;

  bool fires(double value) const { return op == Comparison::Greater ? value > cutoff : value >= cutoff; }
};

struct SemSpec {
  std::vector<Assignment> assignments;
  std::vector<Indicator> indicators;
  friend bool operator==(const SemSpec&, const SemSpec&) = default;
};

/// FNV-1a over a canonical text rendering; reals enter at 17 significant digits.
inline std::string spec_digest(const SemSpec& spec) {
  std::string canon;
  for (const auto& a : spec.assignments) {
    canon += "A|" + a.name + "|" + format_real(a.intercept) + "|" + format_real(a.noise.mean) + "|" +
             format_real(a.noise.sd);
    for (const auto& p : a.parents) canon += "|" + p.var + "=" + format_real(p.coef);
    canon += "\n";
  }
  for (const auto& i : spec.indicators) {
    canon += "I|" + i.name + "|" + i.source + "|" + format_real(i.cutoff) + "|" +
             (i.op == Comparison::Greater ? "gt" : "ge") + "\n";
  }
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canon) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

class CompiledSem {
 public:
  const SemSpec& spec() const noexcept { return spec_; }
  const Dag& dag() const noexcept { return dag_; }
  const std::string& digest() const noexcept { return digest_; }

  /// Continuous variables in declaration (and topological) order.
  const std::vector<std::string>& variables() const noexcept { return vars_; }
  std::size_t size() const noexcept { return vars_.size(); }

  /// coefficients()(child, parent); strictly lower triangular.
  const Eigen::MatrixXd& coefficients() const noexcept { return coef_; }

  std::size_t index_of(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::UnknownVariable, "'" + name + "' is not an assignment");
    return it->second;
  }

  bool is_indicator(const std::string& name) const {
    return std::any_of(spec_.indicators.begin(), spec_.indicators.end(),
                       [&](const Indicator& i) { return i.name == name; });
  }

 private:
  friend CompiledSem compile(SemSpec spec);

  SemSpec spec_;
  Dag dag_;
  std::string digest_;
  std::vector<std::string> vars_;
  std::map<std::string, std::size_t> index_;
  Eigen::MatrixXd coef_;
};

/// Validates ordering, names and noise. Throws ForwardReference,
/// DuplicateVariable, NegativeSd or UnknownVariable (indicator source).
inline CompiledSem compile(SemSpec spec) {
  CompiledSem sem;
  std::vector<std::string> nodes;
  EdgeList edges;
  for (const auto& a : spec.assignments) {
    if (sem.index_.count(a.name)) throw Error(ErrorKind::DuplicateVariable, "'" + a.name + "' assigned twice");
    if (!(a.noise.sd >= 0.0) || !std::isfinite(a.noise.sd)) {
      throw Error(ErrorKind::NegativeSd, "'" + a.name + "' has noise sd " + format_real(a.noise.sd));
    }
    std::set<std::string> seen_parents;
    for (const auto& p : a.parents) {
      if (!sem.index_.count(p.var)) {
        throw Error(ErrorKind::ForwardReference, "'" + a.name + "' uses '" + p.var + "' before it is defined");
      }
      if (!seen_parents.insert(p.var).second) {
        throw Error(ErrorKind::DuplicateVariable, "'" + a.name + "' lists parent '" + p.var + "' twice");
      }
      edges.emplace_back(p.var, a.name);
    }
    sem.index_.emplace(a.name, sem.vars_.size());
    sem.vars_.push_back(a.name);
    nodes.push_back(a.name);
  }
  std::set<std::string> indicator_names;
  for (const auto& ind : spec.indicators) {
    if (sem.index_.count(ind.name) || !indicator_names.insert(ind.name).second) {
      throw Error(ErrorKind::DuplicateVariable, "indicator '" + ind.name + "' clashes with another variable");
    }
    if (!sem.index_.count(ind.source)) {
      throw Error(ErrorKind::UnknownVariable, "indicator '" + ind.name + "' reads undefined '" + ind.source + "'");
    }
    nodes.push_back(ind.name);
    edges.emplace_back(ind.source, ind.name);
  }
  const auto k = static_cast<Eigen::Index>(sem.vars_.size());
  sem.coef_ = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t i = 0; i < spec.assignments.size(); ++i) {
    for (const auto& p : spec.assignments[i].parents) {
      sem.coef_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(sem.index_.at(p.var))) = p.coef;
    }
  }
  sem.dag_ = Dag::build(nodes, edges);
  sem.digest_ = spec_digest(spec);
  sem.spec_ = std::move(spec);
  return sem;
}

using Interventions = std::map<std::string, double>;

/// Observations per random substream. Chunk c draws from
/// Xoshiro256(derive_seed(seed, c)); within a chunk, observations are visited
/// in index order and each one takes one normal per assignment in declaration
/// order. Intervened assignments still consume their draw, so do() shares
/// noise with the observational run for the same seed.
inline constexpr std::size_t kGenerationChunk = 4096;

inline Dataset generate_do(const CompiledSem& sem, const Interventions& intervened, std::size_t n,
                           std::uint64_t seed, unsigned threads = 1) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "n must be at least 1");
  const auto& assigns = sem.spec().assignments;
  const std::size_t k = assigns.size();
  std::vector<std::optional<double>> fixed(k);
  for (const auto& [name, value] : intervened) fixed[sem.index_of(name)] = value;

  std::vector<std::vector<std::pair<std::size_t, double>>> parents(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (const auto& p : assigns[i].parents) parents[i].emplace_back(sem.index_of(p.var), p.coef);
  }

  std::vector<std::vector<double>> cols(k, std::vector<double>(n));
  const std::size_t chunks = (n + kGenerationChunk - 1) / kGenerationChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    Xoshiro256 rng(derive_seed(seed, c));
    std::vector<double> row(k);
    const std::size_t end = std::min(n, (c + 1) * kGenerationChunk);
    for (std::size_t obs = c * kGenerationChunk; obs < end; ++obs) {
      for (std::size_t i = 0; i < k; ++i) {
        const auto& a = assigns[i];
        const double e = rng.normal(a.noise.mean, a.noise.sd);
        if (fixed[i]) {
          row[i] = *fixed[i];
          continue;
        }
        double v = a.intercept + e;
        for (const auto& [j, b] : parents[i]) v += b * row[j];
        row[i] = v;
      }
      for (std::size_t i = 0; i < k; ++i) cols[i][obs] = row[i];
    }
  });

  Dataset data(n);
  for (std::size_t i = 0; i < k; ++i) data.add_column(assigns[i].name, std::move(cols[i]));
  for (const auto& ind : sem.spec().indicators) {
    auto src = data.column(ind.source);
    std::vector<double> flag(n);
    for (std::size_t obs = 0; obs < n; ++obs) flag[obs] = ind.fires(src[obs]) ? 1.0 : 0.0;
    data.add_column(ind.name, std::move(flag), true);
  }
  data.set_provenance({seed, sem.digest()});
  return data;
}

inline Dataset generate(const CompiledSem& sem, std::size_t n, std::uint64_t seed, unsigned threads = 1) {
  return generate_do(sem, {}, n, seed, threads);
}

struct ImpliedMoments {
  std::vector<std::string> names;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  Eigen::Index index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorKind::UnknownVariable, "'" + name + "' has no implied moments");
    return it - names.begin();
  }
  double mean_of(const std::string& name) const { return mean(index_of(name)); }
  double covariance(const std::string& a, const std::string& b) const { return cov(index_of(a), index_of(b)); }
  double variance(const std::string& a) const { return covariance(a, a); }
};

/// Exact means and covariances by forward recursion over the assignment
/// order. Intervened variables become constants (zero variance).
inline ImpliedMoments implied_moments(const CompiledSem& sem, const Interventions& intervened = {}) {
  const auto& assigns = sem.spec().assignments;
  const auto k = static_cast<Eigen::Index>(assigns.size());
  for (const auto& [name, _] : intervened) sem.index_of(name);
  const Eigen::MatrixXd& B = sem.coefficients();
  ImpliedMoments m{sem.variables(), Eigen::VectorXd::Zero(k), Eigen::MatrixXd::Zero(k, k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& a = assigns[static_cast<std::size_t>(i)];
    if (auto it = intervened.find(a.name); it != intervened.end()) {
      m.mean(i) = it->second;
      continue;
    }
    const auto row = B.row(i).head(i);
    m.mean(i) = a.intercept + a.noise.mean + row.dot(m.mean.head(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      m.cov(i, j) = m.cov(j, i) = row.dot(m.cov.block(0, j, i, 1).col(0));
    }
    m.cov(i, i) = row * m.cov.topLeftCorner(i, i) * row.transpose() + a.noise.sd * a.noise.sd;
  }
  return m;
}

/// Ordered (name, value) pairs; regression outputs put "(Intercept)" first.
struct Coefficients {
  std::vector<std::string> names;
  Eigen::VectorXd values;

  double at(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw Error(ErrorKind::TermMissing, "no coefficient '" + name + "'");
    return values(it - names.begin());
  }
};

inline constexpr const char* kIntercept = "(Intercept)";

/// Relative singular-value threshold below which a design counts as singular.
inline constexpr double kRankTolerance = 1e-10;

/// Population (n -> infinity) OLS of outcome on regressors plus intercept,
/// solved from the implied second moments.
inline Coefficients population_ols(const CompiledSem& sem, const std::string& outcome,
                                   const std::vector<std::string>& regressors) {
  for (const auto& r : regressors) {
    if (sem.is_indicator(r)) throw Error(ErrorKind::UnknownVariable, "'" + r + "' is an indicator");
  }
  if (sem.is_indicator(outcome)) throw Error(ErrorKind::UnknownVariable, "'" + outcome + "' is an indicator");
  const ImpliedMoments m = implied_moments(sem);
  const auto p = static_cast<Eigen::Index>(regressors.size());
  Eigen::MatrixXd sxx(p, p);
  Eigen::VectorXd sxy(p);
  Eigen::VectorXd mx(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const auto& ri = regressors[static_cast<std::size_t>(i)];
    sxy(i) = m.covariance(ri, outcome);
    mx(i) = m.mean_of(ri);
    for (Eigen::Index j = 0; j < p; ++j) sxx(i, j) = m.covariance(ri, regressors[static_cast<std::size_t>(j)]);
  }
  Coefficients out;
  out.names.push_back(kIntercept);
  out.names.insert(out.names.end(), regressors.begin(), regressors.end());
  out.values.resize(p + 1);
  if (p > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sxx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    if (sv(p - 1) < kRankTolerance * sv(0) || sv(0) == 0.0) {
      throw Error(ErrorKind::SingularDesign, "regressor covariance is rank-deficient");
    }
    const Eigen::VectorXd b = svd.solve(sxy);
    out.values.tail(p) = b;
    out.values(0) = m.mean_of(outcome) - b.dot(mx);
  } else {
    out.values(0) = m.mean_of(outcome);
  }
  return out;
}

}  // namespace collider
