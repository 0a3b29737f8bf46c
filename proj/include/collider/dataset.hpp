#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collider/error.hpp"

namespace collider {

struct Provenance {
  std::uint64_t seed = 0;
  std::string spec_digest;
};

/// Column-oriented table of observations. Indicator columns hold 0/1 values.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::size_t n) : n_(n) {}

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

  bool has(const std::string& name) const { return index_.count(name) > 0; }

  bool is_indicator(const std::string& name) const { return indicator_[require(name)]; }

  void add_column(const std::string& name, std::vector<double> values, bool indicator = false) {
    if (has(name)) throw Error(ErrorKind::DuplicateVariable, "column '" + name + "'");
    if (names_.empty() && n_ == 0) n_ = values.size();
    if (values.size() != n_) {
      throw Error(ErrorKind::InvalidArgument,
                  "column '" + name + "' has " + std::to_string(values.size()) + " rows, expected " +
                      std::to_string(n_));
    }
    if (indicator) {
      for (double v : values) {
        if (v != 0.0 && v != 1.0) {
          throw Error(ErrorKind::NotBinary, "indicator column '" + name + "' holds " + std::to_string(v));
        }
      }
    }
    index_.emplace(name, names_.size());
    names_.push_back(name);
    columns_.push_back(std::move(values));
    indicator_.push_back(indicator);
  }

  std::span<const double> column(const std::string& name) const { return columns_[require(name)]; }

  std::vector<double>& mutable_column(const std::string& name) { return columns_[require(name)]; }

  std::size_t require(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw Error(ErrorKind::UnknownVariable, "no column '" + name + "'");
    return it->second;
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    return a.n_ == b.n_ && a.names_ == b.names_ && a.columns_ == b.columns_ && a.indicator_ == b.indicator_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::vector<double>> columns_;
  std::vector<bool> indicator_;
  Provenance provenance_;
};

/// Formats a real with 17 significant digits, the CSV/report convention.
inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const Dataset& data, std::ostream& out) {
  const auto& names = data.names();
  for (std::size_t j = 0; j < names.size(); ++j) out << (j ? "," : "") << names[j];
  out << '\n';
  std::vector<std::span<const double>> cols;
  for (const auto& n : names) cols.push_back(data.column(n));
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) out << (j ? "," : "") << format_real(cols[j][i]);
    out << '\n';
  }
}

/// Reads a numeric CSV with a header row. Lines starting with '#' are skipped.
inline Dataset read_csv(std::istream& in) {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
    break;
  }
  if (header.empty()) throw Error(ErrorKind::ParseError, "CSV has no header row");
  std::vector<std::vector<double>> cols(header.size());
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t j = 0;
    while (std::getline(ss, cell, ',')) {
      if (j >= cols.size()) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": too many fields");
      try {
        std::size_t used = 0;
        cols[j].push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
      ++j;
    }
    if (j != cols.size()) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": too few fields");
  }
  Dataset data(cols.front().size());
  for (std::size_t j = 0; j < header.size(); ++j) data.add_column(header[j], std::move(cols[j]));
  return data;
}

/// Type-7 quantile (linear interpolation of order statistics) of sorted data.
inline double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

struct Summary {
  std::string name;
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

inline Summary summarize(const std::string& name, std::span<const double> values) {
  if (values.empty()) throw Error(ErrorKind::InsufficientData, "column '" + name + "' is empty");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  Summary s;
  s.name = name;
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  return s;
}

/// Six-number summary of every column, in column order.
inline std::vector<Summary> describe(const Dataset& data) {
  std::vector<Summary> out;
  for (const auto& name : data.names()) out.push_back(summarize(name, data.column(name)));
  return out;
}

inline double median(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, 0.5);
}

/// Ranks starting at 1; tied values share the average of their ranks.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Spearman rank correlations between `vars`, in the given order.
inline Eigen::MatrixXd spearman_matrix(const Dataset& data, const std::vector<std::string>& vars) {
  if (data.rows() < 2) throw Error(ErrorKind::InsufficientData, "need at least two rows");
  std::vector<std::vector<double>> ranks;
  for (const auto& v : vars) {
    auto col = data.column(v);
    if (std::all_of(col.begin(), col.end(), [&](double x) { return x == col.front(); })) {
      throw Error(ErrorKind::ConstantColumn, "'" + v + "' is constant");
    }
    ranks.push_back(average_ranks(col));
  }
  const auto k = static_cast<Eigen::Index>(vars.size());
  Eigen::MatrixXd rho = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) {
      rho(i, j) = rho(j, i) = pearson(ranks[i], ranks[j]);
    }
  }
  return rho;
}

}  // namespace collider
