#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "collider/error.hpp"

namespace collider {

namespace detail {
inline double parse_real(const std::string& tok, const std::string& spec) {
  try {
    std::size_t used = 0;
    const double v = std::stod(tok, &used);
    if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::ParseError, "bad number '" + tok + "' in grid '" + spec + "'");
  }
}
}  // namespace detail

/// Parses "a,b,c" lists or "start:end[:step]" ranges (step defaults to 1,
/// end inclusive).
inline std::vector<double> parse_grid(const std::string& spec) {
  if (spec.empty()) throw Error(ErrorKind::ParseError, "empty grid");
  std::vector<double> out;
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ':')) parts.push_back(tok);
    if (parts.size() < 2 || parts.size() > 3) throw Error(ErrorKind::ParseError, "range must be start:end[:step]");
    const double start = detail::parse_real(parts[0], spec);
    const double end = detail::parse_real(parts[1], spec);
    const double step = parts.size() == 3 ? detail::parse_real(parts[2], spec) : 1.0;
    if (!(step > 0.0)) throw Error(ErrorKind::ParseError, "range step must be positive");
    if (end < start) throw Error(ErrorKind::ParseError, "range end precedes start");
    const double count = std::floor((end - start) / step + 1e-9);
    if (count > 1e6) throw Error(ErrorKind::ParseError, "range too long");
    for (long k = 0; k <= static_cast<long>(count); ++k) out.push_back(start + static_cast<double>(k) * step);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(detail::parse_real(tok, spec));
  if (out.empty()) throw Error(ErrorKind::ParseError, "empty grid");
  return out;
}

}  // namespace collider
