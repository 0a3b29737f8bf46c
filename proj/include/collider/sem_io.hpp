#pragma once

// SEM spec files. Two encodings share one schema:
//
//   [[assign]]
//   name = "A"
//   intercept = 0.0
//   parents = [{var = "W", coef = 0.5}]
//   noise = {mean = 0.0, sd = 1.0}
//
//   [[indicator]]
//   name = "high"
//   source = "A"
//   cutoff = 1.0
//   op = "gt"          # or "ge"
//
// and a JSON mirror {"assign": [...], "indicator": [...]}. Only the TOML subset
// above is understood: bare keys, strings, numbers, booleans, arrays, inline
// tables and array-of-table headers.

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "collider/error.hpp"
#include "collider/sem.hpp"

namespace collider {

namespace detail {

class TomlSubsetParser {
 public:
  explicit TomlSubsetParser(std::string text) : text_(std::move(text)) {}

  /// Returns the document plus the line on which each array-of-tables block opened.
  nlohmann::json parse(std::map<std::string, std::vector<std::size_t>>& block_lines) {
    nlohmann::json doc = nlohmann::json::object();
    nlohmann::json* table = &doc;
    while (true) {
      skip_blank_lines();
      if (at_end()) break;
      if (peek() == '[') {
        if (text_.compare(pos_, 2, "[[") != 0) fail("only [[array]] table headers are supported");
        const std::size_t header_line = line_;
        pos_ += 2;
        skip_inline_space();
        const std::string key = bare_key();
        skip_inline_space();
        if (text_.compare(pos_, 2, "]]") != 0) fail("expected ']]'");
        pos_ += 2;
        end_of_line();
        auto& arr = doc[key];
        if (arr.is_null()) arr = nlohmann::json::array();
        if (!arr.is_array()) fail("'" + key + "' is not an array of tables");
        arr.push_back(nlohmann::json::object());
        table = &arr.back();
        block_lines[key].push_back(header_line);
        continue;
      }
      const std::string key = bare_key();
      skip_inline_space();
      expect('=');
      skip_inline_space();
      if (table->contains(key)) fail("duplicate key '" + key + "'");
      (*table)[key] = value();
      end_of_line();
    }
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorKind::ParseError, "line " + std::to_string(line_) + ": " + msg);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void advance() {
    if (peek() == '\n') ++line_;
    ++pos_;
  }

  void skip_inline_space() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
  }

  void skip_blank_lines() {
    while (true) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }

  // Whitespace, newlines and comments inside arrays and inline tables.
  void skip_any_space() {
    while (true) {
      skip_inline_space();
      skip_comment();
      if (peek() == '\n') {
        advance();
        continue;
      }
      return;
    }
  }

  void end_of_line() {
    skip_inline_space();
    skip_comment();
    if (at_end()) return;
    if (peek() != '\n') fail(std::string("unexpected '") + peek() + "'");
    advance();
  }

  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  std::string bare_key() {
    std::string key;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) {
      key += peek();
      advance();
    }
    if (key.empty()) fail("expected a key");
    return key;
  }

  nlohmann::json value() {
    const char c = peek();
    if (c == '"') return string_value();
    if (c == '[') return array_value();
    if (c == '{') return inline_table();
    if (text_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      return true;
    }
    if (text_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      return false;
    }
    return number_value();
  }

  nlohmann::json string_value() {
    expect('"');
    std::string out;
    while (peek() != '"') {
      if (at_end() || peek() == '\n') fail("unterminated string");
      if (peek() == '\\') {
        advance();
        const char e = peek();
        if (e == 'n') out += '\n';
        else if (e == 't') out += '\t';
        else if (e == '"' || e == '\\') out += e;
        else fail("unsupported escape");
      } else {
        out += peek();
      }
      advance();
    }
    advance();
    return out;
  }

  nlohmann::json number_value() {
    std::string tok;
    while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                         peek() == '.' || peek() == '_')) {
      if (peek() != '_') tok += peek();
      advance();
    }
    if (tok.empty()) fail("expected a value");
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail("bad number '" + tok + "'");
    }
  }

  nlohmann::json array_value() {
    expect('[');
    nlohmann::json arr = nlohmann::json::array();
    skip_any_space();
    while (peek() != ']') {
      arr.push_back(value());
      skip_any_space();
      if (peek() == ',') {
        advance();
        skip_any_space();
      } else if (peek() != ']') {
        fail("expected ',' or ']'");
      }
    }
    advance();
    return arr;
  }

  nlohmann::json inline_table() {
    expect('{');
    nlohmann::json obj = nlohmann::json::object();
    skip_inline_space();
    while (peek() != '}') {
      const std::string key = bare_key();
      skip_inline_space();
      expect('=');
      skip_inline_space();
      obj[key] = value();
      skip_inline_space();
      if (peek() == ',') {
        advance();
        skip_inline_space();
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    advance();
    return obj;
  }

  std::string text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

inline double number_field(const nlohmann::json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw Error(ErrorKind::ParseError, where + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline std::string string_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_string()) {
    throw Error(ErrorKind::ParseError, where + ": missing string '" + key + "'");
  }
  return obj.at(key).get<std::string>();
}

}  // namespace detail

/// Converts the shared document schema to a SemSpec. `where` labels blocks in
/// error messages, e.g. "line 12" or "assign[2]".
inline SemSpec spec_from_document(const nlohmann::json& doc,
                                  const std::map<std::string, std::vector<std::size_t>>& block_lines = {}) {
  auto label = [&](const char* section, std::size_t i) {
    auto it = block_lines.find(section);
    if (it != block_lines.end() && i < it->second.size()) return "line " + std::to_string(it->second[i]);
    return std::string(section) + "[" + std::to_string(i) + "]";
  };
  if (!doc.is_object()) throw Error(ErrorKind::ParseError, "spec must be a table/object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "assign" && key != "indicator") throw Error(ErrorKind::ParseError, "unknown section '" + key + "'");
  }
  SemSpec spec;
  if (doc.contains("assign")) {
    const auto& arr = doc.at("assign");
    if (!arr.is_array()) throw Error(ErrorKind::ParseError, "'assign' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& obj = arr[i];
      const std::string where = label("assign", i);
      if (!obj.is_object()) throw Error(ErrorKind::ParseError, where + ": assign entry must be a table");
      Assignment a;
      a.name = detail::string_field(obj, "name", where);
      a.intercept = detail::number_field(obj, "intercept", 0.0, where);
      if (obj.contains("parents")) {
        if (!obj.at("parents").is_array()) throw Error(ErrorKind::ParseError, where + ": 'parents' must be an array");
        for (const auto& p : obj.at("parents")) {
          if (!p.is_object()) throw Error(ErrorKind::ParseError, where + ": parent entry must be a table");
          a.parents.push_back({detail::string_field(p, "var", where), detail::number_field(p, "coef", 0.0, where)});
        }
      }
      if (obj.contains("noise")) {
        const auto& nz = obj.at("noise");
        if (!nz.is_object()) throw Error(ErrorKind::ParseError, where + ": 'noise' must be a table");
        a.noise = {detail::number_field(nz, "mean", 0.0, where), detail::number_field(nz, "sd", 1.0, where)};
      }
      spec.assignments.push_back(std::move(a));
    }
  }
  if (doc.contains("indicator")) {
    const auto& arr = doc.at("indicator");
    if (!arr.is_array()) throw Error(ErrorKind::ParseError, "'indicator' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const auto& obj = arr[i];
      const std::string where = label("indicator", i);
      Indicator ind;
      ind.name = detail::string_field(obj, "name", where);
      ind.source = detail::string_field(obj, "source", where);
      ind.cutoff = detail::number_field(obj, "cutoff", 0.0, where);
      const std::string op = obj.contains("op") ? detail::string_field(obj, "op", where) : "gt";
      if (op == "gt") ind.op = Comparison::Greater;
      else if (op == "ge") ind.op = Comparison::GreaterEqual;
      else throw Error(ErrorKind::ParseError, where + ": op must be \"gt\" or \"ge\"");
      spec.indicators.push_back(std::move(ind));
    }
  }

  // Re-run validation block by block so semantic errors point at their block.
  for (std::size_t i = 0; i < spec.assignments.size(); ++i) {
    SemSpec prefix;
    prefix.assignments.assign(spec.assignments.begin(), spec.assignments.begin() + static_cast<long>(i) + 1);
    try {
      compile(prefix);
    } catch (const Error& e) {
      throw Error(e.kind(), label("assign", i) + ": " + e.message());
    }
  }
  for (std::size_t i = 0; i < spec.indicators.size(); ++i) {
    SemSpec prefix{spec.assignments, {spec.indicators.begin(), spec.indicators.begin() + static_cast<long>(i) + 1}};
    try {
      compile(prefix);
    } catch (const Error& e) {
      throw Error(e.kind(), label("indicator", i) + ": " + e.message());
    }
  }
  return spec;
}

/// Parses either encoding; text whose first non-blank character is '{' is JSON.
inline SemSpec parse_sem_spec(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorKind::ParseError, e.what());
    }
    return spec_from_document(doc);
  }
  std::map<std::string, std::vector<std::size_t>> lines;
  const nlohmann::json doc = detail::TomlSubsetParser(text).parse(lines);
  return spec_from_document(doc, lines);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline SemSpec load_sem_spec(const std::string& path) { return parse_sem_spec(read_text_file(path)); }

/// JSON mirror of a spec, the inverse of spec_from_document.
inline nlohmann::json spec_to_json(const SemSpec& spec) {
  nlohmann::json doc = {{"assign", nlohmann::json::array()}, {"indicator", nlohmann::json::array()}};
  for (const auto& a : spec.assignments) {
    nlohmann::json parents = nlohmann::json::array();
    for (const auto& p : a.parents) parents.push_back({{"var", p.var}, {"coef", p.coef}});
    doc["assign"].push_back({{"name", a.name},
                             {"intercept", a.intercept},
                             {"parents", parents},
                             {"noise", {{"mean", a.noise.mean}, {"sd", a.noise.sd}}}});
  }
  for (const auto& i : spec.indicators) {
    doc["indicator"].push_back({{"name", i.name},
                                {"source", i.source},
                                {"cutoff", i.cutoff},
                                {"op", i.op == Comparison::Greater ? "gt" : "ge"}});
  }
  return doc;
}

}  // namespace collider
