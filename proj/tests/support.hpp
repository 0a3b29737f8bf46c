#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "collider/error.hpp"

#define CHECK_ERROR_KIND(expr, expected_kind)                                          \
  do {                                                                                 \
    bool thrown_ = false;                                                              \
    try {                                                                              \
      (void)(expr);                                                                    \
    } catch (const ::collider::Error& e_) {                                            \
      thrown_ = true;                                                                  \
      CHECK(std::string(e_.name()) == std::string(::collider::error_name(expected_kind))); \
    }                                                                                  \
    CHECK(thrown_);                                                                    \
  } while (0)

inline std::string fixture_path(const std::string& rel) { return std::string(COLLIDER_SOURCE_DIR) + "/" + rel; }

inline std::string read_fixture(const std::string& rel) {
  std::ifstream in(fixture_path(rel), std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
