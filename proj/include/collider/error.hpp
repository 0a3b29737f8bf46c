#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace collider {

enum class ErrorKind {
  CycleError,
  DuplicateEdge,
  UnknownNode,
  NodeNotOnPath,
  ForwardReference,
  DuplicateVariable,
  NegativeSd,
  UnknownVariable,
  SingularDesign,
  ConstantColumn,
  RankDeficient,
  InsufficientData,
  PerfectFit,
  Separation,
  NotBinary,
  UnknownRegressor,
  TermMissing,
  NoRoot,
  InvalidArgument,
  ParseError,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::CycleError: return "CycleError";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::UnknownNode: return "UnknownNode";
    case ErrorKind::NodeNotOnPath: return "NodeNotOnPath";
    case ErrorKind::ForwardReference: return "ForwardReference";
    case ErrorKind::DuplicateVariable: return "DuplicateVariable";
    case ErrorKind::NegativeSd: return "NegativeSd";
    case ErrorKind::UnknownVariable: return "UnknownVariable";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::ConstantColumn: return "ConstantColumn";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::PerfectFit: return "PerfectFit";
    case ErrorKind::Separation: return "Separation";
    case ErrorKind::NotBinary: return "NotBinary";
    case ErrorKind::UnknownRegressor: return "UnknownRegressor";
    case ErrorKind::TermMissing: return "TermMissing";
    case ErrorKind::NoRoot: return "NoRoot";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Error";
}

/// Every failure raised by the library carries one of the ErrorKind tags so
/// callers (CLI exit codes, HTTP status mapping) can dispatch on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_name(kind)) + ": " + message), kind_(kind), message_(message) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }
  /// The message without the leading kind tag.
  const std::string& message() const noexcept { return message_; }

 private:
  ErrorKind kind_;
  std::string message_;
};

}  // namespace collider
