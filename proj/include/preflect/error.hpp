#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace preflect {

enum class ErrorKind {
  UnbalancedBrackets,
  EmptyNode,
  LeafUnderNonPOSNode,
  FormatError,
  InvariantViolation,
  BadArrow,
  MappingNotBijective,
  MappingSlotMismatch,
  SymbolMultisetMismatch,
  AmbiguousMapping,
  DuplicateSourcePattern,
  BadCompoundRule,
  DanglingTarget,
  PermutationMismatch,
  LengthMismatch,
  EmptyCorpus,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnbalancedBrackets: return "UnbalancedBrackets";
    case ErrorKind::EmptyNode: return "EmptyNode";
    case ErrorKind::LeafUnderNonPOSNode: return "LeafUnderNonPOSNode";
    case ErrorKind::FormatError: return "FormatError";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::BadArrow: return "BadArrow";
    case ErrorKind::MappingNotBijective: return "MappingNotBijective";
    case ErrorKind::MappingSlotMismatch: return "MappingSlotMismatch";
    case ErrorKind::SymbolMultisetMismatch: return "SymbolMultisetMismatch";
    case ErrorKind::AmbiguousMapping: return "AmbiguousMapping";
    case ErrorKind::DuplicateSourcePattern: return "DuplicateSourcePattern";
    case ErrorKind::BadCompoundRule: return "BadCompoundRule";
    case ErrorKind::DanglingTarget: return "DanglingTarget";
    case ErrorKind::PermutationMismatch: return "PermutationMismatch";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
  }
  return "Unknown";
}

// Every failure raised by the library. `line` is 1-based when the error
// refers to a position in a text input, 0 otherwise.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::size_t line = 0)
      : std::runtime_error(format(kind, message, line)), kind_(kind), line_(line) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(ErrorKind kind, const std::string& message, std::size_t line) {
    std::string out(to_string(kind));
    if (line != 0) out += " (line " + std::to_string(line) + ")";
    out += ": ";
    out += message;
    return out;
  }

  ErrorKind kind_;
  std::size_t line_;
};

}  // namespace preflect
