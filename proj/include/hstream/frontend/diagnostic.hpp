#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hstream::frontend {

struct SourceLoc {
  int line = 0;
  int column = 0;

  friend auto operator<=>(const SourceLoc&, const SourceLoc&) = default;
};

// Stable diagnostic codes, printed as `error[<CODE>]`.
namespace codes {
inline constexpr std::string_view kLex = "LEX";
inline constexpr std::string_view kSyntax = "SYNTAX";
inline constexpr std::string_view kDupDevice = "DUP_DEVICE";
inline constexpr std::string_view kDupScheduling = "DUP_SCHEDULING";
inline constexpr std::string_view kUndeclared = "UNDECLARED";
inline constexpr std::string_view kTypeMismatch = "TYPE_MISMATCH";
inline constexpr std::string_view kDupDeclaration = "DUP_DECLARATION";
inline constexpr std::string_view kOutOfScope = "OUT_OF_SCOPE";
inline constexpr std::string_view kNotInClause = "NOT_IN_CLAUSE";
inline constexpr std::string_view kBadClauseRef = "BAD_CLAUSE_REF";
inline constexpr std::string_view kInvalidTarget = "INVALID_TARGET";
inline constexpr std::string_view kShapeMismatch = "SHAPE_MISMATCH";
inline constexpr std::string_view kUninitialized = "UNINITIALIZED";
inline constexpr std::string_view kBadScheduling = "BAD_SCHEDULING";
inline constexpr std::string_view kBadDevice = "BAD_DEVICE";
inline constexpr std::string_view kInvalidLocal = "INVALID_LOCAL";
inline constexpr std::string_view kDivisionByZero = "DIVISION_BY_ZERO";
inline constexpr std::string_view kUnknownDevice = "UNKNOWN_DEVICE";
}  // namespace codes

struct Diagnostic {
  std::string code;
  std::string message;
  SourceLoc loc;
};

/// `<file>:<line>:<col>: error[<CODE>]: <message>`
std::string format_diagnostic(std::string_view file, const Diagnostic& d);

/// Thrown by the lexer and parser; both stop at the first error.
class DiagnosticError : public std::runtime_error {
 public:
  explicit DiagnosticError(Diagnostic d);
  const Diagnostic& diagnostic() const { return diag_; }

 private:
  Diagnostic diag_;
};

void sort_diagnostics(std::vector<Diagnostic>& diags);

}  // namespace hstream::frontend
