#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hstream/frontend/diagnostic.hpp"
#include "hstream/selectors.hpp"

namespace hstream::frontend {

enum class ScalarType { Int, Double };
enum class Shape { Scalar, Array, Stream };

std::string_view to_string(ScalarType t);
std::string_view to_string(Shape s);

/// Expression tree over + - * /, unary minus, parentheses, names and numbers.
/// `type` is filled in by semantic analysis.
struct Expr {
  enum class Kind { Number, Name, Binary, Negate, Paren };

  Kind kind = Kind::Number;
  std::string text;  // number lexeme or identifier
  char op = 0;       // Binary only: one of + - * /
  std::vector<Expr> operands;
  ScalarType type = ScalarType::Double;
  SourceLoc loc;

  static Expr number(std::string lexeme, SourceLoc loc = {});
  static Expr name(std::string id, SourceLoc loc = {});
  static Expr binary(char op, Expr lhs, Expr rhs, SourceLoc loc = {});
  static Expr negate(Expr operand, SourceLoc loc = {});
  static Expr paren(Expr inner, SourceLoc loc = {});

  bool is_float_literal() const;
};

struct Declaration {
  std::string name;
  ScalarType type = ScalarType::Double;
  Shape shape = Shape::Scalar;
  std::int64_t size = 0;  // arrays only
  std::optional<Expr> init;
  SourceLoc loc;
};

struct Assignment {
  std::string target;
  Expr value;
  SourceLoc loc;
};

/// One entry of an in/out/inout clause. Streams are written `name:type`.
struct ClauseVar {
  std::string name;
  std::optional<ScalarType> stream_type;
  SourceLoc loc;
};

struct Clause {
  enum class Kind { In, Out, InOut, Device, Scheduling };

  Kind kind = Kind::In;
  std::vector<ClauseVar> vars;  // In / Out / InOut
  DeviceSelector device;        // Device
  SchedulingSpec scheduling;    // Scheduling
  SourceLoc loc;
};

std::string_view to_string(Clause::Kind kind);

struct Statement;

struct Directive {
  std::vector<Clause> clauses;
  std::vector<Statement> body;  // declarations and assignments only
  SourceLoc loc;
};

/// `void name() { ... }` -- a named scope holding declarations, assignments
/// and directives. The name labels the kernels generated from its directives.
struct Function {
  std::string name;
  std::vector<Statement> body;
  SourceLoc loc;
};

struct Statement {
  std::variant<Declaration, Assignment, Directive, Function> node;

  SourceLoc loc() const;
};

struct Program {
  std::vector<Statement> items;
};

}  // namespace hstream::frontend
