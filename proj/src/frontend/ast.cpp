#include "hstream/frontend/ast.hpp"

namespace hstream::frontend {

std::string_view to_string(ScalarType t) { return t == ScalarType::Int ? "int" : "double"; }

std::string_view to_string(Shape s) {
  switch (s) {
    case Shape::Scalar:
      return "scalar";
    case Shape::Array:
      return "array";
    case Shape::Stream:
      return "stream";
  }
  return "?";
}

std::string_view to_string(Clause::Kind kind) {
  switch (kind) {
    case Clause::Kind::In:
      return "in";
    case Clause::Kind::Out:
      return "out";
    case Clause::Kind::InOut:
      return "inout";
    case Clause::Kind::Device:
      return "device";
    case Clause::Kind::Scheduling:
      return "scheduling";
  }
  return "?";
}

Expr Expr::number(std::string lexeme, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Number;
  e.text = std::move(lexeme);
  e.loc = loc;
  return e;
}

Expr Expr::name(std::string id, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Name;
  e.text = std::move(id);
  e.loc = loc;
  return e;
}

Expr Expr::binary(char op, Expr lhs, Expr rhs, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Binary;
  e.op = op;
  e.operands.reserve(2);
  e.operands.push_back(std::move(lhs));
  e.operands.push_back(std::move(rhs));
  e.loc = loc;
  return e;
}

Expr Expr::negate(Expr operand, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Negate;
  e.operands.push_back(std::move(operand));
  e.loc = loc;
  return e;
}

Expr Expr::paren(Expr inner, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Paren;
  e.operands.push_back(std::move(inner));
  e.loc = loc;
  return e;
}

bool Expr::is_float_literal() const {
  return kind == Kind::Number && text.find_first_of(".eE") != std::string::npos;
}

SourceLoc Statement::loc() const {
  return std::visit([](const auto& n) { return n.loc; }, node);
}

}  // namespace hstream::frontend
