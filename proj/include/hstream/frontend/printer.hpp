#pragma once

#include <functional>
#include <string>

#include "hstream/frontend/ast.hpp"

namespace hstream::frontend {

using NameRenderer = std::function<std::string(const std::string&)>;

/// Renders an expression as C source without spaces around operators
/// (`b+scalar*c`). Parentheses are kept where the tree has them and added
/// wherever the tree shape would otherwise be lost on re-parsing, including
/// same-precedence right operands, so the printed text re-parses to the
/// same evaluation order. `rename` maps identifiers (e.g. to `b[i]`).
std::string print_expr(const Expr& e, const NameRenderer& rename = {});

/// Canonical HSTREAM-C source for a program.
std::string print_program(const Program& program);

/// Position-free structural dump; equal dumps mean structurally equal ASTs.
std::string dump(const Program& program);
std::string dump(const Expr& e);

}  // namespace hstream::frontend
