#pragma once

#include <span>
#include <string_view>

#include "hstream/frontend/ast.hpp"
#include "hstream/frontend/lexer.hpp"

namespace hstream::frontend {

/// Recursive-descent parser for HSTREAM-C.
///
///   program    : item* ;
///   item       : declaration | assignment | directive | function ;
///   function   : 'void' ID '(' ')' '{' (declaration | assignment | directive)* '}' ;
///   declaration: ('int' | 'double') ID ('[' INT ']')? ('=' expr)? ';'
///              | 'stream' '<' ('int' | 'double') '>' ID ';' ;
///   directive  : PRAGMA_HSTREAM clause* PRAGMA_END '{' (declaration | assignment)+ '}' ;
///   clause     : ('in' | 'out' | 'inout') '(' varref (',' varref)* ')'
///              | 'device' '(' ('*' | INT (',' INT)*) ')'
///              | 'scheduling' '(' ('AUTO' | INT | INT ':' INT (',' INT ':' INT)*) ')' ;
///
/// Clauses may repeat and appear in any order; duplicated device or
/// scheduling clauses are left for semantic analysis to reject.
/// Throws DiagnosticError (code SYNTAX) at the first error.
Program parse(std::span<const Token> tokens);

/// lex + parse.
Program parse_source(std::string_view source);

/// Parses a standalone expression (used for kernel bodies built in code).
Expr parse_expression(std::string_view source);

}  // namespace hstream::frontend
