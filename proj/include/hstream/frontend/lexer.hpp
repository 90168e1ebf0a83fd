#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hstream/frontend/diagnostic.hpp"

namespace hstream::frontend {

enum class TokenKind {
  Identifier,
  IntLiteral,
  FloatLiteral,
  Keyword,          // int double stream void
  Punct,
  PragmaIntroducer, // `#pragma hstream`
  PragmaEnd,        // end of the (possibly continued) pragma line
  End,              // synthesized by the parser, never produced by lex()
};

std::string_view to_string(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::End;
  std::string lexeme;
  int line = 1;
  int column = 1;

  SourceLoc loc() const { return {line, column}; }
  bool is(TokenKind k, std::string_view text) const { return kind == k && lexeme == text; }
  bool is_punct(std::string_view text) const { return is(TokenKind::Punct, text); }

  friend bool operator==(const Token&, const Token&) = default;
};

/// Splits HSTREAM-C source into tokens. Comments and whitespace are dropped.
/// A `#pragma hstream` line yields a PragmaIntroducer, its clause tokens and
/// a PragmaEnd; a backslash at end of line continues the pragma. No End
/// token is appended. Throws DiagnosticError (code LEX).
std::vector<Token> lex(std::string_view source);

}  // namespace hstream::frontend
