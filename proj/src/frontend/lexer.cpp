#include "hstream/frontend/lexer.hpp"

#include <array>
#include <cctype>
#include <cstdio>

namespace hstream::frontend {

std::string_view to_string(TokenKind kind) {
  switch (kind) {
    case TokenKind::Identifier:
      return "identifier";
    case TokenKind::IntLiteral:
      return "integer literal";
    case TokenKind::FloatLiteral:
      return "float literal";
    case TokenKind::Keyword:
      return "keyword";
    case TokenKind::Punct:
      return "punctuation";
    case TokenKind::PragmaIntroducer:
      return "pragma";
    case TokenKind::PragmaEnd:
      return "end of pragma line";
    case TokenKind::End:
      return "end of input";
  }
  return "?";
}

namespace {

constexpr std::array<std::string_view, 4> kKeywords = {"int", "double", "stream", "void"};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (!at_end()) {
      const char c = peek();
      if (c == '\n') {
        end_pragma_if_open();
        advance();
        line_has_token_ = false;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        advance();
      } else if (c == '\\' && in_pragma_ && continuation_follows()) {
        advance();
        while (peek() != '\n') advance();
        advance();
      } else if (c == '/' && peek(1) == '/') {
        while (!at_end() && peek() != '\n') advance();
      } else if (c == '/' && peek(1) == '*') {
        block_comment();
      } else if (c == '#') {
        pragma_introducer();
      } else if (ident_start(c)) {
        identifier();
      } else if (digit(c) || (c == '.' && digit(peek(1)))) {
        number();
      } else if (std::string_view("=+-*/(){}[];,:<>").find(c) != std::string_view::npos) {
        emit(TokenKind::Punct, std::string(1, c), line_, col_);
        advance();
      } else {
        char shown[16];
        if (std::isprint(static_cast<unsigned char>(c))) {
          std::snprintf(shown, sizeof shown, "'%c'", c);
        } else {
          std::snprintf(shown, sizeof shown, "0x%02X", static_cast<unsigned char>(c));
        }
        fail(line_, col_, std::string("illegal character ") + shown);
      }
    }
    end_pragma_if_open();
    return std::move(tokens_);
  }

 private:
  [[noreturn]] void fail(int line, int col, std::string message) {
    throw DiagnosticError(Diagnostic{std::string(codes::kLex), std::move(message), {line, col}});
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void emit(TokenKind kind, std::string lexeme, int line, int col) {
    tokens_.push_back(Token{kind, std::move(lexeme), line, col});
    line_has_token_ = true;
  }

  void end_pragma_if_open() {
    if (!in_pragma_) return;
    tokens_.push_back(Token{TokenKind::PragmaEnd, "", line_, col_});
    in_pragma_ = false;
  }

  // Backslash followed only by horizontal whitespace up to a newline.
  bool continuation_follows() const {
    std::size_t i = pos_ + 1;
    while (i < src_.size() && (src_[i] == ' ' || src_[i] == '\t' || src_[i] == '\r')) ++i;
    return i < src_.size() && src_[i] == '\n';
  }

  void block_comment() {
    const int line = line_, col = col_;
    advance();
    advance();
    while (!at_end() && !(peek() == '*' && peek(1) == '/')) advance();
    if (at_end()) fail(line, col, "unterminated block comment");
    advance();
    advance();
  }

  void pragma_introducer() {
    const int line = line_, col = col_;
    if (line_has_token_ || in_pragma_) fail(line, col, "'#' must start a line");
    advance();
    auto skip_blanks = [&] {
      while (peek() == ' ' || peek() == '\t') advance();
    };
    auto word = [&] {
      std::string w;
      while (ident_char(peek())) {
        w += peek();
        advance();
      }
      return w;
    };
    skip_blanks();
    const std::string directive = word();
    if (directive != "pragma") {
      fail(line, col, directive.empty() ? "stray '#'" : "unsupported preprocessor directive '#" + directive + "'");
    }
    skip_blanks();
    const std::string name = word();
    if (name != "hstream") {
      fail(line, col, name.empty() ? "malformed pragma" : "unsupported pragma '" + name + "'");
    }
    emit(TokenKind::PragmaIntroducer, "#pragma hstream", line, col);
    in_pragma_ = true;
  }

  void identifier() {
    const int line = line_, col = col_;
    std::string text;
    while (ident_char(peek())) {
      text += peek();
      advance();
    }
    bool keyword = false;
    for (auto kw : kKeywords) keyword = keyword || kw == text;
    emit(keyword ? TokenKind::Keyword : TokenKind::Identifier, std::move(text), line, col);
  }

  void number() {
    const int line = line_, col = col_;
    std::string text;
    bool is_float = false;
    auto digits = [&] {
      while (digit(peek())) {
        text += peek();
        advance();
      }
    };
    digits();
    if (peek() == '.') {
      is_float = true;
      text += '.';
      advance();
      digits();
    }
    if (peek() == 'e' || peek() == 'E') {
      const char sign = peek(1);
      const bool has_sign = sign == '+' || sign == '-';
      if (digit(peek(has_sign ? 2 : 1))) {
        is_float = true;
        text += peek();
        advance();
        if (has_sign) {
          text += peek();
          advance();
        }
        digits();
      }
    }
    if (ident_char(peek()) || peek() == '.') fail(line_, col_, "malformed number '" + text + peek() + "'");
    emit(is_float ? TokenKind::FloatLiteral : TokenKind::IntLiteral, std::move(text), line, col);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  bool in_pragma_ = false;
  bool line_has_token_ = false;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> lex(std::string_view source) { return Lexer(source).run(); }

}  // namespace hstream::frontend
