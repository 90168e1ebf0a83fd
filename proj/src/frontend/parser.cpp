#include "hstream/frontend/parser.hpp"

#include <charconv>
#include <limits>
#include <set>

namespace hstream::frontend {

namespace {

class Parser {
 public:
  explicit Parser(std::span<const Token> tokens) : tokens_(tokens) {
    end_.kind = TokenKind::End;
    if (!tokens.empty()) {
      end_.line = tokens.back().line;
      end_.column = tokens.back().column + static_cast<int>(tokens.back().lexeme.size());
    }
  }

  Program program() {
    Program prog;
    while (!at(TokenKind::End)) prog.items.push_back(top_level_item());
    return prog;
  }

  Expr standalone_expression() {
    Expr e = expression();
    if (!at(TokenKind::End)) fail(peek(), "unexpected " + describe(peek()) + " after expression");
    return e;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return pos_ + ahead < tokens_.size() ? tokens_[pos_ + ahead] : end_;
  }
  bool at(TokenKind kind) const { return peek().kind == kind; }
  bool at_punct(std::string_view p) const { return peek().is_punct(p); }
  bool at_ident(std::string_view word) const { return peek().is(TokenKind::Identifier, word); }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < tokens_.size()) ++pos_;
    return t;
  }

  static std::string describe(const Token& t) {
    switch (t.kind) {
      case TokenKind::End:
        return "end of input";
      case TokenKind::PragmaEnd:
        return "end of pragma line";
      case TokenKind::PragmaIntroducer:
        return "'#pragma hstream'";
      default:
        return "'" + t.lexeme + "'";
    }
  }

  [[noreturn]] void fail(const Token& at, std::string message) const {
    throw DiagnosticError(Diagnostic{std::string(codes::kSyntax), std::move(message), at.loc()});
  }

  const Token& expect_punct(std::string_view p, std::string_view context) {
    if (!at_punct(p)) fail(peek(), "expected '" + std::string(p) + "' " + std::string(context) + ", got " + describe(peek()));
    return next();
  }

  const Token& expect_identifier(std::string_view context) {
    if (!at(TokenKind::Identifier)) fail(peek(), "expected identifier " + std::string(context) + ", got " + describe(peek()));
    return next();
  }

  std::uint64_t integer(std::string_view context) {
    if (!at(TokenKind::IntLiteral)) fail(peek(), "expected integer " + std::string(context) + ", got " + describe(peek()));
    const Token& t = next();
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.lexeme.data(), t.lexeme.data() + t.lexeme.size(), v);
    if (ec != std::errc{} || ptr != t.lexeme.data() + t.lexeme.size()) fail(t, "integer '" + t.lexeme + "' out of range");
    return v;
  }

  bool at_type_keyword() const {
    return peek().is(TokenKind::Keyword, "int") || peek().is(TokenKind::Keyword, "double");
  }

  ScalarType type_keyword() {
    const Token& t = next();
    return t.lexeme == "int" ? ScalarType::Int : ScalarType::Double;
  }

  Statement top_level_item() {
    if (peek().is(TokenKind::Keyword, "void")) return Statement{function()};
    return function_item();
  }

  Statement function_item() {
    if (at(TokenKind::PragmaIntroducer)) return Statement{directive()};
    return body_item();
  }

  Statement body_item() {
    if (at_type_keyword() || peek().is(TokenKind::Keyword, "stream")) return Statement{declaration()};
    if (at(TokenKind::Identifier)) return Statement{assignment()};
    if (at(TokenKind::PragmaIntroducer)) fail(peek(), "directives cannot be nested");
    if (peek().is(TokenKind::Keyword, "void")) fail(peek(), "functions can only be defined at top level");
    fail(peek(), "expected a declaration, assignment or directive, got " + describe(peek()));
  }

  Function function() {
    Function fn;
    fn.loc = next().loc();  // void
    fn.name = expect_identifier("after 'void'").lexeme;
    expect_punct("(", "after function name");
    expect_punct(")", "(functions take no parameters)");
    const Token& open = expect_punct("{", "to open function body");
    while (!at_punct("}")) {
      if (at(TokenKind::End)) fail(open, "unclosed block: '{' is never closed");
      fn.body.push_back(function_item());
    }
    next();
    return fn;
  }

  Declaration declaration() {
    Declaration decl;
    decl.loc = peek().loc();
    if (peek().is(TokenKind::Keyword, "stream")) {
      next();
      expect_punct("<", "after 'stream'");
      if (!at_type_keyword()) fail(peek(), "expected element type 'int' or 'double', got " + describe(peek()));
      decl.type = type_keyword();
      expect_punct(">", "to close stream element type");
      decl.shape = Shape::Stream;
      decl.name = expect_identifier("in stream declaration").lexeme;
      if (at_punct("=")) fail(peek(), "stream declarations cannot have initializers");
      expect_punct(";", "after declaration");
      return decl;
    }
    decl.type = type_keyword();
    decl.name = expect_identifier("in declaration").lexeme;
    if (at_punct("[")) {
      next();
      const Token& size_tok = peek();
      const auto size = integer("as array size");
      if (size == 0 || size > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max())) {
        fail(size_tok, "array size must be positive");
      }
      decl.size = static_cast<std::int64_t>(size);
      decl.shape = Shape::Array;
      expect_punct("]", "to close array size");
    }
    if (at_punct("=")) {
      if (decl.shape == Shape::Array) fail(peek(), "array declarations cannot have initializers");
      next();
      decl.init = expression();
    }
    expect_punct(";", "after declaration");
    return decl;
  }

  Assignment assignment() {
    Assignment a;
    const Token& target = next();
    a.target = target.lexeme;
    a.loc = target.loc();
    if (at_punct("[")) fail(peek(), "subscripts are implicit; write '" + a.target + "' instead of indexing it");
    expect_punct("=", "in assignment");
    a.value = expression();
    expect_punct(";", "after assignment");
    return a;
  }

  Directive directive() {
    Directive d;
    d.loc = next().loc();  // #pragma hstream
    while (!at(TokenKind::PragmaEnd)) d.clauses.push_back(clause());
    next();
    const Token& open = expect_punct("{", "to open directive body");
    while (!at_punct("}")) {
      if (at(TokenKind::End)) fail(open, "unclosed block: '{' is never closed");
      d.body.push_back(body_item());
    }
    if (d.body.empty()) fail(peek(), "directive body is empty");
    next();
    return d;
  }

  Clause clause() {
    const Token& head = peek();
    if (head.kind != TokenKind::Identifier) fail(head, "expected a clause (in, out, inout, device, scheduling), got " + describe(head));
    Clause c;
    c.loc = head.loc();
    const std::string name = head.lexeme;
    if (name == "in" || name == "out" || name == "inout") {
      next();
      c.kind = name == "in" ? Clause::Kind::In : name == "out" ? Clause::Kind::Out : Clause::Kind::InOut;
      expect_punct("(", "after '" + name + "'");
      do {
        c.vars.push_back(clause_var());
      } while (at_punct(",") && (next(), true));
      expect_punct(")", "to close " + name + " clause");
    } else if (name == "device") {
      next();
      c.kind = Clause::Kind::Device;
      expect_punct("(", "after 'device'");
      if (at_punct("*")) {
        next();
        c.device = DeviceSelector::all();
      } else {
        std::vector<PuId> ids;
        do {
          ids.push_back(device_id());
        } while (at_punct(",") && (next(), true));
        c.device = DeviceSelector::ids(std::move(ids));
      }
      expect_punct(")", "to close device clause");
    } else if (name == "scheduling") {
      next();
      c.kind = Clause::Kind::Scheduling;
      expect_punct("(", "after 'scheduling'");
      c.scheduling = scheduling_args();
      expect_punct(")", "to close scheduling clause");
    } else {
      fail(head, "unknown clause '" + name + "'");
    }
    return c;
  }

  ClauseVar clause_var() {
    ClauseVar v;
    const Token& id = expect_identifier("in clause");
    v.name = id.lexeme;
    v.loc = id.loc();
    if (at_punct(":")) {
      next();
      if (!at_type_keyword()) fail(peek(), "expected stream element type after ':', got " + describe(peek()));
      v.stream_type = type_keyword();
    }
    return v;
  }

  PuId device_id() {
    const Token& t = peek();
    const auto v = integer("as device id");
    if (v > std::numeric_limits<PuId>::max()) fail(t, "device id out of range");
    return static_cast<PuId>(v);
  }

  std::size_t chunk_size() {
    const Token& t = peek();
    const auto v = integer("as chunk size");
    if (v == 0) fail(t, "chunk size must be positive");
    return static_cast<std::size_t>(v);
  }

  SchedulingSpec scheduling_args() {
    if (at_ident("AUTO")) {
      next();
      return SchedulingSpec::automatic();
    }
    if (!at(TokenKind::IntLiteral)) fail(peek(), "expected AUTO, a chunk size or device:chunk pairs, got " + describe(peek()));
    if (!peek(1).is_punct(":")) return SchedulingSpec::uniform(chunk_size());

    std::map<PuId, std::size_t> sizes;
    do {
      const Token& id_tok = peek();
      const PuId id = device_id();
      expect_punct(":", "between device id and chunk size");
      const std::size_t size = chunk_size();
      if (!sizes.emplace(id, size).second) fail(id_tok, "device " + std::to_string(id) + " listed twice in scheduling clause");
    } while (at_punct(",") && (next(), true));
    return SchedulingSpec::device_specific(std::move(sizes));
  }

  // expression: term (('+' | '-') term)*
  Expr expression() {
    Expr lhs = term();
    while (at_punct("+") || at_punct("-")) {
      const Token& op = next();
      lhs = Expr::binary(op.lexeme[0], std::move(lhs), term(), op.loc());
    }
    return lhs;
  }

  Expr term() {
    Expr lhs = unary();
    while (at_punct("*") || at_punct("/")) {
      const Token& op = next();
      lhs = Expr::binary(op.lexeme[0], std::move(lhs), unary(), op.loc());
    }
    return lhs;
  }

  Expr unary() {
    if (at_punct("-")) {
      const Token& op = next();
      return Expr::negate(unary(), op.loc());
    }
    return primary();
  }

  Expr primary() {
    const Token& t = peek();
    switch (t.kind) {
      case TokenKind::IntLiteral:
      case TokenKind::FloatLiteral:
        next();
        return Expr::number(t.lexeme, t.loc());
      case TokenKind::Identifier:
        next();
        if (at_punct("[")) fail(peek(), "subscripts are implicit; write '" + t.lexeme + "' instead of indexing it");
        if (at_punct("(")) fail(peek(), "function calls are not supported in expressions");
        return Expr::name(t.lexeme, t.loc());
      default:
        break;
    }
    if (t.is_punct("(")) {
      next();
      Expr inner = expression();
      expect_punct(")", "to close parenthesized expression");
      return Expr::paren(std::move(inner), t.loc());
    }
    fail(t, "expected an expression, got " + describe(t));
  }

  std::span<const Token> tokens_;
  std::size_t pos_ = 0;
  Token end_;
};

}  // namespace

Program parse(std::span<const Token> tokens) { return Parser(tokens).program(); }

Program parse_source(std::string_view source) {
  const auto tokens = lex(source);
  return parse(tokens);
}

Expr parse_expression(std::string_view source) {
  const auto tokens = lex(source);
  return Parser(tokens).standalone_expression();
}

}  // namespace hstream::frontend
