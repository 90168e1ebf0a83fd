#include "hstream/frontend/printer.hpp"

#include <sstream>

namespace hstream::frontend {

namespace {

int precedence(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Binary:
      return (e.op == '+' || e.op == '-') ? 1 : 2;
    case Expr::Kind::Negate:
      return 3;
    default:
      return 4;
  }
}

void print_into(std::string& out, const Expr& e, const NameRenderer& rename) {
  auto wrapped = [&](const Expr& child, bool parens) {
    if (parens) out += '(';
    print_into(out, child, rename);
    if (parens) out += ')';
  };
  switch (e.kind) {
    case Expr::Kind::Number:
      out += e.text;
      return;
    case Expr::Kind::Name:
      out += rename ? rename(e.text) : e.text;
      return;
    case Expr::Kind::Paren:
      wrapped(e.operands[0], true);
      return;
    case Expr::Kind::Negate: {
      const Expr& operand = e.operands[0];
      out += '-';
      // `--x` would lex as a decrement in C.
      if (operand.kind == Expr::Kind::Negate) out += ' ';
      wrapped(operand, precedence(operand) < 3);
      return;
    }
    case Expr::Kind::Binary: {
      const Expr& lhs = e.operands[0];
      const Expr& rhs = e.operands[1];
      const int p = precedence(e);
      wrapped(lhs, precedence(lhs) < p);
      out += e.op;
      if (e.op == '-' && rhs.kind == Expr::Kind::Negate) out += ' ';
      wrapped(rhs, precedence(rhs) <= p);
      return;
    }
  }
}

}  // namespace

std::string print_expr(const Expr& e, const NameRenderer& rename) {
  std::string out;
  print_into(out, e, rename);
  return out;
}

namespace {

void print_clause_vars(std::ostringstream& os, const std::vector<ClauseVar>& vars) {
  for (std::size_t i = 0; i < vars.size(); ++i) {
    if (i) os << ',';
    os << vars[i].name;
    if (vars[i].stream_type) os << ':' << to_string(*vars[i].stream_type);
  }
}

void print_statement(std::ostringstream& os, const Statement& st, const std::string& indent);

void print_block(std::ostringstream& os, const std::vector<Statement>& body, const std::string& indent) {
  os << indent << "{\n";
  for (const auto& st : body) print_statement(os, st, indent + "    ");
  os << indent << "}\n";
}

void print_statement(std::ostringstream& os, const Statement& st, const std::string& indent) {
  if (const auto* d = std::get_if<Declaration>(&st.node)) {
    os << indent;
    if (d->shape == Shape::Stream) {
      os << "stream<" << to_string(d->type) << "> " << d->name;
    } else {
      os << to_string(d->type) << ' ' << d->name;
      if (d->shape == Shape::Array) os << '[' << d->size << ']';
      if (d->init) os << " = " << print_expr(*d->init);
    }
    os << ";\n";
  } else if (const auto* a = std::get_if<Assignment>(&st.node)) {
    os << indent << a->target << " = " << print_expr(a->value) << ";\n";
  } else if (const auto* dir = std::get_if<Directive>(&st.node)) {
    os << indent << "#pragma hstream";
    for (const auto& c : dir->clauses) {
      os << ' ' << to_string(c.kind) << '(';
      switch (c.kind) {
        case Clause::Kind::In:
        case Clause::Kind::Out:
        case Clause::Kind::InOut:
          print_clause_vars(os, c.vars);
          break;
        case Clause::Kind::Device:
          os << c.device.to_string();
          break;
        case Clause::Kind::Scheduling:
          os << c.scheduling.to_string();
          break;
      }
      os << ')';
    }
    os << '\n';
    print_block(os, dir->body, indent);
  } else if (const auto* fn = std::get_if<Function>(&st.node)) {
    os << indent << "void " << fn->name << "()\n";
    print_block(os, fn->body, indent);
  }
}

void dump_into(std::ostringstream& os, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Number:
      os << "(num " << e.text << ')';
      return;
    case Expr::Kind::Name:
      os << "(name " << e.text << ')';
      return;
    case Expr::Kind::Paren:
      os << "(paren ";
      dump_into(os, e.operands[0]);
      os << ')';
      return;
    case Expr::Kind::Negate:
      os << "(neg ";
      dump_into(os, e.operands[0]);
      os << ')';
      return;
    case Expr::Kind::Binary:
      os << '(' << e.op << ' ';
      dump_into(os, e.operands[0]);
      os << ' ';
      dump_into(os, e.operands[1]);
      os << ')';
      return;
  }
}

void dump_statement(std::ostringstream& os, const Statement& st) {
  if (const auto* d = std::get_if<Declaration>(&st.node)) {
    os << "(decl " << d->name << ' ' << to_string(d->type) << ' ' << to_string(d->shape) << ' ' << d->size;
    if (d->init) {
      os << ' ';
      dump_into(os, *d->init);
    }
    os << ')';
  } else if (const auto* a = std::get_if<Assignment>(&st.node)) {
    os << "(assign " << a->target << ' ';
    dump_into(os, a->value);
    os << ')';
  } else if (const auto* dir = std::get_if<Directive>(&st.node)) {
    os << "(directive (clauses";
    for (const auto& c : dir->clauses) {
      os << " (" << to_string(c.kind);
      for (const auto& v : c.vars) {
        os << ' ' << v.name;
        if (v.stream_type) os << ':' << to_string(*v.stream_type);
      }
      if (c.kind == Clause::Kind::Device) os << ' ' << c.device.to_string();
      if (c.kind == Clause::Kind::Scheduling) os << ' ' << c.scheduling.to_string();
      os << ')';
    }
    os << ") (body";
    for (const auto& b : dir->body) {
      os << ' ';
      dump_statement(os, b);
    }
    os << "))";
  } else if (const auto* fn = std::get_if<Function>(&st.node)) {
    os << "(function " << fn->name;
    for (const auto& b : fn->body) {
      os << ' ';
      dump_statement(os, b);
    }
    os << ')';
  }
}

}  // namespace

std::string print_program(const Program& program) {
  std::ostringstream os;
  for (const auto& st : program.items) print_statement(os, st, "");
  return os.str();
}

std::string dump(const Program& program) {
  std::ostringstream os;
  os << "(program";
  for (const auto& st : program.items) {
    os << ' ';
    dump_statement(os, st);
  }
  os << ')';
  return os.str();
}

std::string dump(const Expr& e) {
  std::ostringstream os;
  dump_into(os, e);
  return os.str();
}

}  // namespace hstream::frontend
