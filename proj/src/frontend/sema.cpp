#include "hstream/frontend/sema.hpp"

#include <algorithm>
#include <charconv>
#include <optional>
#include <set>

#include "hstream/arith.hpp"

namespace hstream::frontend {

double as_double(const ScalarValue& v) {
  return std::holds_alternative<double>(v) ? std::get<double>(v) : static_cast<double>(std::get<std::int32_t>(v));
}

namespace {

bool contains(const std::vector<VarInfo>& vars, const std::string& name) {
  return std::any_of(vars.begin(), vars.end(), [&](const VarInfo& v) { return v.name == name; });
}

void append_unique(std::vector<VarInfo>& vars, const VarInfo& v) {
  if (!contains(vars, v.name)) vars.push_back(v);
}

}  // namespace

bool KernelSpec::is_in(const std::string& name) const { return contains(ins, name); }
bool KernelSpec::is_out(const std::string& name) const { return contains(outs, name); }

std::vector<VarInfo> KernelSpec::array_ins() const {
  std::vector<VarInfo> out;
  std::copy_if(ins.begin(), ins.end(), std::back_inserter(out), [](const VarInfo& v) { return v.is_elementwise(); });
  return out;
}

std::vector<VarInfo> KernelSpec::array_outs() const {
  std::vector<VarInfo> out;
  std::copy_if(outs.begin(), outs.end(), std::back_inserter(out), [](const VarInfo& v) { return v.is_elementwise(); });
  return out;
}

std::vector<VarInfo> KernelSpec::scalar_ins() const {
  std::vector<VarInfo> out;
  std::copy_if(ins.begin(), ins.end(), std::back_inserter(out), [](const VarInfo& v) { return !v.is_elementwise(); });
  return out;
}

namespace {

void collect_reads(const Expr& e, const std::set<std::string>& locals, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Name) {
    if (!locals.count(e.text) && std::find(out.begin(), out.end(), e.text) == out.end()) out.push_back(e.text);
    return;
  }
  for (const auto& child : e.operands) collect_reads(child, locals, out);
}

}  // namespace

std::vector<std::string> KernelSpec::body_reads() const {
  std::set<std::string> local_names;
  for (const auto& l : locals) local_names.insert(l.name);
  std::vector<std::string> out;
  for (const auto& st : body) collect_reads(st.value, local_names, out);
  return out;
}

std::vector<std::string> KernelSpec::body_writes() const {
  std::vector<std::string> out;
  for (const auto& st : body) {
    if (!st.local && std::find(out.begin(), out.end(), st.target) == out.end()) out.push_back(st.target);
  }
  return out;
}

namespace {

struct Entry {
  VarInfo info;
  ScalarValue value;
  bool initialized = true;
  bool body_local = false;
};

using Scope = std::map<std::string, Entry>;

// Per-directive bookkeeping while the body is checked.
struct DirectiveState {
  std::vector<VarInfo> ins;
  std::vector<VarInfo> outs;
  std::vector<VarInfo> arrays;
  std::vector<VarInfo> scalars;
  std::vector<VarInfo> locals;
  std::optional<std::int64_t> array_size;
};

class Checker {
 public:
  explicit Checker(const Program& program) : program_(program) {}

  CheckResult run() {
    collect_declarations(program_.items);
    scopes_.emplace_back();
    items(program_.items, nullptr);
    scopes_.pop_back();
    sort_diagnostics(errors_);
    return CheckResult{std::move(kernels_), std::move(errors_)};
  }

 private:
  void error(std::string_view code, std::string message, SourceLoc loc) {
    errors_.push_back(Diagnostic{std::string(code), std::move(message), loc});
  }

  void collect_declarations(const std::vector<Statement>& stmts) {
    for (const auto& st : stmts) {
      if (const auto* d = std::get_if<Declaration>(&st.node)) {
        declared_anywhere_.emplace(d->name, d->loc);
      } else if (const auto* dir = std::get_if<Directive>(&st.node)) {
        collect_declarations(dir->body);
      } else if (const auto* fn = std::get_if<Function>(&st.node)) {
        collect_declarations(fn->body);
      }
    }
  }

  Entry* lookup(const std::string& name) {
    for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
      auto found = it->find(name);
      if (found != it->end()) return &found->second;
    }
    return nullptr;
  }

  // Reports UNDECLARED or OUT_OF_SCOPE when the name is not visible here.
  Entry* resolve(const std::string& name, SourceLoc loc) {
    if (Entry* e = lookup(name)) return e;
    auto range = declared_anywhere_.equal_range(name);
    if (range.first == range.second) {
      error(codes::kUndeclared, "use of undeclared variable '" + name + "'", loc);
    } else {
      const SourceLoc where = range.first->second;
      const bool later = where > loc;
      error(codes::kOutOfScope,
            "variable '" + name + "' is not in scope here (declared at " + std::to_string(where.line) + ":" +
                std::to_string(where.column) + (later ? ", after this use)" : ")"),
            loc);
    }
    return nullptr;
  }

  void items(const std::vector<Statement>& stmts, const Function* fn) {
    int directives_in_fn = 0;
    for (const auto& st : stmts) {
      if (const auto* d = std::get_if<Declaration>(&st.node)) {
        declaration(*d, nullptr);
      } else if (const auto* a = std::get_if<Assignment>(&st.node)) {
        host_assignment(*a);
      } else if (const auto* dir = std::get_if<Directive>(&st.node)) {
        ++directive_count_;
        std::string name;
        if (fn) {
          ++directives_in_fn;
          name = directives_in_fn == 1 ? fn->name : fn->name + "_" + std::to_string(directives_in_fn);
        } else {
          name = "Kernel" + std::to_string(directive_count_);
        }
        directive(*dir, std::move(name));
      } else if (const auto* f = std::get_if<Function>(&st.node)) {
        if (!function_names_.insert(f->name).second) {
          error(codes::kDupDeclaration, "function '" + f->name + "' is defined more than once", f->loc);
        }
        scopes_.emplace_back();
        items(f->body, f);
        scopes_.pop_back();
      }
    }
  }

  // ---- declarations and host statements ---------------------------------

  void declaration(const Declaration& d, DirectiveState* dir) {
    Entry entry;
    entry.info = VarInfo{d.name, d.type, d.shape, d.size, d.loc};
    entry.value = zero(d.type);
    entry.body_local = dir != nullptr;

    if (dir && d.shape != Shape::Scalar) {
      error(codes::kInvalidLocal, "only scalar temporaries may be declared inside a directive body", d.loc);
      return;
    }
    if (d.init) {
      Expr init = *d.init;
      const auto type = expression(init, dir);
      if (type && d.type == ScalarType::Int && *type == ScalarType::Double) {
        error(codes::kTypeMismatch, "cannot initialize int '" + d.name + "' with a double expression", d.loc);
      } else if (type && !dir) {
        if (auto v = fold(init)) entry.value = convert(*v, d.type);
      }
      entry.initialized = true;
    } else {
      entry.initialized = !dir;  // host scalars are zero-initialized; body temporaries are not
    }

    Scope& scope = scopes_.back();
    if (auto it = scope.find(d.name); it != scope.end()) {
      const SourceLoc prev = it->second.info.decl_loc;
      error(codes::kDupDeclaration,
            "'" + d.name + "' is already declared in this scope (at " + std::to_string(prev.line) + ":" +
                std::to_string(prev.column) + ")",
            d.loc);
      return;
    }
    if (dir) dir->locals.push_back(entry.info);
    scope.emplace(d.name, std::move(entry));
  }

  void host_assignment(const Assignment& a) {
    Expr value = a.value;
    const auto type = expression(value, nullptr);
    Entry* target = resolve(a.target, a.loc);
    if (!target) return;
    if (target->info.is_elementwise()) {
      error(codes::kInvalidTarget,
            std::string(to_string(target->info.shape)) + " '" + a.target +
                "' can only be assigned inside a directive body",
            a.loc);
      return;
    }
    if (!type) return;
    if (target->info.type == ScalarType::Int && *type == ScalarType::Double) {
      error(codes::kTypeMismatch, "cannot assign a double expression to int '" + a.target + "'", a.loc);
      return;
    }
    if (auto v = fold(value)) target->value = convert(*v, target->info.type);
  }

  // ---- expressions --------------------------------------------------------

  // Types `e` in place. `dir` is null for host (scalar) context.
  std::optional<ScalarType> expression(Expr& e, DirectiveState* dir) {
    switch (e.kind) {
      case Expr::Kind::Number:
        e.type = e.is_float_literal() ? ScalarType::Double : ScalarType::Int;
        if (e.type == ScalarType::Int) {
          std::int32_t v = 0;
          auto [ptr, ec] = std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
          if (ec != std::errc{} || ptr != e.text.data() + e.text.size()) {
            error(codes::kTypeMismatch, "integer literal '" + e.text + "' does not fit in int", e.loc);
            return std::nullopt;
          }
        }
        return e.type;
      case Expr::Kind::Name: {
        Entry* entry = resolve(e.text, e.loc);
        if (!entry) return std::nullopt;
        if (!name_use(*entry, e.loc, dir)) return std::nullopt;
        e.type = entry->info.type;
        return e.type;
      }
      case Expr::Kind::Paren:
      case Expr::Kind::Negate: {
        auto t = expression(e.operands[0], dir);
        if (t) e.type = *t;
        return t;
      }
      case Expr::Kind::Binary: {
        auto lhs = expression(e.operands[0], dir);
        auto rhs = expression(e.operands[1], dir);
        if (!lhs || !rhs) return std::nullopt;
        e.type = (*lhs == ScalarType::Double || *rhs == ScalarType::Double) ? ScalarType::Double : ScalarType::Int;
        return e.type;
      }
    }
    return std::nullopt;
  }

  bool name_use(Entry& entry, SourceLoc loc, DirectiveState* dir) {
    const VarInfo& info = entry.info;
    if (!dir) {
      if (info.is_elementwise()) {
        error(codes::kShapeMismatch,
              std::string(to_string(info.shape)) + " '" + info.name + "' used in a scalar expression outside a directive",
              loc);
        return false;
      }
      return true;
    }
    if (entry.body_local) {
      if (!entry.initialized) {
        error(codes::kUninitialized, "temporary '" + info.name + "' is read before it is assigned", loc);
        return false;
      }
      return true;
    }
    if (!contains(dir->ins, info.name)) {
      error(codes::kNotInClause, "'" + info.name + "' is read in the directive body but not listed in an in or inout clause",
            loc);
      return false;
    }
    note_body_reference(*dir, info, loc);
    return true;
  }

  void note_body_reference(DirectiveState& dir, const VarInfo& info, SourceLoc loc) {
    if (info.is_elementwise()) {
      check_array_size(dir, info, loc);
      append_unique(dir.arrays, info);
    } else {
      append_unique(dir.scalars, info);
    }
  }

  void check_array_size(DirectiveState& dir, const VarInfo& info, SourceLoc loc) {
    if (info.shape != Shape::Array) return;
    if (!dir.array_size) {
      dir.array_size = info.size;
    } else if (*dir.array_size != info.size) {
      error(codes::kShapeMismatch,
            "array '" + info.name + "' has " + std::to_string(info.size) + " elements but this directive works on " +
                std::to_string(*dir.array_size),
            loc);
    }
  }

  static ScalarValue zero(ScalarType t) {
    return t == ScalarType::Int ? ScalarValue{std::int32_t{0}} : ScalarValue{0.0};
  }

  static ScalarValue convert(const ScalarValue& v, ScalarType to) {
    if (to == ScalarType::Double) return as_double(v);
    return v;  // int targets only ever receive int values (checked)
  }

  // Constant-folds a typed host expression over the current scalar values.
  std::optional<ScalarValue> fold(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Number:
        if (e.type == ScalarType::Int) {
          std::int32_t v = 0;
          std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
          return v;
        } else {
          double v = 0;
          std::from_chars(e.text.data(), e.text.data() + e.text.size(), v);
          return v;
        }
      case Expr::Kind::Name: {
        const Entry* entry = lookup(e.text);
        if (!entry) return std::nullopt;
        return entry->value;
      }
      case Expr::Kind::Paren:
        return fold(e.operands[0]);
      case Expr::Kind::Negate: {
        auto v = fold(e.operands[0]);
        if (!v) return v;
        if (e.type == ScalarType::Int) return arith::neg(std::get<std::int32_t>(*v));
        return -as_double(*v);
      }
      case Expr::Kind::Binary: {
        auto lhs = fold(e.operands[0]);
        auto rhs = fold(e.operands[1]);
        if (!lhs || !rhs) return std::nullopt;
        if (e.type == ScalarType::Int) {
          const auto a = std::get<std::int32_t>(*lhs), b = std::get<std::int32_t>(*rhs);
          switch (e.op) {
            case '+':
              return arith::add(a, b);
            case '-':
              return arith::sub(a, b);
            case '*':
              return arith::mul(a, b);
            default: {
              auto q = arith::div(a, b);
              if (!q) {
                error(codes::kDivisionByZero, "integer division by zero in constant expression", e.loc);
                return std::nullopt;
              }
              return *q;
            }
          }
        }
        const double a = as_double(*lhs), b = as_double(*rhs);
        switch (e.op) {
          case '+':
            return a + b;
          case '-':
            return a - b;
          case '*':
            return a * b;
          default:
            return a / b;
        }
      }
    }
    return std::nullopt;
  }

  // ---- directives -----------------------------------------------------------

  void directive(const Directive& d, std::string kernel_name) {
    const std::size_t errors_before = errors_.size();
    DirectiveState state;

    const Clause* device = nullptr;
    const Clause* scheduling = nullptr;
    for (const auto& c : d.clauses) {
      switch (c.kind) {
        case Clause::Kind::Device:
          if (device) {
            error(codes::kDupDevice, "only one device clause can be provided per directive", c.loc);
          } else {
            device = &c;
          }
          break;
        case Clause::Kind::Scheduling:
          if (scheduling) {
            error(codes::kDupScheduling, "only one scheduling clause can be provided per directive", c.loc);
          } else {
            scheduling = &c;
          }
          break;
        default:
          data_clause(c, state);
          break;
      }
    }

    KernelSpec spec;
    spec.name = std::move(kernel_name);
    spec.loc = d.loc;
    spec.device = device ? device->device : DeviceSelector::all();
    spec.scheduling = scheduling ? scheduling->scheduling : SchedulingSpec::automatic();

    if (device && !device->device.is_all()) {
      std::set<PuId> seen;
      for (PuId id : device->device.ids()) {
        if (!seen.insert(id).second) {
          error(codes::kBadDevice, "device " + std::to_string(id) + " is listed twice", device->loc);
        }
      }
      if (scheduling && scheduling->scheduling.kind == SchedulingSpec::Kind::PerDevice) {
        for (PuId id : device->device.ids()) {
          if (!scheduling->scheduling.per_device.count(id)) {
            error(codes::kBadScheduling, "scheduling clause gives no chunk size for device " + std::to_string(id),
                  scheduling->loc);
          }
        }
      }
    }

    scopes_.emplace_back();
    for (const auto& st : d.body) {
      if (const auto* decl = std::get_if<Declaration>(&st.node)) {
        declaration(*decl, &state);
        if (decl->init && scopes_.back().count(decl->name)) {
          Expr init = *decl->init;
          expression_quiet(init, state);
          spec.body.push_back(BodyStatement{decl->name, true, std::move(init)});
        }
      } else if (const auto* a = std::get_if<Assignment>(&st.node)) {
        body_assignment(*a, state, spec);
      }
    }
    scopes_.pop_back();

    if (errors_.size() != errors_before) return;

    spec.ins = state.ins;
    spec.outs = state.outs;
    spec.arrays_in_body = state.arrays;
    spec.scalars_in_body = state.scalars;
    spec.locals = state.locals;
    for (const auto& v : spec.scalar_ins()) {
      if (const Entry* e = lookup(v.name)) spec.scalar_values.emplace(v.name, e->value);
    }
    kernels_.push_back(std::move(spec));
  }

  // Re-types an already checked expression without reporting again.
  void expression_quiet(Expr& e, DirectiveState& state) {
    std::vector<Diagnostic> saved;
    saved.swap(errors_);
    DirectiveState scratch = state;
    expression(e, &scratch);
    errors_.swap(saved);
  }

  void data_clause(const Clause& c, DirectiveState& state) {
    const bool is_in = c.kind == Clause::Kind::In || c.kind == Clause::Kind::InOut;
    const bool is_out = c.kind == Clause::Kind::Out || c.kind == Clause::Kind::InOut;
    for (const auto& v : c.vars) {
      Entry* entry = resolve(v.name, v.loc);
      if (!entry) continue;
      const VarInfo& info = entry->info;
      // A rejected reference is still recorded so the body does not report
      // a second, derived NOT_IN_CLAUSE error for the same variable.
      if (info.shape == Shape::Stream) {
        if (!v.stream_type) {
          error(codes::kBadClauseRef,
                "stream '" + v.name + "' must be referenced with its element type, e.g. " + v.name + ":" +
                    std::string(to_string(info.type)),
                v.loc);
        } else if (*v.stream_type != info.type) {
          error(codes::kTypeMismatch,
                "stream '" + v.name + "' carries " + std::string(to_string(info.type)) + " elements, not " +
                    std::string(to_string(*v.stream_type)),
                v.loc);
        }
      } else if (v.stream_type) {
        error(codes::kBadClauseRef, "'" + v.name + "' is not a stream; reference it without ':type'", v.loc);
      }
      if (is_out && info.shape == Shape::Scalar) {
        error(codes::kBadClauseRef, "scalar '" + v.name + "' cannot be transferred back; only arrays and streams can be outputs",
              v.loc);
      }
      check_array_size(state, info, v.loc);
      if (is_in) append_unique(state.ins, info);
      if (is_out) append_unique(state.outs, info);
    }
  }

  void body_assignment(const Assignment& a, DirectiveState& state, KernelSpec& spec) {
    Entry* target = resolve(a.target, a.loc);
    bool target_ok = target != nullptr;
    if (target && !target->body_local) {
      if (!target->info.is_elementwise()) {
        error(codes::kInvalidTarget,
              "scalar '" + a.target + "' cannot be assigned inside a directive body; declare a local temporary", a.loc);
        target_ok = false;
      } else if (!contains(state.outs, a.target)) {
        error(codes::kNotInClause, "'" + a.target + "' is written in the directive body but not listed in an out or inout clause",
              a.loc);
        target_ok = false;
      } else {
        note_body_reference(state, target->info, a.loc);
      }
    }

    Expr value = a.value;
    const auto type = expression(value, &state);
    if (!target_ok || !type) return;
    if (target->info.type == ScalarType::Int && *type == ScalarType::Double) {
      error(codes::kTypeMismatch, "cannot assign a double expression to int '" + a.target + "'", a.loc);
      return;
    }
    if (target->body_local) target->initialized = true;
    spec.body.push_back(BodyStatement{a.target, target->body_local, std::move(value)});
  }

  const Program& program_;
  std::vector<Diagnostic> errors_;
  std::vector<Scope> scopes_;
  std::multimap<std::string, SourceLoc> declared_anywhere_;
  std::set<std::string> function_names_;
  std::vector<KernelSpec> kernels_;
  int directive_count_ = 0;
};

}  // namespace

CheckResult check(const Program& program) { return Checker(program).run(); }

}  // namespace hstream::frontend
