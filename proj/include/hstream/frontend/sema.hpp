#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hstream/frontend/ast.hpp"

namespace hstream::frontend {

struct VarInfo {
  std::string name;
  ScalarType type = ScalarType::Double;
  Shape shape = Shape::Scalar;
  std::int64_t size = 0;  // arrays only
  SourceLoc decl_loc;

  bool is_elementwise() const { return shape != Shape::Scalar; }
  std::size_t element_bytes() const { return type == ScalarType::Int ? 4 : 8; }

  friend bool operator==(const VarInfo&, const VarInfo&) = default;
};

using ScalarValue = std::variant<std::int32_t, double>;

double as_double(const ScalarValue& v);

/// One assignment of a directive body, executed per element in order.
/// `local` targets are per-element temporaries declared inside the body.
struct BodyStatement {
  std::string target;
  bool local = false;
  Expr value;  // typed
};

/// Checked intermediate representation of one directive.
struct KernelSpec {
  std::string name;  // enclosing function name (plus a suffix if it holds several directives)
  std::vector<VarInfo> ins;   // merged in + inout clauses, first-mention order
  std::vector<VarInfo> outs;  // merged out + inout clauses, first-mention order
  std::vector<VarInfo> arrays_in_body;   // elementwise-indexed, first-reference order
  std::vector<VarInfo> scalars_in_body;  // broadcast
  std::vector<VarInfo> locals;           // per-element temporaries
  std::vector<BodyStatement> body;
  std::map<std::string, ScalarValue> scalar_values;  // values of scalar ins at the directive
  DeviceSelector device;
  SchedulingSpec scheduling;
  SourceLoc loc;

  bool is_in(const std::string& name) const;
  bool is_out(const std::string& name) const;

  std::vector<VarInfo> array_ins() const;
  std::vector<VarInfo> array_outs() const;
  std::vector<VarInfo> scalar_ins() const;

  /// Non-local variables read by the body, first-reference order.
  std::vector<std::string> body_reads() const;
  /// Arrays assigned by the body, first-assignment order.
  std::vector<std::string> body_writes() const;
};

struct CheckResult {
  std::vector<KernelSpec> kernels;
  std::vector<Diagnostic> errors;  // sorted by (line, column)

  bool ok() const { return errors.empty(); }
};

/// Semantic analysis: scope resolution, declaration and type checks, clause
/// validation. Collects every error in one pass; a directive with errors
/// produces no KernelSpec but its siblings still do.
CheckResult check(const Program& program);

}  // namespace hstream::frontend
