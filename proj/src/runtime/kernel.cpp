#include "hstream/runtime/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>

#include "hstream/arith.hpp"

namespace hstream::runtime {

namespace {

using frontend::Expr;
using frontend::ScalarType;
using frontend::ScalarValue;
using frontend::VarInfo;

constexpr std::size_t kBlock = 512;

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

ExecutableKernel ExecutableKernel::from_spec(const frontend::KernelSpec& spec) {
  ExecutableKernel k;
  k.name_ = spec.name;
  k.spec_ = spec;

  std::map<std::string, ScalarType> types;
  for (const auto* list : {&spec.ins, &spec.outs, &spec.arrays_in_body}) {
    for (const VarInfo& v : *list) {
      if (!v.is_elementwise()) continue;
      types.emplace(v.name, v.type);
    }
  }
  for (const VarInfo& v : spec.ins) {
    if (v.is_elementwise() && !contains(k.reads_, v.name)) k.reads_.push_back(v.name);
  }
  k.writes_ = spec.body_writes();
  k.arrays_ = k.reads_;
  for (const VarInfo& v : spec.arrays_in_body) {
    if (!contains(k.arrays_, v.name)) k.arrays_.push_back(v.name);
  }
  for (const auto& w : k.writes_) {
    if (!contains(k.arrays_, w)) k.arrays_.push_back(w);
  }
  for (const auto& name : k.arrays_) k.array_types_.push_back(types.at(name));
  for (const auto& r : spec.body_reads()) {
    if (types.count(r)) k.body_reads_.push_back(r);
  }

  for (const VarInfo& v : spec.scalars_in_body) {
    auto it = spec.scalar_values.find(v.name);
    if (it == spec.scalar_values.end()) throw KernelError("kernel " + spec.name + ": scalar '" + v.name + "' has no value");
    k.scalars_[v.name] = it->second;
  }
  k.lower(spec);
  return k;
}

frontend::ScalarType ExecutableKernel::array_type(const std::string& name) const {
  for (std::size_t i = 0; i < arrays_.size(); ++i) {
    if (arrays_[i] == name) return array_types_[i];
  }
  throw KernelError("kernel " + name_ + " does not use array '" + name + "'");
}

std::size_t ExecutableKernel::bytes_per_element() const {
  auto bytes = [&](const std::string& n) { return array_type(n) == ScalarType::Int ? std::size_t{4} : std::size_t{8}; };
  std::size_t total = 0;
  for (const auto& r : body_reads_) total += bytes(r);
  for (const auto& w : writes_) total += bytes(w);
  return total;
}

std::size_t ExecutableKernel::transfer_bytes_per_element() const {
  auto bytes = [&](const std::string& n) { return array_type(n) == ScalarType::Int ? std::size_t{4} : std::size_t{8}; };
  std::size_t total = 0;
  for (const auto& r : reads_) total += bytes(r);
  for (const auto& w : writes_) total += bytes(w);
  return total;
}

void ExecutableKernel::set_scalar(const std::string& name, double value) {
  auto it = scalars_.find(name);
  if (it == scalars_.end()) throw KernelError("kernel " + name_ + " has no scalar '" + name + "'");
  if (std::holds_alternative<std::int32_t>(it->second)) {
    if (!(value >= -2147483648.0 && value <= 2147483647.0))
      throw KernelError("value for int scalar '" + name + "' is out of range");
    it->second = static_cast<std::int32_t>(value);
  } else {
    it->second = value;
  }
  spec_.scalar_values[name] = it->second;
  lower(spec_);
}

void ExecutableKernel::lower(const frontend::KernelSpec& spec) {
  program_.clear();
  double_registers_ = 0;
  int_registers_ = 0;

  std::map<std::string, std::pair<bool, int>> local_reg;  // name -> (is_int, register)
  std::map<std::string, ScalarType> local_types;
  for (const VarInfo& l : spec.locals) local_types[l.name] = l.type;

  auto new_reg = [&](bool is_int) { return is_int ? int_registers_++ : double_registers_++; };
  auto slot_of = [&](const std::string& n) {
    return static_cast<int>(std::find(arrays_.begin(), arrays_.end(), n) - arrays_.begin());
  };
  auto convert = [&](int reg, bool from_int, bool to_int) {
    if (from_int == to_int) return reg;
    // Double to int never reaches here; the checker rejects it.
    Instr in{Op::ToDouble};
    in.is_int = false;
    in.a = reg;
    in.dst = new_reg(false);
    program_.push_back(in);
    return in.dst;
  };

  auto emit = [&](auto& self, const Expr& e) -> int {
    const bool is_int = e.type == ScalarType::Int;
    switch (e.kind) {
      case Expr::Kind::Number: {
        Instr in{Op::Const};
        in.is_int = is_int;
        if (is_int) {
          std::from_chars(e.text.data(), e.text.data() + e.text.size(), in.iconst);
        } else {
          std::from_chars(e.text.data(), e.text.data() + e.text.size(), in.dconst);
        }
        in.dst = new_reg(is_int);
        program_.push_back(in);
        return in.dst;
      }
      case Expr::Kind::Name: {
        if (auto it = local_reg.find(e.text); it != local_reg.end()) return it->second.second;
        if (auto it = scalars_.find(e.text); it != scalars_.end()) {
          Instr in{Op::Const};
          in.is_int = std::holds_alternative<std::int32_t>(it->second);
          if (in.is_int) {
            in.iconst = std::get<std::int32_t>(it->second);
          } else {
            in.dconst = std::get<double>(it->second);
          }
          in.dst = new_reg(in.is_int);
          program_.push_back(in);
          return convert(in.dst, in.is_int, is_int);
        }
        Instr in{Op::LoadArray};
        in.is_int = is_int;
        in.slot = slot_of(e.text);
        if (in.slot >= static_cast<int>(arrays_.size())) throw KernelError("kernel " + name_ + ": unbound name '" + e.text + "'");
        in.dst = new_reg(is_int);
        program_.push_back(in);
        return in.dst;
      }
      case Expr::Kind::Paren:
        return self(self, e.operands[0]);
      case Expr::Kind::Negate: {
        const Expr& x = e.operands[0];
        int a = convert(self(self, x), x.type == ScalarType::Int, is_int);
        Instr in{Op::Neg};
        in.is_int = is_int;
        in.a = a;
        in.dst = new_reg(is_int);
        program_.push_back(in);
        return in.dst;
      }
      case Expr::Kind::Binary: {
        const Expr& l = e.operands[0];
        const Expr& r = e.operands[1];
        int a = convert(self(self, l), l.type == ScalarType::Int, is_int);
        int b = convert(self(self, r), r.type == ScalarType::Int, is_int);
        Instr in{e.op == '+' ? Op::Add : e.op == '-' ? Op::Sub : e.op == '*' ? Op::Mul : Op::Div};
        in.is_int = is_int;
        in.a = a;
        in.b = b;
        in.dst = new_reg(is_int);
        program_.push_back(in);
        return in.dst;
      }
    }
    throw KernelError("unreachable expression kind");
  };

  for (const auto& st : spec.body) {
    const bool value_int = st.value.type == ScalarType::Int;
    int reg = emit(emit, st.value);
    if (st.local) {
      const bool target_int = local_types.at(st.target) == ScalarType::Int;
      local_reg[st.target] = {target_int, convert(reg, value_int, target_int)};
      continue;
    }
    const int slot = slot_of(st.target);
    const bool target_int = array_types_.at(slot) == ScalarType::Int;
    Instr in{Op::StoreArray};
    in.is_int = target_int;
    in.a = convert(reg, value_int, target_int);
    in.slot = slot;
    program_.push_back(in);
  }
}

void ExecutableKernel::run(std::span<const ArrayRef> slots, std::size_t count, std::size_t base) const {
  if (slots.size() != arrays_.size()) throw KernelError("kernel " + name_ + ": wrong number of array bindings");
  thread_local std::vector<double> dregs;
  thread_local std::vector<std::int32_t> iregs;
  dregs.resize(static_cast<std::size_t>(double_registers_) * kBlock);
  iregs.resize(static_cast<std::size_t>(int_registers_) * kBlock);
  auto D = [&](int r) { return dregs.data() + static_cast<std::size_t>(r) * kBlock; };
  auto I = [&](int r) { return iregs.data() + static_cast<std::size_t>(r) * kBlock; };

  for (std::size_t off = 0; off < count; off += kBlock) {
    const std::size_t n = std::min(kBlock, count - off);
    for (const Instr& in : program_) {
      switch (in.op) {
        case Op::LoadArray:
          if (in.is_int) {
            const std::int32_t* src = std::get<std::int32_t*>(slots[in.slot]) + off;
            std::copy(src, src + n, I(in.dst));
          } else {
            const double* src = std::get<double*>(slots[in.slot]) + off;
            std::copy(src, src + n, D(in.dst));
          }
          break;
        case Op::StoreArray:
          if (in.is_int) {
            const std::int32_t* src = I(in.a);
            std::copy(src, src + n, std::get<std::int32_t*>(slots[in.slot]) + off);
          } else {
            const double* src = D(in.a);
            std::copy(src, src + n, std::get<double*>(slots[in.slot]) + off);
          }
          break;
        case Op::Const:
          if (in.is_int) {
            std::fill_n(I(in.dst), n, in.iconst);
          } else {
            std::fill_n(D(in.dst), n, in.dconst);
          }
          break;
        case Op::ToDouble: {
          const std::int32_t* a = I(in.a);
          double* d = D(in.dst);
          for (std::size_t i = 0; i < n; ++i) d[i] = static_cast<double>(a[i]);
          break;
        }
        case Op::Neg:
          if (in.is_int) {
            const std::int32_t* a = I(in.a);
            std::int32_t* d = I(in.dst);
            for (std::size_t i = 0; i < n; ++i) d[i] = arith::neg(a[i]);
          } else {
            const double* a = D(in.a);
            double* d = D(in.dst);
            for (std::size_t i = 0; i < n; ++i) d[i] = -a[i];
          }
          break;
        case Op::Add:
        case Op::Sub:
        case Op::Mul:
        case Op::Div:
          if (in.is_int) {
            const std::int32_t* a = I(in.a);
            const std::int32_t* b = I(in.b);
            std::int32_t* d = I(in.dst);
            switch (in.op) {
              case Op::Add:
                for (std::size_t i = 0; i < n; ++i) d[i] = arith::add(a[i], b[i]);
                break;
              case Op::Sub:
                for (std::size_t i = 0; i < n; ++i) d[i] = arith::sub(a[i], b[i]);
                break;
              case Op::Mul:
                for (std::size_t i = 0; i < n; ++i) d[i] = arith::mul(a[i], b[i]);
                break;
              default:
                for (std::size_t i = 0; i < n; ++i) {
                  auto q = arith::div(a[i], b[i]);
                  if (!q) {
                    throw KernelError("kernel " + name_ + ": integer division by zero at element " +
                                      std::to_string(base + off + i));
                  }
                  d[i] = *q;
                }
            }
          } else {
            const double* a = D(in.a);
            const double* b = D(in.b);
            double* d = D(in.dst);
            switch (in.op) {
              case Op::Add:
                for (std::size_t i = 0; i < n; ++i) d[i] = a[i] + b[i];
                break;
              case Op::Sub:
                for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
                break;
              case Op::Mul:
                for (std::size_t i = 0; i < n; ++i) d[i] = a[i] * b[i];
                break;
              default:
                for (std::size_t i = 0; i < n; ++i) d[i] = a[i] / b[i];
            }
          }
          break;
      }
    }
  }
}

std::size_t ExecutableKernel::validate(const HostArrays& host) const {
  std::optional<std::size_t> length;
  for (std::size_t i = 0; i < arrays_.size(); ++i) {
    if (!host.contains(arrays_[i])) throw KernelError("kernel " + name_ + ": host array '" + arrays_[i] + "' is missing");
    const Column& c = host.at(arrays_[i]);
    const bool is_int = std::holds_alternative<std::vector<std::int32_t>>(c);
    if (is_int != (array_types_[i] == ScalarType::Int)) {
      throw KernelError("kernel " + name_ + ": host array '" + arrays_[i] + "' has the wrong element type");
    }
    const std::size_t n = column_size(c);
    if (length && *length != n) {
      throw KernelError("kernel " + name_ + ": host arrays differ in length (" + std::to_string(*length) + " vs " +
                        std::to_string(n) + " for '" + arrays_[i] + "')");
    }
    length = n;
  }
  return length.value_or(0);
}

void ExecutableKernel::run_on(HostArrays& host, std::size_t start, std::size_t finish) const {
  const std::size_t n = validate(host);
  if (start > finish || finish > n) throw KernelError("kernel " + name_ + ": range out of bounds");
  std::vector<ArrayRef> slots;
  slots.reserve(arrays_.size());
  for (const auto& name : arrays_) {
    std::visit([&](auto& v) { slots.emplace_back(v.data() + start); }, host.at(name));
  }
  run(slots, finish - start, start);
}

}  // namespace hstream::runtime
