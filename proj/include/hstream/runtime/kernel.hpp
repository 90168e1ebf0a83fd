#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "hstream/frontend/sema.hpp"
#include "hstream/runtime/host_arrays.hpp"

namespace hstream::runtime {

class KernelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pointer to element 0 of the range a kernel evaluation works on.
using ArrayRef = std::variant<double*, std::int32_t*>;

/// A checked kernel lowered to a small register program that is interpreted
/// block by block. Each element is computed independently of all others, so
/// any partition of the index space gives the same result.
class ExecutableKernel {
 public:
  static ExecutableKernel from_spec(const frontend::KernelSpec& spec);

  const std::string& name() const { return name_; }

  /// Arrays copied to a device before evaluation (array ins of the clauses).
  const std::vector<std::string>& reads() const { return reads_; }
  /// Arrays the body assigns; copied back to the host after evaluation.
  const std::vector<std::string>& writes() const { return writes_; }
  /// Every array the evaluation binds, in slot order.
  const std::vector<std::string>& arrays() const { return arrays_; }
  /// Arrays whose values the body actually reads.
  const std::vector<std::string>& body_reads() const { return body_reads_; }
  /// Bytes per element in throughput accounting: one element of every array
  /// the body reads plus one of every array it writes.
  std::size_t bytes_per_element() const;
  /// Bytes a device moves per element: copy-in of `reads()` plus copy-out
  /// of `writes()`.
  std::size_t transfer_bytes_per_element() const;
  frontend::ScalarType array_type(const std::string& name) const;

  const std::map<std::string, frontend::ScalarValue>& scalars() const { return scalars_; }
  /// Replaces a scalar's value; the value is converted to the declared type.
  void set_scalar(const std::string& name, double value);

  /// Evaluates `count` consecutive elements. `slots[k]` points at the first
  /// element for array `arrays()[k]`. Throws KernelError on integer division
  /// by zero, naming the element index (`base` plus the offset).
  void run(std::span<const ArrayRef> slots, std::size_t count, std::size_t base = 0) const;

  /// Binds `arrays()` into `host` at offset `start` and evaluates
  /// [start, finish). Throws KernelError if an array is missing or has the
  /// wrong element type or length.
  void run_on(HostArrays& host, std::size_t start, std::size_t finish) const;

  /// Checks that `host` holds every array with the right type and one common
  /// length, and returns that length.
  std::size_t validate(const HostArrays& host) const;

  // Lowered program, public for the evaluator.
  enum class Op : std::uint8_t { LoadArray, Const, Add, Sub, Mul, Div, Neg, ToDouble, StoreArray };
  struct Instr {
    Op op;
    bool is_int = false;  // register class of the result (or of the stored value)
    int dst = -1;       // result register
    int a = -1, b = -1; // operand registers
    int slot = -1;      // array slot
    double dconst = 0;
    std::int32_t iconst = 0;
  };

 private:
  void lower(const frontend::KernelSpec& spec);

  std::string name_;
  std::vector<std::string> reads_;
  std::vector<std::string> writes_;
  std::vector<std::string> arrays_;
  std::vector<std::string> body_reads_;
  std::vector<frontend::ScalarType> array_types_;
  std::map<std::string, frontend::ScalarValue> scalars_;
  frontend::KernelSpec spec_;  // kept so scalar changes can re-lower

  std::vector<Instr> program_;
  int double_registers_ = 0;
  int int_registers_ = 0;
};

}  // namespace hstream::runtime
