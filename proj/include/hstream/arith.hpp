#pragma once

#include <cstdint>
#include <optional>

// 32-bit two's-complement integer arithmetic shared by constant folding and
// the kernel evaluator, so both agree bit for bit.
namespace hstream::arith {

inline std::int32_t add(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) + static_cast<std::uint32_t>(b));
}

inline std::int32_t sub(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) - static_cast<std::uint32_t>(b));
}

inline std::int32_t mul(std::int32_t a, std::int32_t b) {
  return static_cast<std::int32_t>(static_cast<std::uint32_t>(a) * static_cast<std::uint32_t>(b));
}

inline std::int32_t neg(std::int32_t a) { return sub(0, a); }

/// Truncating division; nullopt on division by zero. INT32_MIN / -1 wraps.
inline std::optional<std::int32_t> div(std::int32_t a, std::int32_t b) {
  if (b == 0) return std::nullopt;
  if (b == -1) return neg(a);
  return a / b;
}

}  // namespace hstream::arith
