#pragma once

#include <cstddef>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hstream/pdl.hpp"
#include "hstream/selectors.hpp"

namespace hstream::runtime {

/// Configuration problems detected before any controller thread starts.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Half-open element range [start, finish).
struct Chunk {
  std::size_t start = 0;
  std::size_t finish = 0;

  std::size_t size() const { return finish - start; }

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Next unclaimed element of an index space, advanced under a lock.
class SharedCursor {
 public:
  explicit SharedCursor(std::size_t total) : total_(total) {}

  SharedCursor(const SharedCursor&) = delete;
  SharedCursor& operator=(const SharedCursor&) = delete;

  /// Claims [next, min(next + chunk_size, total)) or returns nullopt once the
  /// range is exhausted. Throws std::invalid_argument for chunk_size 0.
  std::optional<Chunk> claim(std::size_t chunk_size);

  std::size_t next() const;
  std::size_t total() const { return total_; }
  bool exhausted() const { return next() == total_; }

 private:
  mutable std::mutex mutex_;
  std::size_t next_ = 0;
  const std::size_t total_;
};

inline std::optional<Chunk> claim_chunk(SharedCursor& cursor, std::size_t chunk_size) {
  return cursor.claim(chunk_size);
}

/// Converts a size in MiB (fractions allowed) to whole elements, rounding
/// down, minimum one element.
std::size_t mb_to_elements(double mb, std::size_t element_bytes);

/// Proportional AUTO policy: round(total * w / (16 * sum w)) elements with
/// w = speed_factor, clamped to [1 MiB, 64 MiB] worth of elements.
inline constexpr int kAutoClaimsPerPu = 16;

/// Chunk size in elements for `pu` under `spec`. `engaged` lists every PU
/// taking part in the run (AUTO needs the total weight). Throws ConfigError
/// when a per-device map lacks `pu.id`.
std::size_t chunk_size_for(const pdl::ProcessingUnit& pu, const SchedulingSpec& spec, std::size_t total,
                           const std::vector<pdl::ProcessingUnit>& engaged, std::size_t element_bytes = 8);

}  // namespace hstream::runtime
