#include "hstream/runtime/scheduler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hstream::runtime {

std::optional<Chunk> SharedCursor::claim(std::size_t chunk_size) {
  if (chunk_size == 0) throw std::invalid_argument("chunk size must be at least 1");
  std::lock_guard lock(mutex_);
  if (next_ >= total_) return std::nullopt;
  Chunk c{next_, next_ + std::min(chunk_size, total_ - next_)};
  next_ = c.finish;
  return c;
}

std::size_t SharedCursor::next() const {
  std::lock_guard lock(mutex_);
  return next_;
}

std::size_t mb_to_elements(double mb, std::size_t element_bytes) {
  if (!(mb > 0) || element_bytes == 0) throw std::invalid_argument("size in MB must be positive");
  const double elements = std::floor(mb * 1048576.0 / static_cast<double>(element_bytes));
  return std::max<std::size_t>(1, static_cast<std::size_t>(elements));
}

std::size_t chunk_size_for(const pdl::ProcessingUnit& pu, const SchedulingSpec& spec, std::size_t total,
                           const std::vector<pdl::ProcessingUnit>& engaged, std::size_t element_bytes) {
  switch (spec.kind) {
    case SchedulingSpec::Kind::Uniform:
      if (spec.chunk == 0) throw ConfigError("chunk size must be at least 1");
      return spec.chunk;
    case SchedulingSpec::Kind::PerDevice: {
      auto it = spec.per_device.find(pu.id);
      if (it == spec.per_device.end()) {
        throw ConfigError("scheduling clause gives no chunk size for engaged PU " + std::to_string(pu.id));
      }
      if (it->second == 0) throw ConfigError("chunk size for PU " + std::to_string(pu.id) + " must be at least 1");
      return it->second;
    }
    case SchedulingSpec::Kind::Auto: {
      double weight_sum = 0;
      for (const auto& p : engaged) weight_sum += p.sim.speed_factor;
      if (!(weight_sum > 0)) weight_sum = pu.sim.speed_factor;
      const double raw = std::llround(static_cast<double>(total) * pu.sim.speed_factor / (kAutoClaimsPerPu * weight_sum));
      const double lo = static_cast<double>(mb_to_elements(1, element_bytes));
      const double hi = static_cast<double>(mb_to_elements(64, element_bytes));
      return static_cast<std::size_t>(std::clamp(raw, lo, hi));
    }
  }
  throw ConfigError("unknown scheduling kind");
}

}  // namespace hstream::runtime
