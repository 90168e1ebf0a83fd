#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hstream {

using PuId = std::uint32_t;

/// Which processing units a directive runs on: every PU of the platform
/// (`device(*)`, the default) or an explicit ordered id list.
class DeviceSelector {
 public:
  DeviceSelector() = default;

  static DeviceSelector all() { return DeviceSelector{}; }
  static DeviceSelector ids(std::vector<PuId> ids) {
    DeviceSelector s;
    s.ids_ = std::move(ids);
    return s;
  }

  bool is_all() const { return ids_.empty(); }
  const std::vector<PuId>& ids() const { return ids_; }

  std::string to_string() const;

  friend bool operator==(const DeviceSelector&, const DeviceSelector&) = default;

 private:
  std::vector<PuId> ids_;  // empty means all
};

/// Chunk-size policy from the scheduling clause. Sizes are in elements.
struct SchedulingSpec {
  enum class Kind { Auto, Uniform, PerDevice };

  Kind kind = Kind::Auto;
  std::size_t chunk = 0;                      // Uniform only
  std::map<PuId, std::size_t> per_device;     // PerDevice only

  static SchedulingSpec automatic() { return {}; }
  static SchedulingSpec uniform(std::size_t chunk) {
    SchedulingSpec s;
    s.kind = Kind::Uniform;
    s.chunk = chunk;
    return s;
  }
  static SchedulingSpec device_specific(std::map<PuId, std::size_t> sizes) {
    SchedulingSpec s;
    s.kind = Kind::PerDevice;
    s.per_device = std::move(sizes);
    return s;
  }

  std::string to_string() const;

  friend bool operator==(const SchedulingSpec&, const SchedulingSpec&) = default;
};

inline std::string DeviceSelector::to_string() const {
  if (is_all()) return "*";
  std::string out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(ids_[i]);
  }
  return out;
}

inline std::string SchedulingSpec::to_string() const {
  switch (kind) {
    case Kind::Auto:
      return "AUTO";
    case Kind::Uniform:
      return std::to_string(chunk);
    case Kind::PerDevice: {
      std::string out;
      for (const auto& [id, size] : per_device) {
        if (!out.empty()) out += ",";
        out += std::to_string(id) + ":" + std::to_string(size);
      }
      return out;
    }
  }
  return {};
}

}  // namespace hstream
