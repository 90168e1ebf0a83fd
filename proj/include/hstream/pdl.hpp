#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hstream/selectors.hpp"

namespace hstream::pdl {

enum class PuKind { Cpu, Gpu, Mic };

std::string_view to_string(PuKind kind);

/// Cost model of a simulated processing unit. Time charged for a chunk is
/// `transfer_cost_per_mb * MB moved + elements / (speed_factor * reference rate)`.
struct SimParams {
  double speed_factor = 1.0;
  double transfer_cost_per_mb = 0.0;  // seconds per MiB

  static SimParams defaults_for(PuKind kind);

  friend bool operator==(const SimParams&, const SimParams&) = default;
};

struct ProcessingUnit {
  PuId id = 0;
  PuKind kind = PuKind::Cpu;
  unsigned cores = 1;
  std::optional<unsigned> threads;  // required for CPUs
  double cache_mb = 0.0;
  double frequency_ghz = 1.0;
  double memory_gb = 1.0;
  SimParams sim;

  /// Device memory capacity in bytes (GiB based).
  double memory_bytes() const;

  friend bool operator==(const ProcessingUnit&, const ProcessingUnit&) = default;
};

struct PlatformDescription {
  std::string name;
  std::vector<ProcessingUnit> pus;

  const ProcessingUnit* find(PuId id) const;

  friend bool operator==(const PlatformDescription&, const PlatformDescription&) = default;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, std::string attribute, const std::string& message);

  int line() const { return line_; }
  const std::string& attribute() const { return attribute_; }

 private:
  int line_;
  std::string attribute_;
};

class ResolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates the XML platform description.
///
/// Accepted shape:
///
///   <platform name="DISA">
///     <pu id="0" type="cpu" cores="20" threads="40" cache_mb="27.5"
///         frequency_ghz="2.4" memory_gb="768"/>
///     <pu id="1" type="gpu" cores="1792" frequency_ghz="1.48" memory_gb="8">
///       <sim speed_factor="4" transfer_cost_per_mb="0.001"/>
///     </pu>
///   </platform>
///
/// `threads` may be omitted for accelerators, `cache_mb` defaults to 0 and
/// `tdp_w` is accepted and ignored. Throws ParseError carrying the offending
/// line and attribute name.
PlatformDescription parse_pdl(std::string_view text);

PlatformDescription load_pdl(const std::string& path);

/// Selects the PUs named by a device clause, in clause order (or platform
/// order for `*`). Throws ResolveError on unknown ids or an empty result.
std::vector<ProcessingUnit> resolve_devices(const PlatformDescription& platform,
                                            const DeviceSelector& selector);

}  // namespace hstream::pdl
