#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "hstream/pdl.hpp"
#include "hstream/runtime/device.hpp"
#include "hstream/runtime/host_arrays.hpp"
#include "hstream/runtime/kernel.hpp"
#include "hstream/runtime/scheduler.hpp"

namespace hstream::runtime {

/// Wall: controllers claim as fast as they run and throughput uses real time.
/// Simulated: each controller carries a virtual clock advanced by the cost
/// model, claims are granted in virtual-time order, and throughput uses the
/// virtual makespan. Results are identical in both modes.
enum class Timing { Wall, Simulated };

/// Simulated mode only. EarliestStart grants the next claim to the PU whose
/// clock is lowest (plain self-scheduling). EarliestFinish grants it to the PU
/// that would complete it first, so a slow PU never holds up the tail.
enum class ClaimOrder { EarliestFinish, EarliestStart };

struct ExecuteOptions {
  Timing timing = Timing::Wall;
  ClaimOrder claim_order = ClaimOrder::EarliestFinish;
  double reference_rate = kReferenceRate;
  std::optional<unsigned> cpu_workers;  // HSTREAM_CPU_WORKERS still wins when set
  bool record_claims = false;
  PhaseObserver observer;  // attached to every simulated device
};

struct PuStats {
  PuId id = 0;
  pdl::PuKind kind = pdl::PuKind::Cpu;
  std::size_t chunks_claimed = 0;
  std::size_t elements_processed = 0;
  std::size_t bytes_transferred = 0;  // accelerator copy-in plus copy-out
  double busy_time = 0;               // seconds, simulated or measured per the timing mode
};

struct ClaimRecord {
  PuId pu = 0;
  Chunk chunk;
};

struct RunStats {
  Timing timing = Timing::Wall;
  std::vector<PuStats> per_pu;  // engaged PUs in selector order
  std::size_t total_elements = 0;
  std::size_t bytes_moved = 0;  // total_elements * kernel bytes_per_element
  double wall_time = 0;
  double simulated_time = 0;      // makespan of the virtual clocks
  std::vector<ClaimRecord> claims;  // linearized claim order, if recorded

  /// Time basis for throughput: simulated makespan or measured wall time.
  double elapsed() const { return timing == Timing::Simulated ? simulated_time : wall_time; }
  double throughput_mb_s() const;

  const PuStats* find(PuId id) const;

  /// Adds another run's counters and times (used per pipeline batch). Claim
  /// records are not merged.
  void accumulate(const RunStats& other);
};

/// CPU worker threads for a run engaging `engaged` PUs: the CPU's hardware
/// threads (capped by the host's) minus the engaged PUs, at least 1.
/// HSTREAM_CPU_WORKERS overrides, then `requested`.
unsigned cpu_worker_count(const pdl::ProcessingUnit& cpu, std::size_t engaged, std::optional<unsigned> requested = {});

/// Runs `kernel` over every element of `host` with one controller thread per
/// engaged PU. Chunk sizes are resolved, and configuration errors thrown,
/// before any thread starts. The first controller error cancels the others
/// and is rethrown after all controllers have joined.
RunStats execute(const ExecutableKernel& kernel, HostArrays& host, const pdl::PlatformDescription& platform,
                 const DeviceSelector& device, const SchedulingSpec& scheduling, const ExecuteOptions& options = {});

}  // namespace hstream::runtime
