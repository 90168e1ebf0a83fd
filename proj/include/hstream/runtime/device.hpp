#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>

#include "hstream/pdl.hpp"
#include "hstream/runtime/host_arrays.hpp"
#include "hstream/runtime/kernel.hpp"
#include "hstream/runtime/scheduler.hpp"

namespace hstream::runtime {

/// Elements per second processed by a PU whose speed_factor is 1.
inline constexpr double kReferenceRate = 134217728.0;

/// Simulated seconds for one chunk: transfer_cost_per_mb * MiB moved plus
/// elements / (speed_factor * reference_rate).
double chunk_seconds(const pdl::ProcessingUnit& pu, std::size_t elements, std::size_t bytes_moved,
                     double reference_rate = kReferenceRate);

class DeviceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws DeviceError naming the PU when `elements * bytes_per_element`
/// exceeds its memory.
void check_device_capacity(const pdl::ProcessingUnit& pu, std::size_t elements, std::size_t bytes_per_element);

/// Steps of the accelerator path, reported to an observer after each one.
enum class Phase { Allocated, CopiedIn, Evaluated, CopiedOut, Freed };

using PhaseObserver = std::function<void(const pdl::ProcessingUnit&, Phase, const Chunk&)>;

/// An accelerator stand-in with private buffers. Host data reaches the
/// buffers only through copy-in and leaves them only through copy-out.
class SimulatedDevice {
 public:
  explicit SimulatedDevice(pdl::ProcessingUnit pu, double reference_rate = kReferenceRate)
      : pu_(std::move(pu)), reference_rate_(reference_rate) {}

  const pdl::ProcessingUnit& pu() const { return pu_; }
  double speed_factor() const { return pu_.sim.speed_factor; }
  double transfer_cost_per_mb() const { return pu_.sim.transfer_cost_per_mb; }

  void set_observer(PhaseObserver observer) { observer_ = std::move(observer); }

  /// Allocate, copy in `kernel.reads()`, evaluate, copy out
  /// `kernel.writes()`, free. Returns the simulated seconds charged. Throws
  /// DeviceError naming the PU when the buffers would exceed device memory;
  /// nothing is allocated or copied in that case.
  double run(const ExecutableKernel& kernel, HostArrays& host, const Chunk& chunk);

  std::size_t bytes_copied_in() const { return bytes_in_; }
  std::size_t bytes_copied_out() const { return bytes_out_; }
  /// Buffers currently held; zero whenever run() is not executing.
  std::size_t live_buffers() const { return buffers_.size(); }

 private:
  void notify(Phase phase, const Chunk& chunk) const {
    if (observer_) observer_(pu_, phase, chunk);
  }

  pdl::ProcessingUnit pu_;
  double reference_rate_;
  PhaseObserver observer_;
  std::map<std::string, Column> buffers_;
  std::size_t bytes_in_ = 0;
  std::size_t bytes_out_ = 0;
};

inline double run_on_accelerator(SimulatedDevice& dev, const ExecutableKernel& kernel, HostArrays& host,
                                 const Chunk& chunk) {
  return dev.run(kernel, host, chunk);
}

/// Evaluates the chunk in place on host arrays, split across
/// `worker_threads` workers. Small chunks run on the calling thread.
void run_on_cpu(const ExecutableKernel& kernel, HostArrays& host, const Chunk& chunk, unsigned worker_threads);

}  // namespace hstream::runtime
