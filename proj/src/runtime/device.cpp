#include "hstream/runtime/device.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

namespace hstream::runtime {

namespace {

// Below this many elements per worker, splitting a chunk costs more than it saves.
constexpr std::size_t kMinElementsPerWorker = 16384;

std::string describe(const pdl::ProcessingUnit& pu) {
  return "PU " + std::to_string(pu.id) + " (" + std::string(pdl::to_string(pu.kind)) + ")";
}

}  // namespace

double chunk_seconds(const pdl::ProcessingUnit& pu, std::size_t elements, std::size_t bytes_moved,
                     double reference_rate) {
  const double transfer = pu.sim.transfer_cost_per_mb * (static_cast<double>(bytes_moved) / 1048576.0);
  const double compute = static_cast<double>(elements) / (pu.sim.speed_factor * reference_rate);
  return transfer + compute;
}

void check_device_capacity(const pdl::ProcessingUnit& pu, std::size_t elements, std::size_t bytes_per_element) {
  const double needed = static_cast<double>(elements) * static_cast<double>(bytes_per_element);
  if (needed > pu.memory_bytes()) {
    std::ostringstream msg;
    msg << "simulated out-of-memory on " << describe(pu) << ": chunk of " << elements << " elements needs "
        << static_cast<std::uint64_t>(needed) << " bytes, device has " << static_cast<std::uint64_t>(pu.memory_bytes());
    throw DeviceError(msg.str());
  }
}

double SimulatedDevice::run(const ExecutableKernel& kernel, HostArrays& host, const Chunk& chunk) {
  const std::size_t n = kernel.validate(host);
  if (chunk.start >= chunk.finish || chunk.finish > n) throw DeviceError(describe(pu_) + ": chunk out of bounds");
  const std::size_t len = chunk.size();

  std::size_t per_element = 0;
  for (const auto& name : kernel.arrays()) per_element += element_bytes(host.at(name));
  check_device_capacity(pu_, len, per_element);

  struct Release {
    std::map<std::string, Column>& buffers;
    ~Release() { buffers.clear(); }
  } release{buffers_};

  for (const auto& name : kernel.arrays()) {
    std::visit([&](const auto& col) { buffers_[name] = std::decay_t<decltype(col)>(len); }, host.at(name));
  }
  notify(Phase::Allocated, chunk);

  std::size_t moved = 0;
  for (const auto& name : kernel.reads()) {
    std::visit(
        [&](const auto& src) {
          auto& dst = std::get<std::decay_t<decltype(src)>>(buffers_.at(name));
          std::copy(src.begin() + chunk.start, src.begin() + chunk.finish, dst.begin());
          moved += len * sizeof(src[0]);
        },
        host.at(name));
  }
  bytes_in_ += moved;
  notify(Phase::CopiedIn, chunk);

  std::vector<ArrayRef> slots;
  for (const auto& name : kernel.arrays()) {
    std::visit([&](auto& buf) { slots.emplace_back(buf.data()); }, buffers_.at(name));
  }
  kernel.run(slots, len, chunk.start);
  notify(Phase::Evaluated, chunk);

  std::size_t out = 0;
  for (const auto& name : kernel.writes()) {
    std::visit(
        [&](auto& dst) {
          const auto& src = std::get<std::decay_t<decltype(dst)>>(buffers_.at(name));
          std::copy(src.begin(), src.end(), dst.begin() + chunk.start);
          out += len * sizeof(dst[0]);
        },
        host.at(name));
  }
  bytes_out_ += out;
  moved += out;
  notify(Phase::CopiedOut, chunk);

  buffers_.clear();
  notify(Phase::Freed, chunk);
  return chunk_seconds(pu_, len, moved, reference_rate_);
}

void run_on_cpu(const ExecutableKernel& kernel, HostArrays& host, const Chunk& chunk, unsigned worker_threads) {
  const std::size_t len = chunk.size();
  const std::size_t workers =
      std::clamp<std::size_t>(len / kMinElementsPerWorker, 1, std::max(1u, worker_threads));
  if (workers == 1) {
    kernel.run_on(host, chunk.start, chunk.finish);
    return;
  }

  std::exception_ptr first;
  std::mutex error_mutex;
  auto part = [&](std::size_t w) {
    const std::size_t begin = chunk.start + len * w / workers;
    const std::size_t end = chunk.start + len * (w + 1) / workers;
    try {
      kernel.run_on(host, begin, end);
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!first) first = std::current_exception();
    }
  };
  {
    std::vector<std::jthread> threads;
    for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(part, w);
    part(0);
  }
  if (first) std::rethrow_exception(first);
}

}  // namespace hstream::runtime
