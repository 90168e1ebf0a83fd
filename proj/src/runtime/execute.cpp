#include "hstream/runtime/execute.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

namespace hstream::runtime {

double RunStats::throughput_mb_s() const {
  const double t = elapsed();
  if (!(t > 0)) return 0;
  return static_cast<double>(bytes_moved) / t / 1048576.0;
}

const PuStats* RunStats::find(PuId id) const {
  for (const auto& s : per_pu) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

void RunStats::accumulate(const RunStats& other) {
  timing = other.timing;
  for (const auto& o : other.per_pu) {
    auto it = std::find_if(per_pu.begin(), per_pu.end(), [&](const PuStats& s) { return s.id == o.id; });
    if (it == per_pu.end()) {
      per_pu.push_back(o);
      continue;
    }
    it->chunks_claimed += o.chunks_claimed;
    it->elements_processed += o.elements_processed;
    it->bytes_transferred += o.bytes_transferred;
    it->busy_time += o.busy_time;
  }
  total_elements += other.total_elements;
  bytes_moved += other.bytes_moved;
  wall_time += other.wall_time;
  simulated_time += other.simulated_time;
}

unsigned cpu_worker_count(const pdl::ProcessingUnit& cpu, std::size_t engaged, std::optional<unsigned> requested) {
  if (const char* env = std::getenv("HSTREAM_CPU_WORKERS")) {
    unsigned v = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec == std::errc{} && ptr == end && v > 0) return v;
  }
  if (requested && *requested > 0) return *requested;
  unsigned host = cpu.threads.value_or(cpu.cores);
  if (unsigned hw = std::thread::hardware_concurrency(); hw > 0) host = std::min(host, hw);
  const auto busy = static_cast<unsigned>(std::min<std::size_t>(engaged, std::numeric_limits<unsigned>::max()));
  return host > busy ? host - busy : 1;
}

namespace {

class Run {
 public:
  Run(const ExecutableKernel& kernel, HostArrays& host, std::vector<pdl::ProcessingUnit> pus,
      std::vector<std::size_t> chunk_sizes, std::size_t total, const ExecuteOptions& options)
      : kernel_(kernel),
        host_(host),
        pus_(std::move(pus)),
        chunk_sizes_(std::move(chunk_sizes)),
        options_(options),
        cursor_(total),
        clocks_(pus_.size(), 0.0),
        stats_(pus_.size()) {
    for (std::size_t p = 0; p < pus_.size(); ++p) {
      stats_[p].id = pus_[p].id;
      stats_[p].kind = pus_[p].kind;
      if (pus_[p].kind == pdl::PuKind::Cpu) cpu_workers_ = cpu_worker_count(pus_[p], pus_.size(), options.cpu_workers);
    }
  }

  RunStats go() {
    const auto t0 = std::chrono::steady_clock::now();
    {
      std::vector<std::jthread> controllers;
      controllers.reserve(pus_.size());
      for (std::size_t p = 0; p < pus_.size(); ++p) controllers.emplace_back([this, p] { controller(p); });
    }
    const auto t1 = std::chrono::steady_clock::now();
    if (error_) std::rethrow_exception(error_);

    RunStats out;
    out.timing = options_.timing;
    out.per_pu = std::move(stats_);
    out.total_elements = cursor_.total();
    out.bytes_moved = cursor_.total() * kernel_.bytes_per_element();
    out.wall_time = std::chrono::duration<double>(t1 - t0).count();
    if (options_.timing == Timing::Simulated) {
      for (std::size_t p = 0; p < pus_.size(); ++p) out.per_pu[p].busy_time = clocks_[p];
      out.simulated_time = clocks_.empty() ? 0.0 : *std::max_element(clocks_.begin(), clocks_.end());
    }
    out.claims = std::move(claims_);
    return out;
  }

 private:
  bool is_cpu(std::size_t p) const { return pus_[p].kind == pdl::PuKind::Cpu; }

  double estimate(std::size_t p, std::size_t len) const {
    const std::size_t bytes = is_cpu(p) ? 0 : len * kernel_.transfer_bytes_per_element();
    return chunk_seconds(pus_[p], len, bytes, options_.reference_rate);
  }

  std::optional<Chunk> claim_and_record(std::size_t p) {
    std::optional<Chunk> c;
    if (options_.record_claims) {
      std::lock_guard lock(record_mutex_);
      c = cursor_.claim(chunk_sizes_[p]);
      if (c) claims_.push_back({pus_[p].id, *c});
    } else {
      c = cursor_.claim(chunk_sizes_[p]);
    }
    return c;
  }

  // Picks the PU that gets the next claim in virtual time.
  std::size_t pick(std::size_t remaining) const {
    std::size_t best = 0;
    double best_key = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < pus_.size(); ++q) {
      double key = clocks_[q];
      if (options_.claim_order == ClaimOrder::EarliestFinish) key += estimate(q, std::min(chunk_sizes_[q], remaining));
      if (key < best_key) {
        best_key = key;
        best = q;
      }
    }
    return best;
  }

  std::optional<Chunk> next_claim(std::size_t p) {
    if (options_.timing == Timing::Wall) {
      if (cancelled_.load()) return std::nullopt;
      return claim_and_record(p);
    }
    std::unique_lock lock(gate_mutex_);
    for (;;) {
      if (cancelled_.load()) return std::nullopt;
      const std::size_t next = cursor_.next();
      if (next >= cursor_.total()) {
        gate_cv_.notify_all();
        return std::nullopt;
      }
      if (pick(cursor_.total() - next) == p) {
        auto c = claim_and_record(p);
        clocks_[p] += estimate(p, c->size());
        gate_cv_.notify_all();
        return c;
      }
      gate_cv_.wait(lock);
    }
  }

  void fail(std::exception_ptr e) {
    {
      std::lock_guard lock(error_mutex_);
      if (!error_) error_ = e;
    }
    cancelled_.store(true);
    std::lock_guard lock(gate_mutex_);
    gate_cv_.notify_all();
  }

  void controller(std::size_t p) {
    PuStats& st = stats_[p];
    std::optional<SimulatedDevice> device;
    if (!is_cpu(p)) {
      device.emplace(pus_[p], options_.reference_rate);
      if (options_.observer) device->set_observer(options_.observer);
    }
    try {
      while (auto chunk = next_claim(p)) {
        ++st.chunks_claimed;
        st.elements_processed += chunk->size();
        const auto t0 = std::chrono::steady_clock::now();
        switch (pus_[p].kind) {
          case pdl::PuKind::Gpu:
          case pdl::PuKind::Mic:
            run_on_accelerator(*device, kernel_, host_, *chunk);
            break;
          case pdl::PuKind::Cpu:
            run_on_cpu(kernel_, host_, *chunk, cpu_workers_);
            break;
        }
        st.busy_time += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      }
    } catch (...) {
      fail(std::current_exception());
    }
    if (device) st.bytes_transferred = device->bytes_copied_in() + device->bytes_copied_out();
  }

  const ExecutableKernel& kernel_;
  HostArrays& host_;
  std::vector<pdl::ProcessingUnit> pus_;
  std::vector<std::size_t> chunk_sizes_;
  const ExecuteOptions& options_;
  unsigned cpu_workers_ = 1;

  SharedCursor cursor_;
  std::mutex record_mutex_;
  std::vector<ClaimRecord> claims_;

  std::mutex gate_mutex_;
  std::condition_variable gate_cv_;
  std::vector<double> clocks_;

  std::atomic<bool> cancelled_{false};
  std::mutex error_mutex_;
  std::exception_ptr error_;

  std::vector<PuStats> stats_;
};

}  // namespace

RunStats execute(const ExecutableKernel& kernel, HostArrays& host, const pdl::PlatformDescription& platform,
                 const DeviceSelector& device, const SchedulingSpec& scheduling, const ExecuteOptions& options) {
  std::vector<pdl::ProcessingUnit> pus;
  try {
    pus = pdl::resolve_devices(platform, device);
  } catch (const pdl::ResolveError& e) {
    throw ConfigError(e.what());
  }
  const std::size_t total = kernel.validate(host);
  std::size_t elem_bytes = 8;
  if (!kernel.arrays().empty()) elem_bytes = element_bytes(host.at(kernel.arrays().front()));

  std::vector<std::size_t> sizes;
  for (const auto& pu : pus) sizes.push_back(chunk_size_for(pu, scheduling, total, pus, elem_bytes));

  Run run(kernel, host, std::move(pus), std::move(sizes), total, options);
  return run.go();
}

}  // namespace hstream::runtime
