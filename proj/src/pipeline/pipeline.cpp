#include "hstream/pipeline/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace hstream::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

// Collects trace intervals from all three stage threads.
class TraceRecorder {
 public:
  explicit TraceRecorder(Clock::time_point origin) : origin_(origin) {}

  double now() const { return std::chrono::duration<double>(Clock::now() - origin_).count(); }

  void record(std::size_t seq, Stage stage, double begin) {
    const double end = now();
    std::lock_guard lock(mutex_);
    trace_.record(seq, stage, {begin, end});
  }

  StageTrace take() {
    std::lock_guard lock(mutex_);
    return std::move(trace_);
  }

 private:
  Clock::time_point origin_;
  std::mutex mutex_;
  StageTrace trace_;
};

class FirstError {
 public:
  void set(std::exception_ptr e) {
    std::lock_guard lock(mutex_);
    if (!error_) error_ = std::move(e);
  }
  void rethrow_if_set() {
    if (error_) std::rethrow_exception(error_);
  }

 private:
  std::mutex mutex_;
  std::exception_ptr error_;
};

void pause(std::chrono::microseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

runtime::Column zeros(frontend::ScalarType type, std::size_t n) {
  if (type == frontend::ScalarType::Int) return std::vector<std::int32_t>(n);
  return std::vector<double>(n);
}

}  // namespace

const char* to_string(Stage s) {
  switch (s) {
    case Stage::Read: return "read";
    case Stage::Process: return "process";
    case Stage::Write: return "write";
  }
  return "?";
}

// ---------------------------------------------------------------- trace

std::optional<Interval> StageTrace::find(std::size_t seq, Stage stage) const {
  for (const auto& e : entries_) {
    if (e.seq == seq && e.stage == stage) return e.span;
  }
  return std::nullopt;
}

std::size_t StageTrace::batches() const {
  std::set<std::size_t> seqs;
  for (const auto& e : entries_) seqs.insert(e.seq);
  return seqs.size();
}

bool StageTrace::stage_ordering_holds() const {
  std::set<std::size_t> seqs;
  for (const auto& e : entries_) seqs.insert(e.seq);
  for (std::size_t seq : seqs) {
    const auto r = find(seq, Stage::Read);
    const auto p = find(seq, Stage::Process);
    const auto w = find(seq, Stage::Write);
    if (r && p && r->end > p->begin) return false;
    if (p && w && p->end > w->begin) return false;
    if (r && w && r->end > w->begin) return false;
  }
  return true;
}

std::vector<std::size_t> StageTrace::write_process_overlaps() const {
  std::vector<std::size_t> out;
  for (const auto& e : entries_) {
    if (e.stage != Stage::Write) continue;
    const auto next = find(e.seq + 1, Stage::Process);
    if (next && e.span.intersects(*next)) out.push_back(e.seq);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------- reordering

std::vector<ProcessedBatch> ReorderBuffer::push(ProcessedBatch batch) {
  if (batch.seq < next_ || held_.count(batch.seq)) {
    throw PipelineError("batch " + std::to_string(batch.seq) + " delivered twice");
  }
  held_.emplace(batch.seq, std::move(batch));
  max_pending_ = std::max(max_pending_, held_.size());
  std::vector<ProcessedBatch> ready;
  for (auto it = held_.find(next_); it != held_.end(); it = held_.find(next_)) {
    ready.push_back(std::move(it->second));
    held_.erase(it);
    ++next_;
  }
  return ready;
}

void store_in_order(std::vector<ProcessedBatch> completions, BatchSink& sink) {
  ReorderBuffer reorder;
  for (auto& b : completions) {
    for (auto& ready : reorder.push(std::move(b))) sink.write(ready);
  }
  if (reorder.pending() > 0) {
    throw PipelineError("batch " + std::to_string(reorder.next_seq()) + " never arrived");
  }
  sink.finish();
}

// ---------------------------------------------------------------- batches

std::vector<ColumnSpec> input_columns(const runtime::ExecutableKernel& kernel) {
  std::vector<ColumnSpec> out;
  for (const auto& name : kernel.reads()) out.push_back({name, kernel.array_type(name)});
  return out;
}

std::vector<ColumnSpec> output_columns(const runtime::ExecutableKernel& kernel) {
  std::vector<ColumnSpec> out;
  for (const auto& name : kernel.writes()) out.push_back({name, kernel.array_type(name)});
  return out;
}

std::size_t default_batch_elements(const runtime::ExecutableKernel& kernel, const pdl::PlatformDescription& platform,
                                   const DeviceSelector& device, const SchedulingSpec& scheduling) {
  std::vector<pdl::ProcessingUnit> engaged;
  try {
    engaged = pdl::resolve_devices(platform, device);
  } catch (const pdl::ResolveError& e) {
    throw runtime::ConfigError(e.what());
  }
  std::size_t widest = 4;
  for (const auto& name : kernel.arrays()) {
    if (kernel.array_type(name) == frontend::ScalarType::Double) widest = 8;
  }
  std::size_t sum = 0;
  for (const auto& pu : engaged) {
    switch (scheduling.kind) {
      case SchedulingSpec::Kind::Auto:
        sum += runtime::mb_to_elements(1.0, widest);
        break;
      case SchedulingSpec::Kind::Uniform:
        sum += scheduling.chunk;
        break;
      case SchedulingSpec::Kind::PerDevice: {
        const auto it = scheduling.per_device.find(pu.id);
        if (it == scheduling.per_device.end()) {
          throw runtime::ConfigError("scheduling clause has no chunk size for PU " + std::to_string(pu.id));
        }
        sum += it->second;
        break;
      }
    }
  }
  return std::max<std::size_t>(1, 4 * sum);
}

ProcessedBatch process_batch(Batch batch, const runtime::ExecutableKernel& kernel,
                             const pdl::PlatformDescription& platform, const DeviceSelector& device,
                             const SchedulingSpec& scheduling, const PipelineOptions& options) {
  ProcessedBatch out;
  out.seq = batch.seq;
  out.length = batch.length;
  if (options.keep_inputs) out.inputs = batch.arrays;

  runtime::HostArrays& host = batch.arrays;
  for (const auto& name : kernel.reads()) {
    if (!host.contains(name)) {
      throw PipelineError("batch " + std::to_string(batch.seq) + " lacks input column '" + name + "'");
    }
  }
  for (const auto& name : kernel.arrays()) {
    if (!host.contains(name)) host.set(name, zeros(kernel.array_type(name), batch.length));
  }
  if (kernel.validate(host) != batch.length) {
    throw PipelineError("batch " + std::to_string(batch.seq) + " columns do not match its length");
  }
  out.stats = runtime::execute(kernel, host, platform, device, scheduling, options.execute);
  for (const auto& name : kernel.writes()) out.outputs.set(name, std::move(host.at(name)));
  return out;
}

// ---------------------------------------------------------------- pipeline

PipelineResult run_pipeline(BatchSource& source, const runtime::ExecutableKernel& kernel,
                            const pdl::PlatformDescription& platform, const DeviceSelector& device,
                            const SchedulingSpec& scheduling, BatchSink& sink, const PipelineOptions& options) {
  const std::size_t batch_elements =
      options.batch_elements ? *options.batch_elements : default_batch_elements(kernel, platform, device, scheduling);
  if (batch_elements == 0) throw PipelineError("batch size must be at least one element");

  BoundedQueue<Batch> to_process(options.queue_capacity);
  BoundedQueue<ProcessedBatch> to_store(options.queue_capacity);
  const auto start = Clock::now();
  TraceRecorder trace(start);
  FirstError error;
  PipelineResult result;
  result.stats.timing = options.execute.timing;

  auto fail = [&](std::exception_ptr e) {
    error.set(std::move(e));
    to_process.abort();
    to_store.abort();
  };

  {
    std::jthread reader([&] {
      try {
        for (std::size_t seq = 0;; ++seq) {
          const double begin = trace.now();
          auto batch = source.next(batch_elements);
          if (!batch) break;
          pause(options.delays.read);
          batch->seq = seq;
          trace.record(seq, Stage::Read, begin);
          if (!to_process.push(std::move(*batch))) return;
        }
        to_process.close();
      } catch (...) {
        fail(std::current_exception());
      }
    });

    std::jthread processor([&] {
      try {
        while (auto batch = to_process.pop()) {
          const double begin = trace.now();
          const std::size_t seq = batch->seq;
          auto done = process_batch(std::move(*batch), kernel, platform, device, scheduling, options);
          pause(options.delays.process);
          trace.record(seq, Stage::Process, begin);
          if (!to_store.push(std::move(done))) return;
        }
        to_store.close();
      } catch (...) {
        fail(std::current_exception());
      }
    });

    std::jthread writer([&] {
      try {
        // Batches leave the processor in seq order already; the buffer
        // guards the contract should that ever change.
        ReorderBuffer reorder;
        while (auto done = to_store.pop()) {
          for (auto& ready : reorder.push(std::move(*done))) {
            const double begin = trace.now();
            sink.write(ready);
            pause(options.delays.write);
            trace.record(ready.seq, Stage::Write, begin);
            result.stats.accumulate(ready.stats);
            ++result.batches;
          }
        }
        if (reorder.pending() > 0) throw PipelineError("pipeline ended with batches out of order");
        sink.finish();
      } catch (...) {
        fail(std::current_exception());
      }
    });
  }

  error.rethrow_if_set();
  result.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  result.trace = trace.take();
  result.producer_blocked_seconds = to_process.blocked_push_seconds();
  result.input_queue_high_water = to_process.high_water();
  result.output_queue_high_water = to_store.high_water();
  return result;
}

}  // namespace hstream::pipeline
