#pragma once

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "hstream/pipeline/io.hpp"
#include "hstream/pipeline/queue.hpp"
#include "hstream/runtime/execute.hpp"

namespace hstream::pipeline {

enum class Stage { Read, Process, Write };

const char* to_string(Stage s);

/// Begin and end of one stage of one batch, in seconds since pipeline start.
struct Interval {
  double begin = 0;
  double end = 0;

  bool intersects(const Interval& o) const { return begin < o.end && o.begin < end; }
};

class StageTrace {
 public:
  struct Entry {
    std::size_t seq = 0;
    Stage stage = Stage::Read;
    Interval span;
  };

  void record(std::size_t seq, Stage stage, Interval span) { entries_.push_back({seq, stage, span}); }

  const std::vector<Entry>& entries() const { return entries_; }
  std::optional<Interval> find(std::size_t seq, Stage stage) const;
  /// Number of distinct batch sequence numbers seen.
  std::size_t batches() const;

  /// read(b) ends before process(b) begins and process(b) ends before
  /// write(b) begins, for every batch with all three stages recorded.
  bool stage_ordering_holds() const;

  /// Batches b for which write(b) and process(b + 1) intersect in time.
  std::vector<std::size_t> write_process_overlaps() const;

 private:
  std::vector<Entry> entries_;
};

/// Releases processed batches strictly in seq order, holding early arrivals
/// until the gap before them is filled.
class ReorderBuffer {
 public:
  explicit ReorderBuffer(std::size_t first_seq = 0) : next_(first_seq) {}

  /// Accepts one batch and returns every batch that is now in order. Throws
  /// PipelineError on a duplicate or already released seq.
  std::vector<ProcessedBatch> push(ProcessedBatch batch);

  std::size_t next_seq() const { return next_; }
  std::size_t pending() const { return held_.size(); }
  std::size_t max_pending() const { return max_pending_; }

 private:
  std::size_t next_;
  std::map<std::size_t, ProcessedBatch> held_;
  std::size_t max_pending_ = 0;
};

/// The store stage on its own: feeds `completions` (any order) through a
/// ReorderBuffer into `sink`, then finishes the sink. Throws PipelineError if
/// a sequence number is missing.
void store_in_order(std::vector<ProcessedBatch> completions, BatchSink& sink);

/// Artificial per-batch stage durations, added inside each stage's traced
/// interval. Used to make overlap observable.
struct StageDelays {
  std::chrono::microseconds read{0};
  std::chrono::microseconds process{0};
  std::chrono::microseconds write{0};
};

struct PipelineOptions {
  std::optional<std::size_t> batch_elements;  // default_batch_elements() when empty
  std::size_t queue_capacity = 2;
  runtime::ExecuteOptions execute;
  bool keep_inputs = false;  // copy each batch's inputs into its ProcessedBatch
  StageDelays delays;
};

struct PipelineResult {
  runtime::RunStats stats;  // accumulated over batches
  StageTrace trace;
  std::size_t batches = 0;
  double wall_time = 0;                 // whole pipeline, seconds
  double producer_blocked_seconds = 0;  // time the reader waited on a full queue
  std::size_t input_queue_high_water = 0;
  std::size_t output_queue_high_water = 0;
};

/// Four times the sum of the engaged PUs' chunk sizes. AUTO counts each PU
/// at its smallest AUTO chunk (1 MiB worth of elements). Throws ConfigError
/// on an unresolvable selector or a per-device map missing an engaged PU.
std::size_t default_batch_elements(const runtime::ExecutableKernel& kernel, const pdl::PlatformDescription& platform,
                                   const DeviceSelector& device, const SchedulingSpec& scheduling);

/// Columns the producer must deliver (the kernel's array ins) and the
/// columns the store stage receives (the arrays it writes).
std::vector<ColumnSpec> input_columns(const runtime::ExecutableKernel& kernel);
std::vector<ColumnSpec> output_columns(const runtime::ExecutableKernel& kernel);

/// Executes one batch: binds its columns, allocates the written arrays and
/// runs the kernel over the batch's index space.
ProcessedBatch process_batch(Batch batch, const runtime::ExecutableKernel& kernel,
                             const pdl::PlatformDescription& platform, const DeviceSelector& device,
                             const SchedulingSpec& scheduling, const PipelineOptions& options = {});

/// Reader, processor and writer threads joined by bounded queues. The first
/// stage error aborts both queues, every stage winds down, and the error is
/// rethrown once all three have joined.
PipelineResult run_pipeline(BatchSource& source, const runtime::ExecutableKernel& kernel,
                            const pdl::PlatformDescription& platform, const DeviceSelector& device,
                            const SchedulingSpec& scheduling, BatchSink& sink,
                            const PipelineOptions& options = {});

}  // namespace hstream::pipeline
