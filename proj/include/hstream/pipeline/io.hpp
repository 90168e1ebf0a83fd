#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hstream/frontend/ast.hpp"
#include "hstream/runtime/host_arrays.hpp"
#include "hstream/runtime/execute.hpp"

namespace hstream::pipeline {

class PipelineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Name and element type of one streamed column.
struct ColumnSpec {
  std::string name;
  frontend::ScalarType type = frontend::ScalarType::Double;

  std::size_t element_bytes() const { return type == frontend::ScalarType::Int ? 4 : 8; }
};

/// Size in bytes of one interleaved record: one element of every column.
std::size_t record_bytes(const std::vector<ColumnSpec>& columns);

struct Batch {
  std::size_t seq = 0;
  std::size_t length = 0;
  runtime::HostArrays arrays;
};

struct ProcessedBatch {
  std::size_t seq = 0;
  std::size_t length = 0;
  runtime::HostArrays outputs;
  runtime::HostArrays inputs;  // only filled when the pipeline keeps inputs
  runtime::RunStats stats;
};

/// Producer side: yields consecutive slices of the input columns. A kernel
/// that reads no arrays still streams: its batches carry a length and no
/// columns.
class BatchSource {
 public:
  virtual ~BatchSource() = default;
  /// Up to `max_elements` elements of every column; nullopt at end of stream.
  /// The caller assigns seq.
  virtual std::optional<Batch> next(std::size_t max_elements) = 0;
};

/// Serves slices of columns already in memory. `length` is required when
/// `data` has no columns and must match otherwise. The shared form lets
/// repeated runs read one copy of the data.
class MemorySource : public BatchSource {
 public:
  explicit MemorySource(runtime::HostArrays data, std::optional<std::size_t> length = {});
  explicit MemorySource(std::shared_ptr<const runtime::HostArrays> data, std::optional<std::size_t> length = {});
  std::optional<Batch> next(std::size_t max_elements) override;

 private:
  std::shared_ptr<const runtime::HostArrays> data_;
  std::size_t length_ = 0;
  std::size_t pos_ = 0;
};

/// Deterministic pseudo-random columns. Element i of column k is a pure
/// function of (seed, k, i), so the data does not depend on batch size.
/// Doubles fall in [-1, 1); ints in [1, 65536].
class GeneratedSource : public BatchSource {
 public:
  GeneratedSource(std::vector<ColumnSpec> columns, std::size_t elements, std::uint64_t seed = 42);

  /// `gen:N` semantics: N MiB per input column, sized by its element type
  /// (the widest column decides when types differ).
  static GeneratedSource megabytes(std::vector<ColumnSpec> columns, double mb, std::uint64_t seed = 42);

  std::optional<Batch> next(std::size_t max_elements) override;
  std::size_t total() const { return total_; }

  static double double_at(std::uint64_t seed, std::size_t column, std::size_t index);
  static std::int32_t int_at(std::uint64_t seed, std::size_t column, std::size_t index);

 private:
  std::vector<ColumnSpec> columns_;
  std::size_t total_;
  std::uint64_t seed_;
  std::size_t pos_ = 0;
};

/// Reads interleaved little-endian records of the given columns.
class FileSource : public BatchSource {
 public:
  /// Throws PipelineError if the file cannot be opened or `columns` is empty.
  FileSource(const std::filesystem::path& path, std::vector<ColumnSpec> columns);
  /// Throws PipelineError on a read failure or a truncated record.
  std::optional<Batch> next(std::size_t max_elements) override;

 private:
  std::filesystem::path path_;
  std::vector<ColumnSpec> columns_;
  std::ifstream in_;
};

/// Writes the whole of `data` (the listed columns) as interleaved records.
void write_stream_file(const std::filesystem::path& path, const std::vector<ColumnSpec>& columns,
                       const runtime::HostArrays& data);

/// Store side.
class BatchSink {
 public:
  virtual ~BatchSink() = default;
  virtual void write(const ProcessedBatch& batch) = 0;
  virtual void finish() {}
};

/// Interleaved little-endian records of the output columns. The file is
/// created (empty) on construction.
class FileSink : public BatchSink {
 public:
  FileSink(const std::filesystem::path& path, std::vector<ColumnSpec> columns);
  void write(const ProcessedBatch& batch) override;
  void finish() override;

 private:
  std::filesystem::path path_;
  std::vector<ColumnSpec> columns_;
  std::ofstream out_;
};

class DiscardSink : public BatchSink {
 public:
  void write(const ProcessedBatch& batch) override {
    ++batches_;
    elements_ += batch.length;
  }
  std::size_t batches() const { return batches_; }
  std::size_t elements() const { return elements_; }

 private:
  std::size_t batches_ = 0;
  std::size_t elements_ = 0;
};

/// Concatenates outputs in arrival order and remembers the seq sequence.
class CollectSink : public BatchSink {
 public:
  void write(const ProcessedBatch& batch) override;
  const runtime::HostArrays& data() const { return data_; }
  const std::vector<std::size_t>& order() const { return order_; }

 private:
  runtime::HostArrays data_;
  std::vector<std::size_t> order_;
};

/// Hands each batch to a callback (used for verification).
class CallbackSink : public BatchSink {
 public:
  explicit CallbackSink(std::function<void(const ProcessedBatch&)> fn) : fn_(std::move(fn)) {}
  void write(const ProcessedBatch& batch) override { fn_(batch); }

 private:
  std::function<void(const ProcessedBatch&)> fn_;
};

}  // namespace hstream::pipeline
