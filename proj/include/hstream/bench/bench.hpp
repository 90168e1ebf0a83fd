#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hstream/frontend/sema.hpp"
#include "hstream/pdl.hpp"
#include "hstream/runtime/execute.hpp"

namespace hstream::bench {

/// One kernel of the STREAM / STREAM2 suite, compiled from HSTREAM-C.
struct KernelDef {
  std::string name;     // COPY, SCALE, ADD, TRIAD, FILL, DAXPY
  std::string formula;  // body statement as written in the source
  std::string source;   // complete HSTREAM-C translation unit
  frontend::KernelSpec spec;

  /// Throughput accounting: 8 bytes for every array the body reads or writes.
  std::size_t bytes_per_element() const;
};

/// The six kernels, in suite order. Compiled once through the frontend.
const std::vector<KernelDef>& kernel_catalog();
/// Case-insensitive lookup; SUM is accepted for ADD. Throws
/// std::invalid_argument for an unknown name.
const KernelDef& find_kernel(std::string_view name);

struct DeviceConfig {
  std::string name;
  DeviceSelector selector;

  friend bool operator==(const DeviceConfig&, const DeviceConfig&) = default;
};

class PlanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentPlan {
  std::vector<std::string> kernels;
  std::vector<double> stream_sizes_mb;  // MiB per array
  std::vector<double> chunk_sizes_mb;   // MiB per chunk
  std::vector<DeviceConfig> device_configs;
  int repeats = 1;

  /// Throws PlanError for an empty list, a non-positive size or repeat
  /// count, or an unknown kernel.
  void validate() const;
  std::size_t cells() const;

  /// Streams 4 to 128 MiB, chunks 0.25 to 1 MiB, CPU / 4GPUs / CPU+4GPUs,
  /// all six kernels, 3 repeats.
  static ExperimentPlan desk();
  /// Streams 256 to 8192 MiB, chunks 1 to 64 MiB, 10 repeats.
  static ExperimentPlan full();

  friend bool operator==(const ExperimentPlan&, const ExperimentPlan&) = default;
};

/// Reads a `key = value` plan. Keys: kernels, stream_sizes_mb,
/// chunk_sizes_mb, device_configs, repeats. Lists are comma separated;
/// device configs are `name:ids` entries separated by `;` where ids is a
/// comma list or `*`. `#` starts a comment. Keys left out keep their desk
/// values. Throws PlanError naming the line.
ExperimentPlan parse_plan(std::string_view text);
/// `desk`, `full`, or the path of a plan file.
ExperimentPlan plan_by_name(const std::string& name_or_path);

struct ResultRow {
  std::string kernel;
  double stream_mb = 0;
  double chunk_mb = 0;
  std::string device_config;
  int repeat_index = 0;
  double throughput_mb_s = 0;
  bool verified = false;
};

/// A run whose output differed from sequential evaluation.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchOptions {
  runtime::Timing timing = runtime::Timing::Simulated;
  std::uint64_t seed = 42;
  std::function<void(const ResultRow&)> on_row;  // progress callback
};

/// Full factorial sweep, cells in plan order, each repeated through the
/// pipeline. Every batch is re-evaluated sequentially from its kept inputs
/// and compared bitwise before the row is recorded.
std::vector<ResultRow> run_experiment(const ExperimentPlan& plan, const pdl::PlatformDescription& platform,
                                      const BenchOptions& options = {});

struct CellSummary {
  std::string kernel;
  double stream_mb = 0;
  double chunk_mb = 0;
  std::string device_config;
  double mean_throughput_mb_s = 0;
  int repeats = 0;
};

/// Per-cell means, sorted by (kernel, stream_mb, chunk_mb, device_config).
/// Throws std::invalid_argument for no rows.
std::vector<CellSummary> summarize_cells(const std::vector<ResultRow>& rows);
/// CSV with header `kernel,stream_mb,chunk_mb,device_config,mean_throughput_mb_s,repeats`.
std::string summarize(const std::vector<ResultRow>& rows);

struct LocCount {
  std::size_t total_loc = 0;    // non-blank lines that hold code
  std::size_t hstream_loc = 0;  // lines of `#pragma hstream` directives

  friend bool operator==(const LocCount&, const LocCount&) = default;
};

LocCount count_pragma_loc_text(std::string_view source);
/// Counts every `*.hs.c` file directly inside `corpus_dir`, keyed by file
/// name. Throws std::runtime_error for an unreadable directory or file.
std::map<std::string, LocCount> count_pragma_loc(const std::filesystem::path& corpus_dir);

}  // namespace hstream::bench
