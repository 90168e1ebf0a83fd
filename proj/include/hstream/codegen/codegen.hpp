#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hstream/codegen/template.hpp"
#include "hstream/frontend/sema.hpp"
#include "hstream/pdl.hpp"

namespace hstream::codegen {

enum class TargetKind { OpenMP, Cuda, Leo };

inline constexpr TargetKind kAllTargets[] = {TargetKind::OpenMP, TargetKind::Cuda, TargetKind::Leo};

std::string_view to_string(TargetKind t);
/// Accepts `openmp`, `cuda` and `leo`.
std::optional<TargetKind> parse_target(std::string_view name);

struct EmittedUnit {
  std::optional<TargetKind> target;  // empty for the driver
  std::string function_name;
  std::string region;  // the loop, kernel or offload region on its own
  std::string text;    // complete function (or driver) source
  std::map<std::string, std::string> symbols;
};

struct DriverOptions {
  std::string source_name = "program.hs.c";
  std::vector<TargetKind> targets{std::begin(kAllTargets), std::end(kAllTargets)};
  int block_size = 256;
};

struct OutputFile {
  std::string name;
  std::string contents;
};

/// Emits target code for checked kernels from a template store.
/// Output is a pure function of the kernels and the templates.
class CodeGenerator {
 public:
  explicit CodeGenerator(TemplateStore templates);

  EmittedUnit gen_openmp(const frontend::KernelSpec& kernel) const;
  EmittedUnit gen_cuda(const frontend::KernelSpec& kernel) const;
  EmittedUnit gen_leo(const frontend::KernelSpec& kernel) const;
  EmittedUnit generate(TargetKind target, const frontend::KernelSpec& kernel) const;

  /// Registers every requested variant of each kernel with the runtime and
  /// issues one execute call per kernel. Throws std::invalid_argument for an
  /// empty kernel list.
  EmittedUnit gen_driver(const std::vector<frontend::KernelSpec>& kernels, const pdl::PlatformDescription& platform,
                         const DriverOptions& options = {}) const;

  std::string memcpy_host_to_device(const std::string& from, const std::string& to, const std::string& type) const;
  std::string memcpy_device_to_host(const std::string& from, const std::string& to, const std::string& type) const;

  /// The complete file set for one translation unit: `<stem>_omp.c`,
  /// `<stem>_cuda.cu`, `<stem>_leo.c` (only the requested targets) and
  /// `<stem>_driver.c`.
  std::vector<OutputFile> emit_files(const std::string& stem, const std::vector<frontend::KernelSpec>& kernels,
                                     const pdl::PlatformDescription& platform, const DriverOptions& options = {}) const;

 private:
  TemplateStore templates_;
};

/// `foo/bar.hs.c` -> `bar`.
std::string output_stem(const std::filesystem::path& source);

/// Writes each file into `dir` via a temporary file and rename, so readers
/// never observe a partial file. Creates `dir` if needed. Throws
/// std::filesystem::filesystem_error or std::ios_base::failure.
void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files);

/// Whitespace normalization used when comparing emitted code with reference
/// text: each line is trimmed, inner runs of blanks collapse to one space,
/// and blank lines at either end are dropped.
std::string normalize_whitespace(std::string_view text);

}  // namespace hstream::codegen
