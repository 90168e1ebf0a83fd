#include "hstream/cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <sstream>

#include "hstream/bench/bench.hpp"
#include "hstream/codegen/codegen.hpp"
#include "hstream/frontend/frontend.hpp"
#include "hstream/pipeline/pipeline.hpp"

#ifndef HSTREAM_VERSION
#define HSTREAM_VERSION "0.0.0"
#endif

namespace hstream::cli {

namespace {

namespace fs = std::filesystem;

const std::string kVersion = std::string("hstreamc ") + HSTREAM_VERSION;

// Raised once the diagnostics have been printed; carries the exit code.
struct Handled {
  int code;
};

class UserError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

pdl::PlatformDescription load_platform(const std::string& path) {
  std::ifstream probe(path);
  if (!probe) throw IoError("cannot read platform file '" + path + "'");
  try {
    return pdl::load_pdl(path);
  } catch (const pdl::ParseError& e) {
    throw UserError(path + ": " + e.what());
  }
}

/// Frontend plus the optional platform check. Prints every diagnostic and
/// throws Handled{1} if there were any.
std::vector<frontend::KernelSpec> compile_checked(const std::string& path, const pdl::PlatformDescription* platform,
                                                  std::ostream& err) {
  const std::string text = read_source(path);
  auto result = frontend::compile_source(text);
  std::vector<frontend::Diagnostic> diags = result.errors;
  if (platform) {
    auto more = check_devices(result.kernels, *platform);
    diags.insert(diags.end(), more.begin(), more.end());
    frontend::sort_diagnostics(diags);
  }
  for (const auto& d : diags) err << frontend::format_diagnostic(path, d) << '\n';
  if (!diags.empty()) throw Handled{kExitUserError};
  return std::move(result.kernels);
}

const frontend::KernelSpec& pick_kernel(const std::vector<frontend::KernelSpec>& kernels, const std::string& which) {
  if (kernels.empty()) throw UserError("the program contains no #pragma hstream directive");
  if (which.empty()) {
    if (kernels.size() == 1) return kernels.front();
    std::string names;
    for (const auto& k : kernels) names += (names.empty() ? "" : ", ") + k.name;
    throw UserError("the program has " + std::to_string(kernels.size()) +
                    " directives; choose one with --directive (" + names + ")");
  }
  for (const auto& k : kernels) {
    if (k.name == which) return k;
  }
  const bool numeric = !which.empty() && which.find_first_not_of("0123456789") == std::string::npos;
  if (numeric) {
    const auto index = std::stoul(which);
    if (index < kernels.size()) return kernels[index];
  }
  throw UserError("no directive named '" + which + "'");
}

std::size_t widest_element(const runtime::ExecutableKernel& k) {
  for (const auto& name : k.arrays()) {
    if (k.array_type(name) == frontend::ScalarType::Double) return 8;
  }
  return 4;
}

runtime::Timing parse_timing(const std::string& s) {
  if (s == "wall") return runtime::Timing::Wall;
  if (s == "simulated") return runtime::Timing::Simulated;
  throw UserError("--timing must be 'wall' or 'simulated'");
}

// ---------------------------------------------------------------- compile

struct CompileArgs {
  std::string file;
  std::string pdl;
  std::string out_dir = ".";
  std::vector<std::string> targets;
  std::string templates;
  int block_size = 256;
};

int do_compile(const CompileArgs& a, std::ostream& out, std::ostream& err) {
  const auto platform = load_platform(a.pdl);
  const auto kernels = compile_checked(a.file, &platform, err);
  if (kernels.empty()) throw UserError("the program contains no #pragma hstream directive");

  codegen::DriverOptions opt;
  opt.source_name = fs::path(a.file).filename().string();
  opt.block_size = a.block_size;
  if (!a.targets.empty()) {
    opt.targets.clear();
    for (const auto& t : a.targets) {
      const auto kind = codegen::parse_target(t);
      if (!kind) throw UserError("unknown target '" + t + "' (expected openmp, cuda or leo)");
      if (std::find(opt.targets.begin(), opt.targets.end(), *kind) == opt.targets.end()) opt.targets.push_back(*kind);
    }
  }
  const fs::path tdir = a.templates.empty() ? codegen::TemplateStore::default_directory() : fs::path(a.templates);
  const codegen::CodeGenerator gen(codegen::TemplateStore::load(tdir));
  const auto files = gen.emit_files(codegen::output_stem(a.file), kernels, platform, opt);
  codegen::write_outputs(a.out_dir, files);
  for (const auto& f : files) out << (fs::path(a.out_dir) / f.name).string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- check

int do_check(const std::string& file, const std::string& pdl, std::ostream& out, std::ostream& err) {
  std::optional<pdl::PlatformDescription> platform;
  if (!pdl.empty()) platform = load_platform(pdl);
  const auto kernels = compile_checked(file, platform ? &*platform : nullptr, err);
  out << file << ": ok, " << kernels.size() << (kernels.size() == 1 ? " directive" : " directives") << '\n';
  for (const auto& k : kernels) {
    out << "  " << k.name << " line " << k.loc.line << " device(" << k.device.to_string() << ") scheduling("
        << k.scheduling.to_string() << ")\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string file;
  std::string pdl;
  std::string input;
  std::string output;
  std::optional<double> batch_mb;
  std::uint64_t seed = 42;
  std::string directive;
  std::string timing = "wall";
  std::optional<unsigned> cpu_workers;
};

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const auto platform = load_platform(a.pdl);
  const auto kernels = compile_checked(a.file, &platform, err);
  const auto& spec = pick_kernel(kernels, a.directive);
  const auto kernel = runtime::ExecutableKernel::from_spec(spec);
  const auto in_cols = pipeline::input_columns(kernel);
  const auto out_cols = pipeline::output_columns(kernel);

  std::unique_ptr<pipeline::BatchSource> source;
  if (a.input.rfind("gen:", 0) == 0) {
    const std::string n = a.input.substr(4);
    double mb = 0;
    try {
      std::size_t used = 0;
      mb = std::stod(n, &used);
      if (used != n.size()) throw std::invalid_argument(n);
    } catch (const std::exception&) {
      throw UserError("--input gen:N needs a number of megabytes, got '" + n + "'");
    }
    if (!(mb > 0)) throw UserError("--input gen:N needs a positive size");
    source = std::make_unique<pipeline::GeneratedSource>(pipeline::GeneratedSource::megabytes(in_cols, mb, a.seed));
  } else {
    if (in_cols.empty()) {
      throw UserError("directive " + spec.name + " reads no arrays; use --input gen:N to set the stream length");
    }
    try {
      source = std::make_unique<pipeline::FileSource>(a.input, in_cols);
    } catch (const pipeline::PipelineError& e) {
      throw IoError(e.what());
    }
  }

  std::unique_ptr<pipeline::BatchSink> sink;
  pipeline::DiscardSink* discard = nullptr;
  if (a.output == "discard") {
    auto d = std::make_unique<pipeline::DiscardSink>();
    discard = d.get();
    sink = std::move(d);
  } else {
    try {
      sink = std::make_unique<pipeline::FileSink>(a.output, out_cols);
    } catch (const pipeline::PipelineError& e) {
      throw IoError(e.what());
    }
  }

  pipeline::PipelineOptions opt;
  opt.execute.timing = parse_timing(a.timing);
  opt.execute.cpu_workers = a.cpu_workers;
  if (a.batch_mb) {
    if (!(*a.batch_mb > 0)) throw UserError("--batch-mb must be positive");
    opt.batch_elements = runtime::mb_to_elements(*a.batch_mb, widest_element(kernel));
  }

  const auto result = pipeline::run_pipeline(*source, kernel, platform, spec.device, spec.scheduling, *sink, opt);

  const auto& s = result.stats;
  out << "directive: " << spec.name << '\n';
  out << "batches: " << result.batches << '\n';
  out << "elements: " << s.total_elements << '\n';
  out << "bytes_moved: " << s.bytes_moved << '\n';
  out << std::fixed << std::setprecision(6);
  out << "pipeline_wall_s: " << result.wall_time << '\n';
  out << "timing: " << (s.timing == runtime::Timing::Simulated ? "simulated" : "wall") << '\n';
  out << "elapsed_s: " << s.elapsed() << '\n';
  out << std::setprecision(3) << "throughput_mb_s: " << s.throughput_mb_s() << '\n';
  for (const auto& pu : s.per_pu) {
    out << "pu " << pu.id << " (" << pdl::to_string(pu.kind) << "): chunks " << pu.chunks_claimed << ", elements "
        << pu.elements_processed << ", transferred " << pu.bytes_transferred << " B\n";
  }
  if (discard) out << "output: discarded\n";
  else out << "output: " << a.output << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  std::string pdl;
  std::string plan = "desk";
  std::string out_path;
  std::string timing = "simulated";
  std::uint64_t seed = 42;
  bool verbose = false;
};

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  const auto platform = load_platform(a.pdl);
  bench::ExperimentPlan plan;
  try {
    plan = bench::plan_by_name(a.plan);
  } catch (const bench::PlanError& e) {
    if (a.plan != "desk" && a.plan != "full" && !fs::exists(a.plan)) throw IoError(e.what());
    throw UserError(e.what());
  }
  bench::BenchOptions opt;
  opt.timing = parse_timing(a.timing);
  opt.seed = a.seed;
  if (a.verbose) {
    opt.on_row = [&](const bench::ResultRow& r) {
      err << r.kernel << " stream " << r.stream_mb << " MB chunk " << r.chunk_mb << " MB " << r.device_config
          << " #" << r.repeat_index << ": " << std::fixed << std::setprecision(1) << r.throughput_mb_s << " MB/s\n"
          << std::defaultfloat;
    };
  }
  const auto rows = bench::run_experiment(plan, platform, opt);
  const std::string csv = bench::summarize(rows);
  {
    std::ofstream f(a.out_path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + a.out_path + "'");
    f << csv;
    if (!f) throw IoError("write failure on '" + a.out_path + "'");
  }
  out << rows.size() << " verified runs, " << plan.cells() << " cells written to " << a.out_path << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- loc

int do_loc(const std::string& path, std::ostream& out) {
  std::map<std::string, bench::LocCount> counts;
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    try {
      counts = bench::count_pragma_loc(path);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
  } else {
    counts[fs::path(path).filename().string()] = bench::count_pragma_loc_text(read_source(path));
  }
  bench::LocCount total;
  out << "file,total_loc,hstream_loc\n";
  for (const auto& [name, c] : counts) {
    out << name << ',' << c.total_loc << ',' << c.hstream_loc << '\n';
    total.total_loc += c.total_loc;
    total.hstream_loc += c.hstream_loc;
  }
  out << "TOTAL," << total.total_loc << ',' << total.hstream_loc << '\n';
  return kExitOk;
}

}  // namespace

std::vector<frontend::Diagnostic> check_devices(const std::vector<frontend::KernelSpec>& kernels,
                                                const pdl::PlatformDescription& platform) {
  std::vector<frontend::Diagnostic> out;
  for (const auto& k : kernels) {
    for (PuId id : k.device.ids()) {
      if (!platform.find(id)) {
        out.push_back({std::string(frontend::codes::kUnknownDevice),
                       "device(" + k.device.to_string() + ") names PU " + std::to_string(id) + ", which platform '" +
                           platform.name + "' does not describe",
                       k.loc});
      }
    }
  }
  return out;
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Source-to-source compiler and streaming runtime for #pragma hstream programs", "hstreamc"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  CompileArgs compile_args;
  auto* compile = app.add_subcommand("compile", "Generate OpenMP, CUDA and LEO variants plus a driver");
  compile->set_version_flag("--version", kVersion);
  compile->add_option("file", compile_args.file, "HSTREAM-C source")->required();
  compile->add_option("--pdl", compile_args.pdl, "Platform description")->required();
  compile->add_option("--out-dir", compile_args.out_dir, "Directory for generated files")->capture_default_str();
  compile->add_option("--target", compile_args.targets, "Targets to emit (openmp, cuda, leo)")->delimiter(',');
  compile->add_option("--templates", compile_args.templates, "Template directory");
  compile->add_option("--block-size", compile_args.block_size, "CUDA threads per block")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  std::string check_file, check_pdl;
  auto* check = app.add_subcommand("check", "Run the frontend and print diagnostics");
  check->set_version_flag("--version", kVersion);
  check->add_option("file", check_file, "HSTREAM-C source")->required();
  check->add_option("--pdl", check_pdl, "Also check device ids against this platform");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Stream data through one directive");
  run->set_version_flag("--version", kVersion);
  run->add_option("file", run_args.file, "HSTREAM-C source")->required();
  run->add_option("--pdl", run_args.pdl, "Platform description")->required();
  run->add_option("--input", run_args.input, "Input stream file, or gen:N for N MiB of generated data")->required();
  run->add_option("--output", run_args.output, "Output stream file, or 'discard'")->required();
  run->add_option("--batch-mb", run_args.batch_mb, "Batch size in MiB");
  run->add_option("--seed", run_args.seed, "Seed for gen:N input")->capture_default_str();
  run->add_option("--directive", run_args.directive, "Directive to run (function name or index)");
  run->add_option("--timing", run_args.timing, "wall or simulated")->capture_default_str();
  run->add_option("--cpu-workers", run_args.cpu_workers, "Worker threads for the CPU path")->check(CLI::PositiveNumber);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Run the STREAM kernel sweep and write a CSV summary");
  bench->set_version_flag("--version", kVersion);
  bench->add_option("--pdl", bench_args.pdl, "Platform description")->required();
  bench->add_option("--plan", bench_args.plan, "desk, full, or a key=value plan file")->capture_default_str();
  bench->add_option("--out", bench_args.out_path, "CSV output path")->required();
  bench->add_option("--timing", bench_args.timing, "simulated or wall")->capture_default_str();
  bench->add_option("--seed", bench_args.seed, "Seed for generated input")->capture_default_str();
  bench->add_flag("--verbose", bench_args.verbose, "Print every run to the error stream");

  std::string loc_path;
  auto* loc = app.add_subcommand("loc", "Count code lines and #pragma hstream lines");
  loc->set_version_flag("--version", kVersion);
  loc->add_option("path", loc_path, "A .hs.c file or a directory of them")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (*compile) return do_compile(compile_args, out, err);
    if (*check) return do_check(check_file, check_pdl, out, err);
    if (*run) return do_run(run_args, out, err);
    if (*bench) return do_bench(bench_args, out, err);
    if (*loc) return do_loc(loc_path, out);
  } catch (const Handled& h) {
    return h.code;
  } catch (const IoError& e) {
    err << "hstreamc: error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const codegen::TemplateError& e) {
    err << "hstreamc: error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const pipeline::PipelineError& e) {
    err << "hstreamc: error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::ios_base::failure& e) {
    err << "hstreamc: error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const fs::filesystem_error& e) {
    err << "hstreamc: error: " << e.what() << '\n';
    return kExitIoError;
  } catch (const std::exception& e) {
    err << "hstreamc: error: " << e.what() << '\n';
    return kExitUserError;
  }
  return kExitUserError;
}

}  // namespace hstream::cli
