#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "hstream/bench/bench.hpp"
#include "support/oracle.hpp"

namespace hstream {
namespace {

using bench::DeviceConfig;
using bench::ExperimentPlan;
using bench::LocCount;
using bench::ResultRow;

const pdl::PlatformDescription& disa() {
  static const auto p = pdl::load_pdl(testing::program_path("platforms/disa.pdl"));
  return p;
}

ExperimentPlan small_plan(std::vector<std::string> kernels, std::vector<double> streams, std::vector<double> chunks,
                          std::vector<DeviceConfig> configs, int repeats) {
  return {std::move(kernels), std::move(streams), std::move(chunks), std::move(configs), repeats};
}

const DeviceConfig kCpu{"CPU", DeviceSelector::ids({0})};
const DeviceConfig kGpus{"4GPUs", DeviceSelector::ids({1, 2, 3, 4})};
const DeviceConfig kAll{"CPU+4GPUs", DeviceSelector::all()};

double throughput_of(const std::vector<ResultRow>& rows, const std::string& config) {
  for (const auto& r : rows) {
    if (r.device_config == config) return r.throughput_mb_s;
  }
  ADD_FAILURE() << "no row for " << config;
  return 0;
}

// ---------------------------------------------------------------- catalog

TEST(Catalog, HoldsTheSixKernels) {
  const auto& cat = bench::kernel_catalog();
  ASSERT_EQ(cat.size(), 6u);
  std::vector<std::string> names;
  for (const auto& k : cat) names.push_back(k.name);
  EXPECT_EQ(names, (std::vector<std::string>{"COPY", "SCALE", "ADD", "TRIAD", "FILL", "DAXPY"}));
  EXPECT_EQ(bench::find_kernel("TRIAD").formula, "a = b+scalar*c;");
  EXPECT_EQ(bench::find_kernel("daxpy").formula, "y = y+scalar*x;");
  EXPECT_EQ(bench::find_kernel("COPY").formula, "a = b;");
  EXPECT_EQ(bench::find_kernel("SCALE").formula, "a = scalar*b;");
  EXPECT_EQ(bench::find_kernel("ADD").formula, "c = a+b;");
  EXPECT_EQ(bench::find_kernel("FILL").formula, "a = scalar;");
}

TEST(Catalog, SumIsAnotherNameForAdd) {
  EXPECT_EQ(&bench::find_kernel("SUM"), &bench::find_kernel("ADD"));
  EXPECT_THROW(bench::find_kernel("NOPE"), std::invalid_argument);
}

TEST(Catalog, BytesPerElementFollowsStreamConvention) {
  const std::map<std::string, std::size_t> expect{{"COPY", 16}, {"SCALE", 16}, {"ADD", 24},
                                                  {"TRIAD", 24}, {"FILL", 8},   {"DAXPY", 24}};
  for (const auto& k : bench::kernel_catalog()) EXPECT_EQ(k.bytes_per_element(), expect.at(k.name)) << k.name;
}

TEST(Catalog, KernelsComputeTheirFormulas) {
  for (const auto& k : bench::kernel_catalog()) {
    const auto exec = runtime::ExecutableKernel::from_spec(k.spec);
    auto host = testing::random_arrays(k.spec, 257, 9);
    auto expect = host;
    testing::SequentialOracle(k.spec).run(expect);
    exec.run_on(host, 0, 257);
    EXPECT_TRUE(testing::bitwise_equal(host, expect)) << k.name;
  }
}

// ---------------------------------------------------------------- plans

TEST(Plans, DeskAndFullShapes) {
  const auto desk = ExperimentPlan::desk();
  EXPECT_EQ(desk.stream_sizes_mb, (std::vector<double>{4, 8, 16, 32, 64, 128}));
  EXPECT_EQ(desk.chunk_sizes_mb, (std::vector<double>{0.25, 0.5, 1}));
  EXPECT_EQ(desk.device_configs.size(), 3u);
  EXPECT_EQ(desk.kernels.size(), 6u);
  EXPECT_EQ(desk.cells(), 6u * 6u * 3u * 3u);
  const auto full = ExperimentPlan::full();
  EXPECT_EQ(full.stream_sizes_mb, (std::vector<double>{256, 512, 1024, 2048, 4096, 8192}));
  EXPECT_EQ(full.chunk_sizes_mb, (std::vector<double>{1, 2, 4, 8, 16, 32, 64}));
  EXPECT_EQ(full.repeats, 10);
  EXPECT_EQ(bench::plan_by_name("desk"), desk);
  EXPECT_EQ(bench::plan_by_name("full"), full);
}

TEST(Plans, KeyValueFile) {
  const auto plan = bench::parse_plan(
      "# small sweep\n"
      "kernels = triad, sum\n"
      "stream_sizes_mb = 8, 16   # per array\n"
      "chunk_sizes_mb = 2\n"
      "device_configs = CPU:0; two:1,2; every:*\n"
      "repeats = 4\n");
  EXPECT_EQ(plan.kernels, (std::vector<std::string>{"TRIAD", "ADD"}));
  EXPECT_EQ(plan.stream_sizes_mb, (std::vector<double>{8, 16}));
  EXPECT_EQ(plan.chunk_sizes_mb, (std::vector<double>{2}));
  ASSERT_EQ(plan.device_configs.size(), 3u);
  EXPECT_EQ(plan.device_configs[1].selector, DeviceSelector::ids({1, 2}));
  EXPECT_TRUE(plan.device_configs[2].selector.is_all());
  EXPECT_EQ(plan.repeats, 4);
}

TEST(Plans, MissingKeysKeepDeskValues) {
  const auto plan = bench::parse_plan("repeats = 1\n");
  auto desk = ExperimentPlan::desk();
  desk.repeats = 1;
  EXPECT_EQ(plan, desk);
}

TEST(Plans, BadInputIsRejected) {
  EXPECT_THROW(bench::parse_plan("colour = red\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("kernels = TRIAD, FOO\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("stream_sizes_mb = 4, x\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("stream_sizes_mb = -4\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("repeats = 0\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("repeats = 1.5\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("device_configs = CPU\n"), bench::PlanError);
  EXPECT_THROW(bench::parse_plan("just words\n"), bench::PlanError);
  EXPECT_THROW(bench::plan_by_name("/nonexistent/plan.txt"), bench::PlanError);
  try {
    bench::parse_plan("repeats = 2\nwhat = 1\n");
    FAIL();
  } catch (const bench::PlanError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  ExperimentPlan empty;
  EXPECT_THROW(empty.validate(), bench::PlanError);
}

// ---------------------------------------------------------------- sweep

TEST(Experiment, FactorialRowCount) {
  const auto rows = bench::run_experiment(small_plan({"TRIAD"}, {8}, {2}, {kCpu, kAll}, 3), disa());
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.verified);
    EXPECT_GT(r.throughput_mb_s, 0);
    EXPECT_EQ(r.kernel, "TRIAD");
  }
  EXPECT_EQ(rows[0].repeat_index, 0);
  EXPECT_EQ(rows[2].repeat_index, 2);
  EXPECT_EQ(rows[3].device_config, "CPU+4GPUs");
}

TEST(Experiment, SimulatedThroughputMatchesTheCostModel) {
  // Uniform chunks that divide the stream: the makespan is exact.
  const auto rows = bench::run_experiment(small_plan({"TRIAD"}, {4}, {0.25}, {kCpu, kGpus, kAll}, 1), disa());
  const double mib = 1048576.0;
  const double cpu_rate = 1.0 * runtime::kReferenceRate;  // elements per second
  const double gpu_seconds_per_element = 0.001 * 32 / mib + 1.0 / (4.0 * runtime::kReferenceRate);
  const double gpu_rate = 1.0 / gpu_seconds_per_element;
  const double bytes = 24;
  const double cpu = cpu_rate * bytes / mib;
  const double gpus = 4 * gpu_rate * bytes / mib;
  EXPECT_NEAR(throughput_of(rows, "CPU"), cpu, cpu * 1e-9);
  EXPECT_NEAR(throughput_of(rows, "4GPUs"), gpus, gpus * 1e-9);
  const double all = throughput_of(rows, "CPU+4GPUs");
  EXPECT_GE(all, std::max(cpu, gpus));
  EXPECT_LE(all, (cpu + gpus) * (1 + 1e-9));
}

TEST(Experiment, HeterogeneousNeverLosesToCpuOnly) {
  for (const auto& k : bench::kernel_catalog()) {
    const auto rows = bench::run_experiment(small_plan({k.name}, {2}, {0.25, 1}, {kCpu, kAll}, 1), disa());
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      EXPECT_GE(rows[i + 1].throughput_mb_s, rows[i].throughput_mb_s) << k.name << " chunk " << rows[i].chunk_mb;
    }
  }
}

TEST(Experiment, AddingAProcessingUnitNeverLowersThroughput) {
  std::vector<DeviceConfig> growing;
  std::vector<PuId> ids;
  for (PuId id = 0; id <= 4; ++id) {
    ids.push_back(id);
    growing.push_back({"first" + std::to_string(id + 1), DeviceSelector::ids(ids)});
  }
  for (const char* kernel : {"COPY", "FILL", "DAXPY"}) {
    const auto rows = bench::run_experiment(small_plan({kernel}, {2}, {0.125}, growing, 1), disa());
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_GE(rows[i].throughput_mb_s, rows[i - 1].throughput_mb_s * 0.98) << kernel << " " << rows[i].device_config;
    }
  }
}

TEST(Experiment, StreamSizeBarelyMattersOnceChunksAreMany) {
  // At least 128 chunks per stream so batch rounding is amortized.
  const auto rows =
      bench::run_experiment(small_plan({"TRIAD"}, {2, 4, 8}, {1.0 / 64}, {kCpu, kGpus, kAll}, 1), disa());
  for (const auto* cfg : {"CPU", "4GPUs", "CPU+4GPUs"}) {
    double lo = 1e300, hi = 0;
    for (const auto& r : rows) {
      if (r.device_config != cfg) continue;
      lo = std::min(lo, r.throughput_mb_s);
      hi = std::max(hi, r.throughput_mb_s);
    }
    EXPECT_LE(hi / lo, 1.02) << cfg;
  }
}

TEST(Experiment, ChunkLargerThanStreamStillVerifies) {
  const auto rows = bench::run_experiment(small_plan({"DAXPY"}, {1}, {32}, {kAll}, 1), disa());
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].verified);
}

TEST(Experiment, WallTimingAlsoVerifies) {
  bench::BenchOptions opt;
  opt.timing = runtime::Timing::Wall;
  int seen = 0;
  opt.on_row = [&](const ResultRow&) { ++seen; };
  const auto rows = bench::run_experiment(small_plan({"SCALE", "FILL"}, {1}, {0.25}, {kAll}, 2), disa(), opt);
  EXPECT_EQ(rows.size(), 4u);
  EXPECT_EQ(seen, 4);
}

TEST(Experiment, BadPlatformNamesTheCell) {
  try {
    bench::run_experiment(small_plan({"COPY"}, {1}, {1}, {{"ghost", DeviceSelector::ids({7})}}, 1), disa());
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("COPY stream 1 MB chunk 1 MB on ghost"), std::string::npos) << e.what();
  }
}

// ---------------------------------------------------------------- summary

ResultRow row(std::string kernel, double stream, double chunk, std::string cfg, double tput) {
  return {std::move(kernel), stream, chunk, std::move(cfg), 0, tput, true};
}

TEST(Summary, MeanOfRepeats) {
  const auto csv = bench::summarize({row("TRIAD", 8, 1, "CPU", 100), row("TRIAD", 8, 1, "CPU", 110),
                                     row("TRIAD", 8, 1, "CPU", 120)});
  EXPECT_EQ(csv,
            "kernel,stream_mb,chunk_mb,device_config,mean_throughput_mb_s,repeats\n"
            "TRIAD,8,1,CPU,110.000,3\n");
}

TEST(Summary, SingleRow) {
  const auto cells = bench::summarize_cells({row("COPY", 4, 0.25, "4GPUs", 42.5)});
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(cells[0].mean_throughput_mb_s, 42.5);
  EXPECT_EQ(cells[0].repeats, 1);
  EXPECT_THROW(bench::summarize({}), std::invalid_argument);
}

TEST(Summary, CellsAreSortedLikeAReferenceSort) {
  std::mt19937 rng(5);
  const std::vector<std::string> kernels{"TRIAD", "ADD", "COPY"};
  const std::vector<double> sizes{128, 4, 16};
  const std::vector<std::string> cfgs{"CPU+4GPUs", "CPU", "4GPUs"};
  std::vector<ResultRow> rows;
  for (int i = 0; i < 300; ++i) {
    rows.push_back(row(kernels[rng() % 3], sizes[rng() % 3], sizes[rng() % 3] / 64, cfgs[rng() % 3], rng() % 1000));
  }
  const auto cells = bench::summarize_cells(rows);
  using Key = std::tuple<std::string, double, double, std::string>;
  std::vector<Key> keys;
  for (const auto& r : rows) keys.emplace_back(r.kernel, r.stream_mb, r.chunk_mb, r.device_config);
  std::sort(keys.begin(), keys.end());
  keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
  ASSERT_EQ(cells.size(), keys.size());
  for (std::size_t i = 0; i < keys.size(); ++i) {
    EXPECT_EQ(Key(cells[i].kernel, cells[i].stream_mb, cells[i].chunk_mb, cells[i].device_config), keys[i]);
  }
  const auto csv = bench::summarize(rows);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), keys.size() + 1);
}

// ---------------------------------------------------------------- loc

TEST(Loc, StreamBenchmarkHasEightDirectiveLines) {
  const auto counts = bench::count_pragma_loc(testing::program_path("stream"));
  ASSERT_EQ(counts.size(), 1u);
  EXPECT_EQ(counts.at("stream.hs.c").hstream_loc, 8u);
  EXPECT_GT(counts.at("stream.hs.c").total_loc, 8u);
}

TEST(Loc, FileWithoutPragmas) {
  EXPECT_EQ(bench::count_pragma_loc_text("double a[4];\n\nvoid F()\n{\n}\n"), (LocCount{4, 0}));
  EXPECT_EQ(bench::count_pragma_loc_text(""), (LocCount{0, 0}));
}

TEST(Loc, CommentsAndContinuations) {
  const std::string src =
      "// header comment\n"
      "/* block\n"
      "   comment */\n"
      "double a[4]; /* trailing */\n"
      "#pragma hstream in(a) \\\n"
      "    out(a)\n"
      "  # pragma   hstream in(a)\n"
      "#pragma omp parallel for\n"
      "// #pragma hstream in(a)\n"
      "/* x */ a = 1.0; // y\n";
  EXPECT_EQ(bench::count_pragma_loc_text(src), (LocCount{6, 3}));
}

TEST(Loc, DirectoryListingAndErrors) {
  const auto dir = std::filesystem::temp_directory_path() / "hstream_loc_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "one.hs.c") << "#pragma hstream out(a)\n{\n  a = 1.0;\n}\n";
  std::ofstream(dir / "empty.hs.c") << "";
  std::ofstream(dir / "notes.txt") << "#pragma hstream\n";
  const auto counts = bench::count_pragma_loc(dir);
  EXPECT_EQ(counts.size(), 2u);
  EXPECT_EQ(counts.at("one.hs.c"), (LocCount{4, 1}));
  EXPECT_EQ(counts.at("empty.hs.c"), (LocCount{0, 0}));
  EXPECT_THROW(bench::count_pragma_loc(dir / "missing"), std::runtime_error);
}

}  // namespace
}  // namespace hstream
