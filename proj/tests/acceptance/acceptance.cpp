// Acceptance suite. Prints one PASS or FAIL line per criterion and exits
// non-zero if any criterion fails. Pass criterion numbers as arguments to
// run a subset, e.g. `acceptance 3 5`.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <set>
#include <sstream>

#include "hstream/bench/bench.hpp"
#include "hstream/cli/cli.hpp"
#include "hstream/codegen/codegen.hpp"
#include "hstream/frontend/frontend.hpp"
#include "hstream/pipeline/pipeline.hpp"
#include "support/oracle.hpp"

namespace {

using namespace hstream;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Pinned limits and tolerances.
constexpr double kGoldenBudgetSeconds = 1.0;
constexpr std::size_t kMinInvalidPrograms = 12;
constexpr int kSchedulingCases = 1000;
constexpr std::size_t kSchedulingMaxN = 1000000;
constexpr std::size_t kSchedulingMaxPus = 8;
constexpr double kSchedulingBudgetSeconds = 30.0;
constexpr std::size_t kOracleN = 100000;
constexpr double kOracleBudgetSeconds = 60.0;
constexpr auto kStageDelay = std::chrono::milliseconds(10);
constexpr std::size_t kOverlapBatches = 8;
constexpr double kOverlapFactor = 0.75;
constexpr int kCompletionSchedules = 100;
constexpr std::size_t kExpectedPragmaLines = 8;
constexpr double kHeterogeneousTolerance = 0.02;
constexpr double kBenchBudgetSeconds = 300.0;

struct Verdict {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(precision);
  s << v;
  return s.str();
}

const pdl::PlatformDescription& disa() {
  static const auto p = pdl::load_pdl(testing::program_path("platforms/disa.pdl"));
  return p;
}

// ---------------------------------------------------------------- 1

Verdict golden_codegen() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto spec = testing::load_kernel("triad/triad.hs.c");
  const codegen::CodeGenerator gen(codegen::TemplateStore::load(HSTREAM_TEMPLATE_DIR));
  const std::pair<codegen::TargetKind, const char*> cases[] = {{codegen::TargetKind::OpenMP, "triad_omp.golden"},
                                                                {codegen::TargetKind::Cuda, "triad_cuda.golden"},
                                                                {codegen::TargetKind::Leo, "triad_leo.golden"}};
  const std::map<codegen::TargetKind, std::vector<std::string>> must_contain{
      {codegen::TargetKind::OpenMP, {"#pragma omp parallel for"}},
      {codegen::TargetKind::Cuda, {"threadIdx.x + blockIdx.x * blockDim.x", "if (idx < len)"}},
      {codegen::TargetKind::Leo, {"#pragma offload target(mic: cpu_thread_id)"}}};
  for (const auto& [target, golden] : cases) {
    const std::string region = gen.generate(target, spec).region;
    const std::string expect = testing::read_file(std::string(HSTREAM_GOLDEN_DIR) + "/" + golden);
    if (codegen::normalize_whitespace(region) != codegen::normalize_whitespace(expect)) {
      v.fail(std::string(codegen::to_string(target)) + " differs from " + golden);
    }
    for (const auto& needle : must_contain.at(target)) {
      if (region.find(needle) == std::string::npos) v.fail(std::string(codegen::to_string(target)) + " lacks " + needle);
    }
  }
  const double t = seconds_since(t0);
  if (t >= kGoldenBudgetSeconds) v.fail("took " + fmt(t) + " s");
  if (v.pass) v.detail = "3 targets match goldens in " + fmt(t) + " s";
  return v;
}

// ---------------------------------------------------------------- 2

Verdict semantic_errors() {
  Verdict v;
  std::vector<fs::path> invalid;
  for (const auto& e : fs::directory_iterator(testing::program_path("invalid"))) {
    if (e.path().string().ends_with(".hs.c")) invalid.push_back(e.path());
  }
  std::sort(invalid.begin(), invalid.end());
  if (invalid.size() < kMinInvalidPrograms) v.fail("only " + std::to_string(invalid.size()) + " invalid programs");

  const std::regex expect_re(R"(//\s*expect:\s*([A-Z_]+))");
  std::set<std::string> covered;
  for (const auto& f : invalid) {
    const std::string src = testing::read_file(f.string());
    std::smatch m;
    if (!std::regex_search(src, m, expect_re)) {
      v.fail(f.filename().string() + " has no expect line");
      continue;
    }
    std::set<std::string> got;
    for (const auto& d : frontend::compile_source(src).errors) got.insert(d.code);
    if (got != std::set<std::string>{m[1]}) {
      std::string list;
      for (const auto& c : got) list += c + " ";
      v.fail(f.filename().string() + ": expected " + m[1].str() + ", got " + (list.empty() ? "nothing" : list));
    }
    covered.insert(m[1]);
  }
  for (auto code : {frontend::codes::kDupDevice, frontend::codes::kDupScheduling, frontend::codes::kUndeclared,
                    frontend::codes::kTypeMismatch, frontend::codes::kDupDeclaration, frontend::codes::kOutOfScope}) {
    if (!covered.count(std::string(code))) v.fail("no program exercises " + std::string(code));
  }
  std::size_t false_positives = 0;
  for (const auto& rel : testing::valid_corpus()) {
    if (!frontend::compile_source(testing::read_file(testing::program_path(rel))).ok()) ++false_positives;
  }
  for (const auto& k : bench::kernel_catalog()) {
    if (!frontend::compile_source(k.source).ok()) ++false_positives;
  }
  if (false_positives) v.fail(std::to_string(false_positives) + " false positives on valid programs");
  if (v.pass) {
    v.detail = std::to_string(invalid.size()) + " invalid programs, " + std::to_string(covered.size()) +
               " codes, 0 false positives";
  }
  return v;
}

// ---------------------------------------------------------------- 3

pdl::PlatformDescription platform_with(std::size_t pus) {
  pdl::PlatformDescription p;
  p.name = "acceptance";
  for (std::size_t i = 0; i < pus; ++i) {
    pdl::ProcessingUnit pu;
    pu.id = static_cast<PuId>(i);
    pu.kind = i == 0 ? pdl::PuKind::Cpu : (i % 2 ? pdl::PuKind::Gpu : pdl::PuKind::Mic);
    if (i == 0) pu.threads = 4;
    pu.memory_gb = 8;
    pu.sim = pdl::SimParams::defaults_for(pu.kind);
    p.pus.push_back(pu);
  }
  return p;
}

Verdict chunk_scheduling() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto fill = runtime::ExecutableKernel::from_spec(bench::find_kernel("FILL").spec);
  std::mt19937_64 rng(20240611);
  std::size_t total_claims = 0;
  for (int c = 0; c < kSchedulingCases && v.pass; ++c) {
    // Log-uniform sizes so small and large index spaces are both common.
    const auto n = static_cast<std::size_t>(
        std::exp(std::uniform_real_distribution<double>(0, std::log(static_cast<double>(kSchedulingMaxN)))(rng)));
    const std::size_t nn = std::clamp<std::size_t>(n, 1, kSchedulingMaxN);
    // Chunk sizes: half uniform over [1, n], half log-uniform so that
    // thousands of claims per run also occur.
    std::size_t chunk = 1 + rng() % nn;
    if (c % 4 >= 2) {
      chunk = static_cast<std::size_t>(
          std::exp(std::uniform_real_distribution<double>(0, std::log(static_cast<double>(nn) + 1))(rng)));
    }
    const std::size_t cc = std::clamp<std::size_t>(chunk, 1, nn);
    const std::size_t pus = 1 + rng() % kSchedulingMaxPus;

    const auto platform = platform_with(pus);
    runtime::HostArrays host;
    host.set("a", std::vector<double>(nn));
    runtime::ExecuteOptions opt;
    opt.record_claims = true;
    opt.timing = c % 2 ? runtime::Timing::Simulated : runtime::Timing::Wall;
    opt.cpu_workers = 1;
    const auto stats =
        runtime::execute(fill, host, platform, DeviceSelector::all(), SchedulingSpec::uniform(cc), opt);

    auto claims = stats.claims;
    total_claims += claims.size();
    std::sort(claims.begin(), claims.end(),
              [](const runtime::ClaimRecord& a, const runtime::ClaimRecord& b) { return a.chunk.start < b.chunk.start; });
    std::size_t expect_start = 0;
    for (const auto& cl : claims) {
      if (cl.chunk.start != expect_start || cl.chunk.finish <= cl.chunk.start || cl.chunk.size() > cc) {
        v.fail("case " + std::to_string(c) + ": claims overlap, leave a gap or exceed the chunk");
        break;
      }
      expect_start = cl.chunk.finish;
    }
    if (expect_start != nn) v.fail("case " + std::to_string(c) + ": claims do not cover [0, n)");
    std::size_t per_pu_sum = 0;
    for (const auto& s : stats.per_pu) per_pu_sum += s.elements_processed;
    if (per_pu_sum != nn) v.fail("case " + std::to_string(c) + ": per-PU elements sum to " + std::to_string(per_pu_sum));
    const auto& a = host.doubles("a");
    if (std::any_of(a.begin(), a.end(), [](double x) { return x != 3.0; })) {
      v.fail("case " + std::to_string(c) + ": some element was not computed");
    }
  }
  const double t = seconds_since(t0);
  if (t >= kSchedulingBudgetSeconds) v.fail("took " + fmt(t) + " s");
  if (v.pass) {
    v.detail = std::to_string(kSchedulingCases) + " cases, " + std::to_string(total_claims) + " claims, " + fmt(t) + " s";
  }
  return v;
}

// ---------------------------------------------------------------- 4

Verdict oracle_equivalence() {
  Verdict v;
  const auto t0 = Clock::now();
  const std::pair<const char*, DeviceSelector> configs[] = {
      {"CPU", DeviceSelector::ids({0})}, {"1 GPU", DeviceSelector::ids({1})}, {"CPU+4GPUs", DeviceSelector::all()}};
  int runs = 0;
  std::uint64_t seed = 1;
  for (const auto& k : bench::kernel_catalog()) {
    const auto kernel = runtime::ExecutableKernel::from_spec(k.spec);
    const auto input = testing::random_arrays(k.spec, kOracleN, seed++);
    auto expect = input;
    testing::SequentialOracle(k.spec).run(expect);
    for (const auto& [name, selector] : configs) {
      for (std::size_t chunk : {1u, 7u, 4096u}) {
        auto host = input;
        runtime::execute(kernel, host, disa(), selector, SchedulingSpec::uniform(chunk));
        ++runs;
        if (!testing::bitwise_equal(host, expect)) {
          v.fail(k.name + " on " + name + " with chunk " + std::to_string(chunk) + " differs from the oracle");
        }
      }
    }
  }
  const double t = seconds_since(t0);
  if (t >= kOracleBudgetSeconds) v.fail("took " + fmt(t) + " s");
  if (v.pass) v.detail = std::to_string(runs) + " runs bitwise equal, " + fmt(t) + " s";
  return v;
}

// ---------------------------------------------------------------- 5

Verdict pipeline_overlap() {
  Verdict v;
  const auto kernel = runtime::ExecutableKernel::from_spec(bench::find_kernel("TRIAD").spec);
  const std::size_t per_batch = 1000;
  pipeline::GeneratedSource src(pipeline::input_columns(kernel), per_batch * kOverlapBatches);
  pipeline::CollectSink sink;
  pipeline::PipelineOptions opt;
  opt.batch_elements = per_batch;
  opt.delays = {kStageDelay, kStageDelay, kStageDelay};
  const auto r = pipeline::run_pipeline(src, kernel, disa(), DeviceSelector::all(), SchedulingSpec::uniform(100), sink, opt);

  const double serialized = 3.0 * std::chrono::duration<double>(kStageDelay).count() * kOverlapBatches;
  if (r.batches != kOverlapBatches) v.fail("ran " + std::to_string(r.batches) + " batches");
  if (!r.trace.stage_ordering_holds()) v.fail("a batch started a stage before finishing the previous one");
  const auto overlaps = r.trace.write_process_overlaps();
  if (overlaps.empty()) v.fail("no write(b) overlapped process(b+1)");
  if (r.wall_time >= kOverlapFactor * serialized) {
    v.fail("wall " + fmt(r.wall_time) + " s not below " + fmt(kOverlapFactor * serialized) + " s");
  }
  std::vector<std::size_t> seq(kOverlapBatches);
  std::iota(seq.begin(), seq.end(), 0);
  if (sink.order() != seq) v.fail("pipeline delivered batches out of order");

  // Order preservation under arbitrary completion orders.
  std::mt19937 rng(99);
  for (int s = 0; s < kCompletionSchedules && v.pass; ++s) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<pipeline::ProcessedBatch> done(n);
    std::vector<double> expect;
    for (std::size_t i = 0; i < n; ++i) {
      done[i].seq = i;
      done[i].length = 1 + rng() % 4;
      std::vector<double> values(done[i].length);
      for (auto& x : values) x = static_cast<double>(rng());
      expect.insert(expect.end(), values.begin(), values.end());
      done[i].outputs.set("a", std::move(values));
    }
    std::shuffle(done.begin(), done.end(), rng);
    pipeline::CollectSink collect;
    pipeline::store_in_order(std::move(done), collect);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (collect.order() != order || collect.data().doubles("a") != expect) {
      v.fail("completion schedule " + std::to_string(s) + " was written out of order");
    }
  }
  if (v.pass) {
    v.detail = std::to_string(overlaps.size()) + " write/process overlaps, wall " + fmt(r.wall_time) + " s < " +
               fmt(kOverlapFactor * serialized) + " s, " + std::to_string(kCompletionSchedules) +
               " completion orders preserved";
  }
  return v;
}

// ---------------------------------------------------------------- 6

Verdict loc_parity() {
  Verdict v;
  const std::string dir = testing::program_path("stream");
  std::vector<std::string> args{"hstreamc", "loc", dir};
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) v.fail("loc exited " + std::to_string(code) + ": " + err.str());
  const std::regex total_re(R"(TOTAL,(\d+),(\d+))");
  std::smatch m;
  const std::string text = out.str();
  if (!std::regex_search(text, m, total_re)) {
    v.fail("loc printed no TOTAL line");
  } else if (std::stoul(m[2]) != kExpectedPragmaLines) {
    v.fail("loc reports " + m[2].str() + " pragma lines");
  } else if (v.pass) {
    v.detail = "stream.hs.c has " + m[2].str() + " directive lines of " + m[1].str() + " code lines";
  }
  return v;
}

// ---------------------------------------------------------------- 7

Verdict heterogeneous_wins() {
  Verdict v;
  const auto t0 = Clock::now();
  const auto plan = bench::ExperimentPlan::desk();
  const auto rows = bench::run_experiment(plan, disa());
  const double t = seconds_since(t0);

  std::map<std::string, std::map<std::string, std::pair<double, int>>> means;
  for (const auto& r : rows) {
    auto& [sum, count] = means[r.kernel][r.device_config];
    sum += r.throughput_mb_s;
    ++count;
  }
  double worst = 1e300;
  std::string worst_kernel;
  for (const auto& [kernel, by_config] : means) {
    auto mean = [&](const char* cfg) {
      const auto& [sum, count] = by_config.at(cfg);
      return sum / count;
    };
    const double best_single = std::max(mean("CPU"), mean("4GPUs"));
    const double ratio = mean("CPU+4GPUs") / best_single;
    if (ratio < worst) {
      worst = ratio;
      worst_kernel = kernel;
    }
    if (ratio < 1.0 - kHeterogeneousTolerance) {
      v.fail(kernel + ": CPU+4GPUs " + fmt(mean("CPU+4GPUs"), 1) + " MB/s below best single " + fmt(best_single, 1));
    }
  }
  if (t >= kBenchBudgetSeconds) v.fail("desk sweep took " + fmt(t, 1) + " s");
  if (v.pass) {
    v.detail = std::to_string(rows.size()) + " verified runs, worst CPU+4GPUs/best ratio " + fmt(worst) + " (" +
               worst_kernel + "), " + fmt(t, 1) + " s";
  }
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"golden codegen", golden_codegen},
      {"semantic-error suite", semantic_errors},
      {"chunk scheduling properties", chunk_scheduling},
      {"oracle equivalence", oracle_equivalence},
      {"pipeline overlap and ordering", pipeline_overlap},
      {"pragma LOC parity", loc_parity},
      {"heterogeneous beats homogeneous", heterogeneous_wins},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int number = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(number)) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << criteria[i].first << "): " << v.detail
              << std::endl;
  }
  if (selected.empty() || selected.count(8)) {
    std::cout << "NOTE criterion 8: absolute hardware throughput is not reproduced; criteria 3-5 and 7 use "
                 "property-based and simulated checks instead"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
