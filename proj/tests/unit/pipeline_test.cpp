#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <random>

#include "hstream/pipeline/pipeline.hpp"
#include "support/oracle.hpp"

namespace hstream {
namespace {

using namespace std::chrono_literals;
using pipeline::Batch;
using pipeline::CollectSink;
using pipeline::ColumnSpec;
using pipeline::GeneratedSource;
using pipeline::MemorySource;
using pipeline::PipelineError;
using pipeline::PipelineOptions;
using pipeline::ProcessedBatch;
using pipeline::Stage;
using runtime::ExecutableKernel;
using runtime::HostArrays;

const pdl::PlatformDescription& disa() {
  static const auto p = pdl::load_pdl(testing::program_path("platforms/disa.pdl"));
  return p;
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "hstream_pipeline_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

ExecutableKernel kernel_of(const std::string& rel) { return ExecutableKernel::from_spec(testing::load_kernel(rel)); }

PipelineOptions batch_of(std::size_t n) {
  PipelineOptions o;
  o.batch_elements = n;
  return o;
}

std::vector<double> iota_doubles(std::size_t n, double from = 0) {
  std::vector<double> v(n);
  std::iota(v.begin(), v.end(), from);
  return v;
}

// ---------------------------------------------------------------- produce

TEST(Produce, TenElementsInBatchesOfFour) {
  const auto k = kernel_of("valid/copy.hs.c");
  HostArrays in;
  in.set("b", iota_doubles(10));
  MemorySource src(in);
  CollectSink sink;
  const auto r = pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(3), sink, batch_of(4));
  EXPECT_EQ(r.batches, 3u);
  EXPECT_EQ(sink.order(), (std::vector<std::size_t>{0, 1, 2}));
  for (std::size_t s = 0; s < 3; ++s) EXPECT_TRUE(r.trace.find(s, Stage::Read).has_value());
  EXPECT_EQ(sink.data().doubles("a"), iota_doubles(10));
}

TEST(Produce, MemorySourceSlicesLastBatchShort) {
  HostArrays in;
  in.set("b", iota_doubles(10));
  MemorySource src(in);
  std::vector<std::size_t> lengths;
  while (auto b = src.next(4)) lengths.push_back(b->length);
  EXPECT_EQ(lengths, (std::vector<std::size_t>{4, 4, 2}));
}

TEST(Produce, EmptySourceShutsDownCleanly) {
  const auto k = kernel_of("valid/copy.hs.c");
  HostArrays in;
  in.set("b", std::vector<double>{});
  MemorySource src(in);
  pipeline::DiscardSink sink;
  const auto r = pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(8), sink, batch_of(4));
  EXPECT_EQ(r.batches, 0u);
  EXPECT_EQ(sink.batches(), 0u);
  EXPECT_EQ(r.stats.total_elements, 0u);
  EXPECT_TRUE(r.trace.entries().empty());
}

TEST(Produce, FileOfTwoToTheTwentyDoublesGivesFourBatches) {
  const auto k = kernel_of("valid/copy.hs.c");
  const auto path = temp_file("copy_in.bin");
  HostArrays data;
  data.set("b", iota_doubles(1u << 20));
  pipeline::write_stream_file(path, pipeline::input_columns(k), data);
  EXPECT_EQ(std::filesystem::file_size(path), (1u << 20) * 8u);

  pipeline::FileSource src(path, pipeline::input_columns(k));
  pipeline::DiscardSink sink;
  const auto r =
      pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(65536), sink, batch_of(1u << 18));
  EXPECT_EQ(r.batches, 4u);
  EXPECT_EQ(sink.elements(), 1u << 20);
}

TEST(Produce, TruncatedRecordIsAReadFailure) {
  const auto k = kernel_of("valid/copy.hs.c");
  const auto path = temp_file("truncated.bin");
  {
    std::ofstream out(path, std::ios::binary);
    const char junk[12] = {};
    out.write(junk, sizeof junk);
  }
  pipeline::FileSource src(path, pipeline::input_columns(k));
  pipeline::DiscardSink sink;
  EXPECT_THROW(pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(8), sink, batch_of(4)),
               PipelineError);
}

TEST(Produce, MissingInputFileIsReported) {
  EXPECT_THROW(pipeline::FileSource(temp_file("does_not_exist.bin"), {{"b", frontend::ScalarType::Double}}),
               PipelineError);
  EXPECT_THROW(pipeline::FileSource(temp_file("x.bin"), {}), PipelineError);
}

TEST(Produce, GeneratedDataIsIndependentOfBatching) {
  const std::vector<ColumnSpec> cols{{"x", frontend::ScalarType::Double}, {"m", frontend::ScalarType::Int}};
  GeneratedSource whole(cols, 1000, 7);
  const auto all = whole.next(1000).value();
  GeneratedSource pieces(cols, 1000, 7);
  std::vector<double> xs;
  std::vector<std::int32_t> ms;
  while (auto b = pieces.next(37)) {
    const auto& x = b->arrays.doubles("x");
    const auto& m = b->arrays.ints("m");
    xs.insert(xs.end(), x.begin(), x.end());
    ms.insert(ms.end(), m.begin(), m.end());
  }
  EXPECT_EQ(xs, all.arrays.doubles("x"));
  EXPECT_EQ(ms, all.arrays.ints("m"));
  for (double v : xs) {
    EXPECT_GE(v, -1.0);
    EXPECT_LT(v, 1.0);
  }
  for (auto v : ms) {
    EXPECT_GE(v, 1);
    EXPECT_LE(v, 65536);
  }
  GeneratedSource other(cols, 1000, 8);
  EXPECT_NE(other.next(1000)->arrays.doubles("x"), all.arrays.doubles("x"));
}

TEST(Produce, GeneratedMegabytesSizing) {
  EXPECT_EQ(GeneratedSource::megabytes({{"b", frontend::ScalarType::Double}}, 4).total(), 4u * 131072u);
  EXPECT_EQ(GeneratedSource::megabytes({{"m", frontend::ScalarType::Int}}, 1).total(), 262144u);
  EXPECT_EQ(GeneratedSource::megabytes({}, 1).total(), 131072u);
}

// ---------------------------------------------------------------- process

TEST(Process, TriadBatchOfFour) {
  auto k = kernel_of("valid/triad.hs.c");
  k.set_scalar("scalar", 2.0);
  Batch b;
  b.length = 4;
  b.arrays.set("a", std::vector<double>(4, 0.0));
  b.arrays.set("b", std::vector<double>(4, 1.0));
  b.arrays.set("c", std::vector<double>(4, 1.0));
  const auto out = pipeline::process_batch(b, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(1));
  EXPECT_EQ(out.outputs.doubles("a"), std::vector<double>(4, 3.0));
  EXPECT_EQ(out.stats.total_elements, 4u);
  EXPECT_EQ(out.stats.bytes_moved, 4u * 24u);
}

TEST(Process, SingleElementBatch) {
  const auto k = kernel_of("valid/copy.hs.c");
  Batch b;
  b.seq = 9;
  b.length = 1;
  b.arrays.set("b", std::vector<double>{5.5});
  const auto out = pipeline::process_batch(b, k, disa(), DeviceSelector::all(), SchedulingSpec::automatic());
  EXPECT_EQ(out.seq, 9u);
  EXPECT_EQ(out.outputs.doubles("a"), std::vector<double>{5.5});
}

TEST(Process, CopyIsTheIdentity) {
  const auto k = kernel_of("valid/copy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 50000);
  CollectSink sink;
  pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(1000), sink, batch_of(8192));
  GeneratedSource again(pipeline::input_columns(k), 50000);
  EXPECT_EQ(sink.data().doubles("a"), again.next(50000)->arrays.doubles("b"));
}

TEST(Process, MissingColumnIsRejected) {
  const auto k = kernel_of("valid/triad.hs.c");
  Batch b;
  b.length = 2;
  b.arrays.set("b", std::vector<double>(2));
  EXPECT_THROW(pipeline::process_batch(b, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(1)), PipelineError);
}

TEST(Process, FillStreamsByLengthAlone) {
  const auto k = kernel_of("valid/fill.hs.c");
  EXPECT_TRUE(pipeline::input_columns(k).empty());
  MemorySource src(HostArrays{}, 10);
  CollectSink sink;
  pipeline::run_pipeline(src, k, disa(), DeviceSelector::ids({0, 1}), SchedulingSpec::uniform(3), sink, batch_of(4));
  EXPECT_EQ(sink.data().doubles("a"), std::vector<double>(10, 7.0));
  EXPECT_THROW(MemorySource(HostArrays{}), PipelineError);
}

TEST(Process, DefaultBatchSize) {
  const auto triad = kernel_of("valid/triad.hs.c");
  EXPECT_EQ(pipeline::default_batch_elements(triad, disa(), DeviceSelector::all(), SchedulingSpec::uniform(4096)),
            4u * 5u * 4096u);
  EXPECT_EQ(pipeline::default_batch_elements(triad, disa(), DeviceSelector::ids({0, 2}), SchedulingSpec::automatic()),
            4u * 2u * 131072u);
  EXPECT_EQ(pipeline::default_batch_elements(triad, disa(), DeviceSelector::ids({0, 1}),
                                             SchedulingSpec::device_specific({{0, 100}, {1, 300}})),
            1600u);
  EXPECT_THROW(pipeline::default_batch_elements(triad, disa(), DeviceSelector::ids({0, 1}),
                                                SchedulingSpec::device_specific({{0, 100}})),
               runtime::ConfigError);
  EXPECT_THROW(pipeline::default_batch_elements(triad, disa(), DeviceSelector::ids({9}), SchedulingSpec::uniform(1)),
               runtime::ConfigError);
}

// ---------------------------------------------------------------- store

ProcessedBatch numbered(std::size_t seq, std::size_t len) {
  ProcessedBatch b;
  b.seq = seq;
  b.length = len;
  b.outputs.set("a", iota_doubles(len, static_cast<double>(seq * 1000)));
  return b;
}

TEST(Store, OutOfOrderCompletionIsWrittenInSeqOrder) {
  CollectSink sink;
  std::vector<ProcessedBatch> done;
  for (std::size_t s : {1, 0, 2}) done.push_back(numbered(s, 3));
  pipeline::store_in_order(std::move(done), sink);
  EXPECT_EQ(sink.order(), (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Store, HundredRandomCompletionOrders) {
  std::mt19937 rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<ProcessedBatch> done;
    for (std::size_t s = 0; s < n; ++s) done.push_back(numbered(s, 1 + rng() % 5));
    std::vector<double> expect;
    for (const auto& b : done) {
      const auto& v = b.outputs.doubles("a");
      expect.insert(expect.end(), v.begin(), v.end());
    }
    std::shuffle(done.begin(), done.end(), rng);
    CollectSink sink;
    pipeline::store_in_order(std::move(done), sink);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    ASSERT_EQ(sink.order(), order);
    ASSERT_EQ(sink.data().doubles("a"), expect);
  }
}

TEST(Store, ReorderBufferRejectsDuplicatesAndReportsGaps) {
  pipeline::ReorderBuffer rb;
  EXPECT_TRUE(rb.push(numbered(2, 1)).empty());
  EXPECT_EQ(rb.push(numbered(0, 1)).size(), 1u);
  EXPECT_THROW(rb.push(numbered(0, 1)), PipelineError);
  EXPECT_THROW(rb.push(numbered(2, 1)), PipelineError);
  EXPECT_EQ(rb.push(numbered(1, 1)).size(), 2u);
  EXPECT_EQ(rb.max_pending(), 2u);

  CollectSink sink;
  std::vector<ProcessedBatch> gap;
  gap.push_back(numbered(1, 1));
  EXPECT_THROW(pipeline::store_in_order(std::move(gap), sink), PipelineError);
}

TEST(Store, ZeroBatchesCreateAnEmptyFile) {
  const auto k = kernel_of("valid/copy.hs.c");
  const auto path = temp_file("empty_out.bin");
  std::filesystem::remove(path);
  HostArrays in;
  in.set("b", std::vector<double>{});
  MemorySource src(in);
  pipeline::FileSink sink(path, pipeline::output_columns(k));
  pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(8), sink, batch_of(4));
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_EQ(std::filesystem::file_size(path), 0u);
}

TEST(Store, DiscardSinkStillAggregatesStats) {
  const auto k = kernel_of("valid/triad.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 10000);
  pipeline::DiscardSink sink;
  const auto r = pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(512), sink, batch_of(3000));
  EXPECT_EQ(sink.batches(), 4u);
  EXPECT_EQ(r.stats.total_elements, 10000u);
  EXPECT_EQ(r.stats.bytes_moved, 10000u * k.bytes_per_element());
  std::size_t per_pu = 0;
  for (const auto& s : r.stats.per_pu) per_pu += s.elements_processed;
  EXPECT_EQ(per_pu, 10000u);
}

TEST(Store, FileRoundTripWithMixedTypes) {
  const auto spec = testing::compile_ok(
      "double x[100];\nint m[100];\ndouble z[100];\nint w[100];\n"
      "#pragma hstream in(x,m) out(z,w)\n{\n  z = x*2.0;\n  w = m+1;\n}\n");
  const auto k = ExecutableKernel::from_spec(spec.at(0));
  const auto in_path = temp_file("mixed_in.bin");
  const auto out_path = temp_file("mixed_out.bin");

  GeneratedSource gen(pipeline::input_columns(k), 777, 5);
  const auto data = gen.next(777)->arrays;
  pipeline::write_stream_file(in_path, pipeline::input_columns(k), data);
  EXPECT_EQ(std::filesystem::file_size(in_path), 777u * 12u);

  pipeline::FileSource src(in_path, pipeline::input_columns(k));
  pipeline::FileSink sink(out_path, pipeline::output_columns(k));
  pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(50), sink, batch_of(100));

  pipeline::FileSource back(out_path, pipeline::output_columns(k));
  const auto out = back.next(10000).value();
  ASSERT_EQ(out.length, 777u);
  for (std::size_t i = 0; i < 777; ++i) {
    ASSERT_EQ(out.arrays.doubles("z")[i], data.doubles("x")[i] * 2.0);
    ASSERT_EQ(out.arrays.ints("w")[i], data.ints("m")[i] + 1);
  }
}

// ---------------------------------------------------------------- run_pipeline

TEST(RunPipeline, ProcessOverlapsTheWriteOfThePreviousBatch) {
  const auto k = kernel_of("valid/copy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 300);
  pipeline::DiscardSink sink;
  auto opt = batch_of(100);
  opt.delays = {20ms, 20ms, 20ms};
  const auto r = pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(10), sink, opt);
  EXPECT_EQ(r.trace.batches(), 3u);
  EXPECT_TRUE(r.trace.stage_ordering_holds());
  EXPECT_FALSE(r.trace.write_process_overlaps().empty());
  EXPECT_LT(r.wall_time, 9 * 0.020);
}

TEST(RunPipeline, SingleBatchTraceKeepsStageOrder) {
  const auto k = kernel_of("valid/copy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 5);
  pipeline::DiscardSink sink;
  const auto r = pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(2), sink, batch_of(100));
  EXPECT_EQ(r.trace.entries().size(), 3u);
  EXPECT_TRUE(r.trace.stage_ordering_holds());
  EXPECT_TRUE(r.trace.write_process_overlaps().empty());
}

TEST(RunPipeline, SlowWriterBlocksTheProducer) {
  const auto k = kernel_of("valid/copy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 80);
  pipeline::DiscardSink sink;
  auto opt = batch_of(10);
  opt.queue_capacity = 1;
  opt.delays.write = 15ms;
  const auto r = pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(5), sink, opt);
  EXPECT_EQ(r.batches, 8u);
  EXPECT_GT(r.producer_blocked_seconds, 0.0);
  EXPECT_LE(r.input_queue_high_water, 1u);
  EXPECT_LE(r.output_queue_high_water, 1u);
}

TEST(RunPipeline, MatchesWholeStreamOracleForEveryKernel) {
  for (const auto& rel : testing::valid_corpus()) {
    const auto spec = testing::load_kernel(rel);
    const auto k = ExecutableKernel::from_spec(spec);
    const std::size_t n = 20011;

    // Whole-stream reference: generate everything at once and walk it.
    HostArrays whole;
    if (auto first = GeneratedSource(pipeline::input_columns(k), n, 3).next(n)) whole = first->arrays;
    for (const auto& name : k.arrays()) {
      if (!whole.contains(name)) whole.set(name, std::vector<double>(n));
    }
    testing::SequentialOracle(spec).run(whole);

    for (std::size_t batch : {1000u, 4096u, 20011u}) {
      std::unique_ptr<pipeline::BatchSource> src;
      if (pipeline::input_columns(k).empty()) {
        src = std::make_unique<MemorySource>(HostArrays{}, n);
      } else {
        src = std::make_unique<GeneratedSource>(pipeline::input_columns(k), n, 3);
      }
      CollectSink sink;
      auto opt = batch_of(batch);
      opt.execute.timing = runtime::Timing::Simulated;
      pipeline::run_pipeline(*src, k, disa(), spec.device, spec.scheduling, sink, opt);
      for (const auto& name : k.writes()) {
        ASSERT_EQ(sink.data().doubles(name), whole.doubles(name)) << rel << " batch " << batch;
      }
    }
  }
}

TEST(RunPipeline, KernelErrorShutsEverythingDown) {
  const auto spec = testing::compile_ok(
      "int m[100];\nint k[100];\nint r[100];\n#pragma hstream in(m,k) out(r)\n{\n  r = m/k;\n}\n");
  const auto kernel = ExecutableKernel::from_spec(spec.at(0));
  HostArrays in;
  in.set("m", std::vector<std::int32_t>(5000, 10));
  std::vector<std::int32_t> divisors(5000, 2);
  divisors[3333] = 0;
  in.set("k", divisors);
  MemorySource src(in);
  pipeline::DiscardSink sink;
  try {
    pipeline::run_pipeline(src, kernel, disa(), DeviceSelector::all(), SchedulingSpec::uniform(100), sink, batch_of(500));
    FAIL() << "expected a kernel error";
  } catch (const runtime::KernelError& e) {
    EXPECT_NE(std::string(e.what()).find("division by zero"), std::string::npos);
  }
  EXPECT_LE(sink.batches(), 6u);
}

TEST(RunPipeline, SinkFailureShutsEverythingDown) {
  const auto k = kernel_of("valid/copy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 100000);
  int written = 0;
  pipeline::CallbackSink sink([&](const ProcessedBatch&) {
    if (++written == 2) throw PipelineError("disk full");
  });
  EXPECT_THROW(pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(64), sink, batch_of(100)),
               PipelineError);
  EXPECT_EQ(written, 2);
}

TEST(RunPipeline, ConfigurationErrorsSurface) {
  const auto k = kernel_of("valid/copy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 100);
  pipeline::DiscardSink sink;
  EXPECT_THROW(pipeline::run_pipeline(src, k, disa(), DeviceSelector::ids({42}), SchedulingSpec::uniform(4), sink, batch_of(10)),
               runtime::ConfigError);
}

TEST(RunPipeline, KeepInputsCarriesTheBatchInputs) {
  const auto k = kernel_of("valid/daxpy.hs.c");
  GeneratedSource src(pipeline::input_columns(k), 300, 11);
  std::vector<double> ys;
  pipeline::CallbackSink sink([&](const ProcessedBatch& b) {
    const auto& y = b.inputs.doubles("y");
    ys.insert(ys.end(), y.begin(), y.end());
    EXPECT_TRUE(b.inputs.contains("x"));
  });
  auto opt = batch_of(128);
  opt.keep_inputs = true;
  pipeline::run_pipeline(src, k, disa(), DeviceSelector::all(), SchedulingSpec::uniform(16), sink, opt);
  GeneratedSource again(pipeline::input_columns(k), 300, 11);
  EXPECT_EQ(ys, again.next(300)->arrays.doubles("y"));
}

}  // namespace
}  // namespace hstream
