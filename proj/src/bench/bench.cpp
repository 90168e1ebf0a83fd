#include "hstream/bench/bench.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstring>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>
#include <tuple>

#include "hstream/frontend/frontend.hpp"
#include "hstream/pipeline/pipeline.hpp"

namespace hstream::bench {

namespace {

struct CatalogEntry {
  const char* name;
  const char* function;
  const char* declarations;
  const char* clauses;
  const char* formula;
};

// Declared sizes are nominal; the streamed length decides how much runs.
constexpr CatalogEntry kEntries[] = {
    {"COPY", "Copy", "double a[1048576];\ndouble b[1048576];\n", "in(b) out(a)", "a = b;"},
    {"SCALE", "Scale", "double a[1048576];\ndouble b[1048576];\ndouble scalar = 3.0;\n", "in(b,scalar) out(a)",
     "a = scalar*b;"},
    {"ADD", "Add", "double a[1048576];\ndouble b[1048576];\ndouble c[1048576];\n", "in(a,b) out(c)", "c = a+b;"},
    {"TRIAD", "Triad", "double a[1048576];\ndouble b[1048576];\ndouble c[1048576];\ndouble scalar = 3.0;\n",
     "in(b,c,a,scalar) out(a)", "a = b+scalar*c;"},
    {"FILL", "Fill", "double a[1048576];\ndouble scalar = 3.0;\n", "in(scalar) out(a)", "a = scalar;"},
    {"DAXPY", "Daxpy", "double x[1048576];\ndouble y[1048576];\ndouble scalar = 3.0;\n", "in(x,scalar) inout(y)",
     "y = y+scalar*x;"},
};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_number(const std::string& text, int line) {
  double v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw PlanError("line " + std::to_string(line) + ": '" + text + "' is not a number");
  return v;
}

std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

bool same_bits(const runtime::Column& a, const runtime::Column& b) {
  if (a.index() != b.index() || runtime::column_size(a) != runtime::column_size(b)) return false;
  return std::visit(
      [&](const auto& va) {
        const auto& vb = std::get<std::decay_t<decltype(va)>>(b);
        return std::memcmp(va.data(), vb.data(), va.size() * sizeof(va[0])) == 0;
      },
      a);
}

// Inputs bigger than this are regenerated for every run instead of being
// held in memory for the whole cell.
constexpr std::size_t kShareLimitBytes = std::size_t{1} << 30;

}  // namespace

// ---------------------------------------------------------------- catalog

std::size_t KernelDef::bytes_per_element() const { return runtime::ExecutableKernel::from_spec(spec).bytes_per_element(); }

const std::vector<KernelDef>& kernel_catalog() {
  static const std::vector<KernelDef> catalog = [] {
    std::vector<KernelDef> out;
    for (const auto& e : kEntries) {
      KernelDef def;
      def.name = e.name;
      def.formula = e.formula;
      def.source = std::string(e.declarations) + "\nvoid " + e.function + "()\n{\n    #pragma hstream " + e.clauses +
                   "\n    {\n        " + e.formula + "\n    }\n}\n";
      auto result = frontend::compile_source(def.source);
      if (!result.ok() || result.kernels.size() != 1) {
        throw std::logic_error("catalog kernel " + def.name + " does not compile");
      }
      def.spec = std::move(result.kernels.front());
      out.push_back(std::move(def));
    }
    return out;
  }();
  return catalog;
}

const KernelDef& find_kernel(std::string_view name) {
  std::string key = upper(name);
  if (key == "SUM") key = "ADD";
  for (const auto& k : kernel_catalog()) {
    if (k.name == key) return k;
  }
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

// ---------------------------------------------------------------- plans

void ExperimentPlan::validate() const {
  if (kernels.empty()) throw PlanError("plan lists no kernels");
  if (stream_sizes_mb.empty()) throw PlanError("plan lists no stream sizes");
  if (chunk_sizes_mb.empty()) throw PlanError("plan lists no chunk sizes");
  if (device_configs.empty()) throw PlanError("plan lists no device configurations");
  if (repeats < 1) throw PlanError("repeats must be at least 1");
  for (const auto& k : kernels) {
    try {
      find_kernel(k);
    } catch (const std::invalid_argument& e) {
      throw PlanError(e.what());
    }
  }
  for (double s : stream_sizes_mb) {
    if (!(s > 0)) throw PlanError("stream sizes must be positive");
  }
  for (double c : chunk_sizes_mb) {
    if (!(c > 0)) throw PlanError("chunk sizes must be positive");
  }
  for (const auto& d : device_configs) {
    if (d.name.empty()) throw PlanError("device configuration without a name");
  }
}

std::size_t ExperimentPlan::cells() const {
  return kernels.size() * stream_sizes_mb.size() * chunk_sizes_mb.size() * device_configs.size();
}

namespace {

std::vector<DeviceConfig> disa_configs() {
  return {{"CPU", DeviceSelector::ids({0})},
          {"4GPUs", DeviceSelector::ids({1, 2, 3, 4})},
          {"CPU+4GPUs", DeviceSelector::all()}};
}

std::vector<std::string> all_kernel_names() {
  std::vector<std::string> out;
  for (const auto& k : kernel_catalog()) out.push_back(k.name);
  return out;
}

}  // namespace

ExperimentPlan ExperimentPlan::desk() {
  return {all_kernel_names(), {4, 8, 16, 32, 64, 128}, {0.25, 0.5, 1}, disa_configs(), 3};
}

ExperimentPlan ExperimentPlan::full() {
  return {all_kernel_names(), {256, 512, 1024, 2048, 4096, 8192}, {1, 2, 4, 8, 16, 32, 64}, disa_configs(), 10};
}

ExperimentPlan parse_plan(std::string_view text) {
  ExperimentPlan plan = ExperimentPlan::desk();
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw PlanError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto numbers = [&] {
      std::vector<double> out;
      for (const auto& item : split(value, ',')) out.push_back(parse_number(item, line_no));
      return out;
    };
    if (key == "kernels") {
      plan.kernels.clear();
      for (const auto& item : split(value, ',')) {
        try {
          plan.kernels.push_back(find_kernel(item).name);
        } catch (const std::invalid_argument& e) {
          throw PlanError("line " + std::to_string(line_no) + ": " + e.what());
        }
      }
    } else if (key == "stream_sizes_mb") {
      plan.stream_sizes_mb = numbers();
    } else if (key == "chunk_sizes_mb") {
      plan.chunk_sizes_mb = numbers();
    } else if (key == "repeats") {
      const double r = parse_number(value, line_no);
      if (r != static_cast<int>(r)) throw PlanError("line " + std::to_string(line_no) + ": repeats must be an integer");
      plan.repeats = static_cast<int>(r);
    } else if (key == "device_configs") {
      plan.device_configs.clear();
      for (const auto& entry : split(value, ';')) {
        const auto colon = entry.find(':');
        if (colon == std::string::npos) {
          throw PlanError("line " + std::to_string(line_no) + ": device config '" + entry + "' needs name:ids");
        }
        DeviceConfig cfg;
        cfg.name = trim(std::string_view(entry).substr(0, colon));
        const std::string ids = trim(std::string_view(entry).substr(colon + 1));
        if (ids == "*") {
          cfg.selector = DeviceSelector::all();
        } else {
          std::vector<PuId> list;
          for (const auto& id : split(ids, ',')) {
            const double v = parse_number(id, line_no);
            if (v < 0 || v != static_cast<PuId>(v)) throw PlanError("line " + std::to_string(line_no) + ": bad PU id '" + id + "'");
            list.push_back(static_cast<PuId>(v));
          }
          cfg.selector = DeviceSelector::ids(std::move(list));
        }
        plan.device_configs.push_back(std::move(cfg));
      }
    } else {
      throw PlanError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  plan.validate();
  return plan;
}

ExperimentPlan plan_by_name(const std::string& name_or_path) {
  if (name_or_path == "desk") return ExperimentPlan::desk();
  if (name_or_path == "full") return ExperimentPlan::full();
  std::ifstream in(name_or_path);
  if (!in) throw PlanError("cannot read plan file '" + name_or_path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_plan(ss.str());
}

// ---------------------------------------------------------------- sweep

std::vector<ResultRow> run_experiment(const ExperimentPlan& plan, const pdl::PlatformDescription& platform,
                                      const BenchOptions& options) {
  plan.validate();
  std::vector<ResultRow> rows;
  rows.reserve(plan.cells() * static_cast<std::size_t>(plan.repeats));

  for (const auto& kernel_name : plan.kernels) {
    const KernelDef& def = find_kernel(kernel_name);
    const auto kernel = runtime::ExecutableKernel::from_spec(def.spec);
    const auto in_cols = pipeline::input_columns(kernel);

    for (double stream_mb : plan.stream_sizes_mb) {
      const std::size_t n = runtime::mb_to_elements(stream_mb, 8);
      std::shared_ptr<const runtime::HostArrays> shared;
      if (n * pipeline::record_bytes(in_cols) <= kShareLimitBytes) {
        pipeline::GeneratedSource gen(in_cols, n, options.seed);
        auto first = gen.next(n);
        shared = std::make_shared<const runtime::HostArrays>(first ? std::move(first->arrays) : runtime::HostArrays{});
      }

      for (double chunk_mb : plan.chunk_sizes_mb) {
        const auto scheduling = SchedulingSpec::uniform(runtime::mb_to_elements(chunk_mb, 8));
        for (const auto& config : plan.device_configs) {
          for (int rep = 0; rep < plan.repeats; ++rep) {
            std::unique_ptr<pipeline::BatchSource> source;
            if (shared) {
              source = std::make_unique<pipeline::MemorySource>(shared, n);
            } else {
              source = std::make_unique<pipeline::GeneratedSource>(in_cols, n, options.seed);
            }

            auto describe = [&] {
              std::ostringstream cell;
              cell << def.name << " stream " << format_number(stream_mb) << " MB chunk " << format_number(chunk_mb)
                   << " MB on " << config.name << " repeat " << rep;
              return cell.str();
            };

            pipeline::CallbackSink verify([&](const pipeline::ProcessedBatch& batch) {
              runtime::HostArrays host = batch.inputs;
              for (const auto& name : kernel.arrays()) {
                if (!host.contains(name)) host.set(name, std::vector<double>(batch.length));
              }
              kernel.run_on(host, 0, batch.length);
              for (const auto& name : kernel.writes()) {
                if (!same_bits(host.at(name), batch.outputs.at(name))) {
                  throw VerificationError("verification failed for " + describe() + ": array '" + name +
                                          "' of batch " + std::to_string(batch.seq) +
                                          " differs from sequential evaluation");
                }
              }
            });

            pipeline::PipelineOptions popt;
            popt.keep_inputs = true;
            popt.execute.timing = options.timing;
            pipeline::PipelineResult result;
            try {
              result = pipeline::run_pipeline(*source, kernel, platform, config.selector, scheduling, verify, popt);
            } catch (const VerificationError&) {
              throw;
            } catch (const std::exception& e) {
              throw std::runtime_error(describe() + ": " + e.what());
            }

            ResultRow row{def.name, stream_mb, chunk_mb, config.name, rep, result.stats.throughput_mb_s(), true};
            if (options.on_row) options.on_row(row);
            rows.push_back(std::move(row));
          }
        }
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------- summary

std::vector<CellSummary> summarize_cells(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("nothing to summarize");
  using Key = std::tuple<std::string, double, double, std::string>;
  std::map<Key, std::pair<double, int>> cells;
  for (const auto& r : rows) {
    auto& [sum, count] = cells[Key{r.kernel, r.stream_mb, r.chunk_mb, r.device_config}];
    sum += r.throughput_mb_s;
    ++count;
  }
  std::vector<CellSummary> out;
  for (const auto& [key, acc] : cells) {
    const auto& [kernel, stream, chunk, config] = key;
    out.push_back({kernel, stream, chunk, config, acc.first / acc.second, acc.second});
  }
  return out;
}

std::string summarize(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  out << "kernel,stream_mb,chunk_mb,device_config,mean_throughput_mb_s,repeats\n";
  for (const auto& c : summarize_cells(rows)) {
    char mean[64];
    std::snprintf(mean, sizeof mean, "%.3f", c.mean_throughput_mb_s);
    out << csv_field(c.kernel) << ',' << format_number(c.stream_mb) << ',' << format_number(c.chunk_mb) << ','
        << csv_field(c.device_config) << ',' << mean << ',' << c.repeats << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------- loc

LocCount count_pragma_loc_text(std::string_view source) {
  LocCount count;
  bool in_block_comment = false;
  bool continues_directive = false;
  std::size_t pos = 0;
  while (pos < source.size()) {
    auto eol = source.find('\n', pos);
    if (eol == std::string_view::npos) eol = source.size();
    const std::string_view line = source.substr(pos, eol - pos);
    pos = eol + 1;

    // Strip comments, keeping only code characters.
    std::string code;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (in_block_comment) {
        if (line.compare(i, 2, "*/") == 0) {
          in_block_comment = false;
          ++i;
        }
        continue;
      }
      if (line.compare(i, 2, "/*") == 0) {
        in_block_comment = true;
        ++i;
        continue;
      }
      if (line.compare(i, 2, "//") == 0) break;
      code += line[i];
    }
    const std::string trimmed = trim(code);
    if (trimmed.empty()) {
      continues_directive = false;
      continue;
    }
    ++count.total_loc;

    bool directive = continues_directive;
    if (!directive && trimmed[0] == '#') {
      std::istringstream words(trimmed.substr(1));
      std::string w1, w2;
      words >> w1 >> w2;
      directive = w1 == "pragma" && w2 == "hstream";
    }
    if (directive) ++count.hstream_loc;
    continues_directive = directive && trimmed.back() == '\\';
  }
  return count;
}

std::map<std::string, LocCount> count_pragma_loc(const std::filesystem::path& corpus_dir) {
  std::error_code ec;
  std::filesystem::directory_iterator it(corpus_dir, ec);
  if (ec) throw std::runtime_error("cannot read directory '" + corpus_dir.string() + "': " + ec.message());
  std::map<std::string, LocCount> out;
  for (const auto& entry : it) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || name.size() < 5 || name.compare(name.size() - 5, 5, ".hs.c") != 0) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + entry.path().string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    out[name] = count_pragma_loc_text(ss.str());
  }
  return out;
}

}  // namespace hstream::bench
