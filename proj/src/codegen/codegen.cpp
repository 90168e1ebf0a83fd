#include "hstream/codegen/codegen.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <stdexcept>

#include "hstream/frontend/printer.hpp"

namespace hstream::codegen {

using frontend::KernelSpec;
using frontend::ScalarType;
using frontend::Shape;
using frontend::VarInfo;

std::string_view to_string(TargetKind t) {
  switch (t) {
    case TargetKind::OpenMP:
      return "openmp";
    case TargetKind::Cuda:
      return "cuda";
    case TargetKind::Leo:
      return "leo";
  }
  return "?";
}

std::optional<TargetKind> parse_target(std::string_view name) {
  for (TargetKind t : kAllTargets) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

namespace {

std::string c_type(ScalarType t) { return t == ScalarType::Int ? "int" : "double"; }

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_value(const frontend::ScalarValue& v) {
  if (const auto* i = std::get_if<std::int32_t>(&v)) return std::to_string(*i);
  return format_double(std::get<double>(v));
}

// Arrays named by the clauses (ins first, then outs not already listed),
// followed by the scalar ins. This is the parameter order of every variant.
struct Signature {
  std::vector<VarInfo> arrays;
  std::vector<VarInfo> scalars;
};

Signature signature_of(const KernelSpec& k) {
  Signature sig;
  std::set<std::string> seen;
  for (const auto& v : k.ins) {
    if (v.is_elementwise() && seen.insert(v.name).second) sig.arrays.push_back(v);
  }
  for (const auto& v : k.outs) {
    if (v.is_elementwise() && seen.insert(v.name).second) sig.arrays.push_back(v);
  }
  sig.scalars = k.scalar_ins();
  return sig;
}

std::vector<std::string> value_params(const Signature& sig) {
  std::vector<std::string> out;
  for (const auto& a : sig.arrays) out.push_back(c_type(a.type) + " *" + a.name);
  for (const auto& s : sig.scalars) out.push_back(c_type(s.type) + " " + s.name);
  return out;
}

// One C statement per body assignment, arrays indexed by `index`.
std::vector<std::string> body_lines(const KernelSpec& k, const std::string& index) {
  std::set<std::string> locals;
  for (const auto& l : k.locals) locals.insert(l.name);
  std::set<std::string> elementwise;
  for (const auto& v : k.arrays_in_body) elementwise.insert(v.name);
  for (const auto& v : k.ins) {
    if (v.is_elementwise()) elementwise.insert(v.name);
  }
  for (const auto& v : k.outs) elementwise.insert(v.name);

  auto rename = [&](const std::string& name) {
    if (!locals.count(name) && elementwise.count(name)) return name + "[" + index + "]";
    return name;
  };

  std::vector<std::string> lines;
  std::set<std::string> declared;
  for (const auto& st : k.body) {
    std::string line;
    if (st.local && declared.insert(st.target).second) {
      const auto it = std::find_if(k.locals.begin(), k.locals.end(), [&](const VarInfo& v) { return v.name == st.target; });
      line = c_type(it != k.locals.end() ? it->type : ScalarType::Double) + " " + st.target;
    } else {
      line = rename(st.target);
    }
    line += " = " + frontend::print_expr(st.value, rename) + ";";
    lines.push_back(std::move(line));
  }
  return lines;
}

std::string array_length_expr(const KernelSpec& k) {
  const Signature sig = signature_of(k);
  if (sig.arrays.empty()) return "0";
  const VarInfo& first = sig.arrays.front();
  if (first.shape == Shape::Stream) return "hstream_stream_length(&" + first.name + ")";
  return std::to_string(first.size);
}

}  // namespace

CodeGenerator::CodeGenerator(TemplateStore templates) : templates_(std::move(templates)) {}

EmittedUnit CodeGenerator::gen_openmp(const KernelSpec& k) const {
  const TemplateGroup& g = templates_.group("openmp");
  EmittedUnit unit;
  unit.target = TargetKind::OpenMP;
  unit.function_name = "CPU_" + k.name;
  unit.symbols = {{"index", "i"}, {"start", "start"}, {"finish", "finish"}};

  auto params = value_params(signature_of(k));
  params.push_back("int start");
  params.push_back("int finish");

  unit.region = g.render("loop", {{"body", body_lines(k, "i")}});
  unit.text = g.render("function", {{"name", unit.function_name}, {"params", params}, {"loop", unit.region}});
  return unit;
}

EmittedUnit CodeGenerator::gen_cuda(const KernelSpec& k) const {
  const TemplateGroup& g = templates_.group("cuda");
  EmittedUnit unit;
  unit.target = TargetKind::Cuda;
  unit.function_name = "GPU_" + k.name;
  unit.symbols = {{"index", "idx"}, {"length", "len"}, {"chunk_length", "myN"}, {"host_helper", unit.function_name + "_chunk"}};

  const Signature sig = signature_of(k);
  auto kernel_params = value_params(sig);
  kernel_params.push_back("int len");
  unit.region = g.render("kernel", {{"name", unit.function_name}, {"params", kernel_params}, {"body", body_lines(k, "idx")}});

  auto helper_params = value_params(sig);
  for (const char* p : {"int start", "int finish", "int block_size"}) helper_params.push_back(p);

  std::vector<std::string> declare, alloc, copy_in, args, copy_out, release;
  for (const auto& a : sig.arrays) {
    const std::string type = c_type(a.type);
    declare.push_back(g.render("device_pointer", {{"type", type}, {"name", a.name}}));
    alloc.push_back(g.render("cuda_malloc", {{"type", type}, {"name", a.name}}));
    if (k.is_in(a.name)) copy_in.push_back(memcpy_host_to_device("&" + a.name + "[start]", a.name, type));
    if (k.is_out(a.name)) copy_out.push_back(memcpy_device_to_host(a.name, "&" + a.name + "[start]", type));
    release.push_back(g.render("cuda_free", {{"name", a.name}}));
    args.push_back("d_" + a.name);
  }
  for (const auto& s : sig.scalars) args.push_back(s.name);
  args.push_back("myN");

  const std::string helper = g.render("chunk_helper", {{"name", unit.symbols["host_helper"]},
                                                       {"kernel", unit.function_name},
                                                       {"params", helper_params},
                                                       {"declare", declare},
                                                       {"alloc", alloc},
                                                       {"copy_in", copy_in},
                                                       {"args", args},
                                                       {"copy_out", copy_out},
                                                       {"release", release}});
  unit.text = unit.region + "\n\n" + helper;
  return unit;
}

EmittedUnit CodeGenerator::gen_leo(const KernelSpec& k) const {
  const TemplateGroup& g = templates_.group("leo");
  EmittedUnit unit;
  unit.target = TargetKind::Leo;
  unit.function_name = "MIC_" + k.name;
  unit.symbols = {{"index", "i"}, {"start", "my_start"}, {"finish", "my_finish"}, {"device", "cpu_thread_id"}};

  std::vector<std::string> clauses;
  for (const auto& v : k.ins) {
    clauses.push_back(g.render(v.is_elementwise() ? "in_array" : "in_scalar", {{"name", v.name}}));
  }
  for (const auto& v : k.outs) {
    if (v.is_elementwise()) clauses.push_back(g.render("out_array", {{"name", v.name}}));
  }
  unit.region = g.render("region", {{"clauses", clauses}, {"body", body_lines(k, "i")}});

  auto params = value_params(signature_of(k));
  for (const char* p : {"int cpu_thread_id", "int my_start", "int my_finish"}) params.push_back(p);
  unit.text = g.render("function", {{"name", unit.function_name}, {"params", params}, {"region", unit.region}});
  return unit;
}

EmittedUnit CodeGenerator::generate(TargetKind target, const KernelSpec& kernel) const {
  switch (target) {
    case TargetKind::OpenMP:
      return gen_openmp(kernel);
    case TargetKind::Cuda:
      return gen_cuda(kernel);
    case TargetKind::Leo:
      return gen_leo(kernel);
  }
  throw std::logic_error("unknown target");
}

std::string CodeGenerator::memcpy_host_to_device(const std::string& from, const std::string& to,
                                                 const std::string& type) const {
  return templates_.group("cuda").render("cuda_memcpy_host_to_device", {{"from", from}, {"to", to}, {"type", type}});
}

std::string CodeGenerator::memcpy_device_to_host(const std::string& from, const std::string& to,
                                                 const std::string& type) const {
  return templates_.group("cuda").render("cuda_memcpy_device_to_host", {{"from", from}, {"to", to}, {"type", type}});
}

EmittedUnit CodeGenerator::gen_driver(const std::vector<KernelSpec>& kernels, const pdl::PlatformDescription& platform,
                                      const DriverOptions& options) const {
  if (kernels.empty()) throw std::invalid_argument("a driver needs at least one kernel");
  const TemplateGroup& g = templates_.group("driver");

  std::vector<std::string> pus;
  for (const auto& pu : platform.pus) {
    std::string kind(pdl::to_string(pu.kind));
    for (auto& c : kind) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    pus.push_back(g.render("pu", {{"id", std::to_string(pu.id)},
                                  {"kind", kind},
                                  {"cores", std::to_string(pu.cores)},
                                  {"threads", std::to_string(pu.threads.value_or(0))},
                                  {"memory_gb", format_double(pu.memory_gb)},
                                  {"speed_factor", format_double(pu.sim.speed_factor)},
                                  {"transfer_cost", format_double(pu.sim.transfer_cost_per_mb)}}));
  }

  std::vector<std::string> globals;
  std::set<std::string> declared;
  for (const auto& k : kernels) {
    const Signature sig = signature_of(k);
    for (const auto& a : sig.arrays) {
      if (!declared.insert(a.name).second) continue;
      if (a.shape == Shape::Stream) {
        globals.push_back(g.render("stream_global", {{"type", c_type(a.type)}, {"name", a.name}}));
      } else {
        globals.push_back(g.render("array_global", {{"type", c_type(a.type)}, {"name", a.name}, {"size", std::to_string(a.size)}}));
      }
    }
    for (const auto& s : sig.scalars) {
      if (declared.insert(s.name).second) globals.push_back(g.render("scalar_global", {{"type", c_type(s.type)}, {"name", s.name}}));
    }
  }

  std::vector<std::string> blocks;
  for (const auto& k : kernels) {
    const Signature sig = signature_of(k);
    const auto values = value_params(sig);

    std::vector<std::string> prototypes, registrations;
    for (TargetKind t : options.targets) {
      std::vector<std::string> params = values;
      std::string fn, target_name;
      switch (t) {
        case TargetKind::OpenMP:
          fn = "CPU_" + k.name;
          target_name = "OPENMP";
          params.insert(params.end(), {"int start", "int finish"});
          break;
        case TargetKind::Cuda:
          fn = "GPU_" + k.name + "_chunk";
          target_name = "CUDA";
          params.insert(params.end(), {"int start", "int finish", "int block_size"});
          break;
        case TargetKind::Leo:
          fn = "MIC_" + k.name;
          target_name = "LEO";
          params.insert(params.end(), {"int cpu_thread_id", "int my_start", "int my_finish"});
          break;
      }
      std::string proto = "void " + fn + "(";
      for (std::size_t i = 0; i < params.size(); ++i) proto += (i ? ", " : "") + params[i];
      prototypes.push_back(proto + ");");
      registrations.push_back(g.render("register", {{"kernel", k.name}, {"target", target_name}, {"function", fn}}));
    }

    std::vector<std::string> assignments;
    for (const auto& s : sig.scalars) {
      if (auto it = k.scalar_values.find(s.name); it != k.scalar_values.end()) {
        assignments.push_back(g.render("scalar_assignment", {{"name", s.name}, {"value", format_value(it->second)}}));
      }
    }

    std::string devices;
    if (k.device.is_all()) {
      devices = g.render("devices_all", {});
    } else {
      std::vector<std::string> ids;
      for (PuId id : k.device.ids()) ids.push_back(std::to_string(id));
      devices = g.render("devices_ids", {{"count", std::to_string(ids.size())}, {"ids", ids}});
    }

    std::string scheduling;
    switch (k.scheduling.kind) {
      case SchedulingSpec::Kind::Auto:
        scheduling = g.render("schedule_auto", {});
        break;
      case SchedulingSpec::Kind::Uniform:
        scheduling = g.render("schedule_uniform", {{"chunk", std::to_string(k.scheduling.chunk)}});
        break;
      case SchedulingSpec::Kind::PerDevice: {
        std::vector<std::string> ids, chunks;
        for (const auto& [id, chunk] : k.scheduling.per_device) {
          ids.push_back(std::to_string(id));
          chunks.push_back(std::to_string(chunk));
        }
        scheduling = g.render("schedule_per_device",
                              {{"count", std::to_string(ids.size())}, {"ids", ids}, {"chunks", chunks}});
        break;
      }
    }

    std::vector<std::string> args;
    for (const auto& a : sig.arrays) args.push_back(a.shape == Shape::Stream ? "&" + a.name : a.name);
    for (const auto& s : sig.scalars) args.push_back("&" + s.name);
    const std::string execute = g.render("execute", {{"kernel", k.name},
                                                     {"devices", devices},
                                                     {"scheduling", scheduling},
                                                     {"args", args},
                                                     {"arg_count", std::to_string(args.size())},
                                                     {"length", array_length_expr(k)}});

    blocks.push_back(g.render("kernel", {{"name", k.name},
                                         {"prototypes", prototypes},
                                         {"assignments", assignments},
                                         {"registrations", registrations},
                                         {"execute", execute}}));
  }

  EmittedUnit unit;
  unit.function_name = "main";
  unit.symbols = {{"block_size", std::to_string(options.block_size)}, {"platform", platform.name}};
  unit.text = g.render("file", {{"source", options.source_name},
                                {"platform", platform.name},
                                {"block_size", std::to_string(options.block_size)},
                                {"pu_count", std::to_string(platform.pus.size())},
                                {"pus", pus},
                                {"globals", globals},
                                {"kernels", blocks}});
  unit.region = unit.text;
  return unit;
}

std::vector<OutputFile> CodeGenerator::emit_files(const std::string& stem, const std::vector<KernelSpec>& kernels,
                                                  const pdl::PlatformDescription& platform,
                                                  const DriverOptions& options) const {
  std::vector<OutputFile> files;
  for (TargetKind t : kAllTargets) {
    if (std::find(options.targets.begin(), options.targets.end(), t) == options.targets.end()) continue;
    std::vector<std::string> functions;
    for (const auto& k : kernels) functions.push_back(generate(t, k).text);
    const char* group = t == TargetKind::OpenMP ? "openmp" : t == TargetKind::Cuda ? "cuda" : "leo";
    const char* suffix = t == TargetKind::OpenMP ? "_omp.c" : t == TargetKind::Cuda ? "_cuda.cu" : "_leo.c";
    files.push_back(OutputFile{stem + suffix, templates_.group(group).render(
                                                  "file", {{"source", options.source_name}, {"functions", functions}}) +
                                                  "\n"});
  }
  files.push_back(OutputFile{stem + "_driver.c", gen_driver(kernels, platform, options).text + "\n"});
  return files;
}

std::string output_stem(const std::filesystem::path& source) {
  std::string name = source.filename().string();
  for (const char* ext : {".hs.c", ".c"}) {
    const std::string e(ext);
    if (name.size() > e.size() && name.ends_with(e)) return name.substr(0, name.size() - e.size());
  }
  return source.stem().string();
}

void write_outputs(const std::filesystem::path& dir, const std::vector<OutputFile>& files) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& f : files) {
    const fs::path final_path = dir / f.name;
    const fs::path tmp = dir / ("." + f.name + ".tmp");
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw std::ios_base::failure("cannot create '" + tmp.string() + "'");
      out << f.contents;
      out.flush();
      if (!out) {
        std::error_code ec;
        fs::remove(tmp, ec);
        throw std::ios_base::failure("cannot write '" + tmp.string() + "'");
      }
    }
    fs::rename(tmp, final_path);
  }
}

std::string normalize_whitespace(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    std::string line;
    bool pending_space = false;
    for (char c : raw) {
      if (c == ' ' || c == '\t' || c == '\r') {
        pending_space = !line.empty();
      } else {
        if (pending_space) line += ' ';
        pending_space = false;
        line += c;
      }
    }
    lines.push_back(std::move(line));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  std::size_t first = 0;
  while (first < lines.size() && lines[first].empty()) ++first;
  std::string out;
  for (std::size_t i = first; i < lines.size(); ++i) {
    out += lines[i];
    out += '\n';
  }
  return out;
}

}  // namespace hstream::codegen
