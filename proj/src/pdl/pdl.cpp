#include "hstream/pdl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "xml_reader.hpp"

namespace hstream::pdl {

using detail::XmlAttribute;
using detail::XmlElement;

std::string_view to_string(PuKind kind) {
  switch (kind) {
    case PuKind::Cpu:
      return "cpu";
    case PuKind::Gpu:
      return "gpu";
    case PuKind::Mic:
      return "mic";
  }
  return "?";
}

SimParams SimParams::defaults_for(PuKind kind) {
  switch (kind) {
    case PuKind::Cpu:
      return {1.0, 0.0};
    case PuKind::Gpu:
      return {4.0, 0.001};
    case PuKind::Mic:
      return {2.0, 0.002};
  }
  return {};
}

double ProcessingUnit::memory_bytes() const { return memory_gb * 1024.0 * 1024.0 * 1024.0; }

const ProcessingUnit* PlatformDescription::find(PuId id) const {
  auto it = std::find_if(pus.begin(), pus.end(), [id](const ProcessingUnit& pu) { return pu.id == id; });
  return it == pus.end() ? nullptr : &*it;
}

namespace {

std::string format_parse_error(int line, const std::string& attribute, const std::string& message) {
  std::string out = "line " + std::to_string(line) + ": ";
  if (!attribute.empty()) out += "attribute '" + attribute + "': ";
  return out + message;
}

}  // namespace

ParseError::ParseError(int line, std::string attribute, const std::string& message)
    : std::runtime_error(format_parse_error(line, attribute, message)), line_(line), attribute_(std::move(attribute)) {}

namespace {

unsigned long long parse_unsigned(const XmlAttribute& attr) {
  unsigned long long value = 0;
  const auto* first = attr.value.data();
  const auto* last = first + attr.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || attr.value.empty()) {
    throw ParseError(attr.line, attr.name, "expected a non-negative integer, got '" + attr.value + "'");
  }
  return value;
}

double parse_number(const XmlAttribute& attr) {
  double value = 0;
  const auto* first = attr.value.data();
  const auto* last = first + attr.value.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || attr.value.empty() || !std::isfinite(value)) {
    throw ParseError(attr.line, attr.name, "expected a number, got '" + attr.value + "'");
  }
  return value;
}

const XmlAttribute& required(const XmlElement& el, std::string_view key) {
  const XmlAttribute* attr = el.attribute(key);
  if (!attr) throw ParseError(el.line, std::string(key), "missing required attribute on <" + el.name + ">");
  return *attr;
}

unsigned positive_count(const XmlAttribute& attr) {
  const auto v = parse_unsigned(attr);
  if (v == 0 || v > 0xFFFFFFFFull) throw ParseError(attr.line, attr.name, "must be a positive integer");
  return static_cast<unsigned>(v);
}

double positive_number(const XmlAttribute& attr) {
  const double v = parse_number(attr);
  if (v <= 0) throw ParseError(attr.line, attr.name, "must be positive");
  return v;
}

double non_negative_number(const XmlAttribute& attr) {
  const double v = parse_number(attr);
  if (v < 0) throw ParseError(attr.line, attr.name, "must not be negative");
  return v;
}

void reject_unknown_attributes(const XmlElement& el, std::initializer_list<std::string_view> known) {
  for (const auto& attr : el.attributes) {
    if (std::find(known.begin(), known.end(), attr.name) == known.end()) {
      throw ParseError(attr.line, attr.name, "unknown attribute on <" + el.name + ">");
    }
  }
}

SimParams parse_sim(const XmlElement& el, PuKind kind) {
  reject_unknown_attributes(el, {"speed_factor", "transfer_cost_per_mb"});
  if (!el.children.empty()) throw ParseError(el.children.front().line, "", "<sim> takes no child elements");
  SimParams sim = SimParams::defaults_for(kind);
  if (const auto* a = el.attribute("speed_factor")) sim.speed_factor = positive_number(*a);
  if (const auto* a = el.attribute("transfer_cost_per_mb")) sim.transfer_cost_per_mb = non_negative_number(*a);
  return sim;
}

ProcessingUnit parse_pu(const XmlElement& el) {
  reject_unknown_attributes(
      el, {"id", "type", "cores", "threads", "cache_mb", "frequency_ghz", "memory_gb", "tdp_w"});

  ProcessingUnit pu;
  const auto& id = required(el, "id");
  const auto raw_id = parse_unsigned(id);
  if (raw_id > 0xFFFFFFFFull) throw ParseError(id.line, id.name, "id out of range");
  pu.id = static_cast<PuId>(raw_id);

  const auto& type = required(el, "type");
  if (type.value == "cpu") {
    pu.kind = PuKind::Cpu;
  } else if (type.value == "gpu") {
    pu.kind = PuKind::Gpu;
  } else if (type.value == "mic") {
    pu.kind = PuKind::Mic;
  } else {
    throw ParseError(type.line, type.name, "expected one of cpu|gpu|mic, got '" + type.value + "'");
  }

  pu.cores = positive_count(required(el, "cores"));
  if (pu.kind == PuKind::Cpu) {
    const auto& threads = required(el, "threads");
    pu.threads = positive_count(threads);
    if (*pu.threads < pu.cores) throw ParseError(threads.line, threads.name, "a CPU needs at least as many threads as cores");
  } else if (const auto* threads = el.attribute("threads")) {
    pu.threads = positive_count(*threads);
  }
  if (const auto* cache = el.attribute("cache_mb")) pu.cache_mb = non_negative_number(*cache);
  pu.frequency_ghz = positive_number(required(el, "frequency_ghz"));
  pu.memory_gb = positive_number(required(el, "memory_gb"));
  if (const auto* tdp = el.attribute("tdp_w")) non_negative_number(*tdp);

  pu.sim = SimParams::defaults_for(pu.kind);
  bool seen_sim = false;
  for (const auto& child : el.children) {
    if (child.name != "sim") throw ParseError(child.line, "", "unexpected element <" + child.name + "> inside <pu>");
    if (seen_sim) throw ParseError(child.line, "", "duplicate <sim> element");
    seen_sim = true;
    pu.sim = parse_sim(child, pu.kind);
  }
  return pu;
}

}  // namespace

PlatformDescription parse_pdl(std::string_view text) {
  const XmlElement root = detail::parse_xml(text);
  if (root.name != "platform") throw ParseError(root.line, "", "root element must be <platform>, got <" + root.name + ">");
  reject_unknown_attributes(root, {"name"});

  PlatformDescription platform;
  platform.name = required(root, "name").value;

  std::set<PuId> ids;
  for (const auto& child : root.children) {
    if (child.name != "pu") throw ParseError(child.line, "", "unexpected element <" + child.name + "> inside <platform>");
    ProcessingUnit pu = parse_pu(child);
    if (!ids.insert(pu.id).second) {
      throw ParseError(child.attribute("id")->line, "id", "duplicate id " + std::to_string(pu.id));
    }
    platform.pus.push_back(pu);
  }

  if (platform.pus.empty()) throw ParseError(root.line, "", "platform describes zero processing units");
  if (std::none_of(platform.pus.begin(), platform.pus.end(),
                   [](const ProcessingUnit& pu) { return pu.kind == PuKind::Cpu; })) {
    throw ParseError(root.line, "", "platform needs at least one cpu processing unit");
  }
  return platform;
}

PlatformDescription load_pdl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open platform file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pdl(buffer.str());
}

std::vector<ProcessingUnit> resolve_devices(const PlatformDescription& platform, const DeviceSelector& selector) {
  if (selector.is_all()) {
    if (platform.pus.empty()) throw ResolveError("device(*) selects no processing units");
    return platform.pus;
  }
  std::vector<ProcessingUnit> out;
  std::set<PuId> seen;
  for (PuId id : selector.ids()) {
    const ProcessingUnit* pu = platform.find(id);
    if (!pu) throw ResolveError("unknown device id " + std::to_string(id) + " for platform '" + platform.name + "'");
    if (!seen.insert(id).second) throw ResolveError("device id " + std::to_string(id) + " listed twice");
    out.push_back(*pu);
  }
  if (out.empty()) throw ResolveError("device clause selects no processing units");
  return out;
}

}  // namespace hstream::pdl
