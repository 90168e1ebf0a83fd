#include "hstream/codegen/template.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#ifndef HSTREAM_TEMPLATE_DIR
#define HSTREAM_TEMPLATE_DIR "templates"
#endif

namespace hstream::codegen {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(pos));
      break;
    }
    lines.emplace_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.pop_back();
  }
  return lines;
}

bool all_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t'; });
}

}  // namespace

TemplateGroup TemplateGroup::parse(std::string_view text, const std::string& origin) {
  TemplateGroup group;
  group.origin_ = origin;
  const auto lines = split_lines(text);

  auto fail = [&](std::size_t line_index, const std::string& msg) -> TemplateError {
    return TemplateError(origin + ":" + std::to_string(line_index + 1) + ": " + msg);
  };

  // Splits a body into literal pieces and holes.
  auto parse_body = [&](const std::string& body, const std::vector<std::string>& params, std::size_t line_index) {
    std::vector<Piece> pieces;
    std::string literal;
    for (std::size_t i = 0; i < body.size(); ++i) {
      if (body[i] == '\\' && i + 1 < body.size() && body[i + 1] == '$') {
        literal += '$';
        ++i;
        continue;
      }
      if (body[i] != '$') {
        literal += body[i];
        continue;
      }
      const auto close = body.find('$', i + 1);
      if (close == std::string::npos) throw fail(line_index, "unterminated hole");
      const std::string inner = body.substr(i + 1, close - i - 1);
      Piece hole;
      hole.hole = true;
      const auto semi = inner.find(';');
      hole.text = trim(inner.substr(0, semi));
      if (semi != std::string::npos) {
        const std::string option = trim(inner.substr(semi + 1));
        const std::string prefix = "separator=\"";
        if (option.rfind(prefix, 0) != 0 || option.size() < prefix.size() + 1 || option.back() != '"') {
          throw fail(line_index, "malformed hole option '" + option + "'");
        }
        const std::string raw = option.substr(prefix.size(), option.size() - prefix.size() - 1);
        for (std::size_t k = 0; k < raw.size(); ++k) {
          if (raw[k] == '\\' && k + 1 < raw.size()) {
            const char e = raw[++k];
            hole.separator += e == 'n' ? '\n' : e == 't' ? '\t' : e;
          } else {
            hole.separator += raw[k];
          }
        }
      }
      if (std::find(params.begin(), params.end(), hole.text) == params.end()) {
        throw fail(line_index, "hole '$" + hole.text + "$' is not a parameter");
      }
      if (!literal.empty()) pieces.push_back(Piece{false, std::move(literal), {}});
      literal.clear();
      pieces.push_back(std::move(hole));
      i = close;
    }
    if (!literal.empty()) pieces.push_back(Piece{false, std::move(literal), {}});
    return pieces;
  };

  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string line = trim(lines[li]);
    if (line.empty() || line.rfind("//", 0) == 0) continue;

    const auto def = line.find("::=");
    if (def == std::string::npos) throw fail(li, "expected a template definition 'name(args) ::= ...'");
    const std::string head = trim(line.substr(0, def));
    const std::string rest = trim(line.substr(def + 3));

    const auto open = head.find('(');
    if (open == std::string::npos || head.back() != ')') throw fail(li, "template header needs a parameter list");
    const std::string name = trim(head.substr(0, open));
    if (!is_identifier(name)) throw fail(li, "bad template name '" + name + "'");
    if (group.templates_.count(name)) throw fail(li, "template '" + name + "' defined twice");

    Template tpl;
    std::stringstream params(head.substr(open + 1, head.size() - open - 2));
    for (std::string p; std::getline(params, p, ',');) {
      p = trim(p);
      if (p.empty()) continue;
      if (!is_identifier(p)) throw fail(li, "bad parameter name '" + p + "'");
      tpl.params.push_back(p);
    }

    std::string body;
    if (rest == "<<") {
      const std::size_t first = li + 1;
      std::size_t end = first;
      while (end < lines.size() && trim(lines[end]) != ">>") ++end;
      if (end == lines.size()) throw fail(li, "template '" + name + "' has no closing '>>' line");
      for (std::size_t k = first; k < end; ++k) {
        if (k > first) body += '\n';
        body += lines[k];
      }
      tpl.pieces = parse_body(body, tpl.params, li);
      li = end;
    } else if (rest.size() >= 2 && rest.front() == '"' && rest.back() == '"') {
      const std::string raw = rest.substr(1, rest.size() - 2);
      for (std::size_t k = 0; k < raw.size(); ++k) {
        if (raw[k] == '\\' && k + 1 < raw.size() && (raw[k + 1] == '"' || raw[k + 1] == '\\')) {
          body += raw[++k];
        } else {
          body += raw[k];
        }
      }
      tpl.pieces = parse_body(body, tpl.params, li);
    } else {
      throw fail(li, "template body must be a \"string\" or a << block");
    }
    group.templates_.emplace(name, std::move(tpl));
  }
  return group;
}

const std::vector<std::string>& TemplateGroup::parameters(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError(origin_ + ": no template named '" + name + "'");
  return it->second.params;
}

std::string TemplateGroup::render(const std::string& name, const Attributes& attrs) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw TemplateError(origin_ + ": no template named '" + name + "'");
  const Template& tpl = it->second;
  for (const auto& p : tpl.params) {
    if (!attrs.count(p)) throw TemplateError(origin_ + ": template '" + name + "' needs attribute '" + p + "'");
  }
  for (const auto& [key, _] : attrs) {
    if (std::find(tpl.params.begin(), tpl.params.end(), key) == tpl.params.end()) {
      throw TemplateError(origin_ + ": template '" + name + "' has no parameter '" + key + "'");
    }
  }

  std::string out;
  std::size_t line_start = 0;
  bool line_had_empty_hole = false;

  auto end_line = [&](bool final) {
    if (line_had_empty_hole && all_blank(std::string_view(out).substr(line_start))) {
      out.resize(line_start);
      if (final && !out.empty() && out.back() == '\n') out.pop_back();
    } else if (!final) {
      out += '\n';
    }
    line_start = out.size();
    line_had_empty_hole = false;
  };

  for (const auto& piece : tpl.pieces) {
    if (!piece.hole) {
      for (char c : piece.text) {
        if (c == '\n') {
          end_line(false);
        } else {
          out += c;
        }
      }
      continue;
    }
    const AttrValue& value = attrs.at(piece.text);
    std::string text;
    if (const auto* s = std::get_if<std::string>(&value)) {
      text = *s;
    } else {
      const auto& items = std::get<std::vector<std::string>>(value);
      for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) text += piece.separator;
        text += items[i];
      }
    }
    if (text.empty()) {
      line_had_empty_hole = true;
      continue;
    }
    const std::string_view current(out.data() + line_start, out.size() - line_start);
    const std::string indent(current.substr(0, current.find_first_not_of(" \t") == std::string_view::npos
                                                   ? current.size()
                                                   : current.find_first_not_of(" \t")));
    for (char c : text) {
      out += c;
      if (c == '\n') {
        line_start = out.size();
        out += indent;
      }
    }
  }
  end_line(true);

  // Lines that received only indentation (blank lines inside a value) are trimmed.
  std::string cleaned;
  cleaned.reserve(out.size());
  std::size_t pos = 0;
  while (pos <= out.size()) {
    auto nl = out.find('\n', pos);
    const std::string_view line(out.data() + pos, (nl == std::string::npos ? out.size() : nl) - pos);
    cleaned += all_blank(line) ? std::string_view{} : line;
    if (nl == std::string::npos) break;
    cleaned += '\n';
    pos = nl + 1;
  }
  return cleaned;
}

TemplateStore TemplateStore::load(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw TemplateError("template directory '" + dir.string() + "' does not exist");
  TemplateStore store;
  store.dir_ = dir;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".stg") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    if (!in) throw TemplateError("cannot read template file '" + f.string() + "'");
    std::ostringstream text;
    text << in.rdbuf();
    store.groups_.emplace(f.stem().string(), TemplateGroup::parse(text.str(), f.string()));
  }
  return store;
}

std::filesystem::path TemplateStore::default_directory() {
  if (const char* env = std::getenv("HSTREAM_TEMPLATES"); env && *env) return env;
  return HSTREAM_TEMPLATE_DIR;
}

const TemplateGroup& TemplateStore::group(const std::string& name) const {
  auto it = groups_.find(name);
  if (it == groups_.end()) {
    throw TemplateError("template group '" + name + "' not found in '" + dir_.string() + "'");
  }
  return it->second;
}

}  // namespace hstream::codegen
