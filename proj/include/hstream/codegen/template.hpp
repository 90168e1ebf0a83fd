#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace hstream::codegen {

class TemplateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using AttrValue = std::variant<std::string, std::vector<std::string>>;
using Attributes = std::map<std::string, AttrValue>;

/// A named group of string templates in a small StringTemplate-like syntax:
///
///   // comment line
///   name(arg, other) ::= "one line, \"quoted\" $arg$"
///   name(arg, other) ::= <<
///   several lines
///   $other; separator=", "$
///   >>
///
/// A `<<` body ends at the first line consisting only of `>>`. Holes are
/// `$attr$` or `$attr; separator="..."$` (the separator understands \n, \t,
/// \" and \\); `\$` is a literal dollar. A multi-line value takes the
/// indentation of the line it is inserted on, and a line left blank only
/// because its holes rendered empty is dropped.
class TemplateGroup {
 public:
  static TemplateGroup parse(std::string_view text, const std::string& origin = "<string>");

  bool has(const std::string& name) const { return templates_.count(name) != 0; }
  const std::vector<std::string>& parameters(const std::string& name) const;

  /// Every declared parameter must be bound and no extra attribute may be
  /// passed; both are programming errors reported as TemplateError.
  std::string render(const std::string& name, const Attributes& attrs) const;

 private:
  struct Piece {
    bool hole = false;
    std::string text;       // literal text, or attribute name for a hole
    std::string separator;  // holes only
  };
  struct Template {
    std::vector<std::string> params;
    std::vector<Piece> pieces;
  };

  std::string origin_;
  std::map<std::string, Template> templates_;
};

/// Template groups loaded from a directory (one `<group>.stg` file each).
class TemplateStore {
 public:
  static TemplateStore load(const std::filesystem::path& dir);

  /// `$HSTREAM_TEMPLATES` if set, otherwise the directory baked in at build time.
  static std::filesystem::path default_directory();

  const TemplateGroup& group(const std::string& name) const;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, TemplateGroup> groups_;
};

}  // namespace hstream::codegen
