#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace hstream::pdl::detail {

struct XmlAttribute {
  std::string name;
  std::string value;
  int line = 0;
};

struct XmlElement {
  std::string name;
  int line = 0;
  std::vector<XmlAttribute> attributes;
  std::vector<XmlElement> children;

  const XmlAttribute* attribute(std::string_view key) const;
};

// Just enough XML for platform files: prolog, comments, elements with
// attributes, character entities. Text content must be whitespace.
// Throws ParseError on malformed input.
XmlElement parse_xml(std::string_view text);

}  // namespace hstream::pdl::detail
