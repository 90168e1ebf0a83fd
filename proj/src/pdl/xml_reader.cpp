#include "xml_reader.hpp"

#include <cctype>

#include "hstream/pdl.hpp"

namespace hstream::pdl::detail {

const XmlAttribute* XmlElement::attribute(std::string_view key) const {
  for (const auto& a : attributes) {
    if (a.name == key) return &a;
  }
  return nullptr;
}

namespace {

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == ':';
}

bool is_name_char(char c) {
  return is_name_start(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '.';
}

class XmlReader {
 public:
  explicit XmlReader(std::string_view text) : text_(text) {}

  XmlElement document() {
    skip_misc();
    if (starts_with("<?xml")) {
      skip_past("?>");
      skip_misc();
    }
    if (at_end() || peek() != '<') fail("expected root element");
    XmlElement root = element();
    skip_misc();
    if (!at_end()) fail("unexpected content after root element");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const { throw ParseError(line_, "", message); }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  bool starts_with(std::string_view s) const { return text_.substr(pos_).starts_with(s); }

  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) advance();
  }

  void skip_past(std::string_view terminator) {
    const int start_line = line_;
    while (!at_end() && !starts_with(terminator)) advance();
    if (at_end()) throw ParseError(start_line, "", "unterminated construct, expected '" + std::string(terminator) + "'");
    advance(terminator.size());
  }

  // Whitespace and comments between markup.
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (starts_with("<!--")) {
        skip_past("-->");
      } else {
        return;
      }
    }
  }

  std::string name() {
    if (at_end() || !is_name_start(peek())) fail("expected a name");
    const std::size_t begin = pos_;
    while (!at_end() && is_name_char(peek())) advance();
    return std::string(text_.substr(begin, pos_ - begin));
  }

  std::string attribute_value(const std::string& attr) {
    if (at_end() || (peek() != '"' && peek() != '\'')) {
      throw ParseError(line_, attr, "attribute value must be quoted");
    }
    const char quote = peek();
    const int start_line = line_;
    advance();
    std::string value;
    while (!at_end() && peek() != quote) {
      if (peek() == '<') throw ParseError(line_, attr, "'<' not allowed in attribute value");
      if (peek() == '&') {
        value += entity(attr);
      } else {
        value += peek();
        advance();
      }
    }
    if (at_end()) throw ParseError(start_line, attr, "unterminated attribute value");
    advance();
    return value;
  }

  char entity(const std::string& attr) {
    static constexpr std::pair<std::string_view, char> kEntities[] = {
        {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}};
    for (const auto& [text, ch] : kEntities) {
      if (starts_with(text)) {
        advance(text.size());
        return ch;
      }
    }
    throw ParseError(line_, attr, "unknown character entity");
  }

  XmlElement element() {
    XmlElement el;
    el.line = line_;
    advance();  // '<'
    el.name = name();
    for (;;) {
      const bool had_space = !at_end() && std::isspace(static_cast<unsigned char>(peek()));
      skip_ws();
      if (at_end()) fail("unterminated start tag <" + el.name + ">");
      if (starts_with("/>")) {
        advance(2);
        return el;
      }
      if (peek() == '>') {
        advance();
        break;
      }
      if (!had_space) fail("expected whitespace before attribute in <" + el.name + ">");
      XmlAttribute attr;
      attr.line = line_;
      attr.name = name();
      skip_ws();
      if (at_end() || peek() != '=') throw ParseError(line_, attr.name, "expected '=' after attribute name");
      advance();
      skip_ws();
      attr.value = attribute_value(attr.name);
      if (el.attribute(attr.name)) throw ParseError(attr.line, attr.name, "duplicate attribute");
      el.attributes.push_back(std::move(attr));
    }

    // Content: child elements, comments and whitespace only.
    for (;;) {
      skip_misc();
      if (at_end()) throw ParseError(el.line, "", "element <" + el.name + "> is never closed");
      if (starts_with("</")) {
        advance(2);
        const std::string closing = name();
        if (closing != el.name) fail("mismatched closing tag </" + closing + ">, expected </" + el.name + ">");
        skip_ws();
        if (at_end() || peek() != '>') fail("expected '>' in closing tag");
        advance();
        return el;
      }
      if (peek() == '<') {
        el.children.push_back(element());
      } else {
        fail("unexpected text content in <" + el.name + ">");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

}  // namespace

XmlElement parse_xml(std::string_view text) { return XmlReader(text).document(); }

}  // namespace hstream::pdl::detail
