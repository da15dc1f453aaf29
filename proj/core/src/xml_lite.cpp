#include "xml_lite.hpp"

#include <cctype>

#include "mls/errors.hpp"

namespace mls::detail {

namespace {

class Parser {
public:
  explicit Parser(const std::string& text) : s_(text) {}

  XmlNode parse_document() {
    skip_misc();
    if (eof()) fail("no root element");
    XmlNode root = parse_element();
    skip_misc();
    if (!eof()) fail("content after root element");
    return root;
  }

private:
  const std::string& s_;
  std::size_t i_ = 0;

  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return s_[i_]; }
  bool starts_with(const char* lit) const { return s_.compare(i_, std::string(lit).size(), lit) == 0; }

  [[noreturn]] void fail(const std::string& msg) const {
    throw XmlError("XML parse error at offset " + std::to_string(i_) + ": " + msg);
  }

  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++i_;
  }

  void skip_until(const std::string& lit) {
    const auto p = s_.find(lit, i_);
    if (p == std::string::npos) fail("unterminated construct (expected " + lit + ")");
    i_ = p + lit.size();
  }

  // whitespace, comments, processing instructions, DOCTYPE, stray text
  void skip_misc() {
    for (;;) {
      skip_ws();
      if (eof()) return;
      if (starts_with("<!--")) {
        i_ += 4;
        skip_until("-->");
      } else if (starts_with("<?")) {
        i_ += 2;
        skip_until("?>");
      } else if (starts_with("<!")) {
        i_ += 2;
        skip_until(">");
      } else if (peek() != '<') {
        ++i_;  // text content, ignored
      } else {
        return;
      }
    }
  }

  static bool name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.' ||
           c == ':';
  }

  std::string parse_name() {
    const std::size_t start = i_;
    while (!eof() && name_char(peek())) ++i_;
    if (i_ == start) fail("expected a name");
    return s_.substr(start, i_ - start);
  }

  std::string decode_entities(const std::string& raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
      if (raw[k] != '&') {
        out.push_back(raw[k]);
        continue;
      }
      const auto semi = raw.find(';', k);
      if (semi == std::string::npos) fail("unterminated entity");
      const std::string ent = raw.substr(k + 1, semi - k - 1);
      if (ent == "amp") out.push_back('&');
      else if (ent == "lt") out.push_back('<');
      else if (ent == "gt") out.push_back('>');
      else if (ent == "quot") out.push_back('"');
      else if (ent == "apos") out.push_back('\'');
      else fail("unknown entity &" + ent + ";");
      k = semi;
    }
    return out;
  }

  std::string parse_attr_value() {
    if (eof() || (peek() != '"' && peek() != '\'')) fail("expected quoted attribute value");
    const char quote = peek();
    ++i_;
    const std::size_t start = i_;
    while (!eof() && peek() != quote) ++i_;
    if (eof()) fail("unterminated attribute value");
    std::string raw = s_.substr(start, i_ - start);
    ++i_;
    return decode_entities(raw);
  }

  XmlNode parse_element() {
    if (eof() || peek() != '<') fail("expected '<'");
    ++i_;
    XmlNode node;
    node.name = parse_name();
    for (;;) {
      skip_ws();
      if (eof()) fail("unterminated start tag");
      if (peek() == '/') {
        ++i_;
        if (eof() || peek() != '>') fail("malformed self-closing tag");
        ++i_;
        return node;
      }
      if (peek() == '>') {
        ++i_;
        break;
      }
      std::string key = parse_name();
      skip_ws();
      if (eof() || peek() != '=') fail("expected '=' after attribute name");
      ++i_;
      skip_ws();
      for (const auto& [k, v] : node.attrs) {
        (void)v;
        if (k == key) fail("duplicate attribute '" + key + "'");
      }
      node.attrs.emplace_back(std::move(key), parse_attr_value());
    }
    // children until matching close tag
    for (;;) {
      skip_misc();
      if (eof()) fail("unterminated element <" + node.name + ">");
      if (starts_with("</")) {
        i_ += 2;
        const std::string close = parse_name();
        if (close != node.name)
          fail("mismatched close tag </" + close + "> for <" + node.name + ">");
        skip_ws();
        if (eof() || peek() != '>') fail("malformed close tag");
        ++i_;
        return node;
      }
      node.children.push_back(parse_element());
    }
  }
};

}  // namespace

XmlNode parse_xml(const std::string& text) { return Parser(text).parse_document(); }

}  // namespace mls::detail
