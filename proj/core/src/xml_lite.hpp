#pragma once

#include <string>
#include <utility>
#include <vector>

namespace mls::detail {

/// Minimal XML element tree: names, attributes, child elements. Text content,
/// comments, prolog, and DOCTYPE are skipped. Enough for the class-tree files;
/// not a general XML parser.
struct XmlNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attrs;
  std::vector<XmlNode> children;

  const std::string* attr(const std::string& key) const {
    for (const auto& [k, v] : attrs)
      if (k == key) return &v;
    return nullptr;
  }
};

/// Parse a document with a single root element. Throws XmlError.
XmlNode parse_xml(const std::string& text);

}  // namespace mls::detail
