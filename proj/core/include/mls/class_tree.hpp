#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mls/point_cloud.hpp"

namespace mls {

struct ClassNode {
  std::uint32_t id = 0;
  std::string name;
  std::optional<std::uint32_t> parent;
  std::vector<std::uint32_t> children;  // document order
};

/// Semantic class hierarchy plus the optional fine-to-coarse mapping.
class ClassTree {
public:
  const ClassNode* find(std::uint32_t id) const {
    auto it = nodes_.find(id);
    return it == nodes_.end() ? nullptr : &it->second;
  }

  /// Class name, or "?" for ids absent from the tree.
  std::string name_of(std::uint32_t id) const {
    const ClassNode* n = find(id);
    return n ? n->name : std::string("?");
  }

  std::optional<std::uint32_t> coarse_of(std::uint32_t id) const {
    auto it = coarse_.find(id);
    if (it == coarse_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::uint32_t>& roots() const noexcept { return roots_; }
  const std::unordered_map<std::uint32_t, std::uint32_t>& coarse_map() const noexcept {
    return coarse_;
  }

  /// Ids of every node, ascending.
  std::vector<std::uint32_t> ids() const;

private:
  friend ClassTree read_class_tree(const std::string&, const std::string*);
  std::unordered_map<std::uint32_t, ClassNode> nodes_;
  std::vector<std::uint32_t> roots_;  // document order
  std::unordered_map<std::uint32_t, std::uint32_t> coarse_;
};

/// Parse the class-tree XML (elements named `class` with `id` and `name`
/// attributes; hierarchy by nesting or an explicit `parent` attribute) and,
/// when given, the coarse-class XML (`class` elements with `id` and `coarse`).
/// Throws XmlError on malformed input, duplicate id, dangling parent, cyclic
/// hierarchy, or a coarse entry whose id is not in the tree.
ClassTree read_class_tree(const std::string& xml_text, const std::string* coarse_xml = nullptr);
ClassTree read_class_tree_files(const std::string& path, const std::string* coarse_path = nullptr);

/// Per-class object and point counts plus the partition-independent totals.
struct ClassStats {
  std::uint32_t class_id = 0;
  std::string name;
  std::uint64_t object_count = 0;  // distinct non-zero labels in this class
  std::uint64_t point_count = 0;
};

struct StatsTable {
  std::vector<ClassStats> rows;      // ascending class_id
  std::uint64_t total_objects = 0;   // distinct non-zero labels in the cloud
  std::uint64_t total_points = 0;    // cloud size
};

StatsTable cloud_stats(const PointCloud& cloud, const ClassTree* tree = nullptr);

/// Fixed-width text rendering with a totals row.
std::string format_stats(const StatsTable& table);

}  // namespace mls
