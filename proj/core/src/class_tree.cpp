#include "mls/class_tree.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "mls/errors.hpp"
#include "xml_lite.hpp"

namespace mls {

namespace {

std::uint32_t parse_u32_attr(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size() || v > 0xFFFFFFFFULL) throw std::out_of_range("range");
    return static_cast<std::uint32_t>(v);
  } catch (const std::exception&) {
    throw XmlError("invalid " + what + " value '" + value + "'");
  }
}

struct RawClass {
  std::uint32_t id = 0;
  std::string name;
  std::optional<std::uint32_t> parent;
  std::size_t order = 0;
};

// Collect class elements depth-first; enclosing class elements provide the
// implicit parent, an explicit parent attribute wins over nesting.
void collect(const detail::XmlNode& node, std::optional<std::uint32_t> enclosing,
             std::vector<RawClass>& out) {
  std::optional<std::uint32_t> next_enclosing = enclosing;
  if (node.name == "class") {
    const std::string* id_attr = node.attr("id");
    if (!id_attr) throw XmlError("class element without id attribute");
    RawClass rc;
    rc.id = parse_u32_attr(*id_attr, "id");
    if (const std::string* name_attr = node.attr("name")) rc.name = *name_attr;
    if (const std::string* parent_attr = node.attr("parent"))
      rc.parent = parse_u32_attr(*parent_attr, "parent");
    else
      rc.parent = enclosing;
    rc.order = out.size();
    out.push_back(rc);
    next_enclosing = rc.id;
  }
  for (const detail::XmlNode& child : node.children) collect(child, next_enclosing, out);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<std::uint32_t> ClassTree::ids() const {
  std::vector<std::uint32_t> out;
  out.reserve(nodes_.size());
  for (const auto& [id, node] : nodes_) {
    (void)node;
    out.push_back(id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

ClassTree read_class_tree(const std::string& xml_text, const std::string* coarse_xml) {
  const detail::XmlNode root = detail::parse_xml(xml_text);

  std::vector<RawClass> raw;
  collect(root, std::nullopt, raw);

  ClassTree tree;
  for (const RawClass& rc : raw) {
    if (tree.nodes_.count(rc.id))
      throw XmlError("duplicate class id " + std::to_string(rc.id));
    ClassNode node;
    node.id = rc.id;
    node.name = rc.name;
    node.parent = rc.parent;
    tree.nodes_.emplace(rc.id, std::move(node));
  }
  // Resolve after the full scan so definition order does not matter.
  for (const RawClass& rc : raw) {
    if (!rc.parent) {
      tree.roots_.push_back(rc.id);
      continue;
    }
    auto it = tree.nodes_.find(*rc.parent);
    if (it == tree.nodes_.end())
      throw XmlError("dangling parent id " + std::to_string(*rc.parent) + " on class " +
                     std::to_string(rc.id));
    it->second.children.push_back(rc.id);
  }
  // Explicit parent attributes can close a loop; walk each chain upward.
  for (const RawClass& rc : raw) {
    std::set<std::uint32_t> seen;
    std::optional<std::uint32_t> cur = rc.id;
    while (cur) {
      if (!seen.insert(*cur).second)
        throw XmlError("cyclic hierarchy through class " + std::to_string(*cur));
      cur = tree.nodes_.at(*cur).parent;
    }
  }

  if (coarse_xml) {
    const detail::XmlNode coarse_root = detail::parse_xml(*coarse_xml);
    std::vector<const detail::XmlNode*> stack{&coarse_root};
    while (!stack.empty()) {
      const detail::XmlNode* n = stack.back();
      stack.pop_back();
      if (n->name == "class") {
        const std::string* id_attr = n->attr("id");
        const std::string* coarse_attr = n->attr("coarse");
        if (id_attr && coarse_attr) {
          const std::uint32_t id = parse_u32_attr(*id_attr, "id");
          const std::uint32_t coarse = parse_u32_attr(*coarse_attr, "coarse");
          if (!tree.nodes_.count(id))
            throw XmlError("coarse entry for unknown class id " + std::to_string(id));
          tree.coarse_[id] = coarse;
        }
      }
      for (const detail::XmlNode& c : n->children) stack.push_back(&c);
    }
  }
  return tree;
}

ClassTree read_class_tree_files(const std::string& path, const std::string* coarse_path) {
  const std::string xml = read_text_file(path);
  if (!coarse_path) return read_class_tree(xml);
  const std::string coarse = read_text_file(*coarse_path);
  return read_class_tree(xml, &coarse);
}

StatsTable cloud_stats(const PointCloud& cloud, const ClassTree* tree) {
  std::map<std::uint32_t, ClassStats> rows;
  std::map<std::uint32_t, std::set<std::uint32_t>> labels_per_class;
  std::set<std::uint32_t> all_labels;

  for (const LabeledPoint& p : cloud.points) {
    ClassStats& row = rows[p.class_id];
    row.class_id = p.class_id;
    ++row.point_count;
    if (p.label != 0) {
      labels_per_class[p.class_id].insert(p.label);
      all_labels.insert(p.label);
    }
  }

  StatsTable table;
  table.total_points = cloud.size();
  table.total_objects = all_labels.size();
  for (auto& [class_id, row] : rows) {
    auto it = labels_per_class.find(class_id);
    row.object_count = it == labels_per_class.end() ? 0 : it->second.size();
    if (tree)
      row.name = tree->name_of(class_id);
    else if (class_id == 0)
      row.name = "unassigned";
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string format_stats(const StatsTable& table) {
  std::size_t name_w = 5;
  for (const ClassStats& row : table.rows) name_w = std::max(name_w, row.name.size());

  std::ostringstream out;
  out << std::left << std::setw(12) << "class_id" << std::setw(name_w + 2) << "name" << std::right
      << std::setw(10) << "objects" << std::setw(14) << "points" << '\n';
  for (const ClassStats& row : table.rows)
    out << std::left << std::setw(12) << row.class_id << std::setw(name_w + 2) << row.name
        << std::right << std::setw(10) << row.object_count << std::setw(14) << row.point_count
        << '\n';
  out << std::left << std::setw(12) << "total" << std::setw(name_w + 2) << "" << std::right
      << std::setw(10) << table.total_objects << std::setw(14) << table.total_points << '\n';
  return out.str();
}

}  // namespace mls
