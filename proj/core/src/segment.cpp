#include "mls/segment.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "mls/errors.hpp"
#include "mls/voxel_grid.hpp"

namespace mls {

namespace {

void finalize(SegmentSet& out, std::vector<std::vector<std::uint32_t>>& raw,
              std::size_t cloud_size) {
  for (auto& seg : raw) std::sort(seg.begin(), seg.end());
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  out.segments = std::move(raw);
  out.segment_of.assign(cloud_size, SegmentSet::kNone);
  for (std::uint32_t s = 0; s < out.segments.size(); ++s)
    for (std::uint32_t i : out.segments[s]) out.segment_of[i] = s;
}

}  // namespace

SegmentSet segment_connected(const PointCloud& cloud, const std::vector<std::uint32_t>& non_ground,
                             double cell_size, std::size_t min_points) {
  const VoxelGrid grid(cloud, non_ground, cell_size);

  std::unordered_map<CellIndex, std::uint32_t, CellIndexHash> component;
  component.reserve(grid.cell_count());
  std::vector<std::vector<const std::vector<std::uint32_t>*>> comp_cells;

  for (const auto& [start, pts] : grid.cells()) {
    (void)pts;
    if (component.count(start)) continue;
    const auto id = static_cast<std::uint32_t>(comp_cells.size());
    comp_cells.emplace_back();
    component.emplace(start, id);
    std::deque<CellIndex> queue{start};
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      comp_cells[id].push_back(grid.cell(c));
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0 && dz == 0) continue;
            const CellIndex n{c.x + dx, c.y + dy, c.z + dz};
            if (!grid.occupied(n) || component.count(n)) continue;
            component.emplace(n, id);
            queue.push_back(n);
          }
    }
  }

  std::vector<std::vector<std::uint32_t>> raw;
  for (const auto& cells : comp_cells) {
    std::size_t count = 0;
    for (const auto* pts : cells) count += pts->size();
    if (count < std::max<std::size_t>(min_points, 1)) continue;
    std::vector<std::uint32_t> seg;
    seg.reserve(count);
    for (const auto* pts : cells) seg.insert(seg.end(), pts->begin(), pts->end());
    raw.push_back(std::move(seg));
  }

  SegmentSet out;
  finalize(out, raw, cloud.size());
  return out;
}

PointCloud export_labeled(const PointCloud& cloud, const SegmentSet& segset) {
  PointCloud out = cloud;
  for (LabeledPoint& p : out.points) p.label = 0;
  for (std::uint32_t s = 0; s < segset.segments.size(); ++s)
    for (std::uint32_t i : segset.segments[s]) out.points[i].label = s + 1;
  return out;
}

SegmentSet segments_from_labels(const PointCloud& cloud) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> by_label;
  for (std::uint32_t i = 0; i < cloud.size(); ++i)
    if (cloud[i].label != 0) by_label[cloud[i].label].push_back(i);

  std::vector<std::vector<std::uint32_t>> raw;
  raw.reserve(by_label.size());
  for (auto& [label, idx] : by_label) {
    (void)label;
    raw.push_back(std::move(idx));
  }
  SegmentSet out;
  finalize(out, raw, cloud.size());
  return out;
}

}  // namespace mls
