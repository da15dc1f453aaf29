#pragma once

#include <cstdint>
#include <vector>

#include "mls/point_cloud.hpp"

namespace mls {

/// Partition of a point subset into object instances. Ids are dense from 0,
/// ordered by size descending, ties by lowest contained point index. Points
/// outside every segment (ground, or components under min_points) map to
/// kNone.
struct SegmentSet {
  static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

  std::vector<std::vector<std::uint32_t>> segments;  // each ascending
  std::vector<std::uint32_t> segment_of;             // one entry per cloud point

  std::size_t size() const noexcept { return segments.size(); }
};

/// Connected components of the voxelized subset: two points share a segment
/// iff their voxels are linked through 26-neighbor adjacency of occupied
/// voxels. Components with fewer than min_points points are dropped to the
/// kNone bucket. Throws InvalidParameter on bad cell_size or indices.
SegmentSet segment_connected(const PointCloud& cloud, const std::vector<std::uint32_t>& non_ground,
                             double cell_size, std::size_t min_points);

/// Copy of the cloud with label = segment id + 1, and 0 for every point
/// without a segment (ground and kNone points). Class ids are untouched.
PointCloud export_labeled(const PointCloud& cloud, const SegmentSet& segset);

/// Rebuild a SegmentSet from the label field: one segment per distinct
/// non-zero label, ordered by the usual (size, lowest index) rule.
SegmentSet segments_from_labels(const PointCloud& cloud);

}  // namespace mls
