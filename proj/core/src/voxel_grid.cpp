#include "mls/voxel_grid.hpp"

#include <cmath>

#include "mls/errors.hpp"

namespace mls {

CellIndex VoxelGrid::quantize(double x, double y, double z, double cell_size) {
  return CellIndex{static_cast<std::int32_t>(std::floor(x / cell_size)),
                   static_cast<std::int32_t>(std::floor(y / cell_size)),
                   static_cast<std::int32_t>(std::floor(z / cell_size))};
}

VoxelGrid::VoxelGrid(const PointCloud& cloud, const std::vector<std::uint32_t>& subset,
                     double cell_size)
    : cell_size_(cell_size) {
  if (!(cell_size > 0.0) || !std::isfinite(cell_size))
    throw InvalidParameter("voxel grid cell_size must be positive and finite");
  cells_.reserve(subset.size() / 4 + 1);
  for (std::uint32_t i : subset) {
    if (i >= cloud.size())
      throw InvalidParameter("voxel grid subset index " + std::to_string(i) + " out of range");
    const LabeledPoint& p = cloud[i];
    cells_[quantize(p.x, p.y, p.z, cell_size)].push_back(i);
  }
  point_count_ = subset.size();
}

VoxelGrid build_voxel_grid(const PointCloud& cloud, const std::vector<std::uint32_t>& subset,
                           double cell_size) {
  return VoxelGrid(cloud, subset, cell_size);
}

std::vector<std::uint32_t> all_indices(const PointCloud& cloud) {
  std::vector<std::uint32_t> idx(cloud.size());
  for (std::uint32_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return idx;
}

}  // namespace mls
