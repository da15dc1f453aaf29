#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "mls/point_cloud.hpp"

namespace mls {

/// Integer 3D cell coordinate. A point maps to floor(coord / cell_size) per axis.
struct CellIndex {
  std::int32_t x = 0;
  std::int32_t y = 0;
  std::int32_t z = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

struct CellIndexHash {
  std::size_t operator()(const CellIndex& c) const noexcept {
    // three odd 64-bit constants, xor-folded
    std::uint64_t h = static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.x)) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.y)) * 0xc2b2ae3d27d4eb4fULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(c.z)) * 0x165667b19e3779f9ULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

/// Uniform spatial hash over a subset of a cloud. Every subset point lives in
/// exactly one cell; the union of all cells is exactly the input subset.
class VoxelGrid {
public:
  using CellMap = std::unordered_map<CellIndex, std::vector<std::uint32_t>, CellIndexHash>;

  VoxelGrid() = default;
  VoxelGrid(const PointCloud& cloud, const std::vector<std::uint32_t>& subset, double cell_size);

  double cell_size() const noexcept { return cell_size_; }
  std::size_t cell_count() const noexcept { return cells_.size(); }
  std::size_t point_count() const noexcept { return point_count_; }

  /// Point indices stored in a cell, or nullptr when the cell is empty.
  const std::vector<std::uint32_t>* cell(const CellIndex& idx) const {
    auto it = cells_.find(idx);
    return it == cells_.end() ? nullptr : &it->second;
  }

  bool occupied(const CellIndex& idx) const { return cells_.count(idx) != 0; }

  CellIndex index_of(const LabeledPoint& p) const { return quantize(p.x, p.y, p.z, cell_size_); }

  static CellIndex quantize(double x, double y, double z, double cell_size);

  const CellMap& cells() const noexcept { return cells_; }

private:
  double cell_size_ = 0.0;
  CellMap cells_;
  std::size_t point_count_ = 0;
};

/// Throws InvalidParameter on non-positive cell_size or an out-of-range subset index.
VoxelGrid build_voxel_grid(const PointCloud& cloud, const std::vector<std::uint32_t>& subset,
                           double cell_size);

}  // namespace mls
