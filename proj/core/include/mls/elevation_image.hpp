#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "mls/point_cloud.hpp"

namespace mls {

/// 2D ground-elevation raster over (x, y). Cells with no value hold EMPTY
/// (quiet NaN). ground_mask marks cells that received real ground points, and
/// is preserved by hole filling and smoothing.
class ElevationImage {
public:
  ElevationImage() = default;
  ElevationImage(double cell_size, double x_min, double y_min, std::size_t width,
                 std::size_t height);

  double cell_size() const noexcept { return cell_size_; }
  double x_min() const noexcept { return x_min_; }
  double y_min() const noexcept { return y_min_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t cell_count() const noexcept { return width_ * height_; }

  double at(std::size_t ix, std::size_t iy) const { return values_[iy * width_ + ix]; }
  void set(std::size_t ix, std::size_t iy, double v) { values_[iy * width_ + ix] = v; }
  bool empty_at(std::size_t ix, std::size_t iy) const { return std::isnan(at(ix, iy)); }

  bool ground_at(std::size_t ix, std::size_t iy) const { return mask_[iy * width_ + ix] != 0; }
  void set_ground(std::size_t ix, std::size_t iy, bool g) { mask_[iy * width_ + ix] = g ? 1 : 0; }

  bool hole_free() const;

  /// Cell containing (x, y); out-of-bounds coordinates clamp to the border.
  std::pair<std::size_t, std::size_t> cell_at(double x, double y) const;

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::uint8_t>& ground_mask() const noexcept { return mask_; }
  std::vector<double>& values() noexcept { return values_; }

  static constexpr double kEmpty = std::numeric_limits<double>::quiet_NaN();

private:
  double cell_size_ = 0.0;
  double x_min_ = 0.0;
  double y_min_ = 0.0;
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> mask_;
};

enum class ElevationAggregate { kMin, kMean };

/// Rasterize the ground points onto a grid spanning the full cloud's (x, y)
/// bounding box. Cells with no ground point stay EMPTY.
/// Throws EmptyInput when ground_indices is empty, InvalidParameter on bad cell_size.
ElevationImage rasterize_ground(const PointCloud& cloud,
                                const std::vector<std::uint32_t>& ground_indices,
                                double cell_size,
                                ElevationAggregate aggregate = ElevationAggregate::kMin);

/// Copy every EMPTY cell from its nearest non-EMPTY cell (Euclidean distance
/// between cell centers; ties broken by lowest (row, column), row = y index).
/// Throws EmptyInput when every cell is EMPTY.
ElevationImage fill_holes(const ElevationImage& img);

/// Box-mean filter of the given radius, window clipped at the borders.
/// Radius 0 is the identity. Requires a hole-free raster.
ElevationImage smooth(const ElevationImage& img, int kernel_radius);

/// Value of the cell containing (x, y), clamped to the raster border.
double elevation_at(const ElevationImage& img, double x, double y);

void write_elevation(const ElevationImage& img, std::ostream& out);
ElevationImage read_elevation(std::istream& in);
void write_elevation_file(const ElevationImage& img, const std::string& path);
ElevationImage read_elevation_file(const std::string& path);

}  // namespace mls
