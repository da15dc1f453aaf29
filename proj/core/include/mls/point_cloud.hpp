#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace mls {

/// One MLS return. Positions and sensor origins live in the offset local
/// frame so they fit in 32-bit floats. label 0 means "no object" (ground or
/// unsegmented points); class_id 0 means unclassified.
struct LabeledPoint {
  float x = 0.0f;
  float y = 0.0f;
  float z = 0.0f;
  float x_origin = 0.0f;
  float y_origin = 0.0f;
  float z_origin = 0.0f;
  double gps_time = 0.0;
  std::uint8_t reflectance = 0;
  std::uint32_t label = 0;
  std::uint32_t class_id = 0;

  friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

/// Ordered point sequence plus the (x, y) offset that was subtracted from the
/// original RGF93 coordinates. The offset is metadata only: no operation in
/// this library applies it.
struct PointCloud {
  std::vector<LabeledPoint> points;
  std::array<double, 2> offset{0.0, 0.0};

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  const LabeledPoint& operator[](std::size_t i) const noexcept { return points[i]; }
  LabeledPoint& operator[](std::size_t i) noexcept { return points[i]; }
};

/// Indices 0..size-1, the usual "all points" subset.
std::vector<std::uint32_t> all_indices(const PointCloud& cloud);

}  // namespace mls
