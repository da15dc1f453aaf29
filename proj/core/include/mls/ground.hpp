#pragma once

#include <cstdint>
#include <vector>

#include "mls/elevation_image.hpp"
#include "mls/point_cloud.hpp"

namespace mls {

struct GroundParams {
  double sensor_height = 2.71;
  double seed_radius = 1.0;
  double seed_z_tol = 0.3;
  double cell_size = 0.1;
  double grow_dz_max = 0.15;
  int smooth_radius = 2;
  ElevationAggregate aggregate = ElevationAggregate::kMin;
};

struct GroundResult {
  std::vector<std::uint32_t> ground_indices;  // ascending
  ElevationImage elevation;                   // hole-free, smoothed
};

/// Indices of the points inside the seed cylinder under the sensor: lateral
/// distance to the point's own origin at most seed_radius, and height below
/// the origin within seed_z_tol of sensor_height. These are ground by
/// construction. Throws EmptyInput when no point qualifies.
std::vector<std::uint32_t> seed_points(const PointCloud& cloud, const GroundParams& params);

/// Region growing over the elevation raster. The raster takes the per-cell
/// aggregate z of all points at cell_size resolution; growth starts from the
/// cells holding seed points and crosses an 8-connected cell boundary when
/// the elevation difference is at most grow_dz_max (pure reachability, so the
/// visit order cannot change the result). A point is ground when its cell was
/// accepted and its z lies within grow_dz_max of the cell elevation, which
/// keeps the low parts of objects standing in a ground cell out of the ground
/// set. The returned raster holds the accepted cells' elevations, hole-filled
/// and smoothed.
GroundResult grow_ground(const PointCloud& cloud, const std::vector<std::uint32_t>& seeds,
                         const GroundParams& params);

/// seed_points followed by grow_ground.
GroundResult extract_ground(const PointCloud& cloud, const GroundParams& params);

}  // namespace mls
