#include "mls/ground.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "mls/errors.hpp"

namespace mls {

namespace {

void validate(const GroundParams& p) {
  const bool ok = p.sensor_height > 0.0 && p.seed_radius > 0.0 && p.seed_z_tol > 0.0 &&
                  p.cell_size > 0.0 && p.grow_dz_max > 0.0 && p.smooth_radius >= 0;
  if (!ok) throw InvalidParameter("ground parameters must be strictly positive");
}

}  // namespace

std::vector<std::uint32_t> seed_points(const PointCloud& cloud, const GroundParams& params) {
  validate(params);
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    const LabeledPoint& p = cloud[i];
    const double dx = static_cast<double>(p.x) - p.x_origin;
    const double dy = static_cast<double>(p.y) - p.y_origin;
    if (std::sqrt(dx * dx + dy * dy) > params.seed_radius) continue;
    const double drop = static_cast<double>(p.z_origin) - p.z;
    if (std::abs(drop - params.sensor_height) > params.seed_z_tol) continue;
    out.push_back(i);
  }
  if (out.empty()) throw EmptyInput("seed_points: no point inside the seed cylinder");
  return out;
}

GroundResult grow_ground(const PointCloud& cloud, const std::vector<std::uint32_t>& seeds,
                         const GroundParams& params) {
  validate(params);
  if (seeds.empty()) throw EmptyInput("grow_ground: empty seed set");
  for (std::uint32_t i : seeds)
    if (i >= cloud.size()) throw InvalidParameter("grow_ground: seed index out of range");

  const ElevationImage raster =
      rasterize_ground(cloud, all_indices(cloud), params.cell_size, params.aggregate);
  const std::size_t w = raster.width(), h = raster.height();

  // Bucket points by cell once; the raster spans every point, so no misses.
  std::vector<std::vector<std::uint32_t>> cell_points(w * h);
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    const auto [ix, iy] = raster.cell_at(cloud[i].x, cloud[i].y);
    cell_points[iy * w + ix].push_back(i);
  }

  std::vector<std::uint8_t> accepted(w * h, 0);
  std::deque<std::size_t> queue;
  for (std::uint32_t i : seeds) {
    const auto [ix, iy] = raster.cell_at(cloud[i].x, cloud[i].y);
    const std::size_t c = iy * w + ix;
    if (!accepted[c]) {
      accepted[c] = 1;
      queue.push_back(c);
    }
  }
  while (!queue.empty()) {
    const std::size_t c = queue.front();
    queue.pop_front();
    const std::size_t cx = c % w, cy = c / w;
    const double elev = raster.at(cx, cy);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const auto nx = static_cast<std::ptrdiff_t>(cx) + dx;
        const auto ny = static_cast<std::ptrdiff_t>(cy) + dy;
        if (nx < 0 || ny < 0 || nx >= static_cast<std::ptrdiff_t>(w) ||
            ny >= static_cast<std::ptrdiff_t>(h))
          continue;
        const std::size_t n = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
        if (accepted[n]) continue;
        if (raster.empty_at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny))) continue;
        if (std::abs(raster.at(static_cast<std::size_t>(nx), static_cast<std::size_t>(ny)) -
                     elev) > params.grow_dz_max)
          continue;
        accepted[n] = 1;
        queue.push_back(n);
      }
    }
  }

  GroundResult result;
  for (std::size_t c = 0; c < w * h; ++c) {
    if (!accepted[c]) continue;
    const double elev = raster.at(c % w, c / w);
    for (std::uint32_t i : cell_points[c])
      if (std::abs(static_cast<double>(cloud[i].z) - elev) <= params.grow_dz_max)
        result.ground_indices.push_back(i);
  }
  std::sort(result.ground_indices.begin(), result.ground_indices.end());

  ElevationImage ground_raster =
      rasterize_ground(cloud, result.ground_indices, params.cell_size, params.aggregate);
  result.elevation = smooth(fill_holes(ground_raster), params.smooth_radius);
  return result;
}

GroundResult extract_ground(const PointCloud& cloud, const GroundParams& params) {
  return grow_ground(cloud, seed_points(cloud, params), params);
}

}  // namespace mls
