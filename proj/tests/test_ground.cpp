#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "mls/errors.hpp"
#include "mls/ground.hpp"
#include "mls/synth.hpp"
#include "test_util.hpp"

using namespace mls;

namespace {

// independent restatement of the seed rule: lateral distance to the point's
// own origin at most seed_radius, drop below the origin within seed_z_tol of
// sensor_height
std::vector<std::uint32_t> seed_oracle(const PointCloud& cloud, const GroundParams& params) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    const LabeledPoint& p = cloud[i];
    const double lateral = std::hypot(static_cast<double>(p.x) - p.x_origin,
                                      static_cast<double>(p.y) - p.y_origin);
    const double drop = static_cast<double>(p.z_origin) - static_cast<double>(p.z);
    if (lateral <= params.seed_radius &&
        std::abs(drop - params.sensor_height) <= params.seed_z_tol)
      out.push_back(i);
  }
  return out;
}

SceneSpec graded_scene(double grade, std::uint64_t seed) {
  SceneSpec spec;
  spec.road_length = 12.0;
  spec.road_width = 6.0;
  spec.grade = grade;
  spec.density = 200.0;
  spec.noise_sigma = 0.005;
  spec.seed = seed;

  const double xs[5] = {2.0, 4.0, 6.0, 8.0, 10.0};
  const double ys[5] = {1.5, -1.5, 2.0, -2.0, 1.8};
  for (int i = 0; i < 5; ++i) {
    SceneObject box;
    box.x = xs[i];
    box.y = ys[i];
    box.sx = 0.6;
    box.sy = 0.5;
    box.sz = 1.2 + 0.2 * i;
    box.class_id = 300 + static_cast<std::uint32_t>(i);
    spec.objects.push_back(box);
  }
  return spec;
}

}  // namespace

TEST_CASE("seed_points matches the brute-force cylinder rule") {
  GroundParams params;
  for (int it = 0; it < 10; ++it) {
    SceneSpec spec = graded_scene(it < 5 ? 0.0 : 0.02 * it, 100 + it);
    spec.noise_sigma = 0.02;
    const PointCloud cloud = generate(spec);
    CHECK(seed_points(cloud, params) == seed_oracle(cloud, params));
  }
}

TEST_CASE("seed points are pure ground in a labeled scene") {
  const PointCloud cloud = generate(graded_scene(0.06, 7));
  GroundParams params;
  for (std::uint32_t i : seed_points(cloud, params)) CHECK(cloud[i].label == 0);
}

TEST_CASE("seed_points throws when the cylinder is empty") {
  PointCloud cloud;
  LabeledPoint p{};
  p.x = 50.0f;  // far from its origin
  p.z = 0.0f;
  p.z_origin = 2.71f;
  cloud.points.push_back(p);
  CHECK_THROWS_AS(seed_points(cloud, GroundParams{}), EmptyInput);
}

TEST_CASE("ground recall and purity on flat and graded scenes") {
  for (double grade : {0.0, 0.1}) {
    const SceneSpec spec = graded_scene(grade, 21);
    const PointCloud cloud = generate(spec);
    const GroundResult result = extract_ground(cloud, GroundParams{});

    std::set<std::uint32_t> ground(result.ground_indices.begin(), result.ground_indices.end());
    std::size_t road_total = 0, road_found = 0;
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
      const LabeledPoint& p = cloud[i];
      const double height = static_cast<double>(p.z) - grade * p.x;
      if (p.label == 0) {
        ++road_total;
        road_found += ground.count(i);
      } else if (height > 0.3) {
        CHECK(ground.count(i) == 0);
      }
    }
    CHECK(road_total > 10000);
    CHECK(static_cast<double>(road_found) >= 0.99 * static_cast<double>(road_total));
    CHECK(result.elevation.hole_free());
  }
}

TEST_CASE("the smoothed elevation raster tracks the true ground plane") {
  const double grade = 0.08;
  const PointCloud cloud = generate(graded_scene(grade, 3));
  const GroundResult result = extract_ground(cloud, GroundParams{});
  for (double x = 2.0; x <= 10.0; x += 0.5)
    for (double y = -2.0; y <= 2.0; y += 0.5)
      CHECK(std::abs(elevation_at(result.elevation, x, y) - grade * x) < 0.08);
}

TEST_CASE("extraction is independent of point order") {
  const PointCloud cloud = generate(graded_scene(0.05, 11));
  const GroundResult base = extract_ground(cloud, GroundParams{});

  Rng rng(99);
  std::vector<std::uint32_t> perm(cloud.size());
  std::iota(perm.begin(), perm.end(), 0u);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1], perm[rng.uniform_index(i)]);

  PointCloud shuffled;
  shuffled.offset = cloud.offset;
  shuffled.points.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) shuffled.points[i] = cloud.points[perm[i]];

  const GroundResult other = extract_ground(shuffled, GroundParams{});
  std::set<std::uint32_t> base_set(base.ground_indices.begin(), base.ground_indices.end());
  std::set<std::uint32_t> mapped;
  for (std::uint32_t i : other.ground_indices) mapped.insert(perm[i]);
  CHECK(mapped == base_set);
}

TEST_CASE("growth stops at a step taller than grow_dz_max") {
  SceneSpec spec;
  spec.road_length = 10.0;
  spec.road_width = 4.0;
  spec.density = 400.0;
  spec.noise_sigma = 0.0;
  spec.seed = 5;
  // a broad flat slab: its top is a plateau 1 m above the road
  SceneObject slab;
  slab.x = 7.5;
  slab.y = 0.0;
  slab.sx = 3.0;
  slab.sy = 4.0;
  slab.sz = 1.0;
  slab.class_id = 310;
  spec.objects.push_back(slab);
  const PointCloud cloud = generate(spec);

  const GroundResult result = extract_ground(cloud, GroundParams{});
  for (std::uint32_t i : result.ground_indices) {
    const LabeledPoint& p = cloud[i];
    if (p.label == 1) CHECK(p.z < 0.5);  // never the plateau top
  }
}

TEST_CASE("grow_ground validates seeds and parameters") {
  const PointCloud cloud = generate(graded_scene(0.0, 2));
  CHECK_THROWS_AS(grow_ground(cloud, {}, GroundParams{}), EmptyInput);
  CHECK_THROWS_AS(grow_ground(cloud, {static_cast<std::uint32_t>(cloud.size())}, GroundParams{}),
                  InvalidParameter);
  GroundParams bad;
  bad.cell_size = 0.0;
  CHECK_THROWS_AS(extract_ground(cloud, bad), InvalidParameter);
  bad = GroundParams{};
  bad.smooth_radius = -1;
  CHECK_THROWS_AS(extract_ground(cloud, bad), InvalidParameter);
}

TEST_CASE("extract_ground equals the two stages composed") {
  const PointCloud cloud = generate(graded_scene(0.04, 13));
  GroundParams params;
  const GroundResult a = extract_ground(cloud, params);
  const GroundResult b = grow_ground(cloud, seed_points(cloud, params), params);
  CHECK(a.ground_indices == b.ground_indices);
}
