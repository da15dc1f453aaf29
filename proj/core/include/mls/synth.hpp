#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mls/point_cloud.hpp"

namespace mls {

enum class Primitive { kBox, kCylinder, kSphere };

/// One object placed on the road. Sizes by primitive:
///   box: sx, sy footprint extents, sz height;
///   cylinder: sx radius, sz height (sy unused);
///   sphere: sx radius.
/// Box and cylinder surfaces omit the bottom face (it rests on the ground and
/// a scanner never sees it). lift raises the base above the local ground.
struct SceneObject {
  Primitive primitive = Primitive::kBox;
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double sx = 1.0;
  double sy = 1.0;
  double sz = 1.0;
  std::uint32_t class_id = 0;
  double lift = 0.0;
};

/// Deterministic synthetic MLS scene: a planar road of constant grade
/// (ground z = grade * x) with objects resting on it, scanned from a
/// trajectory of sensor origins placed sensor_height above the local ground.
/// When trajectory is empty, generate() walks the road centerline from x = 0
/// to x = road_length in trajectory_step increments.
struct SceneSpec {
  double road_length = 50.0;
  double road_width = 8.0;
  double grade = 0.0;
  double density = 1500.0;  // points per square meter of surface
  double noise_sigma = 0.01;
  double sensor_height = 2.71;
  double range_max = 20.0;
  double trajectory_step = 1.0;
  std::uint32_t road_class_id = 1;
  std::uint64_t seed = 0;
  std::vector<std::array<double, 2>> trajectory;  // (x, y) waypoints
  std::vector<SceneObject> objects;
};

/// Sample the scene. Ground points carry label 0 and road_class_id; object i
/// carries label i + 1 and its own class id. Each point stores the nearest
/// trajectory origin and a gps_time that increases along the trajectory;
/// points beyond range_max of every origin are dropped. Surfaces are sampled
/// uniformly by area (real MLS scan anisotropy is not reproduced) with
/// Gaussian noise along the surface normal, and reflectance is a per-class
/// constant plus noise. Same spec, same output, bit for bit.
PointCloud generate(const SceneSpec& spec);

/// Expected reflectance constant for a class (road gets 20).
std::uint8_t reflectance_base(std::uint32_t class_id, std::uint32_t road_class_id);

/// Plain-text scene format: global key=value lines, then one [object] stanza
/// per object. parse_scene accepts '#' comments; format_scene inverts it.
SceneSpec parse_scene(const std::string& text);
std::string format_scene(const SceneSpec& spec);
SceneSpec read_scene_file(const std::string& path);

/// Write <base>.ply (the generated cloud) and <base>.scene (the scene text).
void write_fixture(const SceneSpec& spec, const std::string& base_path);

}  // namespace mls
