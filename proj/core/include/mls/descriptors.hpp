#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mls/elevation_image.hpp"
#include "mls/point_cloud.hpp"
#include "mls/segment.hpp"

namespace mls {

constexpr std::size_t kGeomSize = 12;
constexpr std::size_t kGrsdSize = 21;
constexpr std::size_t kEsfSize = 640;
constexpr std::size_t kContextSize = 1;

struct GrsdParams {
  double voxel = 0.25;
  double plane_radius = 2.0;   // fitted radius above this is flat
  double noise_radius = 0.05;  // below this is edge/noise
  double sphere_ratio = 0.7;   // r_min/r_max above this is isotropic
  double radius_cap = 10.0;    // stand-in for an infinite fitted radius
};

struct DescriptorConfig {
  bool geom = true;
  bool grsd = true;
  bool esf = true;
  bool context = true;
  std::uint32_t esf_samples = 20000;
  std::uint32_t subsample_max = 10000;  // GRSD/ESF input cap, seeded subsample
  GrsdParams grsd_params;
  std::uint64_t seed = 0;
};

/// Ordered named blocks with stable offsets. The string form
/// ("GEOM:12,GRSD:21,ESF:640,CONTEXT:1") identifies a layout across
/// descriptor tables and saved models.
struct DescriptorLayout {
  struct Block {
    std::string name;
    std::size_t offset = 0;
    std::size_t size = 0;
    friend bool operator==(const Block&, const Block&) = default;
  };
  std::vector<Block> blocks;
  std::size_t total = 0;

  static DescriptorLayout from_config(const DescriptorConfig& config);
  static DescriptorLayout parse(const std::string& text);
  std::string to_string() const;
  const Block* find(const std::string& name) const;

  friend bool operator==(const DescriptorLayout&, const DescriptorLayout&) = default;
};

/// 12 geometric features of an object (>= 1 point):
///   [0] log point count, [1..3] bbox extents dx dy dz (dz is the vertical
///   extent z_max - z_min), [4] log1p bbox volume, [5..7] covariance
///   eigenvalues l1 >= l2 >= l3 normalized to sum 1, [8] linearity
///   (l1-l2)/l1, [9] planarity (l2-l3)/l1, [10] mean reflectance,
///   [11] reflectance standard deviation.
/// Degenerate objects (< 3 points or zero covariance) take eigenvalues
/// (1/3, 1/3, 1/3) and zero shape features.
std::array<double, kGeomSize> geom_features(const PointCloud& cloud,
                                            const std::vector<std::uint32_t>& object);

/// Global radius-based surface histogram: each occupied voxel gets a surface
/// category (plane, cylinder, sphere, rim, edge/noise) from the min/max
/// radius fitted against its 26-neighborhood normals; the histogram counts
/// unordered category pairs over adjacent occupied voxels, plus one
/// (category, free) transition per occupied voxel bordering empty space.
/// Normalized to sum 1; objects of < 2 points yield the uniform histogram.
std::array<double, kGrsdSize> grsd(const PointCloud& cloud,
                                   const std::vector<std::uint32_t>& object,
                                   const GrsdParams& params);

/// Ensemble of shape functions: 10 concatenated 64-bin histograms over seeded
/// random point triplets - D2 pair distances, A3 angles, and D3 triangle
/// areas, each split by the in/out/mixed occupancy of a traced line, plus the
/// D2 line occupancy ratio. Distances are normalized by the bbox diagonal.
/// Sums to 1; objects of < 3 points (or zero extent) yield the uniform
/// histogram.
std::array<double, kEsfSize> esf(const PointCloud& cloud,
                                 const std::vector<std::uint32_t>& object,
                                 std::uint32_t samples, std::uint64_t seed);

/// z_min of the object minus the ground elevation under its barycenter
/// (clamped lookup). The image must be hole-free.
double context_elevation(const PointCloud& cloud, const std::vector<std::uint32_t>& object,
                         const ElevationImage& elevation);

/// Concatenation of the enabled blocks in layout order. object_seed drives
/// the subsample and ESF draws. elevation may be null only when the context
/// block is disabled.
std::vector<double> describe(const PointCloud& cloud, const std::vector<std::uint32_t>& object,
                             std::uint64_t object_seed, const DescriptorConfig& config,
                             const ElevationImage* elevation);

/// describe() for every segment, row s from segment s with seed
/// config.seed XOR s. Rows are independent of thread count.
std::vector<std::vector<double>> describe_objects(const PointCloud& cloud,
                                                  const SegmentSet& segments,
                                                  const DescriptorConfig& config,
                                                  const ElevationImage* elevation,
                                                  unsigned threads = 1);

}  // namespace mls
