#include "mls/descriptors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mls/errors.hpp"
#include "mls/parallel.hpp"
#include "mls/rng.hpp"
#include "mls/voxel_grid.hpp"

namespace mls {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct P3 {
  double x = 0, y = 0, z = 0;
};

/// Object coordinates relative to the bbox minimum. Exactly representable
/// translations of the input cancel out here, which is what makes every
/// descriptor translation-invariant bit for bit.
struct Frame {
  std::vector<P3> pts;
  double dx = 0, dy = 0, dz = 0;
  double diag = 0;
};

Frame make_frame(const PointCloud& cloud, const std::vector<std::uint32_t>& object) {
  Frame f;
  f.pts.reserve(object.size());
  double x0 = cloud[object[0]].x, y0 = cloud[object[0]].y, z0 = cloud[object[0]].z;
  double x1 = x0, y1 = y0, z1 = z0;
  for (std::uint32_t i : object) {
    const LabeledPoint& p = cloud[i];
    x0 = std::min<double>(x0, p.x);
    y0 = std::min<double>(y0, p.y);
    z0 = std::min<double>(z0, p.z);
    x1 = std::max<double>(x1, p.x);
    y1 = std::max<double>(y1, p.y);
    z1 = std::max<double>(z1, p.z);
  }
  for (std::uint32_t i : object) {
    const LabeledPoint& p = cloud[i];
    f.pts.push_back({p.x - x0, p.y - y0, p.z - z0});
  }
  f.dx = x1 - x0;
  f.dy = y1 - y0;
  f.dz = z1 - z0;
  f.diag = std::sqrt(f.dx * f.dx + f.dy * f.dy + f.dz * f.dz);
  return f;
}

void check_object(const std::vector<std::uint32_t>& object, const PointCloud& cloud,
                  const char* who) {
  if (object.empty()) throw EmptyInput(std::string(who) + ": empty object");
  for (std::uint32_t i : object)
    if (i >= cloud.size()) throw InvalidParameter(std::string(who) + ": index out of range");
}

// ---------------------------------------------------------------------------
// GRSD

enum Category : int { kPlane = 0, kCylinder = 1, kSphere = 2, kRim = 3, kEdgeNoise = 4, kFree = 5 };
constexpr int kCategories = 6;

/// Upper-triangle index of the unordered category pair (a, b).
std::size_t pair_bin(int a, int b) {
  if (a > b) std::swap(a, b);
  const auto ua = static_cast<std::size_t>(a);
  return ua * (2 * kCategories - 1 - ua) / 2 + static_cast<std::size_t>(b);
}

struct GrsdCell {
  std::vector<std::uint32_t> pts;  // indices into the frame
  bool normal_valid = false;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  int category = kEdgeNoise;
};

}  // namespace

std::array<double, kGrsdSize> grsd(const PointCloud& cloud,
                                   const std::vector<std::uint32_t>& object,
                                   const GrsdParams& params) {
  check_object(object, cloud, "grsd");
  if (!(params.voxel > 0.0) || !(params.plane_radius > 0.0) || !(params.noise_radius > 0.0) ||
      !(params.sphere_ratio > 0.0) || !(params.radius_cap > 0.0))
    throw InvalidParameter("grsd: parameters must be positive");

  std::array<double, kGrsdSize> hist{};
  if (object.size() < 2) {
    hist.fill(1.0 / kGrsdSize);
    return hist;
  }

  const Frame frame = make_frame(cloud, object);
  std::unordered_map<CellIndex, GrsdCell, CellIndexHash> cells;
  for (std::uint32_t i = 0; i < frame.pts.size(); ++i) {
    const P3& p = frame.pts[i];
    cells[VoxelGrid::quantize(p.x, p.y, p.z, params.voxel)].pts.push_back(i);
  }

  // Per-voxel normal from the covariance of the 27-cell neighborhood.
  for (auto& [c, cell] : cells) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    std::size_t count = 0;
    auto for_neighborhood = [&](auto&& fn) {
      for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const auto it = cells.find(CellIndex{c.x + dx, c.y + dy, c.z + dz});
            if (it == cells.end()) continue;
            for (std::uint32_t i : it->second.pts) fn(frame.pts[i]);
          }
    };
    for_neighborhood([&](const P3& p) {
      mean += Eigen::Vector3d(p.x, p.y, p.z);
      ++count;
    });
    if (count < 3) continue;
    mean /= static_cast<double>(count);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for_neighborhood([&](const P3& p) {
      const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
      cov += d * d.transpose();
    });
    cov /= static_cast<double>(count);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    if (solver.info() != Eigen::Success) continue;
    cell.normal = solver.eigenvectors().col(0);
    cell.normal_valid = true;
  }

  // Categories from the min/max radius against valid-normal neighbors.
  for (auto& [c, cell] : cells) {
    if (!cell.normal_valid) {
      cell.category = kEdgeNoise;
      continue;
    }
    double r_min = std::numeric_limits<double>::infinity();
    double r_max = 0.0;
    bool any = false;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const auto it = cells.find(CellIndex{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end() || !it->second.normal_valid) continue;
          const double dot = std::clamp(std::abs(cell.normal.dot(it->second.normal)), 0.0, 1.0);
          const double alpha = std::acos(dot);
          const double d =
              params.voxel * std::sqrt(double(dx * dx) + double(dy * dy) + double(dz * dz));
          double r = params.radius_cap;
          if (alpha > 1e-9) r = std::min(params.radius_cap, d / (2.0 * std::sin(alpha / 2.0)));
          r_min = std::min(r_min, r);
          r_max = std::max(r_max, r);
          any = true;
        }
    if (!any) {
      cell.category = kEdgeNoise;
    } else if (r_min > params.plane_radius) {
      cell.category = kPlane;
    } else if (r_max < params.noise_radius) {
      cell.category = kEdgeNoise;
    } else if (r_min / r_max > params.sphere_ratio) {
      cell.category = kSphere;
    } else if (r_min < params.noise_radius) {
      cell.category = kRim;
    } else {
      cell.category = kCylinder;
    }
  }

  // Transitions: occupied-occupied adjacency counted once per unordered pair
  // (positive half of the 26-neighborhood), free transitions once per
  // occupied voxel that borders empty space.
  for (const auto& [c, cell] : cells) {
    bool has_empty_neighbor = false;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0 && dz == 0) continue;
          const auto it = cells.find(CellIndex{c.x + dx, c.y + dy, c.z + dz});
          if (it == cells.end()) {
            has_empty_neighbor = true;
            continue;
          }
          const bool positive_half = dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0)));
          if (positive_half) hist[pair_bin(cell.category, it->second.category)] += 1.0;
        }
    if (has_empty_neighbor) hist[pair_bin(cell.category, kFree)] += 1.0;
  }

  double total = 0.0;
  for (double v : hist) total += v;
  if (total <= 0.0) {
    hist.fill(1.0 / kGrsdSize);
    return hist;
  }
  for (double& v : hist) v /= total;
  return hist;
}

// ---------------------------------------------------------------------------
// Geometric features

std::array<double, kGeomSize> geom_features(const PointCloud& cloud,
                                            const std::vector<std::uint32_t>& object) {
  check_object(object, cloud, "geom_features");
  const Frame frame = make_frame(cloud, object);
  const std::size_t n = object.size();

  std::array<double, kGeomSize> out{};
  out[0] = std::log(static_cast<double>(n));
  out[1] = frame.dx;
  out[2] = frame.dy;
  out[3] = frame.dz;
  out[4] = std::log1p(frame.dx * frame.dy * frame.dz);

  bool degenerate = n < 3;
  if (!degenerate) {
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const P3& p : frame.pts) mean += Eigen::Vector3d(p.x, p.y, p.z);
    mean /= static_cast<double>(n);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const P3& p : frame.pts) {
      const Eigen::Vector3d d = Eigen::Vector3d(p.x, p.y, p.z) - mean;
      cov += d * d.transpose();
    }
    cov /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
    double l1 = 0, l2 = 0, l3 = 0;
    if (solver.info() == Eigen::Success) {
      l1 = std::max(0.0, solver.eigenvalues()(2));
      l2 = std::max(0.0, solver.eigenvalues()(1));
      l3 = std::max(0.0, solver.eigenvalues()(0));
    }
    const double sum = l1 + l2 + l3;
    if (sum > 0.0) {
      out[5] = l1 / sum;
      out[6] = l2 / sum;
      out[7] = l3 / sum;
      out[8] = (out[5] - out[6]) / out[5];
      out[9] = (out[6] - out[7]) / out[5];
    } else {
      degenerate = true;
    }
  }
  if (degenerate) {
    out[5] = out[6] = out[7] = 1.0 / 3.0;
    out[8] = out[9] = 0.0;
  }

  double refl_mean = 0.0;
  for (std::uint32_t i : object) refl_mean += cloud[i].reflectance;
  refl_mean /= static_cast<double>(n);
  double refl_var = 0.0;
  for (std::uint32_t i : object) {
    const double d = cloud[i].reflectance - refl_mean;
    refl_var += d * d;
  }
  out[10] = refl_mean;
  out[11] = std::sqrt(refl_var / static_cast<double>(n));
  return out;
}

// ---------------------------------------------------------------------------
// ESF

namespace {

struct EsfGrid {
  double cell = 0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<std::uint8_t> occupied;

  bool at(int ix, int iy, int iz) const {
    return occupied[(static_cast<std::size_t>(iz) * ny + iy) * nx + ix] != 0;
  }
  bool at_point(const P3& p) const {
    const int ix = std::clamp(static_cast<int>(std::floor(p.x / cell)), 0, nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(p.y / cell)), 0, ny - 1);
    const int iz = std::clamp(static_cast<int>(std::floor(p.z / cell)), 0, nz - 1);
    return at(ix, iy, iz);
  }
};

EsfGrid build_esf_grid(const Frame& frame) {
  EsfGrid g;
  const double extent = std::max({frame.dx, frame.dy, frame.dz});
  g.cell = extent / 64.0;
  g.nx = std::min(64, static_cast<int>(std::floor(frame.dx / g.cell)) + 1);
  g.ny = std::min(64, static_cast<int>(std::floor(frame.dy / g.cell)) + 1);
  g.nz = std::min(64, static_cast<int>(std::floor(frame.dz / g.cell)) + 1);
  g.occupied.assign(static_cast<std::size_t>(g.nx) * g.ny * g.nz, 0);
  for (const P3& p : frame.pts) {
    const int ix = std::clamp(static_cast<int>(std::floor(p.x / g.cell)), 0, g.nx - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(p.y / g.cell)), 0, g.ny - 1);
    const int iz = std::clamp(static_cast<int>(std::floor(p.z / g.cell)), 0, g.nz - 1);
    g.occupied[(static_cast<std::size_t>(iz) * g.ny + iy) * g.nx + ix] = 1;
  }
  return g;
}

enum TraceClass { kIn = 0, kOut = 1, kMixed = 2 };

struct TraceResult {
  TraceClass cls = kIn;
  double ratio = 1.0;  // occupied fraction of interior samples
};

/// Walk the open segment (a, b) in half-voxel steps and classify the interior
/// samples by grid occupancy. Zero interior samples count as kIn, ratio 1.
TraceResult trace_line(const EsfGrid& g, const P3& a, const P3& b) {
  const double dx = b.x - a.x, dy = b.y - a.y, dz = b.z - a.z;
  const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
  const int steps = static_cast<int>(std::ceil(len / (g.cell * 0.5)));
  int hit = 0, total = 0;
  for (int k = 1; k < steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    const P3 p{a.x + dx * t, a.y + dy * t, a.z + dz * t};
    ++total;
    if (g.at_point(p)) ++hit;
  }
  TraceResult r;
  if (total == 0) return r;
  r.ratio = static_cast<double>(hit) / total;
  r.cls = hit == total ? kIn : (hit == 0 ? kOut : kMixed);
  return r;
}

std::size_t esf_bin(double v) {
  if (!(v > 0.0)) return 0;
  return std::min<std::size_t>(63, static_cast<std::size_t>(v * 64.0));
}

}  // namespace

std::array<double, kEsfSize> esf(const PointCloud& cloud, const std::vector<std::uint32_t>& object,
                                 std::uint32_t samples, std::uint64_t seed) {
  check_object(object, cloud, "esf");
  if (samples == 0) throw InvalidParameter("esf: samples must be positive");

  std::array<double, kEsfSize> out{};
  const Frame frame = make_frame(cloud, object);
  if (object.size() < 3 || !(frame.diag > 0.0)) {
    out.fill(1.0 / kEsfSize);
    return out;
  }

  const EsfGrid grid = build_esf_grid(frame);
  const std::size_t n = frame.pts.size();
  Rng rng(seed);

  // sub-histograms: D2 in/out/mixed, A3 in/out/mixed, D3 in/out/mixed, ratio
  std::array<std::array<double, 64>, 10> sub{};
  for (std::uint32_t it = 0; it < samples; ++it) {
    const std::size_t i = rng.uniform_index(n);
    std::size_t j = rng.uniform_index(n);
    while (j == i) j = rng.uniform_index(n);
    std::size_t k = rng.uniform_index(n);
    while (k == i || k == j) k = rng.uniform_index(n);

    const P3& pi = frame.pts[i];
    const P3& pj = frame.pts[j];
    const P3& pk = frame.pts[k];

    const double ax = pj.x - pi.x, ay = pj.y - pi.y, az = pj.z - pi.z;
    const double bx = pk.x - pi.x, by = pk.y - pi.y, bz = pk.z - pi.z;
    const double la = std::sqrt(ax * ax + ay * ay + az * az);
    const double lb = std::sqrt(bx * bx + by * by + bz * bz);

    const TraceResult t_ij = trace_line(grid, pi, pj);
    const TraceResult t_jk = trace_line(grid, pj, pk);
    const TraceResult t_ik = trace_line(grid, pi, pk);

    // D2: pair distance over bbox diagonal
    sub[0 + t_ij.cls][esf_bin(la / frame.diag)] += 1.0;
    // A3: angle at vertex i, classified by the opposite side
    double angle = 0.0;
    if (la > 0.0 && lb > 0.0)
      angle = std::acos(std::clamp((ax * bx + ay * by + az * bz) / (la * lb), -1.0, 1.0));
    sub[3 + t_jk.cls][esf_bin(angle / kPi)] += 1.0;
    // D3: sqrt of triangle area over bbox diagonal
    const double cx = ay * bz - az * by;
    const double cy = az * bx - ax * bz;
    const double cz = ax * by - ay * bx;
    const double area = 0.5 * std::sqrt(cx * cx + cy * cy + cz * cz);
    TraceClass d3 = kMixed;
    if (t_ij.cls == kIn && t_jk.cls == kIn && t_ik.cls == kIn) d3 = kIn;
    else if (t_ij.cls == kOut && t_jk.cls == kOut && t_ik.cls == kOut) d3 = kOut;
    sub[6 + d3][esf_bin(std::min(1.0, std::sqrt(area) / frame.diag))] += 1.0;
    // line occupancy ratio of the D2 segment
    sub[9][esf_bin(std::min(1.0, t_ij.ratio))] += 1.0;
  }

  for (std::size_t s = 0; s < sub.size(); ++s) {
    double total = 0.0;
    for (double v : sub[s]) total += v;
    for (std::size_t b = 0; b < 64; ++b)
      out[s * 64 + b] = total > 0.0 ? sub[s][b] / total * 0.1 : 0.1 / 64.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Context and assembly

double context_elevation(const PointCloud& cloud, const std::vector<std::uint32_t>& object,
                         const ElevationImage& elevation) {
  check_object(object, cloud, "context_elevation");
  if (!elevation.hole_free())
    throw PreconditionViolation("context_elevation: elevation image has holes");
  double bx = 0.0, by = 0.0;
  double z_min = cloud[object[0]].z;
  for (std::uint32_t i : object) {
    bx += cloud[i].x;
    by += cloud[i].y;
    z_min = std::min<double>(z_min, cloud[i].z);
  }
  bx /= static_cast<double>(object.size());
  by /= static_cast<double>(object.size());
  return z_min - elevation_at(elevation, bx, by);
}

DescriptorLayout DescriptorLayout::from_config(const DescriptorConfig& config) {
  DescriptorLayout layout;
  auto add = [&layout](const char* name, std::size_t size) {
    layout.blocks.push_back({name, layout.total, size});
    layout.total += size;
  };
  if (config.geom) add("GEOM", kGeomSize);
  if (config.grsd) add("GRSD", kGrsdSize);
  if (config.esf) add("ESF", kEsfSize);
  if (config.context) add("CONTEXT", kContextSize);
  if (layout.blocks.empty()) throw InvalidParameter("no descriptor blocks enabled");
  return layout;
}

std::string DescriptorLayout::to_string() const {
  std::string out;
  for (const Block& b : blocks) {
    if (!out.empty()) out += ',';
    out += b.name + ':' + std::to_string(b.size);
  }
  return out;
}

DescriptorLayout DescriptorLayout::parse(const std::string& text) {
  DescriptorLayout layout;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    if (comma == std::string::npos) comma = text.size();
    const std::string item = text.substr(pos, comma - pos);
    const auto colon = item.find(':');
    if (item.empty() || colon == std::string::npos || colon == 0)
      throw InvalidInput("bad descriptor layout '" + text + "'");
    std::size_t size = 0;
    try {
      std::size_t used = 0;
      size = std::stoul(item.substr(colon + 1), &used);
      if (used != item.size() - colon - 1 || size == 0) throw std::invalid_argument("size");
    } catch (const std::exception&) {
      throw InvalidInput("bad descriptor layout '" + text + "'");
    }
    layout.blocks.push_back({item.substr(0, colon), layout.total, size});
    layout.total += size;
    pos = comma + 1;
    if (comma == text.size()) break;
  }
  if (layout.blocks.empty()) throw InvalidInput("bad descriptor layout '" + text + "'");
  return layout;
}

const DescriptorLayout::Block* DescriptorLayout::find(const std::string& name) const {
  for (const Block& b : blocks)
    if (b.name == name) return &b;
  return nullptr;
}

std::vector<double> describe(const PointCloud& cloud, const std::vector<std::uint32_t>& object,
                             std::uint64_t object_seed, const DescriptorConfig& config,
                             const ElevationImage* elevation) {
  check_object(object, cloud, "describe");
  if (config.esf_samples == 0 || config.subsample_max == 0)
    throw InvalidParameter("describe: counts must be positive");
  const DescriptorLayout layout = DescriptorLayout::from_config(config);
  if (config.context && elevation == nullptr)
    throw InvalidParameter("describe: context block needs an elevation image");

  // Seeded uniform subsample bounds the GRSD/ESF cost on huge objects.
  const std::vector<std::uint32_t>* shape_pts = &object;
  std::vector<std::uint32_t> subsample;
  if ((config.grsd || config.esf) && object.size() > config.subsample_max) {
    subsample = object;
    Rng rng(derive_seed(object_seed, 1));
    for (std::size_t i = 0; i < config.subsample_max; ++i) {
      const std::size_t j = i + rng.uniform_index(subsample.size() - i);
      std::swap(subsample[i], subsample[j]);
    }
    subsample.resize(config.subsample_max);
    std::sort(subsample.begin(), subsample.end());
    shape_pts = &subsample;
  }

  std::vector<double> out;
  out.reserve(layout.total);
  if (config.geom) {
    const auto g = geom_features(cloud, object);
    out.insert(out.end(), g.begin(), g.end());
  }
  if (config.grsd) {
    const auto g = grsd(cloud, *shape_pts, config.grsd_params);
    out.insert(out.end(), g.begin(), g.end());
  }
  if (config.esf) {
    const auto e = esf(cloud, *shape_pts, config.esf_samples, derive_seed(object_seed, 2));
    out.insert(out.end(), e.begin(), e.end());
  }
  if (config.context) out.push_back(context_elevation(cloud, object, *elevation));
  return out;
}

std::vector<std::vector<double>> describe_objects(const PointCloud& cloud,
                                                  const SegmentSet& segments,
                                                  const DescriptorConfig& config,
                                                  const ElevationImage* elevation,
                                                  unsigned threads) {
  std::vector<std::vector<double>> rows(segments.size());
  parallel_for(segments.size(), threads, [&](std::size_t s) {
    rows[s] = describe(cloud, segments.segments[s], config.seed ^ static_cast<std::uint64_t>(s),
                       config, elevation);
  });
  return rows;
}

}  // namespace mls
