#include "mls/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "mls/errors.hpp"
#include "mls/ply_io.hpp"
#include "mls/rng.hpp"

namespace mls {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

std::vector<Vec3> build_origins(const SceneSpec& spec) {
  std::vector<std::array<double, 2>> xy = spec.trajectory;
  if (xy.empty()) {
    if (!(spec.trajectory_step > 0.0))
      throw InvalidParameter("trajectory_step must be positive");
    for (double x = 0.0; x <= spec.road_length + 1e-9; x += spec.trajectory_step)
      xy.push_back({x, 0.0});
    if (xy.empty()) xy.push_back({0.0, 0.0});
  }
  std::vector<Vec3> origins;
  origins.reserve(xy.size());
  for (const auto& [x, y] : xy)
    origins.push_back({x, y, spec.grade * x + spec.sensor_height});
  return origins;
}

std::size_t nearest_origin(const std::vector<Vec3>& origins, double x, double y, double z) {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const double dx = x - origins[i].x, dy = y - origins[i].y, dz = z - origins[i].z;
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

std::uint8_t sample_reflectance(Rng& rng, std::uint8_t base) {
  const double v = base + rng.gaussian(5.0);
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

struct Emitter {
  const SceneSpec& spec;
  const std::vector<Vec3>& origins;
  PointCloud& cloud;

  void emit(Rng& rng, Vec3 p, Vec3 normal, std::uint32_t label, std::uint32_t class_id,
            std::uint8_t refl_base) {
    const double n = rng.gaussian(spec.noise_sigma);
    p.x += normal.x * n;
    p.y += normal.y * n;
    p.z += normal.z * n;
    const std::uint8_t refl = sample_reflectance(rng, refl_base);
    const std::size_t oi = nearest_origin(origins, p.x, p.y, p.z);
    const Vec3& o = origins[oi];
    const double dx = p.x - o.x, dy = p.y - o.y, dz = p.z - o.z;
    if (dx * dx + dy * dy + dz * dz > spec.range_max * spec.range_max) return;
    LabeledPoint lp;
    lp.x = static_cast<float>(p.x);
    lp.y = static_cast<float>(p.y);
    lp.z = static_cast<float>(p.z);
    lp.x_origin = static_cast<float>(o.x);
    lp.y_origin = static_cast<float>(o.y);
    lp.z_origin = static_cast<float>(o.z);
    lp.gps_time = 0.1 * static_cast<double>(oi);
    lp.reflectance = refl;
    lp.label = label;
    lp.class_id = class_id;
    cloud.points.push_back(lp);
  }
};

void sample_road(const SceneSpec& spec, Emitter& em, Rng& rng) {
  const double slant = std::sqrt(1.0 + spec.grade * spec.grade);
  const double area = spec.road_length * spec.road_width * slant;
  const long long n = std::llround(area * spec.density);
  const Vec3 normal{-spec.grade / slant, 0.0, 1.0 / slant};
  const std::uint8_t base = reflectance_base(spec.road_class_id, spec.road_class_id);
  for (long long i = 0; i < n; ++i) {
    const double x = rng.uniform01() * spec.road_length;
    const double y = (rng.uniform01() - 0.5) * spec.road_width;
    em.emit(rng, {x, y, spec.grade * x}, normal, 0, spec.road_class_id, base);
  }
}

void sample_box(const SceneSpec& spec, const SceneObject& obj, std::uint32_t label, Emitter& em,
                Rng& rng) {
  const double z0 = spec.grade * obj.x + obj.lift;
  const double c = std::cos(obj.yaw), s = std::sin(obj.yaw);
  // faces: top, +x side, -x side, +y side, -y side (no bottom)
  const double areas[5] = {obj.sx * obj.sy, obj.sy * obj.sz, obj.sy * obj.sz, obj.sx * obj.sz,
                           obj.sx * obj.sz};
  double total = 0;
  for (double a : areas) total += a;
  const long long n = std::llround(total * spec.density);
  const std::uint8_t base = reflectance_base(obj.class_id, spec.road_class_id);
  for (long long i = 0; i < n; ++i) {
    double pick = rng.uniform01() * total;
    int face = 0;
    while (face < 4 && pick >= areas[face]) pick -= areas[face], ++face;
    const double u = rng.uniform01(), v = rng.uniform01();
    double lx = 0, ly = 0, lz = 0;  // local frame, origin at footprint center
    Vec3 ln{0, 0, 0};
    switch (face) {
      case 0: lx = (u - 0.5) * obj.sx; ly = (v - 0.5) * obj.sy; lz = obj.sz; ln = {0, 0, 1}; break;
      case 1: lx = 0.5 * obj.sx; ly = (u - 0.5) * obj.sy; lz = v * obj.sz; ln = {1, 0, 0}; break;
      case 2: lx = -0.5 * obj.sx; ly = (u - 0.5) * obj.sy; lz = v * obj.sz; ln = {-1, 0, 0}; break;
      case 3: lx = (u - 0.5) * obj.sx; ly = 0.5 * obj.sy; lz = v * obj.sz; ln = {0, 1, 0}; break;
      default: lx = (u - 0.5) * obj.sx; ly = -0.5 * obj.sy; lz = v * obj.sz; ln = {0, -1, 0}; break;
    }
    const Vec3 p{obj.x + c * lx - s * ly, obj.y + s * lx + c * ly, z0 + lz};
    const Vec3 nw{c * ln.x - s * ln.y, s * ln.x + c * ln.y, ln.z};
    em.emit(rng, p, nw, label, obj.class_id, base);
  }
}

void sample_cylinder(const SceneSpec& spec, const SceneObject& obj, std::uint32_t label,
                     Emitter& em, Rng& rng) {
  const double z0 = spec.grade * obj.x + obj.lift;
  const double r = obj.sx, h = obj.sz;
  const double side = 2.0 * kPi * r * h;
  const double top = kPi * r * r;
  const long long n = std::llround((side + top) * spec.density);
  const std::uint8_t base = reflectance_base(obj.class_id, spec.road_class_id);
  for (long long i = 0; i < n; ++i) {
    const double pick = rng.uniform01() * (side + top);
    if (pick < side) {
      const double theta = rng.uniform01() * 2.0 * kPi;
      const double z = rng.uniform01() * h;
      const Vec3 nrm{std::cos(theta), std::sin(theta), 0.0};
      em.emit(rng, {obj.x + r * nrm.x, obj.y + r * nrm.y, z0 + z}, nrm, label, obj.class_id, base);
    } else {
      const double rr = r * std::sqrt(rng.uniform01());
      const double theta = rng.uniform01() * 2.0 * kPi;
      em.emit(rng, {obj.x + rr * std::cos(theta), obj.y + rr * std::sin(theta), z0 + h},
              {0, 0, 1}, label, obj.class_id, base);
    }
  }
}

void sample_sphere(const SceneSpec& spec, const SceneObject& obj, std::uint32_t label, Emitter& em,
                   Rng& rng) {
  const double r = obj.sx;
  const double zc = spec.grade * obj.x + obj.lift + r;
  const long long n = std::llround(4.0 * kPi * r * r * spec.density);
  const std::uint8_t base = reflectance_base(obj.class_id, spec.road_class_id);
  for (long long i = 0; i < n; ++i) {
    double gx, gy, gz, len;
    do {
      gx = rng.gaussian(1.0);
      gy = rng.gaussian(1.0);
      gz = rng.gaussian(1.0);
      len = std::sqrt(gx * gx + gy * gy + gz * gz);
    } while (len < 1e-12);
    const Vec3 nrm{gx / len, gy / len, gz / len};
    em.emit(rng, {obj.x + r * nrm.x, obj.y + r * nrm.y, zc + r * nrm.z}, nrm, label, obj.class_id,
            base);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::uint8_t reflectance_base(std::uint32_t class_id, std::uint32_t road_class_id) {
  if (class_id == road_class_id) return 20;
  return static_cast<std::uint8_t>(40 + (class_id * 37u) % 180u);
}

PointCloud generate(const SceneSpec& spec) {
  if (spec.grade < 0.0) throw InvalidParameter("grade must be >= 0");
  if (spec.road_length < 0.0 || spec.road_width < 0.0)
    throw InvalidParameter("road dimensions must be >= 0");
  if (spec.density < 0.0) throw InvalidParameter("density must be >= 0");
  if (!(spec.noise_sigma >= 0.0)) throw InvalidParameter("noise_sigma must be >= 0");
  if (!(spec.range_max > 0.0)) throw InvalidParameter("range_max must be positive");

  const std::vector<Vec3> origins = build_origins(spec);
  PointCloud cloud;
  Emitter em{spec, origins, cloud};

  {
    Rng rng(derive_seed(spec.seed, 0));
    sample_road(spec, em, rng);
  }
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    Rng rng(derive_seed(spec.seed, i + 1));
    const SceneObject& obj = spec.objects[i];
    const auto label = static_cast<std::uint32_t>(i + 1);
    switch (obj.primitive) {
      case Primitive::kBox: sample_box(spec, obj, label, em, rng); break;
      case Primitive::kCylinder: sample_cylinder(spec, obj, label, em, rng); break;
      case Primitive::kSphere: sample_sphere(spec, obj, label, em, rng); break;
    }
  }
  return cloud;
}

SceneSpec parse_scene(const std::string& text) {
  SceneSpec spec;
  SceneObject* obj = nullptr;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  auto fail = [&](const std::string& msg) -> void {
    throw InvalidInput("scene line " + std::to_string(line_no) + ": " + msg);
  };
  auto to_double = [&](const std::string& v) -> double {
    try {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      while (used < v.size() && std::isspace(static_cast<unsigned char>(v[used]))) ++used;
      if (used != v.size()) fail("trailing characters in number '" + v + "'");
      return d;
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception&) {
      fail("invalid number '" + v + "'");
    }
    return 0;
  };
  auto to_u64 = [&](const std::string& v) -> std::uint64_t {
    try {
      std::size_t used = 0;
      const unsigned long long d = std::stoull(v, &used);
      if (used != v.size()) fail("trailing characters in integer '" + v + "'");
      return d;
    } catch (const InvalidInput&) {
      throw;
    } catch (const std::exception&) {
      fail("invalid integer '" + v + "'");
    }
    return 0;
  };
  auto numbers = [&](const std::string& v) -> std::vector<double> {
    std::vector<double> out;
    std::istringstream vs(v);
    std::string tok;
    while (vs >> tok) out.push_back(to_double(tok));
    return out;
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);

    if (line == "[object]") {
      spec.objects.emplace_back();
      obj = &spec.objects.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      const auto b = s.find_last_not_of(" \t");
      return s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (value.empty()) fail("empty value for '" + key + "'");

    if (obj == nullptr) {
      if (key == "road_length") spec.road_length = to_double(value);
      else if (key == "road_width") spec.road_width = to_double(value);
      else if (key == "grade") spec.grade = to_double(value);
      else if (key == "density") spec.density = to_double(value);
      else if (key == "noise_sigma") spec.noise_sigma = to_double(value);
      else if (key == "sensor_height") spec.sensor_height = to_double(value);
      else if (key == "range_max") spec.range_max = to_double(value);
      else if (key == "trajectory_step") spec.trajectory_step = to_double(value);
      else if (key == "road_class_id") spec.road_class_id = static_cast<std::uint32_t>(to_u64(value));
      else if (key == "seed") spec.seed = to_u64(value);
      else if (key == "waypoint") {
        const auto nums = numbers(value);
        if (nums.size() != 2) fail("waypoint needs two numbers");
        spec.trajectory.push_back({nums[0], nums[1]});
      } else {
        fail("unknown key '" + key + "'");
      }
      continue;
    }

    if (key == "primitive") {
      if (value == "box") obj->primitive = Primitive::kBox;
      else if (value == "cylinder") obj->primitive = Primitive::kCylinder;
      else if (value == "sphere") obj->primitive = Primitive::kSphere;
      else fail("unknown primitive '" + value + "'");
    } else if (key == "class_id") {
      obj->class_id = static_cast<std::uint32_t>(to_u64(value));
    } else if (key == "x") {
      obj->x = to_double(value);
    } else if (key == "y") {
      obj->y = to_double(value);
    } else if (key == "yaw") {
      obj->yaw = to_double(value);
    } else if (key == "lift") {
      obj->lift = to_double(value);
    } else if (key == "size") {
      const auto nums = numbers(value);
      if (nums.empty() || nums.size() > 3) fail("size needs one to three numbers");
      obj->sx = nums[0];
      obj->sy = nums.size() > 1 ? nums[1] : nums[0];
      obj->sz = nums.size() > 2 ? nums[2] : (nums.size() > 1 ? nums[1] : nums[0]);
    } else {
      fail("unknown object key '" + key + "'");
    }
  }
  return spec;
}

std::string format_scene(const SceneSpec& spec) {
  std::ostringstream out;
  out << "road_length = " << format_double(spec.road_length) << '\n'
      << "road_width = " << format_double(spec.road_width) << '\n'
      << "grade = " << format_double(spec.grade) << '\n'
      << "density = " << format_double(spec.density) << '\n'
      << "noise_sigma = " << format_double(spec.noise_sigma) << '\n'
      << "sensor_height = " << format_double(spec.sensor_height) << '\n'
      << "range_max = " << format_double(spec.range_max) << '\n'
      << "trajectory_step = " << format_double(spec.trajectory_step) << '\n'
      << "road_class_id = " << spec.road_class_id << '\n'
      << "seed = " << spec.seed << '\n';
  for (const auto& [x, y] : spec.trajectory)
    out << "waypoint = " << format_double(x) << ' ' << format_double(y) << '\n';
  for (const SceneObject& obj : spec.objects) {
    out << "\n[object]\n";
    switch (obj.primitive) {
      case Primitive::kBox:
        out << "primitive = box\n"
            << "size = " << format_double(obj.sx) << ' ' << format_double(obj.sy) << ' '
            << format_double(obj.sz) << '\n';
        break;
      case Primitive::kCylinder:
        out << "primitive = cylinder\n"
            << "size = " << format_double(obj.sx) << ' ' << format_double(obj.sz) << '\n';
        break;
      case Primitive::kSphere:
        out << "primitive = sphere\n"
            << "size = " << format_double(obj.sx) << '\n';
        break;
    }
    out << "class_id = " << obj.class_id << '\n'
        << "x = " << format_double(obj.x) << '\n'
        << "y = " << format_double(obj.y) << '\n'
        << "yaw = " << format_double(obj.yaw) << '\n'
        << "lift = " << format_double(obj.lift) << '\n';
  }
  return out.str();
}

SceneSpec read_scene_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene(ss.str());
}

void write_fixture(const SceneSpec& spec, const std::string& base_path) {
  const PointCloud cloud = generate(spec);
  write_ply_file(cloud, base_path + ".ply");
  std::ofstream scene(base_path + ".scene", std::ios::binary);
  if (!scene) throw Error("cannot open " + base_path + ".scene for writing");
  scene << format_scene(spec);
  if (!scene) throw Error("write failure on " + base_path + ".scene");
}

}  // namespace mls
