// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line
// (SKIP for the optional dataset check) and the process exits nonzero if
// anything failed.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mls/descriptors.hpp"
#include "mls/eval.hpp"
#include "mls/forest.hpp"
#include "mls/ground.hpp"
#include "mls/pipeline.hpp"
#include "mls/ply_io.hpp"
#include "mls/rng.hpp"
#include "mls/segment.hpp"
#include "mls/synth.hpp"
#include "test_util.hpp"

using namespace mls;
using Clock = std::chrono::steady_clock;

namespace {

struct CheckFailure {
  std::string message;
};

void need(bool condition, const std::string& message) {
  if (!condition) throw CheckFailure{message};
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------- criterion 1

void check_ply_round_trip() {
  Rng rng(1001);
  const auto start = Clock::now();
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = i == 0 ? 0 : i == 1 ? 1 : rng.uniform_index(200);
    const PointCloud cloud = testutil::random_cloud(rng, n);
    std::stringstream first;
    write_ply(cloud, first);
    const PointCloud once = read_ply(first);
    std::stringstream second;
    write_ply(once, second);
    const PointCloud twice = read_ply(second);
    need(testutil::same_cloud(once, cloud), "round trip changed a value");
    need(testutil::same_cloud(twice, cloud), "second round trip changed a value");
  }
  const double elapsed = seconds_since(start);
  need(elapsed < 5.0, "1000 round trips took " + std::to_string(elapsed) + " s");
}

// ---------------------------------------------------------------- criterion 2

std::vector<std::uint32_t> brute_force_seeds(const PointCloud& cloud, const GroundParams& p) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t i = 0; i < cloud.size(); ++i) {
    const LabeledPoint& pt = cloud.points[i];
    const double lateral = std::hypot(static_cast<double>(pt.x) - pt.x_origin,
                                      static_cast<double>(pt.y) - pt.y_origin);
    const double drop = static_cast<double>(pt.z_origin) - pt.z;
    if (lateral <= p.seed_radius && std::abs(drop - p.sensor_height) <= p.seed_z_tol)
      out.push_back(i);
  }
  return out;
}

void check_seed_cylinder() {
  for (int scan = 0; scan < 10; ++scan) {
    SceneSpec spec;
    spec.road_length = 12.0;
    spec.road_width = 6.0;
    spec.grade = scan < 5 ? 0.0 : 0.04 * (scan - 4);  // up to 20% slope
    spec.density = 120.0;
    spec.noise_sigma = 0.02;
    spec.seed = 9000 + static_cast<std::uint64_t>(scan);
    SceneObject box;
    box.x = 6.0;
    box.y = 1.5;
    box.class_id = 300;
    spec.objects.push_back(box);
    const PointCloud cloud = generate(spec);
    const GroundParams params;
    need(seed_points(cloud, params) == brute_force_seeds(cloud, params),
         "seed set differs from brute force on scan " + std::to_string(scan));
  }
}

// ---------------------------------------------------------------- criterion 3

void check_ground_extraction() {
  for (const double grade : {0.0, 0.10}) {
    SceneSpec spec;
    spec.road_length = 20.0;
    spec.road_width = 7.0;
    spec.grade = grade;
    spec.density = 1400.0;
    spec.noise_sigma = 0.01;
    spec.seed = 31;
    for (int i = 0; i < 5; ++i) {
      SceneObject box;
      box.x = 3.0 + 3.5 * i;
      box.y = (i % 2 == 0) ? 2.0 : -2.0;
      box.sx = 0.8;
      box.sy = 0.7;
      box.sz = 1.2 + 0.2 * i;
      box.class_id = 300 + static_cast<std::uint32_t>(i);
      spec.objects.push_back(box);
    }
    const PointCloud cloud = generate(spec);
    need(cloud.size() >= 190000, "scene too small: " + std::to_string(cloud.size()));

    const auto start = Clock::now();
    const GroundResult res = extract_ground(cloud, GroundParams{});
    const double elapsed = seconds_since(start);
    need(elapsed < 2.0, "extraction took " + std::to_string(elapsed) + " s");

    std::vector<bool> is_ground(cloud.size(), false);
    for (std::uint32_t i : res.ground_indices) is_ground[i] = true;
    std::size_t road = 0, recovered = 0;
    for (std::uint32_t i = 0; i < cloud.size(); ++i) {
      const LabeledPoint& p = cloud.points[i];
      if (p.label == 0) {
        ++road;
        if (is_ground[i]) ++recovered;
      } else {
        const double above = static_cast<double>(p.z) - grade * p.x;
        if (above > 0.3)
          need(!is_ground[i], "object point " + std::to_string(above) + " m up marked ground");
      }
    }
    need(recovered >= static_cast<std::size_t>(0.99 * static_cast<double>(road)),
         "recall " + std::to_string(static_cast<double>(recovered) / static_cast<double>(road)));
  }
}

// ---------------------------------------------------------------- criterion 4

struct UnionFind {
  std::vector<std::uint32_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<std::uint32_t>(i);
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) { parent[find(a)] = find(b); }
};

SegmentSet quadratic_segments(const PointCloud& cloud, double cell) {
  const std::size_t n = cloud.size();
  std::vector<std::array<long long, 3>> key(n);
  for (std::size_t i = 0; i < n; ++i)
    key[i] = {static_cast<long long>(std::floor(cloud.points[i].x / cell)),
              static_cast<long long>(std::floor(cloud.points[i].y / cell)),
              static_cast<long long>(std::floor(cloud.points[i].z / cell))};
  UnionFind uf(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      if (std::abs(key[a][0] - key[b][0]) <= 1 && std::abs(key[a][1] - key[b][1]) <= 1 &&
          std::abs(key[a][2] - key[b][2]) <= 1)
        uf.unite(static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b));

  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < n; ++i) groups[uf.find(i)].push_back(i);
  std::vector<std::vector<std::uint32_t>> segments;
  for (auto& [root, members] : groups) segments.push_back(std::move(members));
  std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  SegmentSet set;
  set.segment_of.assign(n, SegmentSet::kNone);
  for (std::uint32_t s = 0; s < segments.size(); ++s)
    for (std::uint32_t i : segments[s]) set.segment_of[i] = s;
  set.segments = std::move(segments);
  return set;
}

void check_segmentation_oracle() {
  Rng rng(444);
  for (int scene = 0; scene < 50; ++scene) {
    PointCloud cloud;
    for (int i = 0; i < 500; ++i) {
      LabeledPoint p;
      p.x = static_cast<float>(rng.uniform(-6.0, 6.0));
      p.y = static_cast<float>(rng.uniform(-6.0, 6.0));
      p.z = static_cast<float>(rng.uniform(-6.0, 6.0));
      cloud.points.push_back(p);
    }
    const double cell = rng.uniform(0.3, 0.7);
    const SegmentSet got = segment_connected(cloud, all_indices(cloud), cell, 1);
    const SegmentSet want = quadratic_segments(cloud, cell);
    need(got.segments == want.segments && got.segment_of == want.segment_of,
         "partition differs from union-find oracle on scene " + std::to_string(scene));
  }
}

// ---------------------------------------------------------------- criterion 5

SegmentSet set_from_assignment(const std::vector<std::uint32_t>& assign) {
  std::map<std::uint32_t, std::vector<std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < assign.size(); ++i)
    if (assign[i] != 0) groups[assign[i]].push_back(i);
  std::vector<std::vector<std::uint32_t>> segments;
  for (auto& [id, members] : groups) segments.push_back(std::move(members));
  std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  });
  SegmentSet set;
  set.segment_of.assign(assign.size(), SegmentSet::kNone);
  for (std::uint32_t s = 0; s < segments.size(); ++s)
    for (std::uint32_t i : segments[s]) set.segment_of[i] = s;
  set.segments = std::move(segments);
  return set;
}

void check_matching_uniqueness() {
  Rng rng(555);
  for (int iter = 0; iter < 1000; ++iter) {
    std::vector<std::uint32_t> gt_assign(150), sr_assign(150);
    for (auto& a : gt_assign) a = static_cast<std::uint32_t>(rng.uniform_index(7));
    for (auto& a : sr_assign) a = static_cast<std::uint32_t>(rng.uniform_index(7));
    const MatchReport report =
        match_objects(set_from_assignment(gt_assign), set_from_assignment(sr_assign), 0.5,
                      MatchVariant::kIntersection);
    std::set<std::uint32_t> gt_seen, sr_seen;
    for (const MatchPair& pair : report.pairs) {
      need(gt_seen.insert(pair.gt).second, "a GT object matched twice");
      need(sr_seen.insert(pair.sr).second, "a detected object matched twice");
    }
  }

  // the literal rule double-matches the pinned counterexample
  std::vector<std::uint32_t> gt_assign(135, 0), sr_assign(135, 0);
  for (std::uint32_t i = 0; i < 100; ++i) gt_assign[i] = 1;
  for (std::uint32_t i = 0; i < 60; ++i) sr_assign[i] = 1;
  for (std::uint32_t i = 100; i < 110; ++i) sr_assign[i] = 1;
  for (std::uint32_t i = 60; i < 100; ++i) sr_assign[i] = 2;
  for (std::uint32_t i = 110; i < 135; ++i) sr_assign[i] = 2;
  const SegmentSet gt = set_from_assignment(gt_assign);
  const SegmentSet sr = set_from_assignment(sr_assign);
  const MatchReport literal = match_objects(gt, sr, 0.5, MatchVariant::kLiteral);
  need(literal.pairs.size() == 2 && literal.matched_gt == 1 && literal.matched_detected == 2,
       "literal counterexample did not double-match");
  const MatchReport inter = match_objects(gt, sr, 0.5, MatchVariant::kIntersection);
  need(inter.pairs.size() == 1, "intersection variant matched more than one pair");
}

// ---------------------------------------------------------------- criterion 6

void check_metric_formulas() {
  Rng rng(666);
  const std::vector<std::uint32_t> pool{2, 5, 7, 11, 13};
  for (int iter = 0; iter < 20; ++iter) {
    const std::size_t k = 2 + rng.uniform_index(4);
    const std::vector<std::uint32_t> classes(pool.begin(), pool.begin() + k);
    std::vector<std::uint64_t> confusion(k * k);
    for (auto& c : confusion) c = rng.uniform_index(30);
    confusion[0] += 1;  // keep the total positive
    const ClassReport report = classification_metrics(classes, confusion);

    long double macro_p = 0, macro_r = 0, macro_f = 0, macro_m = 0, trace = 0, total = 0;
    std::size_t supported = 0;
    for (std::size_t i = 0; i < k; ++i) {
      long double tp = 0, row = 0, col = 0;
      for (std::size_t j = 0; j < k; ++j) {
        row += confusion[i * k + j];
        col += confusion[j * k + i];
        total += confusion[i * k + j];
      }
      tp = confusion[i * k + i];
      trace += tp;
      const long double fp = col - tp, fn = row - tp;
      const long double tn = [&] {
        long double all = 0;
        for (const auto& c : confusion) all += c;
        return all - tp - fp - fn;
      }();
      const long double p = tp + fp > 0 ? tp / (tp + fp) : 0;
      const long double r = tp + fn > 0 ? tp / (tp + fn) : 0;
      const long double f = 2 * tp + fp + fn > 0 ? 2 * tp / (2 * tp + fp + fn) : 0;
      const long double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
      const long double m = den > 0 ? (tp * tn - fp * fn) / std::sqrt(den) : 0;
      const ClassMetrics& c = report.per_class[i];
      need(std::abs(static_cast<long double>(c.precision) - p) <= 1e-12, "precision off");
      need(std::abs(static_cast<long double>(c.recall) - r) <= 1e-12, "recall off");
      need(std::abs(static_cast<long double>(c.f1) - f) <= 1e-12, "f1 off");
      need(std::abs(static_cast<long double>(c.mcc) - m) <= 1e-12, "mcc off");
      if (row > 0) {
        ++supported;
        macro_p += p;
        macro_r += r;
        macro_f += f;
        macro_m += m;
      }
    }
    if (supported > 0) {
      need(std::abs(report.macro_precision - static_cast<double>(macro_p / supported)) <= 1e-12,
           "macro precision off");
      need(std::abs(report.macro_recall - static_cast<double>(macro_r / supported)) <= 1e-12,
           "macro recall off");
      need(std::abs(report.macro_f1 - static_cast<double>(macro_f / supported)) <= 1e-12,
           "macro f1 off");
      need(std::abs(report.macro_mcc - static_cast<double>(macro_m / supported)) <= 1e-12,
           "macro mcc off");
    }
    need(std::abs(report.accuracy - static_cast<double>(trace / total)) <= 1e-12, "accuracy off");
  }

  // worked detection example: 4 GT, 3 detected, 2 matched
  std::vector<std::uint32_t> gt_assign(60, 0), sr_assign(60, 0);
  for (std::uint32_t g = 0; g < 4; ++g)
    for (std::uint32_t i = 0; i < 10; ++i) gt_assign[g * 10 + i] = g + 1;
  for (std::uint32_t i = 0; i < 10; ++i) sr_assign[i] = 1;
  for (std::uint32_t i = 10; i < 20; ++i) sr_assign[i] = 2;
  for (std::uint32_t i = 50; i < 60; ++i) sr_assign[i] = 3;
  const MatchReport report = match_objects(set_from_assignment(gt_assign),
                                           set_from_assignment(sr_assign), 0.5,
                                           MatchVariant::kIntersection);
  need(report.precision == 2.0 / 3.0, "detection precision is not 2/3");
  need(report.recall == 0.5, "detection recall is not 1/2");
  need(std::abs(report.f1 - 4.0 / 7.0) <= 1e-12, "detection f1 is not 4/7");
}

// ---------------------------------------------------------------- criterion 7

void check_descriptor_invariants() {
  DescriptorConfig config;
  config.context = false;
  config.esf_samples = 200;
  const DescriptorLayout layout = DescriptorLayout::from_config(config);
  const DescriptorLayout::Block* grsd_block = layout.find("GRSD");
  const DescriptorLayout::Block* esf_block = layout.find("ESF");

  Rng rng(777);
  auto lattice = [&rng](double span) {
    const long steps = static_cast<long>(span * 64.0);
    return static_cast<float>(
        static_cast<double>(static_cast<long>(rng.uniform_index(2 * steps + 1)) - steps) / 64.0);
  };

  for (int object = 0; object < 10000; ++object) {
    PointCloud cloud;
    std::size_t n = 1 + rng.uniform_index(120);
    if (object % 17 == 0) n = 1;
    if (object % 17 == 1) n = 2;
    const int shape = object % 4;
    const float ax = lattice(4.0), ay = lattice(4.0), az = lattice(4.0);
    for (std::size_t i = 0; i < n; ++i) {
      LabeledPoint p;
      switch (shape) {
        case 0:  // blob
          p.x = lattice(10.0), p.y = lattice(10.0), p.z = lattice(10.0);
          break;
        case 1:  // collinear
          p.x = static_cast<float>(static_cast<double>(i) * ax / 8.0);
          p.y = static_cast<float>(static_cast<double>(i) * ay / 8.0);
          p.z = static_cast<float>(static_cast<double>(i) * az / 8.0);
          break;
        case 2:  // coincident
          p.x = ax, p.y = ay, p.z = az;
          break;
        default:  // planar
          p.x = lattice(6.0), p.y = lattice(6.0), p.z = 0.0f;
      }
      p.reflectance = static_cast<std::uint8_t>(rng.uniform_index(256));
      cloud.points.push_back(p);
    }
    std::vector<std::uint32_t> object_indices = all_indices(cloud);
    const std::uint64_t seed = derive_seed(777, static_cast<std::uint64_t>(object));
    const std::vector<double> d = describe(cloud, object_indices, seed, config, nullptr);

    need(d.size() == layout.total, "descriptor length mismatch");
    for (const double v : d) need(std::isfinite(v), "non-finite descriptor value");
    double grsd_sum = 0, esf_sum = 0;
    for (std::size_t i = 0; i < grsd_block->size; ++i) grsd_sum += d[grsd_block->offset + i];
    for (std::size_t i = 0; i < esf_block->size; ++i) esf_sum += d[esf_block->offset + i];
    need(std::abs(grsd_sum - 1.0) <= 1e-9, "GRSD not normalized");
    need(std::abs(esf_sum - 1.0) <= 1e-9, "ESF not normalized");

    need(describe(cloud, object_indices, seed, config, nullptr) == d, "same seed differed");

    PointCloud shifted = cloud;
    for (LabeledPoint& p : shifted.points) {
      p.x += 512.0f;
      p.y -= 512.0f;
      p.z += 512.0f;
    }
    need(describe(shifted, object_indices, seed, config, nullptr) == d,
         "translation changed the descriptor");
  }
}

// ---------------------------------------------------------------- criterion 8

void check_context_descriptor() {
  SceneSpec spec;
  spec.road_length = 20.0;
  spec.road_width = 6.0;
  spec.grade = 0.10;
  spec.density = 300.0;
  spec.noise_sigma = 0.002;
  spec.seed = 88;
  SceneObject box;
  box.x = 10.0;
  box.y = 0.0;
  box.lift = 0.5;
  box.class_id = 300;
  spec.objects.push_back(box);
  const PointCloud cloud = generate(spec);

  const GroundResult res = extract_ground(cloud, GroundParams{});
  std::vector<std::uint32_t> object;
  for (std::uint32_t i = 0; i < cloud.size(); ++i)
    if (cloud.points[i].label == 1) object.push_back(i);
  need(!object.empty(), "lifted box has no points");
  const double value = context_elevation(cloud, object, res.elevation);
  need(std::abs(value - 0.5) <= 0.05, "context " + std::to_string(value) + " not 0.5 +- 0.05");
}

// ---------------------------------------------------------------- criterion 9

void check_forest() {
  constexpr std::size_t kFeatures = 4;
  auto blob_row = [](Rng& rng, std::uint32_t cls, std::vector<double>& data) {
    for (std::size_t f = 0; f < kFeatures; ++f) {
      const double sign = (f % 2 == 0) ? 1.0 : -1.0;
      data.push_back(sign * 8.0 * cls + rng.gaussian(1.0));
    }
  };

  Rng rng(999);
  std::vector<double> data;
  std::vector<std::uint32_t> classes;
  for (std::size_t i = 0; i < 240; ++i) {
    const std::uint32_t cls = static_cast<std::uint32_t>(i % 3);
    blob_row(rng, cls, data);
    classes.push_back(10 * (cls + 1));
  }
  const auto [train_rows, test_rows] = split_train_test(240, 0.8, 77);
  std::vector<double> train_data;
  std::vector<std::uint32_t> train_classes;
  for (std::uint32_t r : train_rows) {
    train_data.insert(train_data.end(), data.begin() + r * kFeatures,
                      data.begin() + (r + 1) * kFeatures);
    train_classes.push_back(classes[r]);
  }
  TrainConfig config;
  config.n_trees = 60;
  config.seed = 5;
  const ForestModel model =
      train_forest(train_data, train_rows.size(), kFeatures, train_classes, "RAW:4", config);

  std::size_t correct = 0;
  for (std::uint32_t r : test_rows)
    if (predict(model, data.data() + r * kFeatures, kFeatures).class_id == classes[r]) ++correct;
  const double held_out = static_cast<double>(correct) / static_cast<double>(test_rows.size());
  need(held_out >= 0.95, "held-out accuracy " + std::to_string(held_out));
  need(std::abs(model.oob_score - held_out) <= 0.10,
       "oob " + std::to_string(model.oob_score) + " vs held-out " + std::to_string(held_out));

  // shuffled labels collapse to chance level
  Rng noise_rng(1234);
  std::vector<double> noise_data;
  std::vector<std::uint32_t> noise_classes;
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t f = 0; f < kFeatures; ++f) noise_data.push_back(noise_rng.uniform(-1, 1));
    noise_classes.push_back(static_cast<std::uint32_t>(i % 2));
  }
  TrainConfig noise_config;
  noise_config.n_trees = 100;
  noise_config.seed = 6;
  const ForestModel chance =
      train_forest(noise_data, 200, kFeatures, noise_classes, "RAW:4", noise_config);
  need(std::abs(chance.oob_score - 0.5) <= 0.1, "shuffled oob " + std::to_string(chance.oob_score));

  // save/load keeps every prediction
  testutil::TempDir dir("urbanmls-acceptance");
  save_model_file(model, dir.file("model.bin"));
  const ForestModel loaded = load_model_file(dir.file("model.bin"));
  Rng probe_rng(4321);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> v;
    for (std::size_t f = 0; f < kFeatures; ++f) v.push_back(probe_rng.uniform(-30.0, 30.0));
    const Prediction a = predict(model, v);
    const Prediction b = predict(loaded, v);
    need(a.class_id == b.class_id && a.fractions == b.fractions, "loaded model predicts differently");
  }
}

// --------------------------------------------------------------- criterion 10

void check_end_to_end() {
  SceneSpec spec;
  spec.road_length = 124.0;
  spec.road_width = 8.0;
  spec.grade = 0.02;
  spec.density = 1500.0;
  spec.noise_sigma = 0.008;
  spec.seed = 2024;
  for (int i = 0; i < 60; ++i) {
    SceneObject obj;
    obj.x = 3.0 + 4.0 * (i / 2);
    obj.y = (i % 2 == 0) ? 2.5 : -2.5;
    obj.yaw = 0.3 * i;
    obj.class_id = 300 + static_cast<std::uint32_t>(i % 6);
    const double jitter = 1.0 + 0.03 * ((i / 6) % 5 - 2);
    switch (i % 6) {
      case 0:  // pole
        obj.primitive = Primitive::kCylinder;
        obj.sx = 0.15 * jitter;
        obj.sz = 4.0 * jitter;
        break;
      case 1:  // bush
        obj.primitive = Primitive::kSphere;
        obj.sx = 0.5 * jitter;
        break;
      case 2:  // car-like box
        obj.sx = 2.2 * jitter;
        obj.sy = 1.0 * jitter;
        obj.sz = 1.4 * jitter;
        break;
      case 3:  // bin
        obj.sx = 0.5 * jitter;
        obj.sy = 0.5 * jitter;
        obj.sz = 0.9 * jitter;
        break;
      case 4:  // bench
        obj.sx = 1.8 * jitter;
        obj.sy = 0.5 * jitter;
        obj.sz = 0.5 * jitter;
        break;
      default:  // trunk
        obj.primitive = Primitive::kCylinder;
        obj.sx = 0.5 * jitter;
        obj.sz = 1.2 * jitter;
    }
    spec.objects.push_back(obj);
  }

  testutil::TempDir dir("urbanmls-acceptance-e2e");
  write_ply_file(generate(spec), dir.file("scene.ply"));

  PipelineOptions options;
  options.input = dir.file("scene.ply");
  options.out_dir = dir.file("run");
  options.seed = 7;
  const auto start = Clock::now();
  const PipelineResult result = run_pipeline(options);
  const double elapsed = seconds_since(start);

  need(result.eval.matching.ground_truth >= 60, "fewer than 60 ground-truth objects");
  need(result.eval.matching.f1 >= 0.8,
       "detection f1 " + std::to_string(result.eval.matching.f1));
  need(result.eval.classification.macro_f1 >= 0.8,
       "macro f1 " + std::to_string(result.eval.classification.macro_f1));
  need(elapsed < 60.0, "pipeline took " + std::to_string(elapsed) + " s");
}

// --------------------------------------------------------------- criterion 11

void check_timing_order() {
  Rng rng(1111);
  std::vector<PointCloud> objects;
  for (int i = 0; i < 100; ++i) {
    PointCloud cloud;
    for (int j = 0; j < 5000; ++j) {
      LabeledPoint p;
      p.x = static_cast<float>(rng.uniform(-1.5, 1.5));
      p.y = static_cast<float>(rng.uniform(-1.5, 1.5));
      p.z = static_cast<float>(rng.uniform(0.0, 3.0));
      p.reflectance = static_cast<std::uint8_t>(rng.uniform_index(256));
      cloud.points.push_back(p);
    }
    objects.push_back(std::move(cloud));
  }

  double geom_s = 0, grsd_s = 0, esf_s = 0;
  double sink = 0;
  for (const PointCloud& cloud : objects) {
    const std::vector<std::uint32_t> indices = all_indices(cloud);
    auto start = Clock::now();
    sink += geom_features(cloud, indices)[0];
    geom_s += seconds_since(start);
    start = Clock::now();
    sink += grsd(cloud, indices, GrsdParams{})[0];
    grsd_s += seconds_since(start);
    start = Clock::now();
    sink += esf(cloud, indices, 20000, 3)[0];
    esf_s += seconds_since(start);
  }
  need(std::isfinite(sink), "descriptor outputs were not finite");
  need(geom_s < grsd_s, "geom " + std::to_string(geom_s) + " s not under GRSD " +
                            std::to_string(grsd_s) + " s");
  need(geom_s < esf_s,
       "geom " + std::to_string(geom_s) + " s not under ESF " + std::to_string(esf_s) + " s");
}

// --------------------------------------------------------------- criterion 12

bool check_dataset(std::string& detail) {
  const char* dataset_dir = std::getenv("MLS_DATASET_DIR");
  if (dataset_dir == nullptr) {
    detail = "MLS_DATASET_DIR not set";
    return false;
  }
  const std::string dir(dataset_dir);
  const PointCloud lille1 = read_ply_file(dir + "/Lille1.ply");
  need(lille1.size() > 70000000 && lille1.size() < 72500000,
       "Lille1 has " + std::to_string(lille1.size()) + " points");
  std::set<std::uint32_t> labels, classes;
  for (const LabeledPoint& p : lille1.points)
    if (p.label != 0) {
      labels.insert(p.label);
      classes.insert(p.class_id);
    }
  need(labels.size() == 1349, "Lille1 has " + std::to_string(labels.size()) + " objects");
  need(classes.size() == 39, "Lille1 has " + std::to_string(classes.size()) + " classes");

  testutil::TempDir out("urbanmls-acceptance-dataset");
  PipelineOptions options;
  options.input = dir + "/Lille2.ply";
  options.out_dir = out.file("run");
  run_pipeline(options);
  detail = "Lille1 stats match, Lille2 pipeline completed";
  return true;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    void (*fn)();
  };
  const Criterion criteria[] = {
      {1, "PLY round trip, 1000 clouds under 5 s", check_ply_round_trip},
      {2, "seed cylinder equals brute force", check_seed_cylinder},
      {3, "ground recall and object safety on flat and sloped roads", check_ground_extraction},
      {4, "segmentation equals the union-find oracle", check_segmentation_oracle},
      {5, "intersection matching is one-to-one at m = 0.5", check_matching_uniqueness},
      {6, "classification metrics match hand computation", check_metric_formulas},
      {7, "descriptor invariants over 10000 fuzzed objects", check_descriptor_invariants},
      {8, "contextual descriptor reads 0.5 on a 10% grade", check_context_descriptor},
      {9, "random forest accuracy, OOB, chance level, save/load", check_forest},
      {10, "end-to-end pipeline on a 60-object scene", check_end_to_end},
      {11, "geometric descriptor is the cheapest", check_timing_order},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    try {
      c.fn();
      std::printf("PASS criterion %2d: %s\n", c.id, c.name);
    } catch (const CheckFailure& f) {
      ++failures;
      std::printf("FAIL criterion %2d: %s (%s)\n", c.id, c.name, f.message.c_str());
    } catch (const std::exception& e) {
      ++failures;
      std::printf("FAIL criterion %2d: %s (unexpected error: %s)\n", c.id, c.name, e.what());
    }
  }

  try {
    std::string detail;
    if (check_dataset(detail))
      std::printf("PASS criterion 12: dataset smoke check (%s)\n", detail.c_str());
    else
      std::printf("SKIP criterion 12: dataset smoke check (%s)\n", detail.c_str());
  } catch (const CheckFailure& f) {
    ++failures;
    std::printf("FAIL criterion 12: dataset smoke check (%s)\n", f.message.c_str());
  } catch (const std::exception& e) {
    ++failures;
    std::printf("FAIL criterion 12: dataset smoke check (unexpected error: %s)\n", e.what());
  }

  return failures == 0 ? 0 : 1;
}
