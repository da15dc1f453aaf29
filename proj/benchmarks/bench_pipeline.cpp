#include <benchmark/benchmark.h>

#include <sstream>
#include <vector>

#include "mls/descriptors.hpp"
#include "mls/forest.hpp"
#include "mls/ground.hpp"
#include "mls/ply_io.hpp"
#include "mls/rng.hpp"
#include "mls/segment.hpp"
#include "mls/synth.hpp"
#include "mls/voxel_grid.hpp"

namespace {

const mls::PointCloud& road_scene() {
  static const mls::PointCloud cloud = [] {
    mls::SceneSpec spec;
    spec.road_length = 20.0;
    spec.road_width = 7.0;
    spec.grade = 0.05;
    spec.density = 1400.0;
    spec.noise_sigma = 0.01;
    spec.seed = 7;
    for (int i = 0; i < 5; ++i) {
      mls::SceneObject box;
      box.x = 3.0 + 3.5 * i;
      box.y = (i % 2 == 0) ? 2.0 : -2.0;
      box.sz = 1.2 + 0.2 * i;
      box.class_id = 300 + static_cast<std::uint32_t>(i);
      spec.objects.push_back(box);
    }
    return mls::generate(spec);
  }();
  return cloud;
}

const mls::GroundResult& scene_ground() {
  static const mls::GroundResult res = mls::extract_ground(road_scene(), mls::GroundParams{});
  return res;
}

std::vector<std::uint32_t> non_ground_indices() {
  const mls::PointCloud& cloud = road_scene();
  std::vector<bool> ground(cloud.size(), false);
  for (std::uint32_t i : scene_ground().ground_indices) ground[i] = true;
  std::vector<std::uint32_t> rest;
  for (std::uint32_t i = 0; i < cloud.size(); ++i)
    if (!ground[i]) rest.push_back(i);
  return rest;
}

mls::PointCloud blob_object(std::size_t n, std::uint64_t seed) {
  mls::Rng rng(seed);
  mls::PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    mls::LabeledPoint p;
    p.x = static_cast<float>(rng.uniform(-1.5, 1.5));
    p.y = static_cast<float>(rng.uniform(-1.5, 1.5));
    p.z = static_cast<float>(rng.uniform(0.0, 3.0));
    p.reflectance = static_cast<std::uint8_t>(rng.uniform_index(256));
    cloud.points.push_back(p);
  }
  return cloud;
}

void BM_PlyWrite(benchmark::State& state) {
  mls::Rng rng(1);
  mls::PointCloud cloud;
  for (int i = 0; i < 100000; ++i) cloud.points.push_back(blob_object(1, rng.next_u64()).points[0]);
  for (auto _ : state) {
    std::ostringstream out;
    benchmark::DoNotOptimize(mls::write_ply(cloud, out));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_PlyWrite)->Unit(benchmark::kMillisecond);

void BM_PlyRead(benchmark::State& state) {
  mls::Rng rng(2);
  mls::PointCloud cloud;
  for (int i = 0; i < 100000; ++i) cloud.points.push_back(blob_object(1, rng.next_u64()).points[0]);
  std::ostringstream out;
  mls::write_ply(cloud, out);
  const std::string bytes = out.str();
  for (auto _ : state) {
    std::istringstream in(bytes);
    benchmark::DoNotOptimize(mls::read_ply(in));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_PlyRead)->Unit(benchmark::kMillisecond);

void BM_VoxelGrid(benchmark::State& state) {
  const mls::PointCloud& cloud = road_scene();
  const std::vector<std::uint32_t> indices = mls::all_indices(cloud);
  for (auto _ : state)
    benchmark::DoNotOptimize(mls::build_voxel_grid(cloud, indices, 0.2));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_VoxelGrid)->Unit(benchmark::kMillisecond);

void BM_GroundExtract(benchmark::State& state) {
  const mls::PointCloud& cloud = road_scene();
  for (auto _ : state)
    benchmark::DoNotOptimize(mls::extract_ground(cloud, mls::GroundParams{}));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cloud.size()));
}
BENCHMARK(BM_GroundExtract)->Unit(benchmark::kMillisecond);

void BM_Segment(benchmark::State& state) {
  const mls::PointCloud& cloud = road_scene();
  const std::vector<std::uint32_t> rest = non_ground_indices();
  for (auto _ : state)
    benchmark::DoNotOptimize(mls::segment_connected(cloud, rest, 0.2, 50));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rest.size()));
}
BENCHMARK(BM_Segment)->Unit(benchmark::kMillisecond);

void BM_Geom(benchmark::State& state) {
  const mls::PointCloud object = blob_object(5000, 11);
  const std::vector<std::uint32_t> indices = mls::all_indices(object);
  for (auto _ : state)
    benchmark::DoNotOptimize(mls::geom_features(object, indices));
}
BENCHMARK(BM_Geom)->Unit(benchmark::kMicrosecond);

void BM_GRSD(benchmark::State& state) {
  const mls::PointCloud object = blob_object(5000, 12);
  const std::vector<std::uint32_t> indices = mls::all_indices(object);
  for (auto _ : state)
    benchmark::DoNotOptimize(mls::grsd(object, indices, mls::GrsdParams{}));
}
BENCHMARK(BM_GRSD)->Unit(benchmark::kMicrosecond);

void BM_ESF(benchmark::State& state) {
  const mls::PointCloud object = blob_object(5000, 13);
  const std::vector<std::uint32_t> indices = mls::all_indices(object);
  for (auto _ : state)
    benchmark::DoNotOptimize(mls::esf(object, indices, 20000, 3));
}
BENCHMARK(BM_ESF)->Unit(benchmark::kMicrosecond);

void BM_ForestTrain(benchmark::State& state) {
  mls::Rng rng(14);
  constexpr std::size_t kRows = 240, kFeatures = 64;
  std::vector<double> data;
  std::vector<std::uint32_t> classes;
  for (std::size_t r = 0; r < kRows; ++r) {
    const std::uint32_t cls = static_cast<std::uint32_t>(r % 4);
    for (std::size_t f = 0; f < kFeatures; ++f)
      data.push_back(2.0 * cls * ((f % 2 == 0) ? 1.0 : -1.0) + rng.gaussian(1.0));
    classes.push_back(cls + 1);
  }
  mls::TrainConfig config;
  config.n_trees = 100;
  config.seed = 9;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        mls::train_forest(data, kRows, kFeatures, classes, "RAW:64", config));
}
BENCHMARK(BM_ForestTrain)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
  mls::Rng rng(15);
  constexpr std::size_t kRows = 240, kFeatures = 64;
  std::vector<double> data;
  std::vector<std::uint32_t> classes;
  for (std::size_t r = 0; r < kRows; ++r) {
    const std::uint32_t cls = static_cast<std::uint32_t>(r % 4);
    for (std::size_t f = 0; f < kFeatures; ++f)
      data.push_back(2.0 * cls * ((f % 2 == 0) ? 1.0 : -1.0) + rng.gaussian(1.0));
    classes.push_back(cls + 1);
  }
  mls::TrainConfig config;
  config.n_trees = 100;
  config.seed = 9;
  const mls::ForestModel model =
      mls::train_forest(data, kRows, kFeatures, classes, "RAW:64", config);
  std::vector<double> probe(data.begin(), data.begin() + kFeatures);
  for (auto _ : state) benchmark::DoNotOptimize(mls::predict(model, probe));
}
BENCHMARK(BM_ForestPredict);

}  // namespace

BENCHMARK_MAIN();
