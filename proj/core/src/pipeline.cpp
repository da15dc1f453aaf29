#include "mls/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mls/errors.hpp"
#include "mls/ply_io.hpp"
#include "mls/rng.hpp"

namespace mls {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("manifest: bad numeric value for " + key + ": '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("manifest: bad integer value for " + key + ": '" + value + "'");
  }
}

}  // namespace

void write_manifest(const PipelineOptions& o, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << "# pipeline manifest\n";
  out << "input = " << o.input << '\n';
  out << "out_dir = " << o.out_dir << '\n';
  if (!o.model_path.empty()) out << "model = " << o.model_path << '\n';
  out << "seed = " << o.seed << '\n';
  out << "threads = " << o.threads << '\n';
  out << "sensor_height = " << fmt_double(o.ground.sensor_height) << '\n';
  out << "seed_radius = " << fmt_double(o.ground.seed_radius) << '\n';
  out << "seed_z_tol = " << fmt_double(o.ground.seed_z_tol) << '\n';
  out << "ground_cell_size = " << fmt_double(o.ground.cell_size) << '\n';
  out << "grow_dz_max = " << fmt_double(o.ground.grow_dz_max) << '\n';
  out << "smooth_radius = " << o.ground.smooth_radius << '\n';
  out << "aggregate = " << (o.ground.aggregate == ElevationAggregate::kMean ? "mean" : "min")
      << '\n';
  out << "segment_cell_size = " << fmt_double(o.segment_cell_size) << '\n';
  out << "min_points = " << o.min_points << '\n';
  out << "esf_samples = " << o.esf_samples << '\n';
  out << "subsample_max = " << o.subsample_max << '\n';
  out << "grsd_voxel = " << fmt_double(o.grsd_voxel) << '\n';
  out << "n_trees = " << o.train.n_trees << '\n';
  out << "mtry = " << o.train.mtry << '\n';
  out << "min_leaf = " << o.train.min_leaf << '\n';
  out << "max_depth = " << o.train.max_depth << '\n';
  out << "split_fraction = " << fmt_double(o.train.split_fraction) << '\n';
  out << "variant = " << variant_name(o.variant) << '\n';
  out << "m = " << fmt_double(o.m) << '\n';
  if (!out) throw Error("manifest write failure: " + path);
}

void append_timings(const std::vector<StageTiming>& timings, const std::string& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot open " + path + " for appending");
  for (const StageTiming& t : timings)
    out << "timing." << t.name << "_ms = " << fmt_double(t.ms) << '\n';
}

PipelineOptions parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  PipelineOptions o;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw InvalidInput("manifest: line " + std::to_string(line_no) + " is not key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.rfind("timing.", 0) == 0) continue;

    if (key == "input") o.input = value;
    else if (key == "out_dir") o.out_dir = value;
    else if (key == "model") o.model_path = value;
    else if (key == "seed") o.seed = parse_u64(key, value);
    else if (key == "threads") o.threads = parse_u64(key, value);
    else if (key == "sensor_height") o.ground.sensor_height = parse_double(key, value);
    else if (key == "seed_radius") o.ground.seed_radius = parse_double(key, value);
    else if (key == "seed_z_tol") o.ground.seed_z_tol = parse_double(key, value);
    else if (key == "ground_cell_size") o.ground.cell_size = parse_double(key, value);
    else if (key == "grow_dz_max") o.ground.grow_dz_max = parse_double(key, value);
    else if (key == "smooth_radius") o.ground.smooth_radius = parse_u64(key, value);
    else if (key == "aggregate") {
      if (value == "min") o.ground.aggregate = ElevationAggregate::kMin;
      else if (value == "mean") o.ground.aggregate = ElevationAggregate::kMean;
      else throw InvalidInput("manifest: unknown aggregate '" + value + "'");
    } else if (key == "segment_cell_size") o.segment_cell_size = parse_double(key, value);
    else if (key == "min_points") o.min_points = parse_u64(key, value);
    else if (key == "esf_samples") o.esf_samples = parse_u64(key, value);
    else if (key == "subsample_max") o.subsample_max = parse_u64(key, value);
    else if (key == "grsd_voxel") o.grsd_voxel = parse_double(key, value);
    else if (key == "n_trees") o.train.n_trees = parse_u64(key, value);
    else if (key == "mtry") o.train.mtry = parse_u64(key, value);
    else if (key == "min_leaf") o.train.min_leaf = parse_u64(key, value);
    else if (key == "max_depth") o.train.max_depth = parse_u64(key, value);
    else if (key == "split_fraction") o.train.split_fraction = parse_double(key, value);
    else if (key == "variant") o.variant = parse_variant(value);
    else if (key == "m") o.m = parse_double(key, value);
    else throw InvalidInput("manifest: unknown key '" + key + "'");
  }
  return o;
}

PipelineResult run_pipeline(const PipelineOptions& options) {
  if (options.input.empty()) throw InvalidParameter("pipeline: input path is empty");
  if (options.out_dir.empty()) throw InvalidParameter("pipeline: output directory is empty");

  namespace fs = std::filesystem;
  fs::create_directories(options.out_dir);
  const auto out_path = [&](const char* name) {
    return (fs::path(options.out_dir) / name).string();
  };
  write_manifest(options, out_path("manifest.txt"));

  const PointCloud cloud = read_ply_file(options.input);
  PipelineResult result;

  auto start = Clock::now();
  result.ground = extract_ground(cloud, options.ground);
  {
    PointCloud ground_cloud;
    ground_cloud.offset = cloud.offset;
    ground_cloud.points.reserve(result.ground.ground_indices.size());
    for (std::uint32_t i : result.ground.ground_indices)
      ground_cloud.points.push_back(cloud.points[i]);
    write_ply_file(ground_cloud, out_path("ground.ply"));
  }
  result.timings.push_back({"ground", ms_since(start)});

  start = Clock::now();
  std::vector<std::uint32_t> non_ground;
  {
    std::vector<bool> is_ground(cloud.size(), false);
    for (std::uint32_t i : result.ground.ground_indices) is_ground[i] = true;
    non_ground.reserve(cloud.size() - result.ground.ground_indices.size());
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
      if (!is_ground[i]) non_ground.push_back(i);
  }
  result.segments =
      segment_connected(cloud, non_ground, options.segment_cell_size, options.min_points);
  result.timings.push_back({"segment", ms_since(start)});

  if (result.segments.size() == 0) throw EmptyInput("pipeline: no segments to classify");

  start = Clock::now();
  DescriptorConfig desc;
  desc.esf_samples = static_cast<std::uint32_t>(options.esf_samples);
  desc.subsample_max = static_cast<std::uint32_t>(options.subsample_max);
  desc.grsd_params.voxel = options.grsd_voxel;
  desc.seed = derive_seed(options.seed, 1);
  const DescriptorLayout layout = DescriptorLayout::from_config(desc);
  const std::vector<std::vector<double>> rows = describe_objects(
      cloud, result.segments, desc, &result.ground.elevation,
      static_cast<unsigned>(options.threads));

  result.table.layout = layout.to_string();
  result.table.rows = rows.size();
  result.table.cols = layout.total;
  result.table.values.reserve(rows.size() * layout.total);
  for (const auto& row : rows)
    result.table.values.insert(result.table.values.end(), row.begin(), row.end());
  result.table.segment_ids.resize(rows.size());
  result.table.class_ids.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    result.table.segment_ids[s] = static_cast<std::uint32_t>(s);
    result.table.class_ids[s] = majority_class(cloud, result.segments.segments[s]);
  }
  write_table_file(result.table, out_path("descriptors.bin"));
  result.timings.push_back({"describe", ms_since(start)});

  start = Clock::now();
  if (!options.model_path.empty()) {
    result.model = load_model_file(options.model_path);
    if (result.model.n_features != result.table.cols)
      throw ModelError("pipeline: model expects " + std::to_string(result.model.n_features) +
                       " features, descriptors have " + std::to_string(result.table.cols));
  } else {
    const auto [train_rows, test_rows] = split_train_test(
        result.table.rows, options.train.split_fraction, derive_seed(options.seed, 2));
    (void)test_rows;
    std::vector<double> train_data;
    std::vector<std::uint32_t> train_classes;
    train_data.reserve(train_rows.size() * result.table.cols);
    for (std::uint32_t r : train_rows) {
      const double* row = result.table.row(r);
      train_data.insert(train_data.end(), row, row + result.table.cols);
      train_classes.push_back(result.table.class_ids[r]);
    }
    TrainConfig tc = options.train;
    tc.seed = derive_seed(options.seed, 3);
    result.model = train_forest(train_data, train_rows.size(), result.table.cols, train_classes,
                                result.table.layout, tc);
    result.model_trained = true;
    save_model_file(result.model, out_path("model.bin"));
  }
  result.timings.push_back({"train", ms_since(start)});

  start = Clock::now();
  result.predictions.reserve(result.table.rows);
  for (std::size_t r = 0; r < result.table.rows; ++r)
    result.predictions.push_back(predict(result.model, result.table.row(r), result.table.cols));
  result.timings.push_back({"predict", ms_since(start)});

  start = Clock::now();
  PointCloud predicted = cloud;
  for (LabeledPoint& p : predicted.points) {
    p.label = 0;
    p.class_id = 0;
  }
  for (std::size_t s = 0; s < result.segments.size(); ++s) {
    const std::uint32_t cls = result.predictions[s].class_id;
    for (std::uint32_t i : result.segments.segments[s]) {
      predicted.points[i].label = static_cast<std::uint32_t>(s) + 1;
      predicted.points[i].class_id = cls;
    }
  }
  write_ply_file(predicted, out_path("segments.ply"));

  EvalOptions eval_opts;
  eval_opts.variant = options.variant;
  eval_opts.m = options.m;
  result.eval = evaluate_pipeline(cloud, predicted, eval_opts);
  {
    std::ofstream seg(out_path("eval_seg.csv"));
    if (!seg) throw Error("cannot open eval_seg.csv for writing");
    seg << match_report_csv(result.eval.matching);
    std::ofstream cls(out_path("eval_cls.csv"));
    if (!cls) throw Error("cannot open eval_cls.csv for writing");
    cls << class_report_csv(result.eval.classification);
  }
  result.timings.push_back({"eval", ms_since(start)});

  append_timings(result.timings, out_path("manifest.txt"));
  return result;
}

}  // namespace mls
