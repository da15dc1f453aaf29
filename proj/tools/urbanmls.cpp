#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mls/class_tree.hpp"
#include "mls/descriptor_table.hpp"
#include "mls/descriptors.hpp"
#include "mls/elevation_image.hpp"
#include "mls/errors.hpp"
#include "mls/eval.hpp"
#include "mls/forest.hpp"
#include "mls/ground.hpp"
#include "mls/pipeline.hpp"
#include "mls/ply_io.hpp"
#include "mls/point_cloud.hpp"
#include "mls/rng.hpp"
#include "mls/segment.hpp"
#include "mls/synth.hpp"

namespace {

mls::PlyMode ply_mode(bool lenient) {
  return lenient ? mls::PlyMode::kLenient : mls::PlyMode::kStrict;
}

mls::ElevationAggregate parse_aggregate(const std::string& name) {
  if (name == "min") return mls::ElevationAggregate::kMin;
  if (name == "mean") return mls::ElevationAggregate::kMean;
  throw mls::InvalidParameter("unknown aggregate '" + name + "'");
}

std::vector<std::uint32_t> read_index_file(const std::string& path, std::size_t cloud_size) {
  std::ifstream in(path);
  if (!in) throw mls::Error("cannot open " + path);
  std::vector<std::uint32_t> indices;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    try {
      std::size_t pos = 0;
      const unsigned long v = std::stoul(line.substr(b), &pos);
      if (v >= cloud_size) throw std::out_of_range(line);
      indices.push_back(static_cast<std::uint32_t>(v));
    } catch (const std::exception&) {
      throw mls::InvalidInput(path + ": bad point index at line " + std::to_string(line_no));
    }
  }
  return indices;
}

void write_index_file(const std::vector<std::uint32_t>& indices, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mls::Error("cannot open " + path + " for writing");
  for (std::uint32_t i : indices) out << i << '\n';
  if (!out) throw mls::Error("write failure: " + path);
}

void write_text_file(const std::string& text, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mls::Error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw mls::Error("write failure: " + path);
}

struct StatsArgs {
  std::string input, classes, coarse;
  bool lenient = false;
};

void run_stats(const StatsArgs& a) {
  std::unique_ptr<mls::ClassTree> tree;
  if (!a.classes.empty())
    tree = std::make_unique<mls::ClassTree>(
        mls::read_class_tree_files(a.classes, a.coarse.empty() ? nullptr : &a.coarse));
  const mls::PointCloud cloud = mls::read_ply_file(a.input, ply_mode(a.lenient));
  std::cout << mls::format_stats(mls::cloud_stats(cloud, tree.get()));
}

struct SynthArgs {
  std::string scene, output, scene_out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void run_synth(const SynthArgs& a) {
  mls::SceneSpec spec = mls::read_scene_file(a.scene);
  if (a.seed_set) spec.seed = a.seed;
  const mls::PointCloud cloud = mls::generate(spec);
  mls::write_ply_file(cloud, a.output);
  if (!a.scene_out.empty()) write_text_file(mls::format_scene(spec), a.scene_out);
  std::cout << "wrote " << cloud.size() << " points, " << spec.objects.size() << " objects to "
            << a.output << "\n";
}

struct GroundArgs {
  std::string input, output, indices_out, elevation_out, aggregate = "min";
  mls::GroundParams params;
  bool lenient = false;
};

void run_ground(const GroundArgs& a) {
  mls::GroundParams params = a.params;
  params.aggregate = parse_aggregate(a.aggregate);
  const mls::PointCloud cloud = mls::read_ply_file(a.input, ply_mode(a.lenient));
  const mls::GroundResult res = mls::extract_ground(cloud, params);
  if (!a.output.empty()) {
    mls::PointCloud ground;
    ground.offset = cloud.offset;
    ground.points.reserve(res.ground_indices.size());
    for (std::uint32_t i : res.ground_indices) ground.points.push_back(cloud.points[i]);
    mls::write_ply_file(ground, a.output);
  }
  if (!a.indices_out.empty()) write_index_file(res.ground_indices, a.indices_out);
  if (!a.elevation_out.empty()) mls::write_elevation_file(res.elevation, a.elevation_out);
  std::cout << "ground points: " << res.ground_indices.size() << " of " << cloud.size() << "\n";
}

struct SegmentArgs {
  std::string input, output, exclude;
  double cell_size = 0.20;
  std::size_t min_points = 50;
  bool lenient = false;
};

void run_segment(const SegmentArgs& a) {
  const mls::PointCloud cloud = mls::read_ply_file(a.input, ply_mode(a.lenient));
  std::vector<std::uint32_t> subset;
  if (a.exclude.empty()) {
    subset = mls::all_indices(cloud);
  } else {
    std::vector<bool> excluded(cloud.size(), false);
    for (std::uint32_t i : read_index_file(a.exclude, cloud.size())) excluded[i] = true;
    for (std::uint32_t i = 0; i < cloud.size(); ++i)
      if (!excluded[i]) subset.push_back(i);
  }
  const mls::SegmentSet segset =
      mls::segment_connected(cloud, subset, a.cell_size, a.min_points);
  mls::write_ply_file(mls::export_labeled(cloud, segset), a.output);
  std::size_t segmented = 0;
  for (const auto& s : segset.segments) segmented += s.size();
  std::cout << "segments: " << segset.size() << " covering " << segmented << " of "
            << cloud.size() << " points\n";
}

struct DescribeArgs {
  std::string input, output, elevation;
  mls::DescriptorConfig config;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool no_geom = false, no_grsd = false, no_esf = false, no_context = false;
  bool lenient = false;
};

void run_describe(const DescribeArgs& a) {
  mls::DescriptorConfig config = a.config;
  config.geom = !a.no_geom;
  config.grsd = !a.no_grsd;
  config.esf = !a.no_esf;
  config.context = !a.no_context;
  config.seed = a.seed;
  const mls::PointCloud cloud = mls::read_ply_file(a.input, ply_mode(a.lenient));
  const mls::SegmentSet segset = mls::segments_from_labels(cloud);
  if (segset.size() == 0) throw mls::EmptyInput("describe: input has no labeled objects");

  std::unique_ptr<mls::ElevationImage> elevation;
  if (config.context) {
    if (!a.elevation.empty())
      elevation = std::make_unique<mls::ElevationImage>(mls::read_elevation_file(a.elevation));
    else
      elevation = std::make_unique<mls::ElevationImage>(
          mls::extract_ground(cloud, mls::GroundParams{}).elevation);
  }
  const mls::DescriptorLayout layout = mls::DescriptorLayout::from_config(config);
  const auto rows = mls::describe_objects(cloud, segset, config, elevation.get(),
                                          static_cast<unsigned>(a.threads));

  mls::DescriptorTable table;
  table.layout = layout.to_string();
  table.rows = rows.size();
  table.cols = layout.total;
  table.values.reserve(rows.size() * layout.total);
  for (const auto& row : rows) table.values.insert(table.values.end(), row.begin(), row.end());
  table.segment_ids.resize(rows.size());
  table.class_ids.resize(rows.size());
  for (std::size_t s = 0; s < rows.size(); ++s) {
    table.segment_ids[s] = static_cast<std::uint32_t>(s);
    table.class_ids[s] = mls::majority_class(cloud, segset.segments[s]);
  }
  mls::write_table_file(table, a.output);
  std::cout << "described " << table.rows << " objects, layout " << table.layout << "\n";
}

struct TrainArgs {
  std::string input, output;
  mls::TrainConfig config;
  std::uint64_t seed = 0;
};

void run_train(const TrainArgs& a) {
  const mls::DescriptorTable table = mls::read_table_file(a.input);
  if (table.class_ids.empty())
    throw mls::InvalidInput("train: descriptor table has no class sidecar");
  const auto [train_rows, test_rows] =
      mls::split_train_test(table.rows, a.config.split_fraction, mls::derive_seed(a.seed, 2));

  std::vector<double> data;
  std::vector<std::uint32_t> classes;
  data.reserve(train_rows.size() * table.cols);
  for (std::uint32_t r : train_rows) {
    data.insert(data.end(), table.row(r), table.row(r) + table.cols);
    classes.push_back(table.class_ids[r]);
  }
  mls::TrainConfig config = a.config;
  config.seed = mls::derive_seed(a.seed, 3);
  const mls::ForestModel model = mls::train_forest(data, train_rows.size(), table.cols, classes,
                                                   table.layout, config);
  mls::save_model_file(model, a.output);

  std::size_t correct = 0;
  for (std::uint32_t r : test_rows)
    if (mls::predict(model, table.row(r), table.cols).class_id == table.class_ids[r]) ++correct;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "trained %zu trees on %zu objects (%zu features), oob %.4f, held-out %zu/%zu\n",
                model.trees.size(), train_rows.size(), table.cols, model.oob_score, correct,
                test_rows.size());
  std::cout << buf;
}

struct PredictArgs {
  std::string input, model, output, ply, ply_out;
  bool lenient = false;
};

void run_predict(const PredictArgs& a) {
  const mls::DescriptorTable table = mls::read_table_file(a.input);
  const mls::ForestModel model = mls::load_model_file(a.model);
  if (!model.layout.empty() && !table.layout.empty() && model.layout != table.layout)
    throw mls::ModelError("predict: model layout '" + model.layout +
                          "' does not match table layout '" + table.layout + "'");

  std::vector<mls::Prediction> predictions;
  predictions.reserve(table.rows);
  for (std::size_t r = 0; r < table.rows; ++r)
    predictions.push_back(mls::predict(model, table.row(r), table.cols));

  std::ostringstream csv;
  csv << "row,segment_id,class_id,predicted\n";
  for (std::size_t r = 0; r < table.rows; ++r) {
    const std::uint32_t seg = r < table.segment_ids.size() ? table.segment_ids[r] : 0;
    const std::uint32_t cls = r < table.class_ids.size() ? table.class_ids[r] : 0;
    csv << r << ',' << seg << ',' << cls << ',' << predictions[r].class_id << '\n';
  }
  if (a.output.empty())
    std::cout << csv.str();
  else
    write_text_file(csv.str(), a.output);

  if (!a.ply.empty()) {
    mls::PointCloud cloud = mls::read_ply_file(a.ply, ply_mode(a.lenient));
    const mls::SegmentSet segset = mls::segments_from_labels(cloud);
    if (segset.size() != table.rows)
      throw mls::InvalidInput("predict: PLY has " + std::to_string(segset.size()) +
                              " objects, table has " + std::to_string(table.rows));
    for (std::size_t s = 0; s < segset.size(); ++s)
      for (std::uint32_t i : segset.segments[s])
        cloud.points[i].class_id = predictions[s].class_id;
    mls::write_ply_file(cloud, a.ply_out);
  }
  if (!table.class_ids.empty()) {
    std::size_t correct = 0;
    for (std::size_t r = 0; r < table.rows; ++r)
      if (predictions[r].class_id == table.class_ids[r]) ++correct;
    std::cerr << "agreement with sidecar classes: " << correct << "/" << table.rows << "\n";
  }
}

struct EvalSegArgs {
  std::string gt, pred, output, variant = "intersection";
  double m = 0.5;
  bool lenient = false;
};

void run_eval_seg(const EvalSegArgs& a) {
  const mls::PointCloud gt = mls::read_ply_file(a.gt, ply_mode(a.lenient));
  const mls::PointCloud pred = mls::read_ply_file(a.pred, ply_mode(a.lenient));
  if (gt.size() != pred.size())
    throw mls::InvalidInput("eval-seg: clouds have different point counts");
  const mls::MatchReport report =
      mls::match_objects(mls::segments_from_labels(gt), mls::segments_from_labels(pred), a.m,
                         mls::parse_variant(a.variant));
  std::cout << mls::format_match_report(report);
  if (!a.output.empty()) write_text_file(mls::match_report_csv(report), a.output);
}

struct EvalClsArgs {
  std::string gt, pred, output, classes, coarse, variant = "intersection";
  double m = 0.5;
  bool lenient = false;
};

void run_eval_cls(const EvalClsArgs& a) {
  std::unique_ptr<mls::ClassTree> tree;
  if (!a.classes.empty())
    tree = std::make_unique<mls::ClassTree>(
        mls::read_class_tree_files(a.classes, a.coarse.empty() ? nullptr : &a.coarse));
  else if (!a.coarse.empty())
    throw mls::InvalidParameter("eval-cls: --coarse requires --classes");

  const mls::PointCloud gt = mls::read_ply_file(a.gt, ply_mode(a.lenient));
  const mls::PointCloud pred = mls::read_ply_file(a.pred, ply_mode(a.lenient));
  mls::EvalOptions opts;
  opts.variant = mls::parse_variant(a.variant);
  opts.m = a.m;
  if (tree && !a.coarse.empty()) opts.coarse = tree.get();
  const mls::PipelineEval eval = mls::evaluate_pipeline(gt, pred, opts);
  std::cout << "matched pairs: " << eval.matching.pairs.size() << "\n"
            << mls::format_class_report(eval.classification, tree.get());
  if (!a.output.empty()) write_text_file(mls::class_report_csv(eval.classification), a.output);
}

struct PipelineArgs {
  mls::PipelineOptions options;
  std::string aggregate = "min";
  std::string variant = "intersection";
  std::string config;
};

void run_pipeline_cmd(const mls::PipelineOptions& options) {
  if (options.input.empty()) throw mls::InvalidParameter("pipeline: no input given");
  if (options.out_dir.empty()) throw mls::InvalidParameter("pipeline: no output directory given");
  const mls::PipelineResult result = mls::run_pipeline(options);

  std::cout << format_match_report(result.eval.matching)
            << format_class_report(result.eval.classification);
  std::cout << "timings:\n";
  for (const mls::StageTiming& t : result.timings) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "  %-10s %10.1f ms\n", t.name.c_str(), t.ms);
    std::cout << buf;
  }
  std::cout << "outputs in " << options.out_dir << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"urban MLS point-cloud pipeline: ground, objects, descriptors, classification"};
  app.require_subcommand(1);

  auto stats = std::make_shared<StatsArgs>();
  {
    CLI::App* sub = app.add_subcommand("stats", "per-class object and point counts of a PLY");
    sub->add_option("input,--input", stats->input, "input PLY")->required();
    sub->add_option("--classes", stats->classes, "class tree XML");
    sub->add_option("--coarse", stats->coarse, "coarse mapping XML");
    sub->add_flag("--lenient", stats->lenient, "accept reordered PLY properties");
    sub->callback([stats] { run_stats(*stats); });
  }

  auto synth = std::make_shared<SynthArgs>();
  {
    CLI::App* sub = app.add_subcommand("synth", "generate a synthetic labeled scene");
    sub->add_option("scene,--scene", synth->scene, "scene spec file")->required();
    sub->add_option("-o,--output", synth->output, "output PLY")->required();
    CLI::Option* seed = sub->add_option("--seed", synth->seed, "override the scene seed");
    sub->add_option("--scene-out", synth->scene_out, "write the canonical scene spec");
    sub->callback([synth, seed] {
      synth->seed_set = seed->count() > 0;
      run_synth(*synth);
    });
  }

  auto ground = std::make_shared<GroundArgs>();
  {
    CLI::App* sub = app.add_subcommand("ground", "extract ground points and elevation raster");
    sub->add_option("input,--input", ground->input, "input PLY")->required();
    sub->add_option("-o,--output", ground->output, "ground-points PLY");
    sub->add_option("--indices-out", ground->indices_out, "ground point indices, one per line");
    sub->add_option("--elevation-out", ground->elevation_out, "elevation raster file");
    sub->add_option("--sensor_height", ground->params.sensor_height, "sensor height above ground");
    sub->add_option("--seed_radius", ground->params.seed_radius, "seed cylinder radius");
    sub->add_option("--seed_z_tol", ground->params.seed_z_tol, "seed height tolerance");
    sub->add_option("--cell_size", ground->params.cell_size, "elevation raster cell size");
    sub->add_option("--grow_dz_max", ground->params.grow_dz_max, "max elevation step");
    sub->add_option("--smooth_radius", ground->params.smooth_radius, "box smoothing radius");
    sub->add_option("--aggregate", ground->aggregate, "per-cell aggregate")
        ->check(CLI::IsMember({"min", "mean"}));
    sub->add_flag("--lenient", ground->lenient, "accept reordered PLY properties");
    sub->callback([ground] { run_ground(*ground); });
  }

  auto seg = std::make_shared<SegmentArgs>();
  {
    CLI::App* sub = app.add_subcommand("segment", "connected-component object segmentation");
    sub->add_option("input,--input", seg->input, "input PLY")->required();
    sub->add_option("-o,--output", seg->output, "labeled PLY")->required();
    sub->add_option("--cell_size", seg->cell_size, "voxel cell size");
    sub->add_option("--min_points", seg->min_points, "minimum points per segment");
    sub->add_option("--exclude", seg->exclude, "index file of points to skip (e.g. ground)");
    sub->add_flag("--lenient", seg->lenient, "accept reordered PLY properties");
    sub->callback([seg] { run_segment(*seg); });
  }

  auto desc = std::make_shared<DescribeArgs>();
  {
    CLI::App* sub = app.add_subcommand("describe", "descriptor table of a labeled PLY");
    sub->add_option("input,--input", desc->input, "labeled PLY")->required();
    sub->add_option("-o,--output", desc->output, "descriptor table file")->required();
    sub->add_option("--esf_samples", desc->config.esf_samples, "ESF sampling iterations");
    sub->add_option("--subsample_max", desc->config.subsample_max, "GRSD/ESF input cap");
    sub->add_option("--grsd_voxel", desc->config.grsd_params.voxel, "GRSD voxel size");
    sub->add_option("--seed", desc->seed, "descriptor sampling seed");
    sub->add_option("--threads", desc->threads, "worker threads");
    sub->add_option("--elevation", desc->elevation, "elevation raster (else recomputed)");
    sub->add_flag("--no-geom", desc->no_geom, "drop the geometric block");
    sub->add_flag("--no-grsd", desc->no_grsd, "drop the GRSD block");
    sub->add_flag("--no-esf", desc->no_esf, "drop the ESF block");
    sub->add_flag("--no-context", desc->no_context, "drop the context block");
    sub->add_flag("--lenient", desc->lenient, "accept reordered PLY properties");
    sub->callback([desc] { run_describe(*desc); });
  }

  auto train = std::make_shared<TrainArgs>();
  {
    CLI::App* sub = app.add_subcommand("train", "train a random forest on a descriptor table");
    sub->add_option("input,--input", train->input, "descriptor table file")->required();
    sub->add_option("-o,--output", train->output, "model file")->required();
    sub->add_option("--n_trees", train->config.n_trees, "number of trees");
    sub->add_option("--mtry", train->config.mtry, "features per split (0 = sqrt)");
    sub->add_option("--min_leaf", train->config.min_leaf, "minimum samples per leaf");
    sub->add_option("--max_depth", train->config.max_depth, "depth cap (0 = unlimited)");
    sub->add_option("--split_fraction", train->config.split_fraction, "train fraction");
    sub->add_option("--seed", train->seed, "training seed");
    sub->callback([train] { run_train(*train); });
  }

  auto pred = std::make_shared<PredictArgs>();
  {
    CLI::App* sub = app.add_subcommand("predict", "classify descriptor rows with a model");
    sub->add_option("input,--input", pred->input, "descriptor table file")->required();
    sub->add_option("--model", pred->model, "model file")->required();
    sub->add_option("-o,--output", pred->output, "predictions CSV (default stdout)");
    sub->add_option("--ply", pred->ply, "labeled PLY to re-classify");
    sub->add_option("--ply-out", pred->ply_out, "output PLY with predicted classes")
        ->needs(sub->get_option("--ply"));
    sub->add_flag("--lenient", pred->lenient, "accept reordered PLY properties");
    sub->callback([pred] {
      if (!pred->ply.empty() && pred->ply_out.empty())
        throw mls::InvalidParameter("predict: --ply requires --ply-out");
      run_predict(*pred);
    });
  }

  auto eseg = std::make_shared<EvalSegArgs>();
  {
    CLI::App* sub = app.add_subcommand("eval-seg", "object matching metrics GT vs detected");
    sub->add_option("gt,--gt", eseg->gt, "ground-truth PLY")->required();
    sub->add_option("pred,--pred", eseg->pred, "detected PLY")->required();
    sub->add_option("--m", eseg->m, "overlap threshold in (0, 1]");
    sub->add_option("--variant", eseg->variant, "matching rule")
        ->check(CLI::IsMember({"intersection", "literal"}));
    sub->add_option("-o,--output", eseg->output, "CSV output");
    sub->add_flag("--lenient", eseg->lenient, "accept reordered PLY properties");
    sub->callback([eseg] { run_eval_seg(*eseg); });
  }

  auto ecls = std::make_shared<EvalClsArgs>();
  {
    CLI::App* sub = app.add_subcommand("eval-cls", "classification metrics over matched objects");
    sub->add_option("gt,--gt", ecls->gt, "ground-truth PLY")->required();
    sub->add_option("pred,--pred", ecls->pred, "predicted PLY")->required();
    sub->add_option("--m", ecls->m, "overlap threshold in (0, 1]");
    sub->add_option("--variant", ecls->variant, "matching rule")
        ->check(CLI::IsMember({"intersection", "literal"}));
    sub->add_option("--classes", ecls->classes, "class tree XML (names in the report)");
    sub->add_option("--coarse", ecls->coarse, "coarse mapping XML (projects classes)");
    sub->add_option("-o,--output", ecls->output, "CSV output");
    sub->add_flag("--lenient", ecls->lenient, "accept reordered PLY properties");
    sub->callback([ecls] { run_eval_cls(*ecls); });
  }

  auto pipe = std::make_shared<PipelineArgs>();
  {
    CLI::App* sub = app.add_subcommand("pipeline", "ground, segment, describe, classify, score");
    sub->add_option("--config", pipe->config, "key = value config file (a manifest works)");
    mls::PipelineOptions& o = pipe->options;
    sub->add_option("input,--input", o.input, "input PLY with ground-truth labels");
    sub->add_option("-o,--out_dir", o.out_dir, "run output directory");
    sub->add_option("--model", o.model_path, "load this model instead of training");
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--threads", o.threads, "worker threads for descriptors");
    sub->add_option("--sensor_height", o.ground.sensor_height, "sensor height above ground");
    sub->add_option("--seed_radius", o.ground.seed_radius, "seed cylinder radius");
    sub->add_option("--seed_z_tol", o.ground.seed_z_tol, "seed height tolerance");
    sub->add_option("--ground_cell_size", o.ground.cell_size, "elevation raster cell size");
    sub->add_option("--grow_dz_max", o.ground.grow_dz_max, "max elevation step");
    sub->add_option("--smooth_radius", o.ground.smooth_radius, "box smoothing radius");
    sub->add_option("--aggregate", pipe->aggregate, "per-cell aggregate")
        ->check(CLI::IsMember({"min", "mean"}));
    sub->add_option("--segment_cell_size", o.segment_cell_size, "segmentation voxel size");
    sub->add_option("--min_points", o.min_points, "minimum points per segment");
    sub->add_option("--esf_samples", o.esf_samples, "ESF sampling iterations");
    sub->add_option("--subsample_max", o.subsample_max, "GRSD/ESF input cap");
    sub->add_option("--grsd_voxel", o.grsd_voxel, "GRSD voxel size");
    sub->add_option("--n_trees", o.train.n_trees, "number of trees");
    sub->add_option("--mtry", o.train.mtry, "features per split (0 = sqrt)");
    sub->add_option("--min_leaf", o.train.min_leaf, "minimum samples per leaf");
    sub->add_option("--max_depth", o.train.max_depth, "depth cap (0 = unlimited)");
    sub->add_option("--split_fraction", o.train.split_fraction, "object train fraction");
    sub->add_option("--variant", pipe->variant, "matching rule")
        ->check(CLI::IsMember({"intersection", "literal"}));
    sub->add_option("--m", o.m, "overlap threshold in (0, 1]");
    // config file first, then explicitly passed flags on top
    sub->callback([pipe, sub] {
      mls::PipelineOptions merged;
      if (!pipe->config.empty()) merged = mls::parse_manifest(pipe->config);
      const auto passed = [sub](const char* name) { return sub->count(name) > 0; };
      const mls::PipelineOptions& c = pipe->options;
      if (passed("--input")) merged.input = c.input;
      if (passed("--out_dir")) merged.out_dir = c.out_dir;
      if (passed("--model")) merged.model_path = c.model_path;
      if (passed("--seed")) merged.seed = c.seed;
      if (passed("--threads")) merged.threads = c.threads;
      if (passed("--sensor_height")) merged.ground.sensor_height = c.ground.sensor_height;
      if (passed("--seed_radius")) merged.ground.seed_radius = c.ground.seed_radius;
      if (passed("--seed_z_tol")) merged.ground.seed_z_tol = c.ground.seed_z_tol;
      if (passed("--ground_cell_size")) merged.ground.cell_size = c.ground.cell_size;
      if (passed("--grow_dz_max")) merged.ground.grow_dz_max = c.ground.grow_dz_max;
      if (passed("--smooth_radius")) merged.ground.smooth_radius = c.ground.smooth_radius;
      if (passed("--aggregate")) merged.ground.aggregate = parse_aggregate(pipe->aggregate);
      if (passed("--segment_cell_size")) merged.segment_cell_size = c.segment_cell_size;
      if (passed("--min_points")) merged.min_points = c.min_points;
      if (passed("--esf_samples")) merged.esf_samples = c.esf_samples;
      if (passed("--subsample_max")) merged.subsample_max = c.subsample_max;
      if (passed("--grsd_voxel")) merged.grsd_voxel = c.grsd_voxel;
      if (passed("--n_trees")) merged.train.n_trees = c.train.n_trees;
      if (passed("--mtry")) merged.train.mtry = c.train.mtry;
      if (passed("--min_leaf")) merged.train.min_leaf = c.train.min_leaf;
      if (passed("--max_depth")) merged.train.max_depth = c.train.max_depth;
      if (passed("--split_fraction")) merged.train.split_fraction = c.train.split_fraction;
      if (passed("--variant")) merged.variant = mls::parse_variant(pipe->variant);
      if (passed("--m")) merged.m = c.m;
      run_pipeline_cmd(merged);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const mls::Error& e) {
    std::cerr << "urbanmls: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "urbanmls: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
