#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mls/descriptor_table.hpp"
#include "mls/descriptors.hpp"
#include "mls/eval.hpp"
#include "mls/forest.hpp"
#include "mls/ground.hpp"
#include "mls/point_cloud.hpp"
#include "mls/segment.hpp"

namespace mls {

// Full run configuration. Every field has the module default; a manifest
// stores exactly these values, so a run is reproducible from its manifest.
struct PipelineOptions {
  std::string input;
  std::string out_dir;
  std::string model_path;  // when set, the model is loaded instead of trained

  GroundParams ground;
  double segment_cell_size = 0.20;
  std::size_t min_points = 50;

  std::size_t esf_samples = 20000;
  std::size_t subsample_max = 10000;
  double grsd_voxel = 0.25;

  TrainConfig train;  // split_fraction doubles as the object train/test split

  MatchVariant variant = MatchVariant::kIntersection;
  double m = 0.5;

  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct StageTiming {
  std::string name;
  double ms = 0.0;
};

struct PipelineResult {
  GroundResult ground;
  SegmentSet segments;
  DescriptorTable table;  // class ids are ground-truth majorities per segment
  ForestModel model;
  bool model_trained = false;
  std::vector<Prediction> predictions;  // one per segment
  PipelineEval eval;
  std::vector<StageTiming> timings;
};

// Runs ground -> segment -> describe -> train or load -> predict -> eval and
// writes ground.ply, segments.ply, descriptors.bin (+ sidecar), model.bin
// (when trained), eval_seg.csv, eval_cls.csv, and manifest.txt into out_dir.
// The manifest is written before any stage output; timings are appended at
// the end. Training labels come from the majority ground-truth class of each
// detected segment's points.
PipelineResult run_pipeline(const PipelineOptions& options);

void write_manifest(const PipelineOptions& options, const std::string& path);
void append_timings(const std::vector<StageTiming>& timings, const std::string& path);

// Reads a manifest back into options; timing lines and comments are ignored.
PipelineOptions parse_manifest(const std::string& path);

}  // namespace mls
