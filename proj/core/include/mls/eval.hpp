#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mls/class_tree.hpp"
#include "mls/point_cloud.hpp"
#include "mls/segment.hpp"

namespace mls {

// Object-matching rule between a ground-truth and a detected segmentation.
// kLiteral compares both object sizes against the union of the pair;
// kIntersection compares the overlap against each object on its own side.
enum class MatchVariant { kLiteral, kIntersection };

std::string variant_name(MatchVariant variant);
MatchVariant parse_variant(const std::string& name);

struct MatchPair {
  std::uint32_t gt = 0;
  std::uint32_t sr = 0;
  std::size_t overlap = 0;
  bool operator==(const MatchPair&) const = default;
};

struct MatchReport {
  MatchVariant variant = MatchVariant::kIntersection;
  double m = 0.5;
  std::vector<MatchPair> pairs;  // ascending by (gt, sr)
  std::size_t ground_truth = 0;
  std::size_t detected = 0;
  std::size_t matched_gt = 0;
  std::size_t matched_detected = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Matches objects of two segmentations of the same cloud at overlap
// threshold m in (0, 1]. Precision counts matched detected objects over
// all detected; recall counts matched ground-truth objects over all
// ground truth, so both stay in [0, 1] even when one ground-truth object
// matches several detections under the literal rule.
MatchReport match_objects(const SegmentSet& gt, const SegmentSet& detected, double m,
                          MatchVariant variant = MatchVariant::kIntersection);

struct ClassMetrics {
  std::uint32_t class_id = 0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mcc = 0.0;
  bool degenerate = false;  // some denominator was zero; affected metrics are 0
};

struct ClassReport {
  std::vector<std::uint32_t> classes;   // ascending
  std::vector<std::uint64_t> confusion; // row-major, rows = truth, cols = predicted
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;  // averaged over classes with support > 0
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double macro_mcc = 0.0;
  double accuracy = 0.0;
  std::uint64_t total = 0;

  std::uint64_t at(std::size_t truth_row, std::size_t pred_col) const {
    return confusion[truth_row * classes.size() + pred_col];
  }
};

// One-vs-all metrics from a confusion matrix. classes must be ascending and
// distinct; confusion must hold classes.size()^2 counts.
ClassReport classification_metrics(const std::vector<std::uint32_t>& classes,
                                   const std::vector<std::uint64_t>& confusion);

// Convenience: builds the confusion matrix from parallel truth/prediction
// vectors, classes taken as the sorted union of both.
ClassReport classification_from_pairs(const std::vector<std::uint32_t>& truth,
                                      const std::vector<std::uint32_t>& predicted);

// Maps every class id to its coarse id via the tree; unmapped id -> InvalidInput.
std::vector<std::uint32_t> coarse_project(const std::vector<std::uint32_t>& ids,
                                          const ClassTree& tree);

// Majority class id over the given points; ties go to the lowest id.
std::uint32_t majority_class(const PointCloud& cloud, const std::vector<std::uint32_t>& indices);

struct EvalOptions {
  MatchVariant variant = MatchVariant::kIntersection;
  double m = 0.5;
  const ClassTree* coarse = nullptr;  // when set, classes are projected before scoring
};

struct PipelineEval {
  MatchReport matching;
  ClassReport classification;  // over matched object pairs
};

// Scores a predicted cloud against a ground-truth cloud of the same points:
// objects come from the label field, the class of an object is the majority
// class id over its points (ties to the lowest id).
PipelineEval evaluate_pipeline(const PointCloud& gt, const PointCloud& predicted,
                               const EvalOptions& options = {});

std::string match_report_csv(const MatchReport& report);
std::string class_report_csv(const ClassReport& report);
std::string format_match_report(const MatchReport& report);
std::string format_class_report(const ClassReport& report, const ClassTree* tree = nullptr);

}  // namespace mls
