#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace mls {

struct TrainConfig {
  std::size_t n_trees = 100;
  std::size_t mtry = 0;      // 0 means floor(sqrt(n_features))
  std::size_t min_leaf = 1;
  std::size_t max_depth = 0;  // 0 means unlimited
  double split_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Binary CART node. feature < 0 marks a leaf carrying per-class vote counts;
/// interior nodes send x[feature] <= threshold left. Thresholds are training
/// feature values, so any strictly increasing per-feature transform applied
/// to train and test alike leaves every routing decision unchanged.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::vector<std::uint32_t> votes;  // per class index, leaves only
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
};

struct ForestModel {
  std::string layout;                  // descriptor layout string
  std::vector<std::uint32_t> classes;  // ascending class ids
  std::size_t n_features = 0;
  std::uint64_t seed = 0;
  double oob_score = 0.0;
  std::vector<Tree> trees;
};

struct Prediction {
  std::uint32_t class_id = 0;
  std::vector<double> fractions;  // per model class, sums to 1
};

/// Deterministic seeded shuffle split of n objects; the first
/// round(fraction * n) go to the train side. Throws InvalidParameter when
/// n < 2, fraction is outside (0, 1), or either side ends up empty.
std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_train_test(
    std::size_t n, double fraction, std::uint64_t seed);

/// Train a Random Forest on row-major data (n_samples x n_features): Gini
/// CART trees on bootstrap resamples, mtry feature candidates per split,
/// per-tree seeds derived from config.seed, and every tie broken
/// deterministically (best gain, then lowest feature, then lowest threshold).
/// oob_score is the accuracy of out-of-bag majority votes over the samples
/// that were out of bag at least once. Throws InvalidInput when fewer than
/// two classes are present, InvalidParameter on malformed shapes or config.
ForestModel train_forest(const std::vector<double>& data, std::size_t n_samples,
                         std::size_t n_features, const std::vector<std::uint32_t>& class_ids,
                         const std::string& layout, const TrainConfig& config);

/// Majority class over per-tree votes, ties to the lowest class id.
/// Throws ModelError when the vector length does not match the model.
Prediction predict(const ForestModel& model, const double* values, std::size_t count);
Prediction predict(const ForestModel& model, const std::vector<double>& values);

/// Versioned binary serialization; load validates structure and throws
/// ModelError on bad magic, version, truncation, or inconsistent trees.
void save_model(const ForestModel& model, std::ostream& out);
ForestModel load_model(std::istream& in);
void save_model_file(const ForestModel& model, const std::string& path);
ForestModel load_model_file(const std::string& path);

}  // namespace mls
