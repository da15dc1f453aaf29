#include "mls/forest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "mls/binary_io.hpp"
#include "mls/errors.hpp"
#include "mls/rng.hpp"

namespace mls {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'S', 'F'};
constexpr std::uint32_t kVersion = 1;

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  double sum_sq = 0.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

struct BuildItem {
  std::vector<std::uint32_t> samples;  // row indices, with bootstrap multiplicity
  std::int32_t node = 0;
  std::size_t depth = 0;
};

struct Dataset {
  const std::vector<double>& data;
  std::size_t n_features;
  const std::vector<std::uint32_t>& class_index;  // per row
  std::size_t n_classes;

  double value(std::uint32_t row, std::size_t feature) const {
    return data[static_cast<std::size_t>(row) * n_features + feature];
  }
};

Tree build_tree(const Dataset& ds, const std::vector<std::uint32_t>& bag,
                const TrainConfig& config, std::size_t mtry, Rng& rng) {
  Tree tree;
  tree.nodes.emplace_back();
  std::vector<BuildItem> stack;
  stack.push_back({bag, 0, 0});

  std::vector<std::size_t> feat_pool(ds.n_features);
  for (std::size_t f = 0; f < ds.n_features; ++f) feat_pool[f] = f;

  while (!stack.empty()) {
    BuildItem item = std::move(stack.back());
    stack.pop_back();

    std::vector<std::size_t> counts(ds.n_classes, 0);
    for (std::uint32_t s : item.samples) ++counts[ds.class_index[s]];
    const std::size_t total = item.samples.size();

    std::size_t present = 0;
    for (std::size_t c : counts) present += c > 0 ? 1 : 0;
    const bool depth_capped = config.max_depth > 0 && item.depth >= config.max_depth;
    const bool splittable = present > 1 && total >= 2 * config.min_leaf && !depth_capped;

    std::int32_t best_feature = -1;
    double best_threshold = 0.0;
    double best_gain = 0.0;

    if (splittable) {
      // mtry distinct candidate features, seeded partial shuffle
      for (std::size_t i = 0; i < mtry; ++i) {
        const std::size_t j = i + rng.uniform_index(feat_pool.size() - i);
        std::swap(feat_pool[i], feat_pool[j]);
      }
      const double parent = gini(counts, total);
      std::vector<std::pair<double, std::uint32_t>> column(total);  // (value, class index)
      std::vector<std::size_t> left_counts(ds.n_classes);

      for (std::size_t ci = 0; ci < mtry; ++ci) {
        const std::size_t f = feat_pool[ci];
        for (std::size_t s = 0; s < total; ++s)
          column[s] = {ds.value(item.samples[s], f), ds.class_index[item.samples[s]]};
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::fill(left_counts.begin(), left_counts.end(), 0);
        for (std::size_t s = 0; s + 1 < total; ++s) {
          ++left_counts[column[s].second];
          if (column[s].first == column[s + 1].first) continue;  // never split ties
          const std::size_t nl = s + 1, nr = total - nl;
          if (nl < config.min_leaf || nr < config.min_leaf) continue;
          double left_sq = 0.0, right_sq = 0.0;
          for (std::size_t c = 0; c < ds.n_classes; ++c) {
            const double pl = static_cast<double>(left_counts[c]) / static_cast<double>(nl);
            const double pr = static_cast<double>(counts[c] - left_counts[c]) /
                              static_cast<double>(nr);
            left_sq += pl * pl;
            right_sq += pr * pr;
          }
          const double weighted = (static_cast<double>(nl) * (1.0 - left_sq) +
                                   static_cast<double>(nr) * (1.0 - right_sq)) /
                                  static_cast<double>(total);
          const double gain = parent - weighted;
          if (gain <= 0.0) continue;
          // ascending threshold scan keeps the lowest threshold on equal gain
          const bool better =
              gain > best_gain ||
              (gain == best_gain && best_feature >= 0 &&
               static_cast<std::int32_t>(f) < best_feature);
          if (best_feature < 0 ? gain > 0.0 : better) {
            best_feature = static_cast<std::int32_t>(f);
            best_threshold = column[s].first;
            best_gain = gain;
          }
        }
      }
    }

    if (best_feature < 0) {
      TreeNode& leaf = tree.nodes[static_cast<std::size_t>(item.node)];
      leaf.feature = -1;
      leaf.votes.assign(ds.n_classes, 0);
      for (std::size_t c = 0; c < ds.n_classes; ++c)
        leaf.votes[c] = static_cast<std::uint32_t>(counts[c]);
      continue;
    }

    std::vector<std::uint32_t> left, right;
    for (std::uint32_t s : item.samples) {
      if (ds.value(s, static_cast<std::size_t>(best_feature)) <= best_threshold)
        left.push_back(s);
      else
        right.push_back(s);
    }

    const auto left_idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    const auto right_idx = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[static_cast<std::size_t>(item.node)];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = left_idx;
    node.right = right_idx;
    // left child on top of the stack: preorder generator consumption
    stack.push_back({std::move(right), right_idx, item.depth + 1});
    stack.push_back({std::move(left), left_idx, item.depth + 1});
  }
  return tree;
}

const TreeNode& descend(const Tree& tree, const double* values) {
  const TreeNode* node = &tree.nodes[0];
  while (node->feature >= 0) {
    const double v = values[node->feature];
    node = &tree.nodes[static_cast<std::size_t>(v <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

std::size_t argmax_lowest(const std::vector<std::uint32_t>& votes) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < votes.size(); ++c)
    if (votes[c] > votes[best]) best = c;
  return best;
}

}  // namespace

std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> split_train_test(
    std::size_t n, double fraction, std::uint64_t seed) {
  if (n < 2) throw InvalidParameter("split_train_test: need at least 2 objects");
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw InvalidParameter("split_train_test: fraction must be in (0, 1)");
  const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  if (n_train == 0 || n_train >= n)
    throw InvalidParameter("split_train_test: degenerate split sizes");

  std::vector<std::uint32_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + rng.uniform_index(n - i);
    std::swap(idx[i], idx[j]);
  }
  std::vector<std::uint32_t> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::uint32_t> test(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

ForestModel train_forest(const std::vector<double>& data, std::size_t n_samples,
                         std::size_t n_features, const std::vector<std::uint32_t>& class_ids,
                         const std::string& layout, const TrainConfig& config) {
  if (n_features == 0) throw InvalidParameter("train_forest: no features");
  if (data.size() != n_samples * n_features)
    throw InvalidParameter("train_forest: data size does not match n_samples x n_features");
  if (class_ids.size() != n_samples)
    throw InvalidParameter("train_forest: class id count does not match n_samples");
  if (config.n_trees == 0) throw InvalidParameter("train_forest: n_trees must be >= 1");
  if (config.min_leaf == 0) throw InvalidParameter("train_forest: min_leaf must be >= 1");
  if (!(config.split_fraction > 0.0) || !(config.split_fraction < 1.0))
    throw InvalidParameter("train_forest: split_fraction must be in (0, 1)");
  if (config.mtry > n_features)
    throw InvalidParameter("train_forest: mtry exceeds feature count");
  for (double v : data)
    if (!std::isfinite(v)) throw InvalidParameter("train_forest: non-finite feature value");

  ForestModel model;
  model.layout = layout;
  model.classes = class_ids;
  std::sort(model.classes.begin(), model.classes.end());
  model.classes.erase(std::unique(model.classes.begin(), model.classes.end()),
                      model.classes.end());
  if (model.classes.size() < 2)
    throw InvalidInput("train_forest: training set contains a single class");
  model.n_features = n_features;
  model.seed = config.seed;

  std::vector<std::uint32_t> class_index(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    const auto it = std::lower_bound(model.classes.begin(), model.classes.end(), class_ids[s]);
    class_index[s] = static_cast<std::uint32_t>(it - model.classes.begin());
  }
  const Dataset ds{data, n_features, class_index, model.classes.size()};

  std::size_t mtry = config.mtry;
  if (mtry == 0)
    mtry = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n_features)))));

  std::vector<std::vector<std::uint32_t>> oob_votes(n_samples,
                                                    std::vector<std::uint32_t>(ds.n_classes, 0));
  std::vector<std::uint32_t> in_bag_count(n_samples);
  model.trees.reserve(config.n_trees);

  for (std::size_t t = 0; t < config.n_trees; ++t) {
    Rng rng(derive_seed(config.seed, t));
    std::fill(in_bag_count.begin(), in_bag_count.end(), 0);
    std::vector<std::uint32_t> bag(n_samples);
    for (std::size_t s = 0; s < n_samples; ++s) {
      const auto pick = static_cast<std::uint32_t>(rng.uniform_index(n_samples));
      bag[s] = pick;
      ++in_bag_count[pick];
    }
    model.trees.push_back(build_tree(ds, bag, config, mtry, rng));

    const Tree& tree = model.trees.back();
    for (std::size_t s = 0; s < n_samples; ++s) {
      if (in_bag_count[s] != 0) continue;
      const TreeNode& leaf = descend(tree, data.data() + s * n_features);
      ++oob_votes[s][argmax_lowest(leaf.votes)];
    }
  }

  std::size_t voted = 0, correct = 0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    std::uint32_t total = 0;
    for (std::uint32_t v : oob_votes[s]) total += v;
    if (total == 0) continue;  // never out of bag
    ++voted;
    if (argmax_lowest(oob_votes[s]) == class_index[s]) ++correct;
  }
  model.oob_score = voted == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(voted);
  return model;
}

Prediction predict(const ForestModel& model, const double* values, std::size_t count) {
  if (count != model.n_features)
    throw ModelError("predict: vector length " + std::to_string(count) +
                     " does not match model features " + std::to_string(model.n_features));
  std::vector<std::uint32_t> votes(model.classes.size(), 0);
  for (const Tree& tree : model.trees) ++votes[argmax_lowest(descend(tree, values).votes)];

  Prediction p;
  const std::size_t best = argmax_lowest(votes);
  p.class_id = model.classes[best];
  p.fractions.resize(model.classes.size());
  for (std::size_t c = 0; c < votes.size(); ++c)
    p.fractions[c] = static_cast<double>(votes[c]) / static_cast<double>(model.trees.size());
  return p;
}

Prediction predict(const ForestModel& model, const std::vector<double>& values) {
  return predict(model, values.data(), values.size());
}

void save_model(const ForestModel& model, std::ostream& out) {
  out.write(kMagic, 4);
  detail::write_le<std::uint32_t>(out, kVersion);
  detail::write_string(out, model.layout);
  detail::write_le<std::uint64_t>(out, model.n_features);
  detail::write_le<std::uint64_t>(out, model.seed);
  detail::write_le<double>(out, model.oob_score);
  detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.classes.size()));
  for (std::uint32_t c : model.classes) detail::write_le<std::uint32_t>(out, c);
  detail::write_le<std::uint64_t>(out, model.trees.size());
  for (const Tree& tree : model.trees) {
    detail::write_le<std::uint64_t>(out, tree.nodes.size());
    for (const TreeNode& node : tree.nodes) {
      detail::write_le<std::int32_t>(out, node.feature);
      detail::write_le<double>(out, node.threshold);
      detail::write_le<std::int32_t>(out, node.left);
      detail::write_le<std::int32_t>(out, node.right);
      if (node.feature < 0)
        for (std::uint32_t v : node.votes) detail::write_le<std::uint32_t>(out, v);
    }
  }
  if (!out) throw ModelError("save_model: output stream failure");
}

ForestModel load_model(std::istream& in) {
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
    throw ModelError("load_model: bad magic");
  std::uint32_t version = 0;
  if (!detail::read_le(in, version)) throw ModelError("load_model: truncated stream");
  if (version != kVersion)
    throw ModelError("load_model: unsupported version " + std::to_string(version));

  ForestModel model;
  std::uint64_t n_features = 0, n_trees = 0;
  std::uint32_t n_classes = 0;
  if (!detail::read_string(in, model.layout) || !detail::read_le(in, n_features) ||
      !detail::read_le(in, model.seed) || !detail::read_le(in, model.oob_score) ||
      !detail::read_le(in, n_classes))
    throw ModelError("load_model: truncated stream");
  if (n_classes == 0) throw ModelError("load_model: no classes");
  model.n_features = n_features;
  model.classes.resize(n_classes);
  for (std::uint32_t& c : model.classes)
    if (!detail::read_le(in, c)) throw ModelError("load_model: truncated stream");
  if (!detail::read_le(in, n_trees)) throw ModelError("load_model: truncated stream");

  model.trees.resize(n_trees);
  for (Tree& tree : model.trees) {
    std::uint64_t n_nodes = 0;
    if (!detail::read_le(in, n_nodes) || n_nodes == 0)
      throw ModelError("load_model: truncated stream");
    tree.nodes.resize(n_nodes);
    for (TreeNode& node : tree.nodes) {
      if (!detail::read_le(in, node.feature) || !detail::read_le(in, node.threshold) ||
          !detail::read_le(in, node.left) || !detail::read_le(in, node.right))
        throw ModelError("load_model: truncated stream");
      if (node.feature >= 0) {
        if (static_cast<std::uint64_t>(node.feature) >= n_features ||
            node.left < 0 || node.right < 0 ||
            static_cast<std::uint64_t>(node.left) >= n_nodes ||
            static_cast<std::uint64_t>(node.right) >= n_nodes ||
            !std::isfinite(node.threshold))
          throw ModelError("load_model: malformed tree node");
      } else {
        node.votes.resize(n_classes);
        std::uint64_t total = 0;
        for (std::uint32_t& v : node.votes) {
          if (!detail::read_le(in, v)) throw ModelError("load_model: truncated stream");
          total += v;
        }
        if (total == 0) throw ModelError("load_model: leaf without votes");
      }
    }
  }
  return model;
}

void save_model_file(const ForestModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  save_model(model, out);
}

ForestModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return load_model(in);
}

}  // namespace mls
