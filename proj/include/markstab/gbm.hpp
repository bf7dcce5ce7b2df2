#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "markstab/embed.hpp"
#include "markstab/errors.hpp"
#include "markstab/rng.hpp"

namespace markstab {

struct GbmConfig {
  int n_trees = 141;
  double learning_rate = 0.027;
  int max_depth = 6;
  double subsample = 0.790;
  int min_samples_leaf = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (n_trees < 0) throw DimensionError("n_trees must be >= 0");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
      throw DimensionError("learning_rate must be in (0, 1]");
    if (max_depth < 1) throw DimensionError("max_depth must be >= 1");
    if (!(subsample > 0.0 && subsample <= 1.0))
      throw DimensionError("subsample must be in (0, 1]");
    if (min_samples_leaf < 1)
      throw DimensionError("min_samples_leaf must be >= 1");
  }
};

// Axis-aligned regression tree stored as a node array; root at index 0,
// leaves marked by feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
};

using RegressionTree = std::vector<TreeNode>;

inline double tree_predict(const RegressionTree& tree,
                           const std::vector<double>& x) {
  int node = 0;
  while (tree[node].feature >= 0) {
    const auto& nd = tree[node];
    node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
  }
  return tree[node].value;
}

struct BoostedModel {
  double base_value = 0.0;
  std::vector<RegressionTree> trees;
  GbmConfig config;
  std::vector<std::string> feature_names;
  std::vector<double> train_mse_per_tree;  // after each boosting round
  bool trained = false;
};

namespace detail {

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exact greedy split search: candidates are midpoints of consecutive
// distinct sorted values per feature; score is the variance-reduction
// surrogate S_L^2/n_L + S_R^2/n_R. Strict improvement with ascending
// feature/threshold enumeration gives the lowest-feature, lowest-threshold
// tie-break.
inline SplitChoice best_split(const std::vector<std::vector<double>>& x,
                              const std::vector<double>& residual,
                              const std::vector<int>& rows, int min_leaf) {
  const int nrows = static_cast<int>(rows.size());
  const int p = static_cast<int>(x[0].size());
  double total = 0.0;
  for (int r : rows) total += residual[r];
  const double parent_score = total * total / nrows;

  SplitChoice choice;
  std::vector<int> order(rows);
  for (int f = 0; f < p; ++f) {
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return x[a][f] < x[b][f]; });
    double left_sum = 0.0;
    for (int i = 1; i < nrows; ++i) {
      left_sum += residual[order[i - 1]];
      double lo = x[order[i - 1]][f];
      double hi = x[order[i]][f];
      if (!(lo < hi)) continue;
      if (i < min_leaf || nrows - i < min_leaf) continue;
      double mid = 0.5 * (lo + hi);
      if (!(lo < mid && mid < hi)) continue;  // adjacent doubles
      double right_sum = total - left_sum;
      double score = left_sum * left_sum / i +
                     right_sum * right_sum / (nrows - i);
      double gain = score - parent_score;
      if (gain > choice.gain) {
        choice.found = true;
        choice.feature = f;
        choice.threshold = mid;
        choice.gain = gain;
      }
    }
  }
  return choice;
}

inline int build_node(RegressionTree& tree,
                      const std::vector<std::vector<double>>& x,
                      const std::vector<double>& residual,
                      const std::vector<int>& rows, int depth,
                      const GbmConfig& cfg) {
  double mean = 0.0;
  for (int r : rows) mean += residual[r];
  mean /= static_cast<double>(rows.size());

  SplitChoice split;
  if (depth < cfg.max_depth &&
      static_cast<int>(rows.size()) >= 2 * cfg.min_samples_leaf)
    split = best_split(x, residual, rows, cfg.min_samples_leaf);

  int index = static_cast<int>(tree.size());
  tree.emplace_back();
  if (!split.found) {
    tree[index].value = mean;
    return index;
  }

  std::vector<int> left_rows, right_rows;
  for (int r : rows)
    (x[r][split.feature] <= split.threshold ? left_rows : right_rows)
        .push_back(r);
  tree[index].feature = split.feature;
  tree[index].threshold = split.threshold;
  int l = build_node(tree, x, residual, left_rows, depth + 1, cfg);
  int r = build_node(tree, x, residual, right_rows, depth + 1, cfg);
  tree[index].left = l;
  tree[index].right = r;
  return index;
}

}  // namespace detail

inline BoostedModel fit(const std::vector<std::vector<double>>& features,
                        const std::vector<double>& targets,
                        const GbmConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(features.size());
  if (n < 2) throw DimensionError("fit needs at least 2 samples");
  if (targets.size() != features.size())
    throw DimensionError("feature/target row count mismatch");
  const std::size_t p = features[0].size();
  if (p == 0) throw DimensionError("fit needs at least one feature");
  for (const auto& row : features) {
    if (row.size() != p)
      throw DimensionError("ragged feature matrix");
    for (double v : row)
      if (!std::isfinite(v)) throw DimensionError("non-finite feature value");
  }
  for (double y : targets)
    if (!std::isfinite(y)) throw DimensionError("non-finite target value");

  BoostedModel model;
  model.config = cfg;
  if (p == FeatureVector::kCount) {
    for (const char* name : FeatureVector::names())
      model.feature_names.emplace_back(name);
  } else {
    for (std::size_t f = 0; f < p; ++f)
      model.feature_names.push_back("f" + std::to_string(f));
  }
  model.base_value =
      std::accumulate(targets.begin(), targets.end(), 0.0) / n;

  std::vector<double> prediction(n, model.base_value);
  std::vector<double> residual(n);
  Rng rng(mix_seed(cfg.seed, 0));
  const int sample_size = std::max(
      1, static_cast<int>(std::llround(cfg.subsample * n)));

  std::vector<int> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0);

  for (int t = 0; t < cfg.n_trees; ++t) {
    for (int i = 0; i < n; ++i) residual[i] = targets[i] - prediction[i];

    std::vector<int> rows;
    if (cfg.subsample >= 1.0) {
      rows = all_rows;
    } else {
      std::vector<int> pool(all_rows);
      for (int i = 0; i < sample_size; ++i) {
        int j = rng.next_int(i, n - 1);
        std::swap(pool[i], pool[j]);
      }
      rows.assign(pool.begin(), pool.begin() + sample_size);
      std::sort(rows.begin(), rows.end());
    }

    RegressionTree tree;
    detail::build_node(tree, features, residual, rows, 0, cfg);
    model.trees.push_back(tree);

    double mse = 0.0;
    for (int i = 0; i < n; ++i) {
      prediction[i] += cfg.learning_rate * tree_predict(tree, features[i]);
      double err = targets[i] - prediction[i];
      mse += err * err;
    }
    model.train_mse_per_tree.push_back(mse / n);
  }
  model.trained = true;
  return model;
}

inline double predict(const BoostedModel& model,
                      const std::vector<double>& x) {
  if (!model.trained) throw ModelError("predict requires a trained model");
  if (x.size() != model.feature_names.size())
    throw DimensionError("feature vector has " + std::to_string(x.size()) +
                         " entries; model expects " +
                         std::to_string(model.feature_names.size()));
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += tree_predict(tree, x);
  return model.base_value + model.config.learning_rate * sum;
}

inline double predict(const BoostedModel& model, const FeatureVector& fv) {
  auto vals = fv.values();
  return predict(model, std::vector<double>(vals.begin(), vals.end()));
}

struct EvalResult {
  double mae = 0.0;
  double mse = 0.0;
};

inline EvalResult evaluate(const BoostedModel& model,
                           const std::vector<std::vector<double>>& features,
                           const std::vector<double>& targets) {
  if (features.size() != targets.size() || features.empty())
    throw DimensionError("evaluate needs matching nonempty features/targets");
  EvalResult out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    double err = predict(model, features[i]) - targets[i];
    out.mae += std::abs(err);
    out.mse += err * err;
  }
  out.mae /= static_cast<double>(features.size());
  out.mse /= static_cast<double>(features.size());
  return out;
}

// ---- persistence ----

inline constexpr int kGbmFormatVersion = 1;

namespace detail {

// Serialized form keeps interior nodes ("splits") and leaves apart; child
// links >= 0 point into splits, negative links encode leaf index -(x)-1.
inline nlohmann::json tree_to_json(const RegressionTree& tree) {
  std::vector<int> split_id(tree.size(), -1), leaf_id(tree.size(), -1);
  int n_splits = 0, n_leaves = 0;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree[i].feature >= 0)
      split_id[i] = n_splits++;
    else
      leaf_id[i] = n_leaves++;
  }
  nlohmann::json splits = nlohmann::json::array();
  nlohmann::json leaves = nlohmann::json::array();
  for (std::size_t i = 0; i < tree.size(); ++i) {
    if (tree[i].feature >= 0) {
      auto encode = [&](int child) {
        return tree[child].feature >= 0 ? split_id[child]
                                        : -leaf_id[child] - 1;
      };
      splits.push_back({{"feature", tree[i].feature},
                        {"threshold", tree[i].threshold},
                        {"left", encode(tree[i].left)},
                        {"right", encode(tree[i].right)}});
    } else {
      leaves.push_back(tree[i].value);
    }
  }
  return {{"splits", splits}, {"leaves", leaves}};
}

inline RegressionTree tree_from_json(const nlohmann::json& j) {
  const auto& splits = j.at("splits");
  const auto& leaves = j.at("leaves");
  RegressionTree tree;
  std::vector<int> split_at(splits.size()), leaf_at(leaves.size());
  for (std::size_t i = 0; i < splits.size(); ++i) {
    split_at[i] = static_cast<int>(tree.size());
    TreeNode node;
    node.feature = splits[i].at("feature").get<int>();
    node.threshold = splits[i].at("threshold").get<double>();
    tree.push_back(node);
  }
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    leaf_at[i] = static_cast<int>(tree.size());
    TreeNode node;
    node.value = leaves[i].get<double>();
    tree.push_back(node);
  }
  auto decode = [&](int link) {
    return link >= 0 ? split_at[link] : leaf_at[-link - 1];
  };
  for (std::size_t i = 0; i < splits.size(); ++i) {
    tree[split_at[i]].left = decode(splits[i].at("left").get<int>());
    tree[split_at[i]].right = decode(splits[i].at("right").get<int>());
  }
  if (tree.empty()) throw ParseError("tree with no nodes");
  // root must be split 0 when present, else leaf 0 — both live at index 0
  return tree;
}

}  // namespace detail

inline void save_model(const BoostedModel& model, const std::string& path) {
  if (!model.trained) throw ModelError("cannot save an untrained model");
  nlohmann::json j;
  j["version"] = kGbmFormatVersion;
  j["base_value"] = model.base_value;
  j["learning_rate"] = model.config.learning_rate;
  j["n_trees"] = model.config.n_trees;
  j["max_depth"] = model.config.max_depth;
  j["subsample"] = model.config.subsample;
  j["min_samples_leaf"] = model.config.min_samples_leaf;
  j["seed"] = model.config.seed;
  j["feature_names"] = model.feature_names;
  j["trees"] = nlohmann::json::array();
  for (const auto& tree : model.trees)
    j["trees"].push_back(detail::tree_to_json(tree));
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write model: " + path);
  out << j.dump() << "\n";
}

inline BoostedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open model: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad model JSON in " + path + ": " + e.what());
  }
  int version = j.value("version", -1);
  if (version != kGbmFormatVersion)
    throw VersionError("model format " + std::to_string(version) +
                       " unsupported; this build reads " +
                       std::to_string(kGbmFormatVersion));
  BoostedModel model;
  try {
    model.base_value = j.at("base_value").get<double>();
    model.config.learning_rate = j.at("learning_rate").get<double>();
    model.config.n_trees = j.at("n_trees").get<int>();
    model.config.max_depth = j.at("max_depth").get<int>();
    model.config.subsample = j.at("subsample").get<double>();
    model.config.min_samples_leaf = j.at("min_samples_leaf").get<int>();
    model.config.seed = j.at("seed").get<std::uint64_t>();
    model.feature_names =
        j.at("feature_names").get<std::vector<std::string>>();
    for (const auto& tj : j.at("trees"))
      model.trees.push_back(detail::tree_from_json(tj));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad model JSON in " + path + ": " + e.what());
  }
  model.trained = true;
  return model;
}

}  // namespace markstab
