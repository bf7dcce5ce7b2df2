#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "markstab/benchgen.hpp"
#include "markstab/embed.hpp"
#include "markstab/preprocess.hpp"
#include "markstab/scalescan.hpp"
#include "markstab/simeval.hpp"

namespace markstab {

struct LabeledRow {
  int graph_id = -1;
  FeatureVector features;
  double t_star_log10 = 0.0;
  double best_ami = 0.0;
};

// Scan the (preprocessed) instance, compare every robust partition to the
// planted one, and take the scale of the AMI argmax as the regression
// target. Ties within 1e-12 go to the smaller scale.
inline LabeledRow label_instance(const BenchInstance& inst,
                                 const std::vector<double>& emb,
                                 const ScanConfig& scan_cfg,
                                 std::uint64_t scan_seed, int jobs = 1) {
  auto [g, report] = connect_components(inst.graph);
  auto scan_result = scan(g, scan_cfg, scan_seed, jobs);

  int best_idx = -1;
  double best_ami = 0.0;
  for (int idx : scan_result.robust_indices) {
    double a;
    try {
      a = ami_symmetric(scan_result.partitions[idx], inst.planted);
    } catch (const DegenerateVarianceError&) {
      a = 0.0;  // both partitions trivial but unequal: no usable signal
    }
    if (best_idx < 0 || a > best_ami + 1e-12) {
      best_idx = idx;
      best_ami = a;
    }
  }

  LabeledRow row;
  row.features = featurize(g, emb);
  row.t_star_log10 = scan_result.log10_scale(best_idx);
  row.best_ami = best_ami;
  return row;
}

struct DatasetBuildResult {
  std::vector<LabeledRow> rows;
  int skipped = 0;
};

// One labeled row per corpus instance, in corpus order; the embedding model
// must have been trained on this corpus (graph vector i belongs to
// instance i). Instances whose scan fails are logged and skipped.
inline DatasetBuildResult build_dataset(
    const std::vector<BenchInstance>& instances, const EmbeddingModel& model,
    const ScanConfig& scan_cfg, std::uint64_t master_seed,
    const std::string& out_csv, int jobs = 1) {
  if (instances.empty())
    throw DimensionError("build_dataset needs a nonempty corpus");
  if (model.graph_vectors.size() != instances.size())
    throw DimensionError(
        "embedding model has " + std::to_string(model.graph_vectors.size()) +
        " graph vectors for " + std::to_string(instances.size()) +
        " instances");

  std::vector<std::optional<LabeledRow>> slots(instances.size());
  parallel_for(instances.size(), jobs, [&](std::size_t i) {
    try {
      auto row = label_instance(instances[i], model.graph_vectors[i],
                                scan_cfg, mix_seed(master_seed, i));
      row.graph_id = static_cast<int>(i);
      slots[i] = std::move(row);
    } catch (const std::exception& e) {
      std::cerr << "labeler: skipping instance " << i << ": " << e.what()
                << "\n";
    }
  });

  DatasetBuildResult result;
  std::vector<FeatureVector> features;
  std::vector<double> targets;
  for (auto& slot : slots) {
    if (!slot) {
      ++result.skipped;
      continue;
    }
    features.push_back(slot->features);
    targets.push_back(slot->t_star_log10);
    result.rows.push_back(std::move(*slot));
  }
  if (result.rows.empty())
    throw DimensionError("build_dataset: every instance failed to label");
  write_feature_csv(out_csv, features, &targets);
  return result;
}

}  // namespace markstab
