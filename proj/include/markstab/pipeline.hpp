#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "markstab/embed.hpp"
#include "markstab/gbm.hpp"
#include "markstab/preprocess.hpp"
#include "markstab/scalescan.hpp"

namespace markstab {

inline constexpr std::array<const char*, 8> kStepLabels = {
    "preprocess",       "constructor", "scan",     "robust_selection",
    "embedding",        "features",    "predict",  "select_partition"};

struct StepTimings {
  std::array<double, 8> seconds{};
  double total = 0.0;
};

struct DetectResult {
  Partition partition;
  double chosen_scale_log10 = 0.0;
  double predicted_t_star_log10 = 0.0;
  std::vector<double> robust_scales_log10;
  PreprocessReport preprocess_report;
  StepTimings timings;
};

namespace detail {

template <typename F>
auto timed_step(int step, double& slot, F&& fn) -> decltype(fn()) {
  auto start = std::chrono::steady_clock::now();
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      slot = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
                 .count();
    } else {
      auto out = fn();
      slot = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                           start)
                 .count();
      return out;
    }
  } catch (const PipelineStepError&) {
    throw;
  } catch (const std::exception& e) {
    throw PipelineStepError(step, kStepLabels[step - 1], e.what());
  }
}

}  // namespace detail

// The eight detection steps: connect the graph, build the diffusion
// constructor, scan scales, screen robust partitions (branch A), embed and
// featurize the graph and predict t* (branch B), then return the robust
// partition nearest the prediction. The branches share no state; with
// jobs > 1 branch B runs on its own thread.
inline DetectResult detect(const Graph& g, const BoostedModel& model,
                           const EmbeddingModel& embedding,
                           const ScanConfig& scan_cfg, std::uint64_t seed,
                           int jobs = 1) {
  if (!model.trained) throw PipelineStepError(7, kStepLabels[6], "untrained model");
  if (!embedding.trained)
    throw PipelineStepError(5, kStepLabels[4], "untrained embedding");

  auto total_start = std::chrono::steady_clock::now();
  DetectResult result;
  auto& sec = result.timings.seconds;

  Graph work = detail::timed_step(1, sec[0], [&] {
    auto [connected, report] = connect_components(g);
    result.preprocess_report = report;
    return connected;
  });

  ScaleScanResult scan_result;
  double predicted = 0.0;

  auto branch_a = [&] {
    SpectralBasis basis;
    bool need_basis =
        scan_cfg.constructor == ConstructorKind::kContinuousNormalized;
    detail::timed_step(2, sec[1], [&] {
      if (need_basis) basis = spectral_basis(work);
    });
    scan_result = detail::timed_step(3, sec[2], [&] {
      return scan(work, scan_cfg, seed, jobs, need_basis ? &basis : nullptr);
    });
    detail::timed_step(4, sec[3], [&] {
      scan_result.robust_indices = select_robust(scan_result, scan_cfg);
    });
  };

  auto branch_b = [&] {
    auto emb = detail::timed_step(5, sec[4], [&] {
      auto doc = wl_document(work, embedding.config.wl_depth);
      return infer_embedding(embedding, doc,
                             mix_seed(seed, (1ull << 32) + 1));
    });
    auto fv = detail::timed_step(6, sec[5], [&] { return featurize(work, emb); });
    predicted = detail::timed_step(7, sec[6], [&] { return predict(model, fv); });
  };

  if (jobs > 1) {
    std::exception_ptr branch_error;
    std::thread worker([&] {
      try {
        branch_b();
      } catch (...) {
        branch_error = std::current_exception();
      }
    });
    try {
      branch_a();
    } catch (...) {
      worker.join();
      throw;
    }
    worker.join();
    if (branch_error) std::rethrow_exception(branch_error);
  } else {
    branch_a();
    branch_b();
  }

  detail::timed_step(8, sec[7], [&] {
    int idx = pick_nearest_index(scan_result, predicted);
    result.partition = scan_result.partitions[idx];
    result.chosen_scale_log10 = scan_result.log10_scale(idx);
  });

  result.predicted_t_star_log10 = predicted;
  for (int idx : scan_result.robust_indices)
    result.robust_scales_log10.push_back(scan_result.log10_scale(idx));
  result.timings.total = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - total_start)
                             .count();
  return result;
}

inline StepTimings measure_runtime(const Graph& g, const BoostedModel& model,
                                   const EmbeddingModel& embedding,
                                   const ScanConfig& scan_cfg,
                                   std::uint64_t seed, int jobs = 1) {
  return detect(g, model, embedding, scan_cfg, seed, jobs).timings;
}

inline nlohmann::json timings_to_json(const StepTimings& t) {
  nlohmann::json steps;
  for (int i = 0; i < 8; ++i)
    steps[std::to_string(i + 1) + "_" + kStepLabels[i]] = t.seconds[i];
  return {{"steps", steps}, {"total", t.total}};
}

inline nlohmann::json detect_result_to_json(const DetectResult& r) {
  nlohmann::json j;
  j["n"] = r.partition.n();
  j["labels"] = r.partition.labels;
  j["n_communities"] = r.partition.c;
  j["chosen_scale_log10"] = r.chosen_scale_log10;
  j["predicted_t_star_log10"] = r.predicted_t_star_log10;
  j["robust_scales_log10"] = r.robust_scales_log10;
  nlohmann::json added = nlohmann::json::array();
  for (auto [u, v] : r.preprocess_report.added_edges)
    added.push_back({u, v});
  j["preprocess"] = {
      {"components_before", r.preprocess_report.components_before},
      {"added_edges", added}};
  j["timings"] = timings_to_json(r.timings);
  return j;
}

}  // namespace markstab
