#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "markstab/louvain.hpp"
#include "markstab/parallel.hpp"
#include "markstab/simeval.hpp"

namespace markstab {

struct ScanConfig {
  double log10_t_min = -2.0;
  double log10_t_max = 0.5;
  int n_scales = 50;
  int n_tries = 300;
  int window = 2;
  double reproducibility_threshold = 0.1;
  ConstructorKind constructor = ConstructorKind::kContinuousNormalized;

  void validate() const {
    if (!(log10_t_min < log10_t_max))
      throw DimensionError("scan needs log10_t_min < log10_t_max");
    if (n_scales < 2) throw DimensionError("scan needs n_scales >= 2");
    if (n_tries < 1) throw DimensionError("scan needs n_tries >= 1");
    if (window < 1) throw DimensionError("scan needs window >= 1");
  }
};

struct ScaleScanResult {
  std::vector<double> scales;            // t values, log-uniform ascending
  std::vector<Partition> partitions;     // best-of-ensemble per scale
  std::vector<double> q_values;
  std::vector<double> nvi_repro;         // mean pairwise NVI within ensemble
  std::vector<std::vector<double>> nvi_cross;  // between representatives
  std::vector<int> robust_indices;

  double log10_scale(int i) const { return std::log10(scales[i]); }
};

namespace detail {

// Mean pairwise NVI over an ensemble. Runs that land on the same partition
// are grouped first; identical pairs contribute zero, so only distinct
// group pairs need an NVI evaluation.
inline double ensemble_mean_nvi(const std::vector<LouvainRun>& runs) {
  const std::size_t total = runs.size();
  if (total < 2) return 0.0;
  std::map<std::vector<int>, long long> groups;
  for (const auto& r : runs) ++groups[r.partition.labels];
  std::vector<const std::vector<int>*> reps;
  std::vector<long long> mult;
  for (auto& [labels, count] : groups) {
    reps.push_back(&labels);
    mult.push_back(count);
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < reps.size(); ++a)
    for (std::size_t b = a + 1; b < reps.size(); ++b) {
      double d = nvi(Partition::from_labels(*reps[a]),
                     Partition::from_labels(*reps[b]));
      sum += d * static_cast<double>(mult[a]) * static_cast<double>(mult[b]);
    }
  double n_pairs = 0.5 * static_cast<double>(total) * (total - 1);
  return sum / n_pairs;
}

}  // namespace detail

// Persistence curve: mean cross-scale NVI of scale i against the scales
// within `window` grid steps of it.
inline std::vector<double> persistence_curve(
    const std::vector<std::vector<double>>& nvi_cross, int window) {
  const int k = static_cast<int>(nvi_cross.size());
  std::vector<double> rho(k, 0.0);
  for (int i = 0; i < k; ++i) {
    double sum = 0.0;
    int count = 0;
    for (int j = std::max(0, i - window); j <= std::min(k - 1, i + window);
         ++j) {
      if (j == i) continue;
      sum += nvi_cross[i][j];
      ++count;
    }
    rho[i] = count > 0 ? sum / count : 0.0;
  }
  return rho;
}

// Robust-scale selection: local minima of the persistence curve (plateaus
// count once, at their leftmost index), filtered by ensemble
// reproducibility, then deduplicated when consecutive candidates carry the
// same partition. Never returns an empty set: if the filters reject every
// candidate, the global minimizer of rho + nvi_repro stands in.
inline std::vector<int> select_robust(const ScaleScanResult& result,
                                      const ScanConfig& cfg) {
  const int k = static_cast<int>(result.scales.size());
  auto rho = persistence_curve(result.nvi_cross, cfg.window);

  std::vector<int> candidates;
  int run_start = 0;
  for (int i = 0; i <= k; ++i) {
    if (i < k && rho[i] == rho[run_start]) continue;
    int run_end = i - 1;  // run of equal rho values [run_start, run_end]
    bool left_ok = run_start == 0 || rho[run_start - 1] > rho[run_start];
    bool right_ok = run_end == k - 1 || rho[run_end + 1] > rho[run_end];
    if (left_ok && right_ok) candidates.push_back(run_start);
    run_start = i;
  }

  std::vector<int> kept;
  for (int i : candidates)
    if (result.nvi_repro[i] <= cfg.reproducibility_threshold)
      kept.push_back(i);

  // consecutive candidates with identical partitions collapse to the
  // lower-persistence one
  std::vector<int> dedup;
  for (int idx : kept) {
    if (!dedup.empty() &&
        result.partitions[dedup.back()] == result.partitions[idx]) {
      if (rho[idx] < rho[dedup.back()]) dedup.back() = idx;
    } else {
      dedup.push_back(idx);
    }
  }

  if (dedup.empty()) {
    int best = 0;
    for (int i = 1; i < k; ++i)
      if (rho[i] + result.nvi_repro[i] < rho[best] + result.nvi_repro[best])
        best = i;
    dedup.push_back(best);
  }
  return dedup;
}

// Steps (3)-(4): sweep log-spaced scales, optimize an ensemble per scale,
// keep the best-quality run as the scale's representative, and screen for
// robust scales. Per-scale ensemble seeds derive from (seed, scale index)
// so the result is identical for any worker count.
inline ScaleScanResult scan(const Graph& g, const ScanConfig& cfg,
                            std::uint64_t seed, int jobs = 1,
                            const SpectralBasis* precomputed = nullptr) {
  cfg.validate();
  if (!is_connected(g))
    throw DisconnectedError("scan requires a connected graph (preprocess first)");

  ScaleScanResult result;
  const int k = cfg.n_scales;
  result.scales.resize(k);
  for (int i = 0; i < k; ++i) {
    double log10_t = cfg.log10_t_min + (cfg.log10_t_max - cfg.log10_t_min) *
                                           i / (k - 1.0);
    result.scales[i] = std::pow(10.0, log10_t);
  }
  result.partitions.resize(k);
  result.q_values.resize(k);
  result.nvi_repro.resize(k);

  SpectralBasis local_basis;
  bool need_basis = cfg.constructor == ConstructorKind::kContinuousNormalized;
  const SpectralBasis& basis =
      precomputed ? *precomputed
                  : (need_basis ? (local_basis = spectral_basis(g))
                                : local_basis);

  parallel_for(static_cast<std::size_t>(k), jobs, [&](std::size_t i) {
    auto q = build_quality_matrix(cfg.constructor, g, result.scales[i],
                                  need_basis ? &basis : nullptr);
    std::uint64_t scale_seed = mix_seed(seed, i);
    auto runs = louvain_ensemble(q, cfg.n_tries, scale_seed);
    int best = 0;
    for (int r = 1; r < cfg.n_tries; ++r)
      if (runs[r].q_value > runs[best].q_value) best = r;
    result.partitions[i] = runs[best].partition;
    result.q_values[i] = runs[best].q_value;
    result.nvi_repro[i] = detail::ensemble_mean_nvi(runs);
  });

  result.nvi_cross.assign(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j) {
      double d = result.partitions[i] == result.partitions[j]
                     ? 0.0
                     : nvi(result.partitions[i], result.partitions[j]);
      result.nvi_cross[i][j] = d;
      result.nvi_cross[j][i] = d;
    }

  result.robust_indices = select_robust(result, cfg);
  return result;
}

// Step (8) selection: the robust partition whose scale is nearest the
// predicted one in log space; near-ties (1e-9) go to the smaller scale.
inline int pick_nearest_index(const ScaleScanResult& result,
                              double t_star_log10) {
  if (result.robust_indices.empty())
    throw DimensionError("no robust scales to pick from");
  int best = result.robust_indices.front();
  double best_dist = std::abs(result.log10_scale(best) - t_star_log10);
  for (int idx : result.robust_indices) {
    double dist = std::abs(result.log10_scale(idx) - t_star_log10);
    if (dist < best_dist - 1e-9) {
      best = idx;
      best_dist = dist;
    }
  }
  return best;
}

inline const Partition& pick_nearest(const ScaleScanResult& result,
                                     double t_star_log10) {
  return result.partitions[pick_nearest_index(result, t_star_log10)];
}

inline nlohmann::json scan_result_to_json(const ScaleScanResult& r) {
  nlohmann::json j;
  j["scales"] = r.scales;
  std::vector<double> log10_scales(r.scales.size());
  for (std::size_t i = 0; i < r.scales.size(); ++i)
    log10_scales[i] = r.log10_scale(static_cast<int>(i));
  j["log10_scales"] = log10_scales;
  j["q_values"] = r.q_values;
  j["nvi_repro"] = r.nvi_repro;
  j["nvi_cross"] = r.nvi_cross;
  j["robust_indices"] = r.robust_indices;
  j["partitions"] = nlohmann::json::array();
  for (const auto& p : r.partitions)
    j["partitions"].push_back(p.labels);
  return j;
}

inline ScaleScanResult scan_result_from_json(const nlohmann::json& j) {
  ScaleScanResult r;
  r.scales = j.at("scales").get<std::vector<double>>();
  r.q_values = j.at("q_values").get<std::vector<double>>();
  r.nvi_repro = j.at("nvi_repro").get<std::vector<double>>();
  r.nvi_cross = j.at("nvi_cross").get<std::vector<std::vector<double>>>();
  r.robust_indices = j.at("robust_indices").get<std::vector<int>>();
  for (const auto& labels : j.at("partitions"))
    r.partitions.push_back(
        Partition::from_labels(labels.get<std::vector<int>>()));
  return r;
}

inline void save_scan_result(const ScaleScanResult& r,
                             const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write scan result: " + path);
  out << scan_result_to_json(r).dump(2) << "\n";
}

inline ScaleScanResult load_scan_result(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scan result: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad scan JSON in " + path + ": " + e.what());
  }
  return scan_result_from_json(j);
}

}  // namespace markstab
