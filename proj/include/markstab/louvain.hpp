#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "markstab/parallel.hpp"
#include "markstab/partition.hpp"
#include "markstab/rng.hpp"
#include "markstab/stability.hpp"

namespace markstab {

struct LouvainRun {
  std::uint64_t seed = 0;
  Partition partition;
  double q_value = 0.0;
  int passes = 0;
  std::vector<double> pass_q_values;  // objective after each pass
};

namespace detail {

// Objective value of the current level's labeling, straight from the level
// matrix.
inline double level_quality(const Eigen::MatrixXd& m,
                            const std::vector<int>& labels) {
  double q = 0.0;
  const int k = static_cast<int>(labels.size());
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (labels[i] == labels[j]) q += m(i, j);
  return q;
}

}  // namespace detail

// Generalized Louvain on a symmetric quality matrix whose null model is
// already subtracted: maximize sum of same-community entries. Local moves
// in seeded random order alternate with community aggregation until a pass
// changes nothing. Gains below 1e-12 are treated as noise and rejected;
// improving targets tie-break to the lowest community id.
inline LouvainRun louvain_maximize(const QualityMatrix& q,
                                   std::uint64_t seed) {
  constexpr double kMinGain = 1e-12;
  Rng rng(seed);
  const int n = static_cast<int>(q.B.rows());

  Eigen::MatrixXd m = q.B;          // current level matrix
  std::vector<int> flat(n);         // original node -> current super-node
  std::iota(flat.begin(), flat.end(), 0);

  LouvainRun run;
  run.seed = seed;

  for (;;) {
    const int k = static_cast<int>(m.rows());
    std::vector<int> labels(k);
    std::iota(labels.begin(), labels.end(), 0);
    std::vector<int> comm_size(k, 1);

    std::vector<double> s(k, 0.0);
    std::vector<int> stamp(k, -1);
    std::vector<int> touched;
    touched.reserve(k);
    int move_counter = 0;

    bool any_move = false;
    bool moved_in_sweep = true;
    std::vector<int> order(k);
    std::iota(order.begin(), order.end(), 0);
    while (moved_in_sweep) {
      moved_in_sweep = false;
      rng.shuffle(order);
      for (int i : order) {
        const int from = labels[i];
        touched.clear();
        ++move_counter;
        for (int j = 0; j < k; ++j) {
          if (j == i) continue;
          int c = labels[j];
          if (stamp[c] != move_counter) {
            stamp[c] = move_counter;
            s[c] = 0.0;
            touched.push_back(c);
          }
          s[c] += m(i, j);
        }
        std::sort(touched.begin(), touched.end());

        double stay = stamp[from] == move_counter ? s[from] : 0.0;
        int best_comm = from;
        double best_gain = kMinGain;  // moves must beat the noise floor
        for (int c : touched) {
          if (c == from) continue;
          double gain = 2.0 * (s[c] - stay);
          if (gain > best_gain) {  // strict: lowest id wins exact ties
            best_gain = gain;
            best_comm = c;
          }
        }
        // detaching into a fresh singleton pays when the current
        // neighborhood contribution is negative
        if (comm_size[from] > 1) {
          double gain = -2.0 * stay;
          if (gain > best_gain) {
            for (int c = 0; c < k; ++c)
              if (comm_size[c] == 0) {
                best_gain = gain;
                best_comm = c;
                break;
              }
          }
        }

        if (best_comm != from) {
#ifndef NDEBUG
          if (k <= 64) {
            auto before = detail::level_quality(m, labels);
            auto trial = labels;
            trial[i] = best_comm;
            auto after = detail::level_quality(m, trial);
            if (std::abs((after - before) - best_gain) > 1e-9)
              throw std::logic_error("louvain gain mismatch");
          }
#endif
          --comm_size[from];
          ++comm_size[best_comm];
          labels[i] = best_comm;
          any_move = true;
          moved_in_sweep = true;
        }
      }
    }

    // aggregate: canonicalize level labels, collapse to block sums
    Partition level = Partition::from_labels(labels);
    for (int v = 0; v < n; ++v) flat[v] = level.labels[flat[v]];
    ++run.passes;
    run.pass_q_values.push_back(detail::level_quality(m, labels));

    if (!any_move || level.c == k) break;
    Eigen::MatrixXd agg = Eigen::MatrixXd::Zero(level.c, level.c);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        agg(level.labels[i], level.labels[j]) += m(i, j);
    m = std::move(agg);
  }

  run.partition = Partition::from_labels(flat);
  run.q_value = eval_q_gen(q, run.partition);
  return run;
}

// n_tries independent runs seeded base_seed..base_seed+n_tries-1, returned
// in seed order regardless of how many worker threads execute them.
inline std::vector<LouvainRun> louvain_ensemble(const QualityMatrix& q,
                                                int n_tries,
                                                std::uint64_t base_seed,
                                                int jobs = 1) {
  if (n_tries < 1) throw DimensionError("ensemble needs n_tries >= 1");
  std::vector<LouvainRun> runs(n_tries);
  parallel_for(static_cast<std::size_t>(n_tries), jobs, [&](std::size_t i) {
    runs[i] = louvain_maximize(q, base_seed + i);
  });
  return runs;
}

}  // namespace markstab
