#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "markstab/errors.hpp"

namespace markstab {

struct ScoreTable {
  std::vector<std::string> algorithms;
  std::vector<std::string> instances;
  std::vector<std::vector<double>> scores;  // N instances x k algorithms

  void validate() const {
    if (algorithms.size() < 2)
      throw DimensionError("score table needs >= 2 algorithms");
    if (scores.size() < 2)
      throw DimensionError("score table needs >= 2 instances");
    if (instances.size() != scores.size())
      throw DimensionError("instance id / row count mismatch");
    for (const auto& row : scores)
      if (row.size() != algorithms.size())
        throw DimensionError("ragged score table");
  }
};

namespace detail {

// Ranks within one instance row: rank 1 is the best (largest) score, tied
// scores share the average of the ranks they span.
inline std::vector<double> rank_row(const std::vector<double>& row) {
  const int k = static_cast<int>(row.size());
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return row[a] > row[b]; });
  std::vector<double> ranks(k);
  int i = 0;
  while (i < k) {
    int j = i;
    while (j + 1 < k && row[order[j + 1]] == row[order[i]]) ++j;
    double avg = 0.5 * (i + j) + 1.0;  // positions are 0-based
    for (int t = i; t <= j; ++t) ranks[order[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

// Regularized lower incomplete gamma P(a, x): series expansion below
// a + 1, Lentz continued fraction above.
inline double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-16) break;
    }
    return sum * std::exp(log_prefix);
  }
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  double q = std::exp(log_prefix) * h;
  return 1.0 - q;
}

inline double chi2_sf(double x, int df) {
  return 1.0 - gamma_p(0.5 * df, 0.5 * x);
}

inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace detail

inline std::vector<double> mean_ranks(const ScoreTable& table) {
  table.validate();
  const int k = static_cast<int>(table.algorithms.size());
  std::vector<double> mean(k, 0.0);
  for (const auto& row : table.scores) {
    auto ranks = detail::rank_row(row);
    for (int j = 0; j < k; ++j) mean[j] += ranks[j];
  }
  for (double& m : mean) m /= static_cast<double>(table.scores.size());
  return mean;
}

struct FriedmanResult {
  double chi2 = 0.0;
  double p_value = 1.0;
  std::vector<double> mean_ranks;
};

inline FriedmanResult friedman(const ScoreTable& table) {
  table.validate();
  const int k = static_cast<int>(table.algorithms.size());
  const int n = static_cast<int>(table.scores.size());

  FriedmanResult result;
  result.mean_ranks = mean_ranks(table);
  double sum_sq = 0.0;
  for (double r : result.mean_ranks) sum_sq += r * r;
  result.chi2 = 12.0 * n / (k * (k + 1.0)) * sum_sq - 3.0 * n * (k + 1.0);
  if (result.chi2 < 0.0) result.chi2 = 0.0;  // guard rounding at the null
  result.p_value = detail::chi2_sf(result.chi2, k - 1);
  return result;
}

struct LiComparison {
  std::string algorithm;
  double z = 0.0;
  double p_value = 1.0;
  bool rejected = false;
};

struct LiResult {
  std::string control;
  double p_max = 1.0;
  double step2_threshold = 0.0;
  std::vector<LiComparison> comparisons;
};

// Li's two-step procedure against a control: one-sided z tests on mean-rank
// differences (alternative: control ranks better), then reject all when the
// largest p-value clears alpha, otherwise apply the adjusted threshold
// alpha(1-p_max)/(1-alpha).
inline LiResult li_posthoc(const ScoreTable& table,
                           const std::string& control, double alpha = 0.05) {
  table.validate();
  const int k = static_cast<int>(table.algorithms.size());
  const int n = static_cast<int>(table.scores.size());
  auto it = std::find(table.algorithms.begin(), table.algorithms.end(),
                      control);
  if (it == table.algorithms.end())
    throw DimensionError("unknown control algorithm: " + control);
  const int control_idx = static_cast<int>(it - table.algorithms.begin());

  auto means = mean_ranks(table);
  const double scale = std::sqrt(k * (k + 1.0) / (6.0 * n));

  LiResult result;
  result.control = control;
  for (int j = 0; j < k; ++j) {
    if (j == control_idx) continue;
    LiComparison cmp;
    cmp.algorithm = table.algorithms[j];
    cmp.z = (means[j] - means[control_idx]) / scale;
    cmp.p_value = detail::normal_sf(cmp.z);
    result.comparisons.push_back(cmp);
  }

  result.p_max = 0.0;
  for (const auto& cmp : result.comparisons)
    result.p_max = std::max(result.p_max, cmp.p_value);
  if (result.p_max <= alpha) {
    result.step2_threshold = alpha;
    for (auto& cmp : result.comparisons) cmp.rejected = true;
  } else {
    result.step2_threshold = alpha * (1.0 - result.p_max) / (1.0 - alpha);
    for (auto& cmp : result.comparisons)
      cmp.rejected = cmp.p_value <= result.step2_threshold;
  }
  return result;
}

// CSV with a header of algorithm names and one score row per instance.
inline ScoreTable load_score_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open score table: " + path);
  ScoreTable table;
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("score table is empty: " + path);
  {
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) table.algorithms.push_back(cell);
  }
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        row.push_back(std::stod(cell, &pos));
        if (pos != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ParseError("score table line " + std::to_string(lineno) +
                         ": bad number '" + cell + "'");
      }
    }
    if (row.size() != table.algorithms.size())
      throw ParseError("score table line " + std::to_string(lineno) +
                       ": expected " + std::to_string(table.algorithms.size()) +
                       " columns");
    table.scores.push_back(std::move(row));
    table.instances.push_back(std::to_string(lineno - 1));
  }
  table.validate();
  return table;
}

}  // namespace markstab
