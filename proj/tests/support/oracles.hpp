#pragma once

// Independent reference implementations used to cross-check the library.
// Everything here deliberately takes a different algorithmic route than the
// code under test.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "markstab/graph.hpp"
#include "markstab/partition.hpp"
#include "markstab/rng.hpp"

namespace oracles {

// ---- dense matrix exponential: scaling and squaring + Taylor series ----

inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& m, int terms = 50) {
  double inf_norm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (inf_norm / std::pow(2.0, s) > 0.5) ++s;
  Eigen::MatrixXd x = m / std::pow(2.0, s);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Eigen::MatrixXd term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

// e^{-t L_rw} with L_rw = I - D^{-1} A, built densely.
inline Eigen::MatrixXd heat_kernel_taylor(const markstab::Graph& g,
                                          double t) {
  const int n = g.n();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    l(v, v) = 1.0;
    for (int u : g.neighbors(v)) l(v, u) -= 1.0 / g.degree(v);
  }
  return expm_taylor(-t * l);
}

// ---- shortest paths: Floyd-Warshall on the full matrix ----

inline std::vector<std::vector<double>> floyd_warshall(
    const markstab::Graph& g) {
  const int n = g.n();
  const double inf = 1e18;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, inf));
  for (int v = 0; v < n; ++v) d[v][v] = 0.0;
  for (auto [u, v] : g.edges()) d[u][v] = d[v][u] = 1.0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

inline double global_efficiency_oracle(const markstab::Graph& g) {
  auto d = floyd_warshall(g);
  const int n = g.n();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && d[i][j] < 1e17) sum += 1.0 / d[i][j];
  return sum / (static_cast<double>(n) * (n - 1));
}

// ---- clustering coefficient via explicit triangle enumeration ----

inline double avg_clustering_oracle(const markstab::Graph& g) {
  const int n = g.n();
  double total = 0.0;
  for (int v = 0; v < n; ++v) {
    int d = g.degree(v);
    if (d < 2) continue;
    int triangles = 0;
    for (int a : g.neighbors(v))
      for (int b : g.neighbors(v))
        if (a < b && g.has_edge(a, b)) ++triangles;
    total += 2.0 * triangles / (static_cast<double>(d) * (d - 1));
  }
  return total / n;
}

// ---- degree assortativity as a plain Pearson correlation ----

inline double pearson(const std::vector<double>& x,
                      const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double assortativity_oracle(const markstab::Graph& g) {
  std::vector<double> x, y;
  for (auto [u, v] : g.edges()) {
    x.push_back(g.degree(u));
    y.push_back(g.degree(v));
    x.push_back(g.degree(v));
    y.push_back(g.degree(u));
  }
  return pearson(x, y);
}

// ---- set-partition enumeration via restricted growth strings ----

namespace detail {
template <typename Fn>
inline void rgs_recurse(std::vector<int>& labels, int i, int max_used,
                        Fn& fn) {
  if (i == static_cast<int>(labels.size())) {
    fn(labels);
    return;
  }
  for (int v = 0; v <= max_used + 1; ++v) {
    labels[i] = v;
    rgs_recurse(labels, i + 1, std::max(max_used, v), fn);
  }
}
}  // namespace detail

template <typename Fn>
inline void for_each_partition(int n, Fn&& fn) {
  std::vector<int> labels(n, 0);
  detail::rgs_recurse(labels, 1, 0, fn);
}

// ---- information measures from direct label-pair counting ----

struct PairCounts {
  std::map<int, long long> row, col;
  std::map<std::pair<int, int>, long long> joint;
  long long n = 0;
};

inline PairCounts count_pairs(const markstab::Partition& p1,
                              const markstab::Partition& p2) {
  PairCounts c;
  c.n = p1.n();
  for (int i = 0; i < p1.n(); ++i) {
    ++c.row[p1.labels[i]];
    ++c.col[p2.labels[i]];
    ++c.joint[{p1.labels[i], p2.labels[i]}];
  }
  return c;
}

inline double entropy_oracle(const std::map<int, long long>& counts,
                             long long n) {
  double h = 0.0;
  for (const auto& [label, count] : counts) {
    double p = static_cast<double>(count) / n;
    h -= p * std::log(p);
  }
  return h;
}

inline double joint_entropy_oracle(const markstab::Partition& p1,
                                   const markstab::Partition& p2) {
  auto c = count_pairs(p1, p2);
  double h = 0.0;
  for (const auto& [labels, count] : c.joint) {
    double p = static_cast<double>(count) / c.n;
    h -= p * std::log(p);
  }
  return h;
}

inline double mutual_information_oracle(const markstab::Partition& p1,
                                        const markstab::Partition& p2) {
  auto c = count_pairs(p1, p2);
  double mi = 0.0;
  for (const auto& [labels, count] : c.joint) {
    double pij = static_cast<double>(count) / c.n;
    double pi = static_cast<double>(c.row.at(labels.first)) / c.n;
    double pj = static_cast<double>(c.col.at(labels.second)) / c.n;
    mi += pij * std::log(pij / (pi * pj));
  }
  return mi;
}

inline double nvi_oracle(const markstab::Partition& p1,
                         const markstab::Partition& p2) {
  double h12 = joint_entropy_oracle(p1, p2);
  if (h12 <= 1e-15) return 0.0;
  auto c = count_pairs(p1, p2);
  double vi = entropy_oracle(c.row, c.n) + entropy_oracle(c.col, c.n) -
              2.0 * mutual_information_oracle(p1, p2);
  return std::clamp(vi / h12, 0.0, 1.0);
}

// Expected MI under the permutation model, summed term by term with
// log-factorials accumulated by plain log additions.
inline double expected_mi_oracle(const markstab::Partition& p1,
                                 const markstab::Partition& p2) {
  auto c = count_pairs(p1, p2);
  const long long n = c.n;
  std::vector<double> logfact(n + 1, 0.0);
  for (long long k = 1; k <= n; ++k)
    logfact[k] = logfact[k - 1] + std::log(static_cast<double>(k));

  double emi = 0.0;
  for (const auto& [ri, a] : c.row) {
    for (const auto& [cj, b] : c.col) {
      long long lo = std::max(1ll, a + b - n);
      long long hi = std::min(a, b);
      for (long long nij = lo; nij <= hi; ++nij) {
        double log_p = logfact[a] + logfact[b] + logfact[n - a] +
                       logfact[n - b] - logfact[n] - logfact[nij] -
                       logfact[a - nij] - logfact[b - nij] -
                       logfact[n - a - b + nij];
        double term = (static_cast<double>(nij) / n) *
                      std::log(static_cast<double>(n) * nij /
                               (static_cast<double>(a) * b));
        emi += term * std::exp(log_p);
      }
    }
  }
  return emi;
}

// ---- element-centric similarity from explicit affinity matrices ----

inline double ecs_oracle(const markstab::Partition& p1,
                         const markstab::Partition& p2, double alpha) {
  const int n = p1.n();
  auto affinity = [&](const markstab::Partition& p, int i,
                      std::vector<double>& row) {
    std::fill(row.begin(), row.end(), 0.0);
    int size = 0;
    for (int j = 0; j < n; ++j)
      if (p.labels[j] == p.labels[i]) ++size;
    for (int j = 0; j < n; ++j)
      if (p.labels[j] == p.labels[i]) row[j] = alpha / size;
    row[i] += 1.0 - alpha;
  };
  std::vector<double> r1(n), r2(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    affinity(p1, i, r1);
    affinity(p2, i, r2);
    double l1 = 0.0;
    for (int j = 0; j < n; ++j) l1 += std::abs(r1[j] - r2[j]);
    total += 1.0 - l1 / (2.0 * alpha);
  }
  return total / n;
}

// ---- modularity from the textbook formula ----

inline double modularity_oracle(const markstab::Graph& g,
                                const markstab::Partition& p) {
  const double m = g.m();
  if (m == 0) return 0.0;
  std::map<int, double> internal, degree_sum;
  for (auto [u, v] : g.edges())
    if (p.labels[u] == p.labels[v]) internal[p.labels[u]] += 1.0;
  for (int v = 0; v < g.n(); ++v) degree_sum[p.labels[v]] += g.degree(v);
  double q = 0.0;
  for (const auto& [c, deg] : degree_sum) {
    double e_c = internal.count(c) ? internal.at(c) : 0.0;
    q += e_c / m - (deg / (2.0 * m)) * (deg / (2.0 * m));
  }
  return q;
}

// ---- decision stump by exhaustive enumeration ----

struct StumpOracle {
  int feature = -1;
  double threshold = 0.0;
  double sse = 0.0;
};

inline StumpOracle best_stump_oracle(
    const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const int n = static_cast<int>(x.size());
  const int p = static_cast<int>(x[0].size());
  StumpOracle best;
  double best_sse = 1e300;
  for (int f = 0; f < p; ++f) {
    std::vector<double> values;
    for (int i = 0; i < n; ++i) values.push_back(x[i][f]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      double threshold = 0.5 * (values[k] + values[k + 1]);
      std::vector<double> left, right;
      for (int i = 0; i < n; ++i)
        (x[i][f] <= threshold ? left : right).push_back(y[i]);
      auto sse = [](const std::vector<double>& v) {
        double mean = 0.0;
        for (double t : v) mean += t;
        mean /= static_cast<double>(v.size());
        double s = 0.0;
        for (double t : v) s += (t - mean) * (t - mean);
        return s;
      };
      double total = sse(left) + sse(right);
      if (total < best_sse - 1e-12) {
        best_sse = total;
        best.feature = f;
        best.threshold = threshold;
        best.sse = total;
      }
    }
  }
  return best;
}

// ---- random inputs ----

inline markstab::Graph random_connected_graph(int n, int extra_edges,
                                              markstab::Rng& rng) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  for (int i = 1; i < n; ++i)
    edges.emplace_back(order[rng.next_int(0, i - 1)], order[i]);
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : edges)
    seen.insert(u < v ? std::make_pair(u, v) : std::make_pair(v, u));
  int added = 0, guard = 0;
  while (added < extra_edges && guard++ < 50 * (extra_edges + 1)) {
    int u = rng.next_int(0, n - 1);
    int v = rng.next_int(0, n - 1);
    if (u == v) continue;
    auto key = u < v ? std::make_pair(u, v) : std::make_pair(v, u);
    if (seen.count(key)) continue;
    seen.insert(key);
    ++added;
  }
  return markstab::Graph::from_edges(
      n, std::vector<std::pair<int, int>>(seen.begin(), seen.end()));
}

inline markstab::Partition random_partition(int n, int c,
                                            markstab::Rng& rng) {
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) labels[i] = rng.next_int(0, c - 1);
  return markstab::Partition::from_labels(labels);
}

}  // namespace oracles
