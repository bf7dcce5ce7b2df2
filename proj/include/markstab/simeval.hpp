#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "markstab/errors.hpp"
#include "markstab/partition.hpp"

namespace markstab {

// Joint label-count table underlying all information-theoretic measures.
struct ContingencyTable {
  std::vector<std::vector<long long>> counts;  // c1 x c2
  std::vector<long long> row_marginals;        // a_u
  std::vector<long long> col_marginals;        // b_v
  long long n = 0;
};

inline ContingencyTable build_contingency(const Partition& p1,
                                          const Partition& p2) {
  if (p1.n() != p2.n())
    throw DimensionError("partitions have different node counts");
  ContingencyTable t;
  t.n = p1.n();
  t.counts.assign(p1.c, std::vector<long long>(p2.c, 0));
  t.row_marginals.assign(p1.c, 0);
  t.col_marginals.assign(p2.c, 0);
  for (int i = 0; i < p1.n(); ++i) {
    ++t.counts[p1.labels[i]][p2.labels[i]];
    ++t.row_marginals[p1.labels[i]];
    ++t.col_marginals[p2.labels[i]];
  }
  return t;
}

namespace detail {

inline double entropy(const std::vector<long long>& marginals, long long n) {
  double h = 0.0;
  for (long long a : marginals)
    if (a > 0) {
      double p = static_cast<double>(a) / n;
      h -= p * std::log(p);
    }
  return h;
}

inline double mutual_information(const ContingencyTable& t) {
  double mi = 0.0;
  for (std::size_t u = 0; u < t.counts.size(); ++u)
    for (std::size_t v = 0; v < t.counts[u].size(); ++v) {
      long long nuv = t.counts[u][v];
      if (nuv == 0) continue;
      mi += (static_cast<double>(nuv) / t.n) *
            std::log(static_cast<double>(nuv) * t.n /
                     (static_cast<double>(t.row_marginals[u]) *
                      t.col_marginals[v]));
    }
  return mi;
}

// Exact expected mutual information under the permutation (hypergeometric)
// null model with the table's marginals held fixed. Log-factorials keep the
// summation stable; the n_uv = 0 term contributes nothing.
inline double expected_mutual_information(
    const std::vector<long long>& a, const std::vector<long long>& b,
    long long n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  for (long long i = 2; i <= n; ++i)
    lf[static_cast<std::size_t>(i)] =
        lf[static_cast<std::size_t>(i - 1)] + std::log(static_cast<double>(i));
  auto logfac = [&](long long k) { return lf[static_cast<std::size_t>(k)]; };

  double emi = 0.0;
  for (long long au : a)
    for (long long bv : b) {
      long long lo = std::max<long long>(1, au + bv - n);
      long long hi = std::min(au, bv);
      for (long long nij = lo; nij <= hi; ++nij) {
        double log_p = logfac(au) + logfac(bv) + logfac(n - au) +
                       logfac(n - bv) - logfac(n) - logfac(nij) -
                       logfac(au - nij) - logfac(bv - nij) -
                       logfac(n - au - bv + nij);
        double term = (static_cast<double>(nij) / n) *
                      std::log(static_cast<double>(n) * nij /
                               (static_cast<double>(au) * bv));
        emi += term * std::exp(log_p);
      }
    }
  return emi;
}

// Chance-adjusted, unnormalized: MI - E[MI]. The symmetric ratio below
// supplies the normalization.
inline double adjusted_mi(const Partition& p1, const Partition& p2) {
  auto t = build_contingency(p1, p2);
  return mutual_information(t) -
         expected_mutual_information(t.row_marginals, t.col_marginals, t.n);
}

}  // namespace detail

// Normalized variation of information: VI / H_joint with natural-log
// entropies; 0 when the joint entropy vanishes. A [0,1] metric.
inline double nvi(const Partition& p1, const Partition& p2) {
  auto t = build_contingency(p1, p2);
  double h1 = detail::entropy(t.row_marginals, t.n);
  double h2 = detail::entropy(t.col_marginals, t.n);
  double mi = detail::mutual_information(t);
  double h_joint = h1 + h2 - mi;
  if (h_joint <= 1e-15) return 0.0;
  double vi = h1 + h2 - 2.0 * mi;
  double value = vi / h_joint;
  return std::min(1.0, std::max(0.0, value));
}

// Symmetric normalization of adjusted mutual information:
//   I(P1,P2) / (1/2 [I(P1,P1) + I(P2,P2)])
// where I is the exact-chance-adjusted mutual information. Identical
// partitions score 1; independent partitions score near 0 and may dip
// slightly negative.
inline double ami_symmetric(const Partition& p1, const Partition& p2) {
  if (p1.n() != p2.n())
    throw DimensionError("partitions have different node counts");
  if (p1.n() < 1) throw DimensionError("empty partitions");
  if (p1 == p2) return 1.0;  // numerator and denominator coincide
  double denom =
      0.5 * (detail::adjusted_mi(p1, p1) + detail::adjusted_mi(p2, p2));
  if (denom <= 1e-15)
    throw DegenerateVarianceError(
        "AMI undefined: both partitions carry no adjusted self-information");
  return detail::adjusted_mi(p1, p2) / denom;
}

// Element-centric similarity for hard partitions. Node affinities are the
// stationary distribution of the cluster-restricted personalized walk:
//   A_ij = alpha/|c(i)| + (1-alpha) delta_ij   for j in c(i), else 0.
// Node score S_i = 1 - (1/2 alpha) * sum_j |A1_ij - A2_ij|; ECS = mean S_i.
inline double ecs(const Partition& p1, const Partition& p2,
                  double alpha = 0.9) {
  if (p1.n() != p2.n())
    throw DimensionError("partitions have different node counts");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw DimensionError("ecs alpha must lie in (0, 1)");
  auto t = build_contingency(p1, p2);
  double sum = 0.0;
  for (int i = 0; i < p1.n(); ++i) {
    long long s1 = t.row_marginals[p1.labels[i]];
    long long s2 = t.col_marginals[p2.labels[i]];
    long long overlap = t.counts[p1.labels[i]][p2.labels[i]];
    double l1 = overlap * std::abs(1.0 / s1 - 1.0 / s2) +
                static_cast<double>(s1 - overlap) / s1 +
                static_cast<double>(s2 - overlap) / s2;
    sum += 1.0 - 0.5 * l1;  // the alpha factors cancel for hard partitions
  }
  return sum / p1.n();
}

}  // namespace markstab
