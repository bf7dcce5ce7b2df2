#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "markstab/errors.hpp"
#include "markstab/graph.hpp"
#include "markstab/parallel.hpp"
#include "markstab/partition.hpp"
#include "markstab/rng.hpp"

namespace markstab {

struct BenchSpec {
  int n = 0;
  double degree_exponent = 2.5;
  int d_min = 1, d_max = 2;
  double community_exponent = 2.0;
  int k_min = 2, k_max = 4;
  double xi = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(1 <= d_min && d_min < d_max && d_max < n))
      throw InfeasibleSpecError("need 1 <= d_min < d_max < n");
    if (!(1 <= k_min && k_min < k_max && k_max <= n))
      throw InfeasibleSpecError("need 1 <= k_min < k_max <= n");
    if (!(degree_exponent > 1.0 && community_exponent > 1.0))
      throw InfeasibleSpecError("power-law exponents must be > 1");
    if (!(xi >= 0.0 && xi <= 1.0))
      throw InfeasibleSpecError("xi must be in [0, 1]");
  }
};

struct BenchInstance {
  Graph graph;
  Partition planted;
  BenchSpec spec;
  double realized_xi = 0.0;
  int dropped_edges = 0;
};

namespace detail {

// Inverse-CDF sampler for P(x) proportional to x^(-exponent) on the
// integer support [lo, hi].
class PowerLawSampler {
 public:
  PowerLawSampler(double exponent, int lo, int hi) : lo_(lo) {
    if (lo < 1 || lo > hi)
      throw InfeasibleSpecError("empty power-law support [" +
                                std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
    cum_.resize(hi - lo + 1);
    double acc = 0.0;
    for (int x = lo; x <= hi; ++x) {
      acc += std::pow(static_cast<double>(x), -exponent);
      cum_[x - lo] = acc;
    }
  }

  int draw(Rng& rng) const {
    double u = rng.next_unit() * cum_.back();
    auto it = std::lower_bound(cum_.begin(), cum_.end(), u);
    if (it == cum_.end()) return lo_ + static_cast<int>(cum_.size()) - 1;
    return lo_ + static_cast<int>(it - cum_.begin());
  }

 private:
  int lo_;
  std::vector<double> cum_;
};

inline int round_half_up(double x) {
  return static_cast<int>(std::floor(x + 0.5));
}

}  // namespace detail

inline std::vector<int> sample_power_law(int count, double exponent, int lo,
                                         int hi, Rng& rng) {
  detail::PowerLawSampler sampler(exponent, lo, hi);
  std::vector<int> out(count);
  for (int i = 0; i < count; ++i) out[i] = sampler.draw(rng);
  return out;
}

// Degree-sequence variant: an odd sum is fixed by incrementing one random
// entry below hi (or decrementing one above lo when everything sits at hi).
inline std::vector<int> sample_degree_sequence(int count, double exponent,
                                               int lo, int hi, Rng& rng) {
  auto degrees = sample_power_law(count, exponent, lo, hi, rng);
  long long sum = std::accumulate(degrees.begin(), degrees.end(), 0ll);
  if (sum % 2 == 0) return degrees;
  std::vector<int> bumpable;
  for (int i = 0; i < count; ++i)
    if (degrees[i] < hi) bumpable.push_back(i);
  if (!bumpable.empty()) {
    degrees[bumpable[rng.next_below(bumpable.size())]] += 1;
    return degrees;
  }
  for (int i = 0; i < count; ++i)
    if (degrees[i] > lo) {
      degrees[i] -= 1;
      return degrees;
    }
  throw InfeasibleSpecError("cannot even out degree sum with lo == hi");
}

namespace detail {

// Community sizes covering exactly n. Draws power-law sizes until the
// remainder is covered; a remainder below k_min triggers (in order) full
// re-draws, distribution of the gap onto communities with headroom, and
// finally an undersized last community.
inline std::vector<int> sample_community_sizes(const BenchSpec& spec,
                                               Rng& rng) {
  PowerLawSampler sampler(spec.community_exponent, spec.k_min, spec.k_max);
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<int> sizes;
    int total = 0;
    bool clean = true;
    while (total < spec.n) {
      int gap = spec.n - total;
      int s = sampler.draw(rng);
      if (s > gap) {
        if (gap >= spec.k_min) {
          s = gap;  // truncated last community, still in bounds
        } else {
          clean = false;
          break;
        }
      }
      sizes.push_back(s);
      total += s;
    }
    if (clean) return sizes;
    if (attempt < 49) continue;

    // distribute the gap onto headroom, largest headroom first
    int gap = spec.n - total;
    while (gap > 0) {
      int best = -1;
      for (std::size_t i = 0; i < sizes.size(); ++i)
        if (sizes[i] < spec.k_max &&
            (best < 0 || sizes[i] < sizes[best]))
          best = static_cast<int>(i);
      if (best < 0) break;
      ++sizes[best];
      --gap;
    }
    if (gap > 0) sizes.push_back(gap);  // undersized remainder community
    return sizes;
  }
  throw InfeasibleSpecError("community size sampling failed");  // unreachable
}

struct StubPlan {
  std::vector<int> community;       // per node
  std::vector<int> internal_stubs;  // per node
  std::vector<int> background_stubs;
};

// Largest-degree-first assignment. A node wants round((1-xi)*d) internal
// stubs; it goes to a capacity-weighted random community that can host that
// many (size-1 neighbors available), falling back to the roomiest community
// with the internal count capped. Community-internal stub sums are then
// made even by demoting one stub to background.
inline StubPlan assign_nodes(const BenchSpec& spec,
                             const std::vector<int>& degrees,
                             const std::vector<int>& sizes, Rng& rng) {
  const int n = spec.n;
  if (round_half_up((1.0 - spec.xi) * spec.d_min) > spec.k_max - 1)
    throw InfeasibleSpecError(
        "minimum degree cannot fit in the largest community: d_min*(1-xi) "
        "exceeds k_max-1");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return degrees[a] > degrees[b];
  });

  StubPlan plan;
  plan.community.assign(n, -1);
  plan.internal_stubs.assign(n, 0);
  plan.background_stubs.assign(n, 0);
  std::vector<int> capacity(sizes.begin(), sizes.end());

  for (int v : order) {
    int want = std::min(round_half_up((1.0 - spec.xi) * degrees[v]),
                        degrees[v]);
    long long eligible_cap = 0;
    for (std::size_t c = 0; c < sizes.size(); ++c)
      if (capacity[c] > 0 && sizes[c] - 1 >= want) eligible_cap += capacity[c];
    int chosen = -1;
    if (eligible_cap > 0) {
      long long r = static_cast<long long>(
          rng.next_below(static_cast<std::uint64_t>(eligible_cap)));
      for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (!(capacity[c] > 0 && sizes[c] - 1 >= want)) continue;
        if (r < capacity[c]) {
          chosen = static_cast<int>(c);
          break;
        }
        r -= capacity[c];
      }
    } else {
      for (std::size_t c = 0; c < sizes.size(); ++c)
        if (capacity[c] > 0 &&
            (chosen < 0 || sizes[c] > sizes[chosen]))
          chosen = static_cast<int>(c);
      if (chosen < 0)
        throw InfeasibleSpecError("no community capacity left");  // unreachable
      want = std::min(want, sizes[chosen] - 1);
    }
    plan.community[v] = chosen;
    plan.internal_stubs[v] = want;
    plan.background_stubs[v] = degrees[v] - want;
    --capacity[chosen];
  }

  std::vector<long long> internal_sum(sizes.size(), 0);
  for (int v = 0; v < n; ++v)
    internal_sum[plan.community[v]] += plan.internal_stubs[v];
  for (std::size_t c = 0; c < sizes.size(); ++c) {
    if (internal_sum[c] % 2 == 0) continue;
    int pick = -1;
    for (int v = 0; v < n; ++v)
      if (plan.community[v] == static_cast<int>(c) &&
          plan.internal_stubs[v] > 0 &&
          (pick < 0 || plan.internal_stubs[v] > plan.internal_stubs[pick]))
        pick = v;
    if (pick < 0) continue;  // sum was odd only if some stub exists
    --plan.internal_stubs[pick];
    ++plan.background_stubs[pick];
  }
  return plan;
}

// Configuration-model matching of a stub list (node repeated per stub).
inline std::vector<std::pair<int, int>> match_stubs(std::vector<int> stubs,
                                                    Rng& rng) {
  rng.shuffle(stubs);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(stubs.size() / 2);
  for (std::size_t i = 0; i + 1 < stubs.size(); i += 2)
    edges.emplace_back(stubs[i], stubs[i + 1]);
  return edges;
}

// Rewires self-loops and duplicate edges within one matching group by
// random pair swaps; anything still bad after the sweep budget is dropped.
inline int repair_edges(std::vector<std::pair<int, int>>& edges,
                        std::map<std::pair<int, int>, int>& global_count,
                        Rng& rng) {
  auto norm = [](int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  };
  auto is_bad = [&](std::size_t i) {
    auto [u, v] = edges[i];
    return u == v || global_count[norm(u, v)] > 1;
  };

  for (int sweep = 0; sweep < 100; ++sweep) {
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < edges.size(); ++i)
      if (is_bad(i)) bad.push_back(i);
    if (bad.empty()) break;
    if (edges.size() < 2) break;
    for (std::size_t i : bad) {
      if (!is_bad(i)) continue;  // an earlier swap may have fixed it
      for (int tries = 0; tries < 10; ++tries) {
        std::size_t j = rng.next_below(edges.size());
        if (j == i) continue;
        auto [u, v] = edges[i];
        auto [a, b] = edges[j];
        int nu = u, nv = a, mu = v, mv = b;  // propose (u,a) and (v,b)
        if (nu == nv || mu == mv) continue;
        auto e1 = norm(nu, nv), e2 = norm(mu, mv);
        if (e1 == e2) continue;
        if (global_count[e1] > 0 || global_count[e2] > 0) continue;
        if (u != v) --global_count[norm(u, v)];
        if (a != b) --global_count[norm(a, b)];
        ++global_count[e1];
        ++global_count[e2];
        edges[i] = {nu, nv};
        edges[j] = {mu, mv};
        break;
      }
    }
  }

  int dropped = 0;
  std::vector<std::pair<int, int>> kept;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u == v) {
      ++dropped;
      continue;
    }
    auto key = norm(u, v);
    if (global_count[key] > 1) {
      --global_count[key];
      ++dropped;
      continue;
    }
    kept.emplace_back(u, v);
  }
  edges = std::move(kept);
  return dropped;
}

}  // namespace detail

inline BenchInstance generate(const BenchSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, 0));

  auto sizes = detail::sample_community_sizes(spec, rng);
  auto degrees = sample_degree_sequence(spec.n, spec.degree_exponent,
                                        spec.d_min, spec.d_max, rng);
  auto plan = detail::assign_nodes(spec, degrees, sizes, rng);

  // per-community internal matching, then the global background pool
  std::vector<std::vector<int>> community_stubs(sizes.size());
  std::vector<int> background;
  for (int v = 0; v < spec.n; ++v) {
    for (int s = 0; s < plan.internal_stubs[v]; ++s)
      community_stubs[plan.community[v]].push_back(v);
    for (int s = 0; s < plan.background_stubs[v]; ++s)
      background.push_back(v);
  }

  std::vector<std::vector<std::pair<int, int>>> groups;
  for (auto& stubs : community_stubs)
    groups.push_back(detail::match_stubs(std::move(stubs), rng));
  groups.push_back(detail::match_stubs(std::move(background), rng));

  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& group : groups)
    for (auto [u, v] : group)
      if (u != v) ++edge_count[u < v ? std::make_pair(u, v)
                                     : std::make_pair(v, u)];

  int dropped = 0;
  for (auto& group : groups) dropped += detail::repair_edges(group, edge_count, rng);

  std::vector<std::pair<int, int>> all_edges;
  for (const auto& group : groups)
    all_edges.insert(all_edges.end(), group.begin(), group.end());

  BenchInstance inst{Graph::from_edges(spec.n, all_edges),
                     Partition::from_labels(plan.community), spec, 0.0,
                     dropped};
  long long crossing = 0;
  for (auto [u, v] : inst.graph.edges())
    if (plan.community[u] != plan.community[v]) ++crossing;
  inst.realized_xi = inst.graph.m() == 0
                         ? 0.0
                         : static_cast<double>(crossing) / inst.graph.m();
  return inst;
}

// ---- corpus sampling ----

struct CorpusRanges {
  int n_lo = 100, n_hi = 1000;  // [lo, hi)
  int divisor_lo = 2, divisor_hi = 50;
  double exponent_lo = 1.0, exponent_hi = 16.0;
  double xi_lo = 0.01, xi_hi = 0.5;
  std::vector<double> xi_set;  // nonempty => block design over fixed values

  static CorpusRanges training() { return {}; }

  static CorpusRanges testing() {
    CorpusRanges r;
    r.n_lo = 10;
    r.n_hi = 1000;
    r.divisor_lo = 4;
    r.divisor_hi = 5;  // fixed divisor 4
    r.exponent_lo = 1.0;
    r.exponent_hi = 8.0;
    r.xi_set = {0.01, 0.1, 0.3, 0.5, 0.7};
    return r;
  }
};

namespace detail {

inline double rounded_exponent(double lo, double hi, Rng& rng) {
  double e = std::round(rng.next_real(lo, hi) * 100.0) / 100.0;
  return std::clamp(e, lo + 0.01, hi - 0.01);
}

inline BenchSpec draw_spec(const CorpusRanges& ranges, double xi,
                           std::uint64_t seed, Rng& rng) {
  BenchSpec spec;
  spec.n = rng.next_int(ranges.n_lo, ranges.n_hi - 1);
  int div_d = rng.next_int(ranges.divisor_lo, ranges.divisor_hi - 1);
  int div_k = rng.next_int(ranges.divisor_lo, ranges.divisor_hi - 1);
  int d_cap = std::max(2, spec.n / div_d);
  int k_cap = std::max(2, spec.n / div_k);
  spec.d_min = rng.next_int(1, d_cap - 1);
  spec.k_min = rng.next_int(1, k_cap - 1);
  spec.k_max = rng.next_int(spec.k_min + 1, spec.n - 1);
  spec.d_max = rng.next_int(spec.d_min + 1, spec.n - 1);
  spec.degree_exponent =
      rounded_exponent(ranges.exponent_lo, ranges.exponent_hi, rng);
  spec.community_exponent =
      rounded_exponent(ranges.exponent_lo, ranges.exponent_hi, rng);
  spec.xi = xi;
  spec.seed = seed;
  return spec;
}

}  // namespace detail

inline std::vector<BenchInstance> corpus(int count,
                                         const CorpusRanges& ranges,
                                         std::uint64_t master_seed,
                                         int jobs = 1) {
  if (count < 1) throw DimensionError("corpus needs count >= 1");
  std::vector<BenchInstance> out(count);
  parallel_for(static_cast<std::size_t>(count), jobs, [&](std::size_t i) {
    Rng rng(mix_seed(master_seed, i));
    double xi = ranges.xi_set.empty()
                    ? rng.next_real(ranges.xi_lo, ranges.xi_hi)
                    : ranges.xi_set[i * ranges.xi_set.size() / count];
    for (int attempt = 0;; ++attempt) {
      std::uint64_t inst_seed = mix_seed(master_seed, (i << 8) + 1 + attempt);
      auto spec = detail::draw_spec(ranges, xi, inst_seed, rng);
      try {
        out[i] = generate(spec);
        break;
      } catch (const InfeasibleSpecError&) {
        if (attempt >= 19) throw;
      }
    }
  });
  return out;
}

}  // namespace markstab
