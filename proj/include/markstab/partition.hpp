#pragma once

#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "markstab/errors.hpp"
#include "markstab/graph.hpp"

namespace markstab {

// Node -> community labeling. Labels are canonical: 0..c-1 in order of
// first appearance, so structurally equal partitions compare equal.
struct Partition {
  std::vector<int> labels;
  int c = 0;

  static Partition from_labels(const std::vector<int>& raw) {
    Partition p;
    p.labels.resize(raw.size());
    std::unordered_map<int, int> remap;
    remap.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      auto [it, inserted] =
          remap.try_emplace(raw[i], static_cast<int>(remap.size()));
      p.labels[i] = it->second;
    }
    p.c = static_cast<int>(remap.size());
    return p;
  }

  static Partition singletons(int n) {
    Partition p;
    p.labels.resize(n);
    for (int i = 0; i < n; ++i) p.labels[i] = i;
    p.c = n;
    return p;
  }

  static Partition single_community(int n) {
    Partition p;
    p.labels.assign(n, 0);
    p.c = n > 0 ? 1 : 0;
    return p;
  }

  int n() const { return static_cast<int>(labels.size()); }

  std::vector<std::vector<int>> communities() const {
    std::vector<std::vector<int>> out(c);
    for (int i = 0; i < n(); ++i) out[labels[i]].push_back(i);
    return out;
  }

  bool operator==(const Partition& other) const {
    return labels == other.labels;
  }
};

// Partition file format: {"n": int, "labels": [int, ...]}.
inline Partition load_partition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open partition file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad partition JSON in " + path + ": " + e.what());
  }
  if (!j.contains("n") || !j.contains("labels"))
    throw ParseError("partition file missing n/labels: " + path);
  int n = j["n"].get<int>();
  auto labels = j["labels"].get<std::vector<int>>();
  if (static_cast<int>(labels.size()) != n)
    throw ParseError("partition label count does not match n in " + path);
  return Partition::from_labels(labels);
}

inline void save_partition(const Partition& p, const std::string& path) {
  nlohmann::json j;
  j["n"] = p.n();
  j["labels"] = p.labels;
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write partition file: " + path);
  out << j.dump(2) << "\n";
}

// Newman modularity at resolution 1:
//   Q = sum_c [ e_c / m - (deg_c / 2m)^2 ]
// with e_c the intra-community edge count and deg_c the community's total
// degree.
inline double modularity(const Graph& g, const Partition& p) {
  if (p.n() != g.n())
    throw DimensionError("partition size does not match graph");
  if (g.m() == 0) return 0.0;
  std::vector<long long> intra(p.c, 0), deg(p.c, 0);
  for (auto [u, v] : g.edges())
    if (p.labels[u] == p.labels[v]) ++intra[p.labels[u]];
  for (int v = 0; v < g.n(); ++v) deg[p.labels[v]] += g.degree(v);
  double q = 0.0;
  const double m = g.m();
  for (int k = 0; k < p.c; ++k) {
    double frac = deg[k] / (2.0 * m);
    q += intra[k] / m - frac * frac;
  }
  return q;
}

}  // namespace markstab
