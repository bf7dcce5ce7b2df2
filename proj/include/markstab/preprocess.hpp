#pragma once

#include <algorithm>
#include <utility>
#include <vector>

#include "markstab/graph.hpp"

namespace markstab {

struct PreprocessReport {
  std::vector<std::pair<int, int>> added_edges;
  int components_before = 1;
};

// Lightly connects a disconnected graph: repeatedly merge the two largest
// components by one edge between the highest-degree node of each that has
// not yet been used for a connecting edge. Degree ties break to the
// smallest node id; component-size ties to the smallest contained node id.
// A component whose nodes are all already used falls back to its
// highest-degree node. Connected input is returned unchanged.
inline std::pair<Graph, PreprocessReport> connect_components(const Graph& g) {
  PreprocessReport report;
  auto comps = connected_components(g);
  report.components_before = static_cast<int>(comps.size());
  if (comps.size() <= 1) return {g, report};

  std::vector<char> used(g.n(), 0);
  auto pick_endpoint = [&](const std::vector<int>& comp) {
    int best = -1;
    for (int v : comp)  // nodes sorted ascending, so first max wins ties
      if (!used[v] && (best < 0 || g.degree(v) > g.degree(best))) best = v;
    if (best < 0)
      for (int v : comp)
        if (best < 0 || g.degree(v) > g.degree(best)) best = v;
    return best;
  };
  auto comp_order = [](const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.front() < b.front();
  };

  auto edges = g.edges();
  while (comps.size() > 1) {
    std::sort(comps.begin(), comps.end(), comp_order);
    int u = pick_endpoint(comps[0]);
    int v = pick_endpoint(comps[1]);
    edges.emplace_back(u, v);
    report.added_edges.emplace_back(std::min(u, v), std::max(u, v));
    used[u] = used[v] = 1;
    // merged component participates in later iterations
    comps[0].insert(comps[0].end(), comps[1].begin(), comps[1].end());
    std::sort(comps[0].begin(), comps[0].end());
    comps.erase(comps.begin() + 1);
  }
  return {Graph::from_edges(g.n(), std::move(edges)), report};
}

}  // namespace markstab
