#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "markstab/errors.hpp"

namespace markstab {

// Simple undirected unweighted graph. Node ids are dense 0..n-1; no
// self-loops, no duplicate edges. Adjacency lists are kept sorted and
// symmetric. Immutable after construction; safe for concurrent readers.
class Graph {
 public:
  Graph() = default;

  // Validates and builds adjacency/degrees. Edges are stored with u < v.
  static Graph from_edges(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 1) throw GraphError("graph must have at least one node");
    Graph g;
    g.n_ = n;
    std::set<std::pair<int, int>> seen;
    for (auto& [u, v] : edges) {
      if (u < 0 || v < 0 || u >= n || v >= n)
        throw GraphError("edge endpoint out of range: " + std::to_string(u) +
                         " " + std::to_string(v));
      if (u == v)
        throw SelfLoopError("self-loop at node " + std::to_string(u));
      if (u > v) std::swap(u, v);
      if (!seen.insert({u, v}).second)
        throw DuplicateEdgeError("duplicate edge " + std::to_string(u) + " " +
                                 std::to_string(v));
    }
    g.edges_.assign(seen.begin(), seen.end());
    g.adj_.assign(n, {});
    g.degree_.assign(n, 0);
    for (auto [u, v] : g.edges_) {
      g.adj_[u].push_back(v);
      g.adj_[v].push_back(u);
      ++g.degree_[u];
      ++g.degree_[v];
    }
    for (auto& nbrs : g.adj_) std::sort(nbrs.begin(), nbrs.end());
    return g;
  }

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }
  int degree(int v) const { return degree_[v]; }
  const std::vector<int>& degrees() const { return degree_; }

  bool has_edge(int u, int v) const {
    const auto& a = adj_[u];
    return std::binary_search(a.begin(), a.end(), v);
  }

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::vector<int> degree_;
};

// Edge-list text format: one "u v" pair per line, '#' starts a comment,
// optional first line "n=<int>" fixes the node count.
inline Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open edge list: " + path);
  std::vector<std::pair<int, int>> edges;
  int n_header = -1;
  int max_id = -1;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos)
      line.erase(pos);
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank
    if (first_content && tok.rfind("n=", 0) == 0) {
      first_content = false;
      try {
        n_header = std::stoi(tok.substr(2));
      } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(lineno) +
                         ": bad n= header");
      }
      if (n_header < 1)
        throw ParseError("line " + std::to_string(lineno) +
                         ": n= must be >= 1");
      continue;
    }
    first_content = false;
    int u, v;
    std::string extra;
    try {
      std::size_t p1 = 0, p2 = 0;
      u = std::stoi(tok, &p1);
      std::string tok2;
      if (!(ss >> tok2))
        throw ParseError("");
      v = std::stoi(tok2, &p2);
      if (p1 != tok.size() || p2 != tok2.size() || (ss >> extra))
        throw ParseError("");
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected two integer tokens");
    }
    if (u < 0 || v < 0)
      throw ParseError("line " + std::to_string(lineno) +
                       ": negative node id");
    if (u == v)
      throw SelfLoopError("line " + std::to_string(lineno) + ": self-loop " +
                          std::to_string(u));
    max_id = std::max(max_id, std::max(u, v));
    edges.emplace_back(u, v);
  }
  int n = n_header >= 0 ? n_header : max_id + 1;
  if (n < 1) throw ParseError("edge list is empty and has no n= header");
  if (max_id >= n)
    throw ParseError("node id " + std::to_string(max_id) +
                     " exceeds declared n=" + std::to_string(n));
  return Graph::from_edges(n, std::move(edges));
}

inline void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write edge list: " + path);
  out << "n=" << g.n() << "\n";
  for (auto [u, v] : g.edges()) out << u << " " << v << "\n";
}

struct DegreeStats {
  double avg_degree;
  int n;
  int m;
};

inline DegreeStats degree_stats(const Graph& g) {
  return {2.0 * g.m() / g.n(), g.n(), g.m()};
}

// Mean local clustering; nodes of degree < 2 contribute 0.
inline double avg_clustering(const Graph& g) {
  double sum = 0.0;
  for (int v = 0; v < g.n(); ++v) {
    int d = g.degree(v);
    if (d < 2) continue;
    const auto& nbrs = g.neighbors(v);
    long long tri = 0;
    for (std::size_t a = 0; a < nbrs.size(); ++a)
      for (std::size_t b = a + 1; b < nbrs.size(); ++b)
        if (g.has_edge(nbrs[a], nbrs[b])) ++tri;
    sum += 2.0 * static_cast<double>(tri) / (static_cast<double>(d) * (d - 1));
  }
  return sum / g.n();
}

// BFS distances from a single source; -1 marks unreachable nodes.
inline std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.n(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int w : g.neighbors(u))
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
  }
  return dist;
}

// Mean over ordered node pairs i != j of 1/dist(i,j); disconnected pairs
// contribute 0.
inline double global_efficiency(const Graph& g) {
  if (g.n() < 2) return 0.0;
  double sum = 0.0;
  for (int v = 0; v < g.n(); ++v) {
    auto dist = bfs_distances(g, v);
    for (int w = 0; w < g.n(); ++w)
      if (w != v && dist[w] > 0) sum += 1.0 / dist[w];
  }
  return sum / (static_cast<double>(g.n()) * (g.n() - 1));
}

// Pearson correlation of endpoint degrees over the 2m ordered edge pairs.
// Throws DegenerateVarianceError when every endpoint degree is equal
// (regular graphs); the feature pipeline maps that case to 0.
inline double degree_assortativity(const Graph& g) {
  if (g.m() < 1)
    throw DegenerateVarianceError("assortativity undefined without edges");
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const double k = 2.0 * g.m();
  for (auto [u, v] : g.edges()) {
    double du = g.degree(u), dv = g.degree(v);
    // both orientations (u,v) and (v,u)
    sx += du + dv;
    sy += dv + du;
    sxx += du * du + dv * dv;
    syy += dv * dv + du * du;
    sxy += 2 * du * dv;
  }
  double mx = sx / k, my = sy / k;
  double vx = sxx / k - mx * mx;
  double vy = syy / k - my * my;
  double cov = sxy / k - mx * my;
  if (vx <= 1e-15 || vy <= 1e-15)
    throw DegenerateVarianceError(
        "assortativity undefined: endpoint degrees have zero variance");
  return cov / std::sqrt(vx * vy);
}

inline bool is_connected(const Graph& g) {
  auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(),
                      [](int d) { return d < 0; });
}

// Connected components as node lists, each sorted ascending.
inline std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<std::vector<int>> comps;
  std::vector<char> seen(g.n(), 0);
  for (int s = 0; s < g.n(); ++s) {
    if (seen[s]) continue;
    std::vector<int> comp;
    std::deque<int> queue{s};
    seen[s] = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      comp.push_back(u);
      for (int w : g.neighbors(u))
        if (!seen[w]) {
          seen[w] = 1;
          queue.push_back(w);
        }
    }
    std::sort(comp.begin(), comp.end());
    comps.push_back(std::move(comp));
  }
  return comps;
}

}  // namespace markstab
