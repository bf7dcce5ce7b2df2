#pragma once

// Shared scaffolding for the test suites: scratch directories and the small
// structured graphs the specs keep coming back to.

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "markstab/graph.hpp"

namespace testutil {

// Unique scratch directory, removed when the object goes out of scope.
class TempDir {
 public:
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    std::random_device rd;
    for (int tries = 0; tries < 100; ++tries) {
      auto candidate = base / ("markstab-test-" + std::to_string(rd()));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path_ = candidate;
        return;
      }
    }
    throw std::runtime_error("cannot create a scratch directory");
  }

  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }

  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const {
    return (path_ / name).string();
  }

  std::string write(const std::string& name,
                    const std::string& content) const {
    auto p = file(name);
    std::ofstream out(p);
    out << content;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline markstab::Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return markstab::Graph::from_edges(n, edges);
}

inline markstab::Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return markstab::Graph::from_edges(n, edges);
}

// Hub node 0 plus `leaves` pendant nodes.
inline markstab::Graph star_graph(int leaves) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i <= leaves; ++i) edges.emplace_back(0, i);
  return markstab::Graph::from_edges(leaves + 1, edges);
}

// k cliques of `size` nodes, consecutive cliques joined by one edge around
// a ring; two cliques get a single bridge.
inline markstab::Graph ring_of_cliques(int k, int size) {
  std::vector<std::pair<int, int>> edges;
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < size; ++i)
      for (int j = i + 1; j < size; ++j)
        edges.emplace_back(c * size + i, c * size + j);
  if (k >= 2)
    for (int c = 0; c < k; ++c) {
      if (k == 2 && c == 1) break;
      edges.emplace_back(c * size + size - 1, ((c + 1) % k) * size);
    }
  return markstab::Graph::from_edges(k * size, edges);
}

inline markstab::Graph disjoint_union(
    const std::vector<markstab::Graph>& parts) {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  for (const auto& g : parts) {
    for (auto [u, v] : g.edges()) edges.emplace_back(u + n, v + n);
    n += g.n();
  }
  return markstab::Graph::from_edges(n, edges);
}

}  // namespace testutil
