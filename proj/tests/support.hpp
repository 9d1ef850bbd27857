#pragma once

// Shared builders and brute-force reference implementations. The reference
// code deliberately avoids the library: distances come from Floyd-Warshall
// on an adjacency matrix, products and defects from their definitions.

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "coarse/metric_graph.hpp"

namespace testing_support {

using coarse::Edge;
using coarse::MetricGraph;
using coarse::Vertex;

inline MetricGraph path_graph(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return MetricGraph(n, e);
}

inline MetricGraph cycle_graph(std::size_t n) {
  std::vector<Edge> e;
  for (Vertex i = 0; i < n; ++i) e.emplace_back(i, static_cast<Vertex>((i + 1) % n));
  return MetricGraph(n, e);
}

inline MetricGraph grid_graph(std::size_t w, std::size_t h) {
  std::vector<Edge> e;
  for (Vertex y = 0; y < h; ++y)
    for (Vertex x = 0; x < w; ++x) {
      const Vertex v = static_cast<Vertex>(y * w + x);
      if (x + 1 < w) e.emplace_back(v, v + 1);
      if (y + 1 < h) e.emplace_back(v, static_cast<Vertex>(v + w));
    }
  return MetricGraph(w * h, e);
}

// Tripod: centre 0, three arms of the given length.
inline MetricGraph tripod(std::size_t arm) {
  std::vector<Edge> e;
  Vertex next = 1;
  for (int a = 0; a < 3; ++a) {
    Vertex prev = 0;
    for (std::size_t i = 0; i < arm; ++i) {
      e.emplace_back(prev, next);
      prev = next++;
    }
  }
  return MetricGraph(next, e);
}

inline MetricGraph random_tree(std::size_t n, std::mt19937_64& rng) {
  std::vector<Edge> e;
  for (Vertex v = 1; v < n; ++v)
    e.emplace_back(std::uniform_int_distribution<Vertex>(0, v - 1)(rng), v);
  return MetricGraph(n, e);
}

// Spanning tree plus `extra` random chords.
inline MetricGraph random_connected(std::size_t n, std::size_t extra,
                                    std::mt19937_64& rng) {
  std::vector<Edge> e;
  for (Vertex v = 1; v < n; ++v)
    e.emplace_back(std::uniform_int_distribution<Vertex>(0, v - 1)(rng), v);
  std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
  for (std::size_t i = 0; i < extra; ++i) {
    const Vertex a = pick(rng), b = pick(rng);
    if (a != b) e.emplace_back(a, b);
  }
  return MetricGraph(n, e);
}

inline std::vector<std::vector<std::int64_t>> floyd_warshall(const MetricGraph& g) {
  const std::size_t n = g.vertex_count();
  const std::int64_t inf = 1 << 28;
  std::vector<std::vector<std::int64_t>> d(n, std::vector<std::int64_t>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [u, v] : g.edges()) d[u][v] = d[v][u] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

// Twice the Gromov delta, by the defining inequality over all ordered
// quadruples (p, x, y, z).
inline std::int64_t brute_twice_delta(const MetricGraph& g) {
  const auto d = floyd_warshall(g);
  const std::size_t n = d.size();
  auto twice_product = [&](std::size_t p, std::size_t x, std::size_t y) {
    return d[p][x] + d[p][y] - d[x][y];
  };
  std::int64_t worst = 0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t z = 0; z < n; ++z) {
          const std::int64_t lhs = twice_product(p, x, y);
          const std::int64_t rhs =
              std::min(twice_product(p, x, z), twice_product(p, y, z));
          worst = std::max(worst, rhs - lhs);
        }
  return worst;
}

}  // namespace testing_support
