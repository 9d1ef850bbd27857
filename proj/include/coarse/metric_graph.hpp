#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "coarse/rational.hpp"

namespace coarse {

using Vertex = std::uint32_t;
using Distance = std::uint32_t;
using Edge = std::pair<Vertex, Vertex>;
// Sorted, duplicate-free list of vertex ids.
using VertexSet = std::vector<Vertex>;

inline constexpr Distance kUnreachable = std::numeric_limits<Distance>::max();

VertexSet make_vertex_set(std::vector<Vertex> vertices);

// Connected components of the graph on n vertices with the given edges,
// each sorted, ordered by smallest member.
std::vector<VertexSet> connected_components(std::size_t n,
                                            std::span<const Edge> edges);

namespace detail {
struct GraphData;
class DistanceCache;
}  // namespace detail

// Finite connected graph with unit edges. Immutable; copies share the
// adjacency data and the lazily filled distance oracle, which is safe for
// concurrent readers.
class MetricGraph {
 public:
  MetricGraph();
  // Loops are rejected, parallel edges merged. Throws ConnectivityError when
  // the result is disconnected.
  MetricGraph(std::size_t vertex_count, std::span<const Edge> edges);

  std::size_t vertex_count() const noexcept;
  std::size_t edge_count() const noexcept;
  // Neighbours in increasing id order.
  std::span<const Vertex> neighbors(Vertex v) const;
  bool adjacent(Vertex u, Vertex v) const;
  // Each edge once, as (u, v) with u < v, sorted.
  std::vector<Edge> edges() const;
  void check_vertex(Vertex v) const;
  // Stable content hash of the edge list.
  std::uint64_t fingerprint() const noexcept;

  Distance distance(Vertex u, Vertex v) const;
  // Cached single-source row.
  std::shared_ptr<const std::vector<Distance>> distances_from(Vertex s) const;
  // Uncached BFS; optional depth cut-off leaves farther vertices unreachable.
  std::vector<Distance> bfs(Vertex s, Distance max_depth = kUnreachable) const;
  // Multi-source BFS: distance from every vertex to the set.
  std::vector<Distance> distances_to_set(std::span<const Vertex> sources) const;
  // For each vertex, the smallest-id member of `sources` among its nearest
  // members, with that distance.
  std::pair<std::vector<Distance>, std::vector<Vertex>> nearest_in_set(
      std::span<const Vertex> sources) const;

  Distance diameter() const;

  // Induced subgraph on `vertices` (sorted), relabelled 0..k-1 in that order.
  // Throws ConnectivityError when disconnected.
  MetricGraph induced(const VertexSet& vertices) const;

 private:
  std::shared_ptr<const detail::GraphData> data_;
  std::shared_ptr<detail::DistanceCache> cache_;
};

// Process-wide knobs for the distance oracle. Entries are counted in
// Distance cells, summed over all graphs' caches individually.
struct OracleConfig {
  std::size_t max_cached_cells = std::size_t{32} << 20;
  // When set, evicted rows are written here and reloaded on a miss.
  std::optional<std::filesystem::path> spill_dir;
};
void set_oracle_config(OracleConfig config);
OracleConfig oracle_config();

// Finite vertex sequence whose consecutive entries are equal or adjacent.
class DottedPath {
 public:
  DottedPath() = default;
  DottedPath(MetricGraph host, std::vector<Vertex> vertices);

  const MetricGraph& host() const noexcept { return host_; }
  const std::vector<Vertex>& vertices() const noexcept { return vertices_; }
  std::size_t size() const noexcept { return vertices_.size(); }
  bool empty() const noexcept { return vertices_.empty(); }
  Vertex front() const { return vertices_.front(); }
  Vertex back() const { return vertices_.back(); }
  Vertex operator[](std::size_t i) const { return vertices_[i]; }
  // Number of consecutive pairs that are adjacent (not repeated).
  Distance length() const noexcept;
  VertexSet vertex_set() const { return make_vertex_set(vertices_); }

 private:
  MetricGraph host_;
  std::vector<Vertex> vertices_;
};

// (lambda, epsilon) with |i-j|/lambda - epsilon <= d <= lambda|i-j| + epsilon.
struct QiCertificate {
  Rational lambda{1};
  Rational epsilon{0};
  friend bool operator==(const QiCertificate&, const QiCertificate&) = default;
};

struct DeltaReport {
  Rational delta{0};
  // (p, x, y, z) realising (x.y)_p = min{(x.z)_p, (y.z)_p} - delta.
  std::array<Vertex, 4> witness{0, 0, 0, 0};
  bool sampled = false;
  std::uint64_t quadruples_examined = 0;
};

struct DeltaOptions {
  std::size_t exhaustive_cap = 400;
  bool allow_sampling = false;
  std::uint64_t samples = 2'000'000;
  std::uint64_t seed = 1;
};

struct ChainedPath {
  DottedPath path;
  // y_m, y_{m+1}, ... : the successive projections (first entry is y).
  std::vector<Vertex> hops;
};

struct Barycenter {
  Vertex center = 0;
  Distance radius = 0;
};

struct GraphApproximation {
  MetricGraph graph;
  // Pairs violating d_in <= d_graph <= d_in + 1.
  std::size_t bound_violations = 0;
};

DottedPath geodesic(const MetricGraph& g, Vertex u, Vertex v);
VertexSet interval(const MetricGraph& g, Vertex u, Vertex v);
// Geodesic from u to v minimising the largest distance of its vertices to
// `near`; smallest ids among those.
DottedPath geodesic_near(const MetricGraph& g, Vertex u, Vertex v,
                         std::span<const Vertex> near);
// Hausdorff distance from p to the nearer of two geodesics between its
// endpoints: the lexicographic one and geodesic_near(p).
Distance hausdorff_to_geodesic(const DottedPath& p);
Rational gromov_product(const MetricGraph& g, Vertex p, Vertex x, Vertex y);
DeltaReport gromov_delta(const MetricGraph& g, const DeltaOptions& options = {});
Distance slim_triangle_defect(const MetricGraph& g, Vertex x, Vertex y, Vertex z);

QiCertificate certify_quasigeodesic(const DottedPath& alpha);
// Smallest epsilon making alpha a (lambda, epsilon)-quasigeodesic.
Rational min_epsilon(const DottedPath& alpha, Rational lambda);
// The certificate grid {1 + k/4}.
Rational lambda_grid(unsigned k);
// Exhaustive re-check of a certificate against every index pair.
bool verify_certificate(const DottedPath& alpha, const QiCertificate& cert);

Distance hausdorff_distance(const MetricGraph& g, std::span<const Vertex> a,
                            std::span<const Vertex> b);
Distance quasiconvexity_constant(const MetricGraph& g, std::span<const Vertex> a);
Vertex project(const MetricGraph& g, std::span<const Vertex> a, Vertex x);
Distance set_diameter(const MetricGraph& g, std::span<const Vertex> a);
ChainedPath chained_projection_path(const MetricGraph& g,
                                    const std::vector<VertexSet>& blocks,
                                    Vertex y, Vertex y_end);
Barycenter barycenter(const MetricGraph& g, Vertex x, Vertex y, Vertex z);
GraphApproximation graph_approximation(
    const std::vector<std::vector<Rational>>& dist);

// Concatenates paths sharing endpoints (back of one == front of the next).
DottedPath concatenate(const MetricGraph& host,
                       const std::vector<std::vector<Vertex>>& pieces);

// True when `map` is a bijection V(a) -> V(b) carrying edges onto edges.
bool is_isomorphism(const MetricGraph& a, const MetricGraph& b,
                    std::span<const Vertex> map);

}  // namespace coarse
