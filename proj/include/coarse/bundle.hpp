#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "coarse/metric_graph.hpp"

namespace coarse {

namespace detail {
struct BundleData;
}

struct BundleOptions {
  // Largest M for which eta is tabulated; default 2 diam(B) + 4.
  std::optional<Distance> eta_max_m;
};

// Validated metric graph bundle pi: X -> B. Immutable; copies share data.
//
// Fibres are stored as sorted lists of total-graph ids; the fibre graph of
// F_b uses local ids, the position of a vertex in that list.
//
// Truncated examples carry two depth tables. interior_depth(b) is the base
// distance from b to the truncation frontier (kUnreachable when the base is
// not truncated). vertex_depth(x), when present, is 0 for vertices that may
// carry truncation artifacts; paths avoiding them are trusted.
class GraphBundle {
 public:
  GraphBundle();

  const MetricGraph& total() const;
  const MetricGraph& base() const;
  Vertex project(Vertex x) const;
  const std::vector<Vertex>& projection() const;

  const VertexSet& fiber(Vertex b) const;
  const MetricGraph& fiber_graph(Vertex b) const;
  Vertex local_id(Vertex x) const;
  Vertex global_id(Vertex b, Vertex local) const;
  // Distance in the fibre metric; x and y must lie in the same fibre.
  Distance fiber_distance(Vertex x, Vertex y) const;
  // Lift of x's smallest-id neighbour over the adjacent base vertex b.
  Vertex step(Vertex x, Vertex b) const;

  Distance interior_depth(Vertex b) const;
  const std::vector<Distance>& interior_depths() const;
  const std::optional<std::vector<Distance>>& vertex_depths() const;
  bool trusted_base(Vertex b, Distance margin = 1) const;
  bool trusted_vertex(Vertex x) const;
  bool trusted_vertices(std::span<const Vertex> xs) const;

  // eta(M) = max fibre distance over same-fibre pairs with d_X <= M.
  // Tabulated lazily up to eta_max_m(); beyond it the max fibre diameter.
  const std::vector<Distance>& eta_profile() const;
  Distance eta(Distance m) const;
  Distance eta_max_m() const;
  Distance max_fiber_diameter() const;

 private:
  friend GraphBundle validate_bundle(MetricGraph, MetricGraph, std::vector<Vertex>,
                                     std::vector<Distance>,
                                     std::optional<std::vector<Distance>>,
                                     BundleOptions);
  std::shared_ptr<detail::BundleData> data_;
};

// Checks the bundle axioms and builds the fibre index. Empty interior_depth
// means untruncated. Throws ValidationError naming a witness.
GraphBundle validate_bundle(MetricGraph total, MetricGraph base,
                            std::vector<Vertex> projection,
                            std::vector<Distance> interior_depth = {},
                            std::optional<std::vector<Distance>> vertex_depth = {},
                            BundleOptions options = {});

// Assignment base vertex -> total vertex of a section through the given
// total vertex. Supplied by generators that know a transversal.
using SectionFactory = std::function<std::vector<Vertex>(Vertex through)>;

struct LiftedPath {
  DottedPath path;
  QiCertificate certificate;
};

DottedPath lift_geodesic(const GraphBundle& bd, const DottedPath& gamma, Vertex x);
// Stepwise lift with the same indexing as beta. Checks the sandwich
// |i-j|/k - eps <= d_X <= (k + eps + 1)|i-j| for beta's certificate (k, eps).
LiftedPath lift_quasigeodesic(const GraphBundle& bd, const DottedPath& beta, Vertex x);
// Lift choosing a uniformly random cross-edge at each step.
DottedPath random_lift(const GraphBundle& bd, const DottedPath& gamma, Vertex x,
                       std::mt19937_64& rng);

// phi: F_{b1} -> F_{b2}, indexed by local id of F_{b1}, values total ids.
std::vector<Vertex> fiber_identification(const GraphBundle& bd, Vertex b1, Vertex b2);

struct BoundedFlaringProfile {
  // mu[N], absent when no pair was available at that N.
  std::vector<std::optional<Rational>> mu;
  std::vector<std::size_t> samples;
};
BoundedFlaringProfile bounded_flaring_profile(const GraphBundle& bd, Rational k,
                                              Distance n_max, std::size_t samples,
                                              std::uint64_t seed);

struct FlaringPair {
  std::vector<Vertex> window;  // base geodesic of length 2n
  std::vector<Vertex> lift1, lift2;
  Distance d_minus = 0, d0 = 0, d_plus = 0;
  bool from_section = false;
};

struct FlaringReport {
  Rational k{1};
  Distance n = 0;
  Distance m = 0;
  std::optional<Rational> nu;
  // Smallest d_+/d_0 and d_-/d_0 over qualifying pairs.
  std::optional<Rational> forward_min, backward_min;
  std::size_t samples = 0;    // qualifying pairs
  std::size_t attempted = 0;  // pairs drawn
  bool inconclusive = true;   // no qualifying pair
  std::vector<FlaringPair> pairs;
};

struct FlaringOptions {
  std::size_t samples = 400;
  std::uint64_t seed = 1;
  SectionFactory sections;  // optional
};

FlaringReport check_flaring(const GraphBundle& bd, Rational k, Distance n, Distance m,
                            const FlaringOptions& options);
// Re-checks nu * d0 <= max(d-, d+) on every stored pair from the lifts.
bool replay_flaring(const GraphBundle& bd, const FlaringReport& report);
// Smallest M for which check_flaring reports a nu; nullopt if none.
std::optional<FlaringReport> find_flaring_threshold(const GraphBundle& bd, Rational k,
                                                    Distance n,
                                                    const FlaringOptions& options);

struct LipschitzReport {
  Distance vertex_map = 0;  // max d(f u, f v) over edges uv of X1
  Distance base_map = 0;
};

struct BundleMorphism {
  GraphBundle source, target;
  std::vector<Vertex> vertex_map, base_map;
  LipschitzReport lipschitz;
};

// Checks pi2 f = g pi1 and measures the Lipschitz constants.
BundleMorphism make_morphism(GraphBundle source, GraphBundle target,
                             std::vector<Vertex> vertex_map, std::vector<Vertex> base_map);
BundleMorphism identity_morphism(const GraphBundle& bd);

struct Restriction {
  GraphBundle bundle;
  BundleMorphism inclusion;
  // Total id in the parent for each vertex of the restriction.
  std::vector<Vertex> total_ids;
};
Restriction restrict_bundle(const GraphBundle& bd, const VertexSet& a);

struct Pullback {
  GraphBundle bundle;
  BundleMorphism morphism;
};
Pullback pullback(const GraphBundle& bd, const MetricGraph& b1, std::vector<Vertex> g,
                  Distance lipschitz_bound);

// (1, eps) quasi-isometry constants of a map between two graphs: eps is
// the smallest additive constant with lambda 1; reach is the coarse
// surjectivity radius.
struct MapConstants {
  QiCertificate certificate;
  Distance reach = 0;
};
MapConstants map_constants(const MetricGraph& a, const MetricGraph& b,
                           std::span<const Vertex> map);

struct IsomorphismReport {
  MapConstants base;
  MapConstants fiber_worst;  // componentwise max over fibres
  bool isomorphism_by_criterion = false;
};
IsomorphismReport check_isomorphism(const BundleMorphism& m,
                                    Rational max_epsilon = Rational(4),
                                    Distance max_reach = 4);

}  // namespace coarse
