#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coarse/ladders.hpp"

namespace coarse {

// One lift-then-rung piece of a constructed path: a lift inside
// sections[section] from over from_base to over turn_base, followed by the
// fibre geodesic over turn_base to sections[next_section]. Index ranges are
// inclusive positions in the path; lift_end == fiber_begin.
struct PathPiece {
  std::size_t block = 0;
  std::size_t section = 0, next_section = 0;
  Vertex from_base = 0, turn_base = 0;
  std::size_t lift_begin = 0, lift_end = 0, fiber_begin = 0, fiber_end = 0;
  // Ambient geodesic edges inserted where consecutive section values were
  // not adjacent.
  Distance filled = 0;
  // For the modified path: 1..4 by membership of from_base and turn_base of
  // the original piece in the subbase (1 both in, 2 only from, 3 only turn,
  // 4 neither). 0 on unmodified paths.
  int shape_case = 0;
};

struct Waypoint {
  Vertex y = 0;
  std::size_t section = 0;  // index into ConstructedPath::sections
  BlockType type = BlockType::Final;
};

// Base points chosen per block: u for case I, v and w for case II.
struct BlockPoints {
  std::optional<Vertex> u, v, w;
};

struct ConstructedPath {
  DottedPath path;
  Ladder ladder;  // L(Sigma, Sigma')
  // Sigma_0 .. Sigma_n, then one helper per type II block.
  std::vector<Section> sections;
  std::vector<Waypoint> waypoints;  // y_0 .. y_n, then the endpoint
  std::vector<BlockPoints> points;
  std::vector<PathPiece> pieces;
  std::vector<BlockType> block_types;
  std::vector<Distance> block_girths;
  QiCertificate certificate;
  Distance hausdorff_to_geodesic = 0;
};

// c(y, y2) inside L(s1, s2). Throws InputError for endpoints outside the
// trusted interior or sections missing them, and InvariantError for an
// empty neck.
ConstructedPath construct_c(const GraphBundle& bd, Vertex y, Vertex y2, const Section& s1,
                            const Section& s2, const DecompositionParams& params);

// path.ladder is left empty. Block girths are taken over the trusted base
// vertices of the subbase, or all of it when none is trusted.
struct ModifiedPath {
  Restriction y;  // the bundle over the subbase
  ConstructedPath path;  // ids of y.bundle; base ids local to the subbase
};

// c-bar over the connected subbase a (sorted base ids of bd).
ModifiedPath construct_c_bar(const GraphBundle& bd, const VertexSet& a,
                             const ConstructedPath& c);

// Violations of the per-case segment grammar of the modified pieces
// against the original ones; empty when every piece matches.
std::vector<std::string> check_shapes(const ConstructedPath& c, const ModifiedPath& cbar);

struct PathReport {
  QiCertificate certificate;
  Distance hausdorff_to_geodesic = 0;
  // d(y_{i+1}, nearest point of y_i on Sigma_{i+1}) per block.
  std::vector<Distance> projection_defects;
  bool connected = false;
};
PathReport verify_path(const ConstructedPath& p, const MetricGraph& ambient);

// For each D, the largest d_Y(y0, c-bar) over pairs whose c passes within D
// of y0 in X; absent when no pair does. y0 is given in both id spaces.
struct ProximityInput {
  const ConstructedPath* c;
  const ModifiedPath* cbar;
};
std::vector<std::optional<Distance>> proximity_curve(const MetricGraph& x, Vertex y0_x,
                                                     const MetricGraph& y, Vertex y0_y,
                                                     const std::vector<ProximityInput>& pairs,
                                                     Distance d_max);

// Measurements of c and c-bar for one pair of endpoints.
struct PathSample {
  Vertex y = 0, y2 = 0;
  QiCertificate c, c_bar;
  Distance hd_c = 0, hd_c_bar = 0;
  std::size_t shape_violations = 0;
};

// `pairs` seeded pairs of distinct trusted interior vertices over the
// subbase a; sections through the endpoints come from params.sections and
// c-bar is taken over a.
std::vector<PathSample> sample_paths(const GraphBundle& bd, const VertexSet& a,
                                     const DecompositionParams& params, std::size_t pairs,
                                     std::uint64_t seed);

// Componentwise nearest-rank 99th percentiles of a sample.
struct PathCalibration {
  Rational lambda_c{1}, epsilon_c{0}, lambda_c_bar{1}, epsilon_c_bar{0};
  Distance hd_c = 0, hd_c_bar = 0;
  std::size_t pairs = 0;
};
PathCalibration calibrate_paths(const std::vector<PathSample>& samples);

}  // namespace coarse
