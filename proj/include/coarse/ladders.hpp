#pragma once

#include <optional>
#include <vector>

#include "coarse/bundle.hpp"

namespace coarse {

// Map s: B -> X with pi(s(b)) = b. The certificate is (1, eps) with eps the
// largest excess d_X(s b, s b') - d_B(b, b'); the lower bound is automatic.
struct Section {
  GraphBundle bundle;
  std::vector<Vertex> assignment;
  QiCertificate certificate;

  Vertex operator()(Vertex b) const { return assignment[b]; }
};

Section make_section(const GraphBundle& bd, std::vector<Vertex> assignment);
// Section through x built from geodesic lifts of lexicographic base
// geodesics starting at pi(x). Works for any bundle.
SectionFactory lift_section_factory(const GraphBundle& bd);

// L(s1, s2): for each base vertex the fibre geodesic from s1(b) to s2(b).
// Rungs are total-graph paths; rung b runs from sigma1(b) to sigma2(b).
struct Ladder {
  GraphBundle bundle;
  Section sigma1, sigma2;
  std::vector<DottedPath> rungs;

  Distance rung_length(Vertex b) const { return rungs[b].length(); }
  bool contains(Vertex x) const;
  // Position of x on its rung, if it lies there.
  std::optional<std::size_t> rung_position(Vertex x) const;
  VertexSet vertex_set() const;
};

// Rungs are lexicographic fibre geodesics.
Ladder make_ladder(const Section& s1, const Section& s2);
// Subladder of L between two sections lying in L; rungs are slices of L's
// rungs. Throws InputError when a section leaves L.
Ladder sub_ladder(const Ladder& l, const Section& s1, const Section& s2);

// Nearest rung point over pi(x) in the fibre metric, smallest id on ties.
Vertex ladder_retraction(const Ladder& l, Vertex x);
// The retraction for every total vertex.
std::vector<Vertex> ladder_retraction_map(const Ladder& l);
// max d_X(r u, r v) over edges uv of X.
Distance retraction_lipschitz(const Ladder& l);

Section retract_section(const Ladder& l, const Section& s);
// Retraction of factory(x) into L. Throws DependencyError without a
// factory and InputError when x is not on L.
Section section_in_ladder(const Ladder& l, Vertex x, const SectionFactory& factory);

struct NeckReport {
  Distance r = 0;
  VertexSet u;  // trusted base vertices with rung length <= r
  std::optional<Distance> girth;     // over trusted base vertices
  std::optional<Distance> diameter;  // of u; absent when u is empty
  Distance quasiconvexity = 0;
};
NeckReport neck(const Ladder& l, Distance r);
// Minimum rung length over trusted base vertices.
std::optional<Distance> trusted_girth(const Ladder& l);

// max of diam P_A(B) and diam P_B(A), projections with smallest-id ties.
Distance coboundedness(const MetricGraph& g, const VertexSet& a, const VertexSet& b);

enum class BlockType { TypeI, TypeII, Final, Trivial };
const char* block_type_name(BlockType t);

enum class GatePolicy { Require, Waive };

struct DecompositionParams {
  Distance r0 = 3;
  Distance r1 = 9;
  Distance slack = 1;
  std::optional<FlaringReport> gate;
  GatePolicy policy = GatePolicy::Require;
  SectionFactory sections;
};

// Defaults R0 = M + 2 and R1 = 3 R0 from a passed flaring report.
DecompositionParams params_from_gate(const FlaringReport& gate, SectionFactory sections);

struct LadderBlock {
  BlockType type = BlockType::Trivial;
  std::size_t t_begin = 0, t_end = 0;  // positions on the b0 rung
  Section lower, upper;                // Sigma_i, Sigma_{i+1}
  std::optional<Section> helper;       // through alpha(t_end - 1), type II
  Distance girth = 0;
  std::optional<Distance> helper_girth;
};

struct Decomposition {
  Ladder ladder;
  Vertex b0 = 0;
  DottedPath alpha;  // the b0 rung
  DecompositionParams params;
  std::vector<LadderBlock> blocks;
};

Decomposition decompose_ladder(const Ladder& l, Vertex b0, const DecompositionParams& params);

// Recomputes every girth from scratch and checks tag windows, helper
// placement and Sigma_{i+1} in L(Sigma_i, Sigma'). Returns failure messages.
std::vector<std::string> verify_decomposition(const Decomposition& d);

}  // namespace coarse
