#include "coarse/ladders.hpp"

#include <algorithm>
#include <string>

#include "coarse/error.hpp"

namespace coarse {

namespace {

std::string name(Vertex v) { return std::to_string(v); }

void check_same_bundle(const Section& a, const Section& b) {
  if (a.bundle.total().fingerprint() != b.bundle.total().fingerprint() ||
      a.assignment.size() != b.assignment.size())
    throw InputError("sections belong to different bundles");
}

}  // namespace

Section make_section(const GraphBundle& bd, std::vector<Vertex> assignment) {
  const auto& base = bd.base();
  if (assignment.size() != base.vertex_count())
    throw InputError("section: assignment size differs from the base");
  for (Vertex b = 0; b < assignment.size(); ++b) {
    bd.total().check_vertex(assignment[b]);
    if (bd.project(assignment[b]) != b)
      throw InputError("section: pi(s(" + name(b) + ")) != " + name(b));
  }
  std::int64_t eps = 0;
  for (Vertex b = 0; b < assignment.size(); ++b) {
    const auto rb = base.distances_from(b);
    const auto rx = bd.total().distances_from(assignment[b]);
    for (Vertex c = b + 1; c < assignment.size(); ++c)
      eps = std::max(eps, static_cast<std::int64_t>((*rx)[assignment[c]]) -
                              static_cast<std::int64_t>((*rb)[c]));
  }
  return {bd, std::move(assignment), {Rational(1), Rational(eps)}};
}

SectionFactory lift_section_factory(const GraphBundle& bd) {
  return [bd](Vertex x) {
    const Vertex b = bd.project(x);
    std::vector<Vertex> s(bd.base().vertex_count());
    for (Vertex c = 0; c < s.size(); ++c)
      s[c] = lift_geodesic(bd, geodesic(bd.base(), b, c), x).back();
    return s;
  };
}

bool Ladder::contains(Vertex x) const { return rung_position(x).has_value(); }

std::optional<std::size_t> Ladder::rung_position(Vertex x) const {
  const auto& v = rungs[bundle.project(x)].vertices();
  const auto it = std::find(v.begin(), v.end(), x);
  if (it == v.end()) return std::nullopt;
  return static_cast<std::size_t>(it - v.begin());
}

VertexSet Ladder::vertex_set() const {
  std::vector<Vertex> all;
  for (const auto& r : rungs) all.insert(all.end(), r.vertices().begin(), r.vertices().end());
  return make_vertex_set(std::move(all));
}

Ladder make_ladder(const Section& s1, const Section& s2) {
  check_same_bundle(s1, s2);
  const GraphBundle& bd = s1.bundle;
  Ladder l{bd, s1, s2, {}};
  l.rungs.reserve(s1.assignment.size());
  for (Vertex b = 0; b < s1.assignment.size(); ++b) {
    const auto local = geodesic(bd.fiber_graph(b), bd.local_id(s1(b)), bd.local_id(s2(b)));
    std::vector<Vertex> rung;
    rung.reserve(local.size());
    for (Vertex v : local.vertices()) rung.push_back(bd.global_id(b, v));
    l.rungs.emplace_back(bd.total(), std::move(rung));
  }
  return l;
}

Ladder sub_ladder(const Ladder& l, const Section& s1, const Section& s2) {
  check_same_bundle(l.sigma1, s1);
  check_same_bundle(l.sigma1, s2);
  Ladder out{l.bundle, s1, s2, {}};
  out.rungs.reserve(l.rungs.size());
  for (Vertex b = 0; b < l.rungs.size(); ++b) {
    const auto p1 = l.rung_position(s1(b)), p2 = l.rung_position(s2(b));
    if (!p1 || !p2) throw InputError("sub_ladder: section leaves the ladder over " + name(b));
    const auto& v = l.rungs[b].vertices();
    std::vector<Vertex> slice;
    if (*p1 <= *p2) {
      slice.assign(v.begin() + static_cast<std::ptrdiff_t>(*p1),
                   v.begin() + static_cast<std::ptrdiff_t>(*p2) + 1);
    } else {
      for (std::size_t i = *p1 + 1; i-- > *p2;) slice.push_back(v[i]);
    }
    out.rungs.emplace_back(l.bundle.total(), std::move(slice));
  }
  return out;
}

Vertex ladder_retraction(const Ladder& l, Vertex x) {
  const GraphBundle& bd = l.bundle;
  const Vertex b = bd.project(x);
  const auto row = bd.fiber_graph(b).distances_from(bd.local_id(x));
  Vertex best = x;
  Distance best_d = kUnreachable;
  for (Vertex r : l.rungs[b].vertices()) {
    const Distance d = (*row)[bd.local_id(r)];
    if (d < best_d || (d == best_d && r < best)) {
      best = r;
      best_d = d;
    }
  }
  return best;
}

std::vector<Vertex> ladder_retraction_map(const Ladder& l) {
  const GraphBundle& bd = l.bundle;
  std::vector<Vertex> out(bd.total().vertex_count());
  for (Vertex b = 0; b < l.rungs.size(); ++b) {
    std::vector<Vertex> sources;
    for (Vertex r : l.rungs[b].vertices()) sources.push_back(bd.local_id(r));
    std::sort(sources.begin(), sources.end());
    const auto [dist, nearest] = bd.fiber_graph(b).nearest_in_set(sources);
    const auto& f = bd.fiber(b);
    for (std::size_t i = 0; i < f.size(); ++i) out[f[i]] = bd.global_id(b, nearest[i]);
  }
  return out;
}

Distance retraction_lipschitz(const Ladder& l) {
  const auto r = ladder_retraction_map(l);
  const auto& g = l.bundle.total();
  Distance worst = 0;
  for (Vertex u = 0; u < g.vertex_count(); ++u) {
    const auto row = g.distances_from(r[u]);
    for (Vertex v : g.neighbors(u))
      if (v > u) worst = std::max(worst, (*row)[r[v]]);
  }
  return worst;
}

Section retract_section(const Ladder& l, const Section& s) {
  check_same_bundle(l.sigma1, s);
  std::vector<Vertex> a(s.assignment.size());
  for (Vertex b = 0; b < a.size(); ++b) a[b] = ladder_retraction(l, s(b));
  return make_section(l.bundle, std::move(a));
}

Section section_in_ladder(const Ladder& l, Vertex x, const SectionFactory& factory) {
  if (!factory) throw DependencyError("section_in_ladder: no ambient section factory");
  if (!l.contains(x)) throw InputError("section_in_ladder: vertex " + name(x) + " not on ladder");
  Section s = make_section(l.bundle, factory(x));
  if (s(l.bundle.project(x)) != x)
    throw InputError("section_in_ladder: factory section misses " + name(x));
  return retract_section(l, s);
}

std::optional<Distance> trusted_girth(const Ladder& l) {
  std::optional<Distance> g;
  for (Vertex b = 0; b < l.rungs.size(); ++b)
    if (l.bundle.trusted_base(b)) g = std::min(g.value_or(kUnreachable), l.rung_length(b));
  return g;
}

NeckReport neck(const Ladder& l, Distance r) {
  NeckReport out;
  out.r = r;
  out.girth = trusted_girth(l);
  for (Vertex b = 0; b < l.rungs.size(); ++b)
    if (l.bundle.trusted_base(b) && l.rung_length(b) <= r) out.u.push_back(b);
  if (!out.u.empty()) {
    out.diameter = set_diameter(l.bundle.base(), out.u);
    out.quasiconvexity = quasiconvexity_constant(l.bundle.base(), out.u);
  }
  return out;
}

Distance coboundedness(const MetricGraph& g, const VertexSet& a, const VertexSet& b) {
  if (a.empty() || b.empty()) throw InputError("coboundedness: empty set");
  auto image_diameter = [&](const VertexSet& onto, const VertexSet& from) {
    const auto nearest = g.nearest_in_set(onto).second;
    std::vector<Vertex> image;
    for (Vertex v : from) image.push_back(nearest[v]);
    return set_diameter(g, make_vertex_set(std::move(image)));
  };
  return std::max(image_diameter(a, b), image_diameter(b, a));
}

const char* block_type_name(BlockType t) {
  switch (t) {
    case BlockType::TypeI: return "I";
    case BlockType::TypeII: return "II";
    case BlockType::Final: return "final";
    case BlockType::Trivial: return "trivial";
  }
  return "?";
}

DecompositionParams params_from_gate(const FlaringReport& gate, SectionFactory sections) {
  DecompositionParams p;
  p.r0 = gate.m + 2;
  p.r1 = 3 * p.r0;
  p.gate = gate;
  p.sections = std::move(sections);
  return p;
}

Decomposition decompose_ladder(const Ladder& l, Vertex b0, const DecompositionParams& params) {
  if (params.policy == GatePolicy::Require) {
    if (!params.gate || !params.gate->nu)
      throw GateError("decompose_ladder: flaring gate not passed for this bundle");
    if (params.r0 < params.gate->m)
      throw InputError("decompose_ladder: R0 below the measured flaring threshold");
  }
  if (params.r1 <= params.r0) throw InputError("decompose_ladder: need R1 > R0");
  l.bundle.base().check_vertex(b0);
  if (!trusted_girth(l)) throw InputError("decompose_ladder: no trusted base vertex");

  Decomposition d{l, b0, l.rungs[b0], params, {}};
  const auto& alpha = d.alpha.vertices();
  const std::size_t len = alpha.size() - 1;
  if (len == 0) {
    d.blocks.push_back({BlockType::Trivial, 0, 0, l.sigma1, l.sigma2, {}, 0, {}});
    return d;
  }

  Section cur = l.sigma1;
  Ladder rest = l;  // L(cur, sigma2)
  std::size_t t_begin = 0;
  std::optional<Section> prev;  // Sigma_{t-1}, when t - 1 > t_begin
  for (std::size_t t = 1; t <= len; ++t) {
    Section cand = t == len ? l.sigma2 : section_in_ladder(rest, alpha[t], params.sections);
    const Ladder block = sub_ladder(l, cur, cand);
    const Distance g = *trusted_girth(block);
    const bool in_window = g >= params.r0 && g <= params.r0 + params.slack;
    const bool past = g > params.r0 + params.slack;
    if (!in_window && !past && t < len) {
      prev = std::move(cand);
      continue;
    }
    LadderBlock out{BlockType::Final, t_begin, t, cur, cand, {}, g, {}};
    if (in_window) {
      out.type = BlockType::TypeI;
    } else if (past) {
      out.type = BlockType::TypeII;
      out.helper = retract_section(block, prev ? *prev : cur);
      out.helper_girth = *trusted_girth(sub_ladder(l, cur, *out.helper));
    }
    d.blocks.push_back(std::move(out));
    if (t == len) break;
    cur = std::move(cand);
    rest = sub_ladder(l, cur, l.sigma2);
    t_begin = t;
    prev.reset();
  }
  return d;
}

std::vector<std::string> verify_decomposition(const Decomposition& d) {
  std::vector<std::string> bad;
  const Ladder& l = d.ladder;
  const auto& p = d.params;
  const auto& alpha = d.alpha.vertices();
  auto fail = [&](std::size_t i, const std::string& what) {
    bad.push_back("block " + std::to_string(i) + ": " + what);
  };
  if (d.blocks.empty()) return {"no blocks"};
  if (d.blocks.front().lower.assignment != l.sigma1.assignment) bad.push_back("first section");
  if (d.blocks.back().upper.assignment != l.sigma2.assignment) bad.push_back("last section");
  for (std::size_t i = 0; i < d.blocks.size(); ++i) {
    const auto& blk = d.blocks[i];
    if (i > 0 && (blk.t_begin != d.blocks[i - 1].t_end ||
                  blk.lower.assignment != d.blocks[i - 1].upper.assignment))
      fail(i, "not chained to the previous block");
    if (blk.lower(d.b0) != alpha[blk.t_begin] || blk.upper(d.b0) != alpha[blk.t_end])
      fail(i, "sections miss the partition points");
    Ladder rest;
    try {
      rest = sub_ladder(l, blk.lower, l.sigma2);
      (void)sub_ladder(rest, blk.upper, l.sigma2);
    } catch (const InputError&) {
      fail(i, "upper section leaves L(lower, sigma')");
      continue;
    }
    const auto g = trusted_girth(make_ladder(blk.lower, blk.upper));
    const auto g_slice = trusted_girth(sub_ladder(l, blk.lower, blk.upper));
    if (!g || *g != blk.girth || *g_slice != blk.girth) fail(i, "girth mismatch");
    switch (blk.type) {
      case BlockType::TypeI:
        if (blk.girth < p.r0 || blk.girth > p.r0 + p.slack) fail(i, "type I window");
        break;
      case BlockType::TypeII: {
        if (blk.girth <= p.r0) fail(i, "type II girth not above R0");
        if (!blk.helper) {
          fail(i, "type II without helper");
          break;
        }
        if ((*blk.helper)(d.b0) != alpha[blk.t_end - 1]) fail(i, "helper misses alpha(t-1)");
        const Ladder block = sub_ladder(l, blk.lower, blk.upper);
        try {
          const auto hg = trusted_girth(sub_ladder(block, blk.lower, *blk.helper));
          if (!hg || *hg >= p.r1 || hg != blk.helper_girth) fail(i, "helper girth");
        } catch (const InputError&) {
          fail(i, "helper leaves the block ladder");
        }
        break;
      }
      case BlockType::Final:
        if (i + 1 != d.blocks.size() || blk.girth >= p.r0) fail(i, "final block");
        break;
      case BlockType::Trivial:
        if (alpha.size() != 1) fail(i, "trivial block on a nontrivial rung");
        break;
    }
  }
  return bad;
}

}  // namespace coarse
