#include "coarse/paths.hpp"

#include <algorithm>
#include <random>

#include "coarse/error.hpp"

namespace coarse {

namespace {

std::string name(Vertex v) { return std::to_string(v); }

// Accumulates a path from pieces sharing endpoints, dropping repeats.
class Builder {
 public:
  explicit Builder(MetricGraph host) : host_(std::move(host)) {}

  std::size_t last() const { return v_.size() - 1; }
  const std::vector<Vertex>& vertices() const { return v_; }

  void append(const std::vector<Vertex>& piece) {
    for (Vertex x : piece) {
      if (!v_.empty() && v_.back() == x) continue;
      if (!v_.empty() && !host_.adjacent(v_.back(), x))
        throw InvariantError("constructed path jumps from " + name(v_.back()) + " to " + name(x));
      v_.push_back(x);
    }
  }

  // Section values along the base path; non-adjacent steps are joined by a
  // host geodesic. Returns the number of inserted edges.
  Distance append_lift(const Section& s, const DottedPath& base_path) {
    Distance filled = 0;
    for (Vertex b : base_path.vertices()) {
      const Vertex x = s(b);
      if (!v_.empty() && v_.back() != x && !host_.adjacent(v_.back(), x)) {
        const auto g = geodesic(host_, v_.back(), x);
        filled += g.length();
        append(g.vertices());
      } else {
        append({x});
      }
    }
    return filled;
  }

  DottedPath finish() { return DottedPath(host_, v_); }

 private:
  MetricGraph host_;
  std::vector<Vertex> v_;
};

// The part of L's rung over b between x1 and x2, oriented from x1.
std::vector<Vertex> rung_slice(const Ladder& l, Vertex b, Vertex x1, Vertex x2) {
  const auto& r = l.rungs[b].vertices();
  const auto p1 = std::find(r.begin(), r.end(), x1), p2 = std::find(r.begin(), r.end(), x2);
  if (p1 == r.end() || p2 == r.end())
    throw InvariantError("rung over " + name(b) + " misses a section point");
  if (p1 <= p2) return {p1, p2 + 1};
  std::vector<Vertex> out(p2, p1 + 1);
  std::reverse(out.begin(), out.end());
  return out;
}

bool trusted_point(const GraphBundle& bd, Vertex x) {
  return bd.trusted_vertex(x) && bd.trusted_base(bd.project(x));
}

void finish_path(ConstructedPath& out, Builder& builder, Vertex y, Vertex y2) {
  out.path = builder.finish();
  out.certificate = certify_quasigeodesic(out.path);
  if (out.path.front() != y || out.path.back() != y2)
    throw InvariantError("constructed path has the wrong endpoints");
  out.hausdorff_to_geodesic = hausdorff_to_geodesic(out.path);
}

}  // namespace

ConstructedPath construct_c(const GraphBundle& bd, Vertex y, Vertex y2, const Section& s1,
                            const Section& s2, const DecompositionParams& params) {
  const auto& base = bd.base();
  if (!trusted_point(bd, y) || !trusted_point(bd, y2))
    throw InputError("construct_c: endpoint outside the trusted interior");
  if (s1(bd.project(y)) != y || s2(bd.project(y2)) != y2)
    throw InputError("construct_c: sections do not pass through the endpoints");

  ConstructedPath out;
  out.ladder = make_ladder(s1, s2);
  const Ladder& l = out.ladder;
  const Decomposition d = decompose_ladder(l, bd.project(y), params);
  out.sections.push_back(d.blocks.front().lower);
  for (const auto& blk : d.blocks) {
    out.sections.push_back(blk.upper);
    out.block_types.push_back(blk.type);
    out.block_girths.push_back(blk.girth);
  }

  Builder builder(bd.total());
  auto add_piece = [&](std::size_t block, std::size_t lower, std::size_t upper, Vertex from,
                       Vertex turn) {
    PathPiece p{block, lower, upper, from, turn, 0, 0, 0, 0, 0, 0};
    p.lift_begin = builder.vertices().empty() ? 0 : builder.last();
    p.filled = builder.append_lift(out.sections[lower], geodesic(base, from, turn));
    p.lift_end = p.fiber_begin = builder.last();
    builder.append(rung_slice(l, turn, out.sections[lower](turn), out.sections[upper](turn)));
    p.fiber_end = builder.last();
    out.pieces.push_back(p);
  };

  Vertex cur = y;
  out.waypoints.push_back({y, 0, d.blocks.front().type});
  for (std::size_t i = 0; i < d.blocks.size(); ++i) {
    const auto& blk = d.blocks[i];
    const Ladder lb = sub_ladder(l, blk.lower, blk.upper);
    const Vertex from = bd.project(cur);
    BlockPoints pts;
    if (blk.type == BlockType::TypeII) {
      const std::size_t h = out.sections.size();
      out.sections.push_back(*blk.helper);
      const auto u1 = neck(sub_ladder(lb, blk.lower, *blk.helper), params.r1).u;
      const auto u2 = neck(sub_ladder(lb, *blk.helper, blk.upper), params.r0).u;
      if (u1.empty() || u2.empty())
        throw InvariantError("construct_c: empty neck in type II block " + std::to_string(i));
      const Vertex v = project(base, u1, from);
      const Vertex w = project(base, u2, v);
      add_piece(i, i, h, from, v);
      add_piece(i, h, i + 1, v, w);
      pts.v = v;
      pts.w = w;
      cur = blk.upper(w);
    } else {
      const Distance r = blk.type == BlockType::TypeI ? params.r0 + params.slack : params.r0;
      const auto u = neck(lb, r).u;
      if (u.empty())
        throw InvariantError("construct_c: empty neck in block " + std::to_string(i));
      const Vertex ui = project(base, u, from);
      add_piece(i, i, i + 1, from, ui);
      pts.u = ui;
      cur = blk.upper(ui);
    }
    out.points.push_back(pts);
    const BlockType next =
        i + 1 < d.blocks.size() ? d.blocks[i + 1].type : BlockType::Final;
    out.waypoints.push_back({cur, i + 1, next});
  }
  const std::size_t n = d.blocks.size();
  add_piece(n, n, n, bd.project(cur), bd.project(y2));
  out.waypoints.push_back({y2, n, BlockType::Final});
  if (builder.vertices().back() != y2) throw InvariantError("construct_c: path misses y'");
  finish_path(out, builder, y, y2);
  return out;
}

ModifiedPath construct_c_bar(const GraphBundle& bd, const VertexSet& a,
                             const ConstructedPath& c) {
  ModifiedPath out{restrict_bundle(bd, a), {}};
  const GraphBundle& yb = out.y.bundle;
  const auto& ids = out.y.total_ids;
  std::vector<Vertex> to_y(bd.total().vertex_count(), kUnreachable);
  for (Vertex k = 0; k < ids.size(); ++k) to_y[ids[k]] = k;
  auto local = [&](Vertex b) {
    return static_cast<Vertex>(std::lower_bound(a.begin(), a.end(), b) - a.begin());
  };
  auto in_a = [&](Vertex b) { return std::binary_search(a.begin(), a.end(), b); };
  auto proj = [&](Vertex b) { return project(bd.base(), a, b); };
  auto y_of = [&](Vertex x) {
    if (to_y[x] == kUnreachable) throw InvariantError("c-bar: vertex " + name(x) + " outside Y");
    return to_y[x];
  };

  const Vertex y = c.path.front(), y2 = c.path.back();
  if (!in_a(bd.project(y)) || !in_a(bd.project(y2)))
    throw InputError("construct_c_bar: endpoints not over the subbase");

  ConstructedPath& p = out.path;
  for (const auto& s : c.sections) {
    std::vector<Vertex> assignment(a.size());
    for (Vertex k = 0; k < a.size(); ++k) assignment[k] = y_of(s(a[k]));
    p.sections.push_back(make_section(yb, std::move(assignment)));
  }
  p.block_types = c.block_types;
  for (std::size_t k = 0; k < c.block_types.size(); ++k) {
    Distance g = kUnreachable, all = kUnreachable;
    for (Vertex b : a) {
      const Distance r = bd.fiber_distance(c.sections[k](b), c.sections[k + 1](b));
      all = std::min(all, r);
      if (bd.trusted_base(b)) g = std::min(g, r);
    }
    p.block_girths.push_back(g == kUnreachable ? all : g);
  }
  for (const auto& w : c.waypoints)
    p.waypoints.push_back({p.sections[w.section](local(proj(bd.project(w.y)))), w.section,
                           w.type});
  for (const auto& pts : c.points) {
    BlockPoints q;
    if (pts.u) q.u = local(proj(*pts.u));
    if (pts.v) q.v = local(proj(*pts.v));
    if (pts.w) q.w = local(proj(*pts.w));
    p.points.push_back(q);
  }

  Builder builder(yb.total());
  for (const auto& cp : c.pieces) {
    PathPiece q = cp;
    const Vertex from = proj(cp.from_base), turn = proj(cp.turn_base);
    q.from_base = local(from);
    q.turn_base = local(turn);
    const bool f_in = in_a(cp.from_base), t_in = in_a(cp.turn_base);
    q.shape_case = f_in ? (t_in ? 1 : 2) : (t_in ? 3 : 4);
    q.lift_begin = builder.vertices().empty() ? 0 : builder.last();
    q.filled = builder.append_lift(p.sections[cp.section],
                                   geodesic(yb.base(), q.from_base, q.turn_base));
    q.lift_end = q.fiber_begin = builder.last();
    std::vector<Vertex> rung;
    for (Vertex x : rung_slice(c.ladder, turn, c.sections[cp.section](turn),
                               c.sections[cp.next_section](turn)))
      rung.push_back(y_of(x));
    builder.append(rung);
    q.fiber_end = builder.last();
    p.pieces.push_back(q);
  }
  if (builder.vertices().front() != y_of(y) || builder.vertices().back() != y_of(y2))
    throw InvariantError("c-bar: endpoints moved");
  finish_path(p, builder, y_of(y), y_of(y2));
  return out;
}

std::vector<std::string> check_shapes(const ConstructedPath& c, const ModifiedPath& cbar) {
  std::vector<std::string> bad;
  const auto& p = cbar.path;
  const GraphBundle& yb = cbar.y.bundle;
  const auto& ids = cbar.y.total_ids;
  const auto& a = cbar.y.inclusion.base_map;  // local base id -> parent base id
  if (p.pieces.size() != c.pieces.size()) return {"piece count differs"};
  auto fail = [&](std::size_t k, const std::string& what) {
    bad.push_back("piece " + std::to_string(k) + ": " + what);
  };
  for (std::size_t k = 0; k < c.pieces.size(); ++k) {
    const auto& cp = c.pieces[k];
    const auto& q = p.pieces[k];
    const auto& v = p.path.vertices();
    const bool f_in = std::find(a.begin(), a.end(), cp.from_base) != a.end();
    const bool t_in = std::find(a.begin(), a.end(), cp.turn_base) != a.end();
    const int expect = f_in ? (t_in ? 1 : 2) : (t_in ? 3 : 4);
    if (q.shape_case != expect) fail(k, "case label");
    if (f_in && a[q.from_base] != cp.from_base) fail(k, "lift start moved inside Y");
    if (t_in && a[q.turn_base] != cp.turn_base) fail(k, "turn moved inside Y");
    const Section& s = p.sections[q.section];
    const Section& s2 = p.sections[q.next_section];
    if (v[q.lift_begin] != s(q.from_base)) fail(k, "lift does not start on its section");
    if (v[q.lift_end] != s(q.turn_base)) fail(k, "lift does not end on its section");
    if (q.filled == 0 &&
        q.lift_end - q.lift_begin != yb.base().distance(q.from_base, q.turn_base))
      fail(k, "lift is not over a subbase geodesic");
    if (v[q.fiber_end] != s2(q.turn_base)) fail(k, "fibre segment ends off the next section");
    for (std::size_t i = q.fiber_begin; i <= q.fiber_end; ++i)
      if (yb.project(v[i]) != q.turn_base) fail(k, "fibre segment leaves its fibre");
    if (q.fiber_end - q.fiber_begin != yb.fiber_distance(v[q.fiber_begin], v[q.fiber_end]))
      fail(k, "fibre segment is not a fibre geodesic");
    if (expect == 4 && q.lift_end != q.lift_begin) fail(k, "case 4 has a lift");
    if (expect == 1 || expect == 3) {
      // The fibre segment is the original one.
      const auto& cv = c.path.vertices();
      if (q.fiber_end - q.fiber_begin != cp.fiber_end - cp.fiber_begin) {
        fail(k, "fibre segment differs from the original");
      } else {
        for (std::size_t i = 0; i + q.fiber_begin <= q.fiber_end; ++i)
          if (ids[v[q.fiber_begin + i]] != cv[cp.fiber_begin + i])
            fail(k, "fibre segment differs from the original");
      }
    }
    if (expect == 1 && q.filled == cp.filled) {
      const auto& cv = c.path.vertices();
      if (q.lift_end - q.lift_begin != cp.lift_end - cp.lift_begin) {
        fail(k, "lift differs from the original");
      } else {
        for (std::size_t i = 0; q.lift_begin + i <= q.lift_end; ++i)
          if (ids[v[q.lift_begin + i]] != cv[cp.lift_begin + i])
            fail(k, "lift differs from the original");
      }
    }
  }
  return bad;
}

PathReport verify_path(const ConstructedPath& p, const MetricGraph& ambient) {
  PathReport r;
  const auto& v = p.path.vertices();
  r.connected = !v.empty();
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] != v[i - 1] && !ambient.adjacent(v[i], v[i - 1])) r.connected = false;
  const DottedPath path(ambient, v);
  r.certificate = certify_quasigeodesic(path);
  r.hausdorff_to_geodesic = hausdorff_to_geodesic(path);
  // Waypoints y_0 .. y_n; the last entry is the endpoint.
  for (std::size_t i = 0; i + 2 < p.waypoints.size(); ++i) {
    const auto& next = p.waypoints[i + 1];
    const auto& s = p.sections[next.section].assignment;
    const Vertex nearest = project(ambient, make_vertex_set(s), p.waypoints[i].y);
    r.projection_defects.push_back(ambient.distance(next.y, nearest));
  }
  return r;
}

std::vector<std::optional<Distance>> proximity_curve(const MetricGraph& x, Vertex y0_x,
                                                     const MetricGraph& y, Vertex y0_y,
                                                     const std::vector<ProximityInput>& pairs,
                                                     Distance d_max) {
  std::vector<std::optional<Distance>> curve(d_max + 1);
  const auto rx = x.distances_from(y0_x);
  const auto ry = y.distances_from(y0_y);
  for (const auto& pr : pairs) {
    Distance dx = kUnreachable, dy = kUnreachable;
    for (Vertex v : pr.c->path.vertices()) dx = std::min(dx, (*rx)[v]);
    for (Vertex v : pr.cbar->path.path.vertices()) dy = std::min(dy, (*ry)[v]);
    for (Distance d = dx; d <= d_max; ++d) curve[d] = std::max(curve[d].value_or(0), dy);
  }
  return curve;
}

std::vector<PathSample> sample_paths(const GraphBundle& bd, const VertexSet& a,
                                     const DecompositionParams& params, std::size_t pairs,
                                     std::uint64_t seed) {
  if (!params.sections) throw DependencyError("sample_paths: no section factory");
  std::vector<Vertex> pool;
  for (Vertex x = 0; x < bd.total().vertex_count(); ++x)
    if (trusted_point(bd, x) && std::binary_search(a.begin(), a.end(), bd.project(x)))
      pool.push_back(x);
  if (pool.size() < 2) throw InputError("sample_paths: fewer than two trusted vertices over a");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<PathSample> out;
  for (std::size_t i = 0; i < pairs; ++i) {
    PathSample s;
    s.y = pool[pick(rng)];
    do s.y2 = pool[pick(rng)]; while (s.y2 == s.y);
    const auto c = construct_c(bd, s.y, s.y2, make_section(bd, params.sections(s.y)),
                               make_section(bd, params.sections(s.y2)), params);
    const auto cbar = construct_c_bar(bd, a, c);
    s.c = c.certificate;
    s.hd_c = c.hausdorff_to_geodesic;
    s.c_bar = cbar.path.certificate;
    s.hd_c_bar = cbar.path.hausdorff_to_geodesic;
    s.shape_violations = check_shapes(c, cbar).size();
    out.push_back(s);
  }
  return out;
}

PathCalibration calibrate_paths(const std::vector<PathSample>& samples) {
  PathCalibration out;
  out.pairs = samples.size();
  if (samples.empty()) return out;
  const std::size_t rank = (99 * samples.size() + 99) / 100 - 1;
  auto p99 = [&](auto field) {
    std::vector<decltype(field(samples.front()))> v;
    for (const auto& s : samples) v.push_back(field(s));
    std::nth_element(v.begin(), v.begin() + rank, v.end());
    return v[rank];
  };
  out.lambda_c = p99([](const PathSample& s) { return s.c.lambda; });
  out.epsilon_c = p99([](const PathSample& s) { return s.c.epsilon; });
  out.lambda_c_bar = p99([](const PathSample& s) { return s.c_bar.lambda; });
  out.epsilon_c_bar = p99([](const PathSample& s) { return s.c_bar.epsilon; });
  out.hd_c = p99([](const PathSample& s) { return s.hd_c; });
  out.hd_c_bar = p99([](const PathSample& s) { return s.hd_c_bar; });
  return out;
}

}  // namespace coarse
