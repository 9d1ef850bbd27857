#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "coarse/error.hpp"
#include "coarse/generators.hpp"
#include "coarse/paths.hpp"

using namespace coarse;

namespace {

const ExtensionBundle& extension() {
  static const ExtensionBundle ext = gen_extension({});
  return ext;
}

const DecompositionParams& extension_params() {
  static const DecompositionParams p = [] {
    FlaringOptions o;
    o.samples = 400;
    o.seed = 9;
    o.sections = extension().section_factory();
    const auto gate = check_flaring(extension().bundle, Rational(1), 2, 1, o);
    return params_from_gate(gate, extension().section_factory());
  }();
  return p;
}

std::vector<Vertex> trusted_interior(const GraphBundle& bd) {
  std::vector<Vertex> out;
  for (Vertex x = 0; x < bd.total().vertex_count(); ++x)
    if (bd.trusted_vertex(x) && bd.trusted_base(bd.project(x))) out.push_back(x);
  return out;
}

ConstructedPath extension_path(Vertex y, Vertex y2) {
  const auto& ext = extension();
  return construct_c(ext.bundle, y, y2, make_section(ext.bundle, ext.translate_section(y)),
                     make_section(ext.bundle, ext.translate_section(y2)), extension_params());
}

DecompositionParams waived(const GraphBundle& bd) {
  DecompositionParams p;
  p.policy = GatePolicy::Waive;
  p.sections = lift_section_factory(bd);
  return p;
}

VertexSet ray(const ExtensionBundle& ext, int top) {
  VertexSet a;
  for (int k = -static_cast<int>(ext.spec.base_radius); k <= top; ++k)
    a.push_back(ext.base_vertex(k));
  return a;
}

}  // namespace

TEST_CASE("product paths are geodesics") {
  const auto bd = gen_product(make_graph("path:7"), make_graph("path:9"));
  const auto p = waived(bd);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const Vertex y = static_cast<Vertex>(rng() % 63), y2 = static_cast<Vertex>(rng() % 63);
    const auto c = construct_c(bd, y, y2, make_section(bd, p.sections(y)),
                               make_section(bd, p.sections(y2)), p);
    CHECK(c.certificate == QiCertificate{Rational(1), Rational(0)});
    CHECK(c.hausdorff_to_geodesic == 0);
    CHECK(c.path.length() == bd.total().distance(y, y2));
    // L-shaped: fibre moves over pi(y), then one lift.
    for (std::size_t j = 0; j + 1 < c.pieces.size(); ++j) CHECK(c.pieces[j].turn_base == y / 9);
  }
  const auto same = construct_c(bd, 20, 20, make_section(bd, p.sections(20)),
                                make_section(bd, p.sections(20)), p);
  CHECK(same.path.vertices() == std::vector<Vertex>{20});
}

TEST_CASE("construct_c input checks") {
  const auto& ext = extension();
  const auto& bd = ext.bundle;
  const Vertex edge = ext.vertex(ext.spec.base_radius, "");
  const Vertex mid = ext.vertex(0, "");
  const auto s = make_section(bd, ext.translate_section(mid));
  CHECK_THROWS_AS(construct_c(bd, edge, mid, make_section(bd, ext.translate_section(edge)), s,
                              extension_params()),
                  InputError);
  const Vertex other = ext.vertex(0, "a");
  CHECK_THROWS_AS(construct_c(bd, mid, other, s, s, extension_params()), InputError);
  DecompositionParams no_gate = extension_params();
  no_gate.gate.reset();
  CHECK_THROWS_AS(construct_c(bd, mid, other, s,
                              make_section(bd, ext.translate_section(other)), no_gate),
                  GateError);
}

TEST_CASE("extension paths: structure and replay") {
  const auto& ext = extension();
  const auto& bd = ext.bundle;
  const auto pool = trusted_interior(bd);
  const auto& params = extension_params();
  std::mt19937_64 rng(2);
  std::map<std::string, int> types;
  for (int i = 0; i < 40; ++i) {
    const Vertex y = pool[rng() % pool.size()], y2 = pool[rng() % pool.size()];
    const auto c = extension_path(y, y2);
    const auto& v = c.path.vertices();
    REQUIRE(v.front() == y);
    REQUIRE(v.back() == y2);
    for (std::size_t j = 1; j < v.size(); ++j) CHECK(bd.total().adjacent(v[j - 1], v[j]));

    // Lifts stay on their sections unless filled; rungs stay on the ladder.
    for (const auto& piece : c.pieces) {
      const auto& s = c.sections[piece.section];
      if (piece.filled == 0)
        for (std::size_t j = piece.lift_begin; j <= piece.lift_end; ++j)
          CHECK(s(bd.project(v[j])) == v[j]);
      for (std::size_t j = piece.fiber_begin; j <= piece.fiber_end; ++j) {
        CHECK(c.ladder.contains(v[j]));
        CHECK(bd.project(v[j]) == piece.turn_base);
      }
    }

    // Waypoints replay from exact projections onto the necks.
    const auto d = decompose_ladder(c.ladder, bd.project(y), params);
    for (std::size_t b = 0; b < d.blocks.size(); ++b) {
      const auto& blk = d.blocks[b];
      ++types[block_type_name(blk.type)];
      const Vertex from = bd.project(c.waypoints[b].y);
      const auto lb = sub_ladder(c.ladder, blk.lower, blk.upper);
      if (blk.type == BlockType::TypeII) {
        REQUIRE(c.points[b].w);
        CHECK(c.waypoints[b + 1].y == blk.upper(*c.points[b].w));
      } else {
        const Distance r = blk.type == BlockType::TypeI ? params.r0 + params.slack : params.r0;
        const Vertex u = project(bd.base(), neck(lb, r).u, from);
        REQUIRE(c.points[b].u);
        CHECK(*c.points[b].u == u);
        CHECK(c.waypoints[b + 1].y == blk.upper(u));
      }
      // Consecutive sections are separated over the trusted base.
      if (blk.type == BlockType::TypeI)
        for (Vertex x = 0; x < bd.base().vertex_count(); ++x)
          if (bd.trusted_base(x)) CHECK(blk.lower(x) != blk.upper(x));
    }

    const auto again = extension_path(y, y2);
    CHECK(again.path.vertices() == v);
    CHECK(again.certificate == c.certificate);

    const auto report = verify_path(c, bd.total());
    CHECK(report.connected);
    CHECK(report.certificate == c.certificate);
    CHECK(report.hausdorff_to_geodesic == c.hausdorff_to_geodesic);
    CHECK(report.projection_defects.size() == d.blocks.size());
    for (Distance defect : report.projection_defects)
      CHECK(defect <= 2 * bd.max_fiber_diameter());
  }
  for (const auto& [t, n] : types) MESSAGE("blocks of type " << t << ": " << n);
}

TEST_CASE("type II path pieces") {
  const auto bd = gen_product(make_graph("path:2"), make_graph("path:10"));
  DecompositionParams p;
  p.policy = GatePolicy::Waive;
  p.sections = [](Vertex x) {
    const Vertex t = x % 10;
    return std::vector<Vertex>{t, 10 + (t < 5 ? 0u : 9u)};
  };
  const auto c = construct_c(bd, 0, 19, make_section(bd, {0, 10}), make_section(bd, {9, 19}), p);
  REQUIRE(c.block_types.size() == 2);
  CHECK(c.block_types[0] == BlockType::TypeII);
  CHECK(c.points[0].v == 0u);
  CHECK(c.points[0].w == 0u);
  CHECK(c.waypoints[1].y == 5);
  REQUIRE(c.pieces.size() == 4);
  CHECK(c.path.vertices()[c.pieces[0].fiber_end] == 4);
  CHECK(c.path.vertices()[c.pieces[1].fiber_end] == 5);
  CHECK(c.path.back() == 19);
}

TEST_CASE("modified paths") {
  const auto& ext = extension();
  const auto& bd = ext.bundle;
  const auto pool = trusted_interior(bd);
  std::mt19937_64 rng(4);

  // Whole base: nothing changes.
  VertexSet all;
  for (Vertex b = 0; b < bd.base().vertex_count(); ++b) all.push_back(b);
  for (int i = 0; i < 5; ++i) {
    const auto c = extension_path(pool[rng() % pool.size()], pool[rng() % pool.size()]);
    const auto cb = construct_c_bar(bd, all, c);
    std::vector<Vertex> mapped;
    for (Vertex x : cb.path.path.vertices()) mapped.push_back(cb.y.total_ids[x]);
    CHECK(mapped == c.path.vertices());
    CHECK(check_shapes(c, cb).empty());
  }

  // Product over a line with a ray: endpoints over the ray give case 1.
  const auto prod = gen_product(make_graph("path:9"), make_graph("path:6"));
  const auto p = waived(prod);
  const VertexSet neg{0, 1, 2, 3, 4};
  for (int i = 0; i < 20; ++i) {
    const Vertex y = static_cast<Vertex>(rng() % 30), y2 = static_cast<Vertex>(rng() % 30);
    const auto c = construct_c(prod, y, y2, make_section(prod, p.sections(y)),
                               make_section(prod, p.sections(y2)), p);
    const auto cb = construct_c_bar(prod, neg, c);
    for (const auto& piece : cb.path.pieces) CHECK(piece.shape_case == 1);
    CHECK(cb.path.path.length() == c.path.length());
    CHECK(check_shapes(c, cb).empty());
  }

  const auto c = extension_path(ext.vertex(0, ""), ext.vertex(0, "a"));
  CHECK_THROWS_AS(construct_c_bar(bd, ray(ext, -1), c), InputError);
}

TEST_CASE("line and ray shapes") {
  const auto& ext = extension();
  const auto& bd = ext.bundle;
  const auto pool = trusted_interior(bd);
  std::mt19937_64 rng(6);
  std::map<int, int> cases;
  int pairs = 0;
  for (int top : {-2, 0, 2}) {
    const auto a = ray(ext, top);
    std::vector<Vertex> in_y;
    for (Vertex x : pool)
      if (ext.level(bd.project(x)) <= top) in_y.push_back(x);
    for (int i = 0; i < 30; ++i) {
      const auto c = extension_path(in_y[rng() % in_y.size()], in_y[rng() % in_y.size()]);
      const auto cb = construct_c_bar(bd, a, c);
      const auto bad = check_shapes(c, cb);
      CHECK(bad.empty());
      for (const auto& piece : cb.path.pieces) ++cases[piece.shape_case];
      for (Vertex x : cb.path.path.vertices())
        CHECK(ext.level(bd.project(cb.y.total_ids[x])) <= top);
      ++pairs;
    }
  }
  for (const auto& [k, n] : cases) MESSAGE("case " << k << ": " << n << " pieces");
  CHECK(pairs == 90);
  CHECK(cases[1] > 0);
  CHECK(cases[2] + cases[3] + cases[4] > 0);
}

TEST_CASE("verification of plain geodesics") {
  const auto& ext = extension();
  const auto& g = ext.bundle.total();
  ConstructedPath p;
  p.path = geodesic(g, ext.vertex(-2, "ab"), ext.vertex(3, "Cb"));
  const auto r = verify_path(p, g);
  CHECK(r.certificate == QiCertificate{Rational(1), Rational(0)});
  CHECK(r.hausdorff_to_geodesic == 0);
  CHECK(r.connected);
}

TEST_CASE("closest geodesic") {
  // 4x4 grid: the staircase and the L path are both geodesics.
  std::vector<Edge> e;
  for (Vertex r = 0; r < 4; ++r)
    for (Vertex c = 0; c < 4; ++c) {
      if (c + 1 < 4) e.push_back({r * 4 + c, r * 4 + c + 1});
      if (r + 1 < 4) e.push_back({r * 4 + c, (r + 1) * 4 + c});
    }
  const MetricGraph g(16, e);
  const std::vector<Vertex> l_path{0, 4, 8, 12, 13, 14, 15};
  CHECK(geodesic_near(g, 0, 15, l_path).vertices() == l_path);
  CHECK(hausdorff_to_geodesic(DottedPath(g, l_path)) == 0);
  const std::vector<Vertex> detour{0, 1, 5, 4, 8, 12, 13, 14, 15};
  CHECK(hausdorff_to_geodesic(DottedPath(g, detour)) == 1);
}

TEST_CASE("proximity curve") {
  const auto& ext = extension();
  const auto& bd = ext.bundle;
  const auto a = ray(ext, 0);
  const auto pool = trusted_interior(bd);
  std::vector<Vertex> in_y;
  for (Vertex x : pool)
    if (ext.level(bd.project(x)) <= 0) in_y.push_back(x);
  std::mt19937_64 rng(12);
  std::vector<ConstructedPath> cs;
  std::vector<ModifiedPath> cbs;
  for (int i = 0; i < 15; ++i) {
    cs.push_back(extension_path(in_y[rng() % in_y.size()], in_y[rng() % in_y.size()]));
    cbs.push_back(construct_c_bar(bd, a, cs.back()));
  }
  std::vector<ProximityInput> in;
  for (std::size_t i = 0; i < cs.size(); ++i) in.push_back({&cs[i], &cbs[i]});
  const Vertex y0 = ext.vertex(0, "");
  const auto& ids = cbs[0].y.total_ids;
  const Vertex y0_y = static_cast<Vertex>(std::lower_bound(ids.begin(), ids.end(), y0) - ids.begin());
  REQUIRE(ids[y0_y] == y0);
  const auto curve = proximity_curve(bd.total(), y0, cbs[0].y.bundle.total(), y0_y, in, 12);
  std::optional<Distance> prev;
  for (Distance d = 0; d <= 12; ++d) {
    if (prev) {
      REQUIRE(curve[d]);
      CHECK(*curve[d] >= *prev);
    }
    if (curve[d]) prev = curve[d];
  }
  CHECK(curve[12]);
}

TEST_CASE("all four shape cases on a product line") {
  // Sections through (0, t) sit at height g(t) over base vertex 2, so the
  // necks lie over 2, outside the subbase {0}.
  const auto bd = gen_product(make_graph("path:3"), make_graph("path:10"));
  static const Vertex g[10] = {0, 0, 0, 0, 0, 3, 3, 3, 6, 8};
  DecompositionParams p;
  p.policy = GatePolicy::Waive;
  p.sections = [](Vertex x) {
    const Vertex t = x % 10;
    return std::vector<Vertex>{t, 10 + t, 20 + g[t]};
  };
  const auto c = construct_c(bd, 0, 9, make_section(bd, {0, 10, 20}),
                             make_section(bd, {9, 19, 28}), p);
  REQUIRE(c.block_types.size() == 3);
  CHECK(c.block_types[0] == BlockType::TypeI);
  CHECK(c.block_types[1] == BlockType::TypeI);
  CHECK(c.block_types[2] == BlockType::Final);
  const auto cb = construct_c_bar(bd, {0}, c);
  std::vector<int> cases;
  for (const auto& piece : cb.path.pieces) cases.push_back(piece.shape_case);
  CHECK(cases == std::vector<int>{2, 4, 4, 3});
  CHECK(check_shapes(c, cb).empty());
  // Over a single base vertex the modified path is the fibre geodesic.
  CHECK(cb.path.path.length() == 9);
  CHECK(cb.path.certificate == QiCertificate{Rational(1), Rational(0)});
}

TEST_CASE("path sampling and calibration") {
  const auto bd = gen_product(make_graph("path:7"), make_graph("path:9"));
  const auto p = waived(bd);
  const VertexSet a{0, 1, 2, 3};
  const auto s = sample_paths(bd, a, p, 30, 4);
  REQUIRE(s.size() == 30);
  const auto again = sample_paths(bd, a, p, 30, 4);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].y != s[i].y2);
    CHECK(s[i].y == again[i].y);
    CHECK(s[i].y2 == again[i].y2);
    CHECK(s[i].c == QiCertificate{Rational(1), Rational(0)});
    CHECK(s[i].hd_c == 0);
    CHECK(s[i].shape_violations == 0);
  }
  const auto cal = calibrate_paths(s);
  CHECK(cal.pairs == 30);
  CHECK(cal.lambda_c == Rational(1));
  CHECK(cal.hd_c == 0);

  // Nearest rank: the 99th percentile of 0..n-1 is entry ceil(0.99 n) - 1.
  for (std::size_t n : {1, 100, 150, 200}) {
    std::vector<PathSample> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[(i * 7) % n].hd_c = static_cast<Distance>(i);
      v[(i * 7) % n].c_bar.epsilon = Rational(static_cast<std::int64_t>(i), 2);
    }
    if (n % 7 == 0) continue;
    const std::size_t rank = static_cast<std::size_t>(std::ceil(0.99 * n)) - 1;
    const auto c = calibrate_paths(v);
    CHECK(c.hd_c == rank);
    CHECK(c.epsilon_c_bar == Rational(static_cast<std::int64_t>(rank), 2));
  }
  CHECK(calibrate_paths({}).pairs == 0);

  DecompositionParams none = p;
  none.sections = nullptr;
  CHECK_THROWS_AS(sample_paths(bd, a, none, 1, 1), DependencyError);
}

TEST_CASE("recorded block girths") {
  const auto& ext = extension();
  std::mt19937_64 rng(12);
  const auto pool = trusted_interior(ext.bundle);
  for (int i = 0; i < 15; ++i) {
    const Vertex y = pool[rng() % pool.size()], y2 = pool[rng() % pool.size()];
    const auto c = extension_path(y, y2);
    REQUIRE(c.block_girths.size() == c.block_types.size());
    for (std::size_t k = 0; k < c.block_types.size(); ++k) {
      const auto g = trusted_girth(sub_ladder(c.ladder, c.sections[k], c.sections[k + 1]));
      REQUIRE(g);
      CHECK(c.block_girths[k] == *g);
    }
  }
}

TEST_CASE("modified block girths") {
  // Sections at fibre heights 0, 3 and 8 over a 7-vertex line; the block
  // girth over a subbase is the smallest rung length above it.
  const auto bd = gen_product(make_graph("path:7"), make_graph("path:9"));
  auto p = waived(bd);
  auto level = [](std::vector<Distance> h) {
    std::vector<Vertex> s;
    for (Vertex b = 0; b < h.size(); ++b) s.push_back(b * 9 + h[b]);
    return s;
  };
  const auto c = construct_c(bd, 1 * 9, 5 * 9 + 8, make_section(bd, level({0, 0, 0, 0, 0, 0, 0})),
                             make_section(bd, level({8, 8, 8, 8, 8, 8, 8})), p);
  const auto cbar = construct_c_bar(bd, {0, 1, 2, 3, 4, 5}, c);
  REQUIRE(cbar.path.block_girths.size() == c.block_girths.size());
  for (std::size_t k = 0; k < c.block_types.size(); ++k) {
    Distance g = kUnreachable;
    for (Vertex b = 0; b <= 5; ++b)
      g = std::min(g, bd.fiber_distance(c.sections[k](b), c.sections[k + 1](b)));
    CHECK(cbar.path.block_girths[k] == g);
  }
}
