#include "coarse/bundle.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

#include "coarse/parallel.hpp"

namespace coarse {

namespace detail {

struct BundleData {
  MetricGraph total, base;
  std::vector<Vertex> projection;
  std::vector<VertexSet> fibers;
  std::vector<Vertex> local;
  std::vector<MetricGraph> fiber_graphs;
  std::vector<Distance> interior_depth;
  std::optional<std::vector<Distance>> vertex_depth;
  Distance eta_max_m = 0;

  std::once_flag eta_once;
  std::vector<Distance> eta;
  Distance max_fiber_diameter = 0;
};

}  // namespace detail

namespace {

std::string vertex_name(Vertex v) { return std::to_string(v); }

// BFS with caller-owned buffers; returns the visit order.
void bounded_bfs(const MetricGraph& g, Vertex s, Distance limit,
                 std::vector<Distance>& dist, std::vector<Vertex>& order) {
  for (Vertex v : order) dist[v] = kUnreachable;
  order.clear();
  dist[s] = 0;
  order.push_back(s);
  for (std::size_t head = 0; head < order.size(); ++head) {
    const Vertex u = order[head];
    if (dist[u] >= limit) continue;
    for (Vertex w : g.neighbors(u))
      if (dist[w] == kUnreachable) {
        dist[w] = dist[u] + 1;
        order.push_back(w);
      }
  }
}

void compute_eta(detail::BundleData& d) {
  const std::size_t n = d.total.vertex_count();
  const Distance mmax = d.eta_max_m;
  const unsigned workers = thread_count();
  std::vector<std::vector<Distance>> best(workers, std::vector<Distance>(mmax + 1, 0));
  std::vector<Distance> diam(workers, 0);
  parallel_chunks(n, [&](unsigned w, std::size_t begin, std::size_t end) {
    std::vector<Distance> dist(n, kUnreachable);
    std::vector<Vertex> order;
    for (std::size_t xi = begin; xi < end; ++xi) {
      const Vertex x = static_cast<Vertex>(xi);
      const Vertex b = d.projection[x];
      const auto fdist = d.fiber_graphs[b].bfs(d.local[x]);
      for (Distance f : fdist) diam[w] = std::max(diam[w], f);
      bounded_bfs(d.total, x, mmax, dist, order);
      for (Vertex y : order)
        if (d.projection[y] == b)
          best[w][dist[y]] = std::max(best[w][dist[y]], fdist[d.local[y]]);
    }
  });
  d.eta.assign(mmax + 1, 0);
  for (unsigned w = 0; w < workers; ++w) {
    d.max_fiber_diameter = std::max(d.max_fiber_diameter, diam[w]);
    for (Distance m = 0; m <= mmax; ++m) d.eta[m] = std::max(d.eta[m], best[w][m]);
  }
  for (Distance m = 1; m <= mmax; ++m) d.eta[m] = std::max(d.eta[m], d.eta[m - 1]);
}

// Smallest eps with |i-j|/k - eps <= d(l_i, l_j) <= k|i-j| + eps.
Rational lift_epsilon(const MetricGraph& g, const std::vector<Vertex>& lift, Rational k) {
  Rational eps{0};
  for (std::size_t i = 0; i < lift.size(); ++i) {
    const auto row = g.distances_from(lift[i]);
    for (std::size_t j = i + 1; j < lift.size(); ++j) {
      const Rational gap(static_cast<std::int64_t>(j - i));
      const Rational dist(static_cast<std::int64_t>((*row)[lift[j]]));
      eps = max(eps, gap / k - dist);
      eps = max(eps, dist - k * gap);
    }
  }
  return eps;
}

// Base geodesics of length len whose vertices all have depth >= margin, one
// orientation per endpoint pair (smaller id first).
std::vector<std::vector<Vertex>> trusted_windows(const GraphBundle& bd, Distance len,
                                                 Distance margin) {
  const auto& base = bd.base();
  std::vector<std::vector<Vertex>> out;
  for (Vertex b1 = 0; b1 < base.vertex_count(); ++b1) {
    if (!bd.trusted_base(b1, margin)) continue;
    const auto row = base.distances_from(b1);
    for (Vertex b2 = len == 0 ? b1 : b1 + 1; b2 < base.vertex_count(); ++b2) {
      if ((*row)[b2] != len || !bd.trusted_base(b2, margin)) continue;
      auto path = geodesic(base, b1, b2).vertices();
      if (std::all_of(path.begin(), path.end(),
                      [&](Vertex b) { return bd.trusted_base(b, margin); }))
        out.push_back(std::move(path));
    }
  }
  return out;
}

// Centre-fibre vertices whose smallest-id lift over the whole window is
// trusted.
std::vector<Vertex> window_candidates(const GraphBundle& bd, const std::vector<Vertex>& window,
                                      std::size_t centre) {
  std::vector<Vertex> out;
  for (Vertex x : bd.fiber(window[centre])) {
    bool ok = bd.trusted_vertex(x);
    for (int dir : {-1, 1}) {
      Vertex cur = x;
      for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(centre) + dir;
           ok && i >= 0 && i < static_cast<std::ptrdiff_t>(window.size()); i += dir) {
        cur = bd.step(cur, window[static_cast<std::size_t>(i)]);
        ok = bd.trusted_vertex(cur);
      }
    }
    if (ok) out.push_back(x);
  }
  return out;
}

template <class T>
const T& pick(const std::vector<T>& v, std::mt19937_64& rng) {
  return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

}  // namespace

GraphBundle::GraphBundle() : data_(std::make_shared<detail::BundleData>()) {}

const MetricGraph& GraphBundle::total() const { return data_->total; }
const MetricGraph& GraphBundle::base() const { return data_->base; }

Vertex GraphBundle::project(Vertex x) const {
  data_->total.check_vertex(x);
  return data_->projection[x];
}

const std::vector<Vertex>& GraphBundle::projection() const { return data_->projection; }

const VertexSet& GraphBundle::fiber(Vertex b) const {
  data_->base.check_vertex(b);
  return data_->fibers[b];
}

const MetricGraph& GraphBundle::fiber_graph(Vertex b) const {
  data_->base.check_vertex(b);
  return data_->fiber_graphs[b];
}

Vertex GraphBundle::local_id(Vertex x) const {
  data_->total.check_vertex(x);
  return data_->local[x];
}

Vertex GraphBundle::global_id(Vertex b, Vertex local) const {
  const auto& f = fiber(b);
  if (local >= f.size()) throw InputError("fibre local id out of range");
  return f[local];
}

Distance GraphBundle::fiber_distance(Vertex x, Vertex y) const {
  const Vertex b = project(x);
  if (project(y) != b)
    throw InputError("fiber_distance: " + vertex_name(x) + " and " + vertex_name(y) +
                     " lie in different fibres");
  return data_->fiber_graphs[b].distance(data_->local[x], data_->local[y]);
}

Vertex GraphBundle::step(Vertex x, Vertex b) const {
  for (Vertex w : data_->total.neighbors(x))
    if (data_->projection[w] == b) return w;
  throw InvariantError("vertex " + vertex_name(x) + " has no neighbour over base vertex " +
                       vertex_name(b));
}

Distance GraphBundle::interior_depth(Vertex b) const {
  data_->base.check_vertex(b);
  return data_->interior_depth[b];
}

const std::vector<Distance>& GraphBundle::interior_depths() const {
  return data_->interior_depth;
}

const std::optional<std::vector<Distance>>& GraphBundle::vertex_depths() const {
  return data_->vertex_depth;
}

bool GraphBundle::trusted_base(Vertex b, Distance margin) const {
  return interior_depth(b) >= margin;
}

bool GraphBundle::trusted_vertex(Vertex x) const {
  data_->total.check_vertex(x);
  return !data_->vertex_depth || (*data_->vertex_depth)[x] >= 1;
}

bool GraphBundle::trusted_vertices(std::span<const Vertex> xs) const {
  return std::all_of(xs.begin(), xs.end(), [&](Vertex x) { return trusted_vertex(x); });
}

const std::vector<Distance>& GraphBundle::eta_profile() const {
  std::call_once(data_->eta_once, [this] { compute_eta(*data_); });
  return data_->eta;
}

Distance GraphBundle::eta(Distance m) const {
  const auto& table = eta_profile();
  return m < table.size() ? table[m] : data_->max_fiber_diameter;
}

Distance GraphBundle::eta_max_m() const { return data_->eta_max_m; }

Distance GraphBundle::max_fiber_diameter() const {
  eta_profile();
  return data_->max_fiber_diameter;
}

GraphBundle validate_bundle(MetricGraph total, MetricGraph base,
                            std::vector<Vertex> projection,
                            std::vector<Distance> interior_depth,
                            std::optional<std::vector<Distance>> vertex_depth,
                            BundleOptions options) {
  const std::size_t nx = total.vertex_count();
  const std::size_t nb = base.vertex_count();
  if (projection.size() != nx)
    throw InputError("projection has " + std::to_string(projection.size()) +
                     " entries for " + std::to_string(nx) + " vertices");
  for (Vertex x = 0; x < nx; ++x)
    if (projection[x] >= nb)
      throw InputError("projection of " + vertex_name(x) + " is not a base vertex");
  if (interior_depth.empty()) interior_depth.assign(nb, kUnreachable);
  if (interior_depth.size() != nb) throw InputError("interior_depth size mismatch");
  if (vertex_depth && vertex_depth->size() != nx)
    throw InputError("vertex_depth size mismatch");

  for (auto [u, v] : total.edges()) {
    const Vertex a = projection[u], b = projection[v];
    if (a != b && !base.adjacent(a, b))
      throw ValidationError("projection is not simplicial",
                            "edge " + vertex_name(u) + "-" + vertex_name(v) + " maps to " +
                                vertex_name(a) + "," + vertex_name(b));
  }

  auto data = std::make_shared<detail::BundleData>();
  data->fibers.resize(nb);
  data->local.resize(nx);
  for (Vertex x = 0; x < nx; ++x) {
    auto& f = data->fibers[projection[x]];
    data->local[x] = static_cast<Vertex>(f.size());
    f.push_back(x);
  }
  for (Vertex b = 0; b < nb; ++b)
    if (data->fibers[b].empty())
      throw ValidationError("projection is not surjective", "base vertex " + vertex_name(b));

  data->fiber_graphs.resize(nb);
  for (Vertex b = 0; b < nb; ++b) {
    try {
      data->fiber_graphs[b] = total.induced(data->fibers[b]);
    } catch (const ConnectivityError& e) {
      throw ValidationError("fibre is disconnected",
                            "fibre over " + vertex_name(b) + ", component " + e.component());
    }
  }

  for (Vertex x = 0; x < nx; ++x) {
    const Vertex b = projection[x];
    for (Vertex b2 : base.neighbors(b)) {
      const auto nb_x = total.neighbors(x);
      if (std::none_of(nb_x.begin(), nb_x.end(),
                       [&](Vertex w) { return projection[w] == b2; }))
        throw ValidationError("missing cross-edge", "vertex " + vertex_name(x) +
                                                        " has no neighbour over " +
                                                        vertex_name(b2));
    }
  }

  data->eta_max_m = options.eta_max_m ? *options.eta_max_m : 2 * base.diameter() + 4;
  data->total = std::move(total);
  data->base = std::move(base);
  data->projection = std::move(projection);
  data->interior_depth = std::move(interior_depth);
  data->vertex_depth = std::move(vertex_depth);
  GraphBundle bd;
  bd.data_ = std::move(data);
  return bd;
}

DottedPath lift_geodesic(const GraphBundle& bd, const DottedPath& gamma, Vertex x) {
  if (gamma.empty()) throw InputError("lift_geodesic: empty base path");
  if (bd.project(x) != gamma.front())
    throw InputError("lift_geodesic: start vertex is not over the path start");
  std::vector<Vertex> out{x};
  for (std::size_t i = 1; i < gamma.size(); ++i)
    out.push_back(gamma[i] == gamma[i - 1] ? out.back() : bd.step(out.back(), gamma[i]));
  DottedPath lift(bd.total(), std::move(out));
  if (bd.base().distance(gamma.front(), gamma.back()) == gamma.length() &&
      bd.total().distance(lift.front(), lift.back()) != lift.length())
    throw InvariantError("lift of a geodesic is not geodesic");
  return lift;
}

LiftedPath lift_quasigeodesic(const GraphBundle& bd, const DottedPath& beta, Vertex x) {
  const QiCertificate base_cert = certify_quasigeodesic(beta);
  DottedPath lift = lift_geodesic(bd, beta, x);
  const auto& g = bd.total();
  const Rational k = base_cert.lambda, eps = base_cert.epsilon;
  for (std::size_t i = 0; i < lift.size(); ++i) {
    const auto row = g.distances_from(lift[i]);
    for (std::size_t j = i + 1; j < lift.size(); ++j) {
      const Rational gap(static_cast<std::int64_t>(j - i));
      const Rational d(static_cast<std::int64_t>((*row)[lift[j]]));
      if (d < gap / k - eps || d > (k + eps + Rational(1)) * gap)
        throw InvariantError("lifted quasigeodesic violates the lifting sandwich");
    }
  }
  QiCertificate cert = certify_quasigeodesic(lift);
  return {std::move(lift), cert};
}

DottedPath random_lift(const GraphBundle& bd, const DottedPath& gamma, Vertex x,
                       std::mt19937_64& rng) {
  if (gamma.empty() || bd.project(x) != gamma.front())
    throw InputError("random_lift: start vertex is not over the path start");
  std::vector<Vertex> out{x};
  std::vector<Vertex> options;
  for (std::size_t i = 1; i < gamma.size(); ++i) {
    if (gamma[i] == gamma[i - 1]) {
      out.push_back(out.back());
      continue;
    }
    options.clear();
    for (Vertex w : bd.total().neighbors(out.back()))
      if (bd.project(w) == gamma[i]) options.push_back(w);
    if (options.empty()) throw InvariantError("random_lift: no cross-edge");
    out.push_back(pick(options, rng));
  }
  return DottedPath(bd.total(), std::move(out));
}

std::vector<Vertex> fiber_identification(const GraphBundle& bd, Vertex b1, Vertex b2) {
  const DottedPath gamma = geodesic(bd.base(), b1, b2);
  const auto& f1 = bd.fiber(b1);
  std::vector<Vertex> phi(f1.size());
  for (std::size_t i = 0; i < f1.size(); ++i) {
    Vertex cur = f1[i];
    for (std::size_t s = 1; s < gamma.size(); ++s) cur = bd.step(cur, gamma[s]);
    phi[i] = cur;
  }
  return phi;
}

BoundedFlaringProfile bounded_flaring_profile(const GraphBundle& bd, Rational k,
                                              Distance n_max, std::size_t samples,
                                              std::uint64_t seed) {
  if (k < Rational(1)) throw InputError("bounded_flaring_profile: k must be >= 1");
  std::mt19937_64 rng(seed);
  BoundedFlaringProfile out;
  std::optional<Rational> running;
  for (Distance n = 0; n <= n_max; ++n) {
    const auto windows = trusted_windows(bd, n, 1);
    std::optional<Rational> best;
    std::size_t used = 0;
    for (std::size_t s = 0; s < samples && !windows.empty(); ++s) {
      const auto& window = pick(windows, rng);
      const DottedPath gamma(bd.base(), window);
      const auto candidates = window_candidates(bd, window, 0);
      if (candidates.size() < 2) continue;
      const Vertex x = pick(candidates, rng);
      Vertex y = pick(candidates, rng);
      if (x == y) continue;
      const auto lx = random_lift(bd, gamma, x, rng);
      const auto ly = random_lift(bd, gamma, y, rng);
      if (!bd.trusted_vertices(lx.vertices()) || !bd.trusted_vertices(ly.vertices()))
        continue;
      const Distance d0 = bd.fiber_distance(x, y);
      const Distance d1 = bd.fiber_distance(lx.back(), ly.back());
      const Rational ratio(d1, std::max<Distance>(d0, 1));
      best = best ? max(*best, ratio) : ratio;
      ++used;
    }
    if (best) running = running ? max(*running, *best) : *best;
    out.mu.push_back(best ? running : std::nullopt);
    out.samples.push_back(used);
  }
  return out;
}

FlaringReport check_flaring(const GraphBundle& bd, Rational k, Distance n, Distance m,
                            const FlaringOptions& options) {
  if (n == 0) throw InputError("check_flaring: window must be positive");
  if (k < Rational(1)) throw InputError("check_flaring: k must be >= 1");
  FlaringReport report;
  report.k = k;
  report.n = n;
  report.m = m;
  const auto windows = trusted_windows(bd, 2 * n, n);
  if (windows.empty()) return report;
  std::vector<std::vector<Vertex>> candidate_lists;
  for (const auto& w : windows) candidate_lists.push_back(window_candidates(bd, w, n));
  std::mt19937_64 rng(options.seed);
  const auto& g = bd.total();
  for (std::size_t s = 0; s < options.samples; ++s) {
    ++report.attempted;
    const std::size_t wi = std::uniform_int_distribution<std::size_t>(0, windows.size() - 1)(rng);
    const auto& window = windows[wi];
    const auto& candidates = candidate_lists[wi];
    if (candidates.empty()) continue;
    const Vertex x0 = pick(candidates, rng);
    std::vector<Vertex> far;
    for (Vertex y : candidates)
      if (bd.fiber_distance(x0, y) >= std::max<Distance>(m, 1)) far.push_back(y);
    if (far.empty()) continue;
    const Vertex y0 = pick(far, rng);

    FlaringPair pair;
    pair.window = window;
    const bool use_sections = options.sections && (rng() & 1u);
    pair.from_section = use_sections;
    for (Vertex start : {x0, y0}) {
      std::vector<Vertex> lift(window.size());
      if (use_sections) {
        const auto sec = options.sections(start);
        for (std::size_t i = 0; i < window.size(); ++i) lift[i] = sec.at(window[i]);
      } else {
        const DottedPath fwd(bd.base(), {window.begin() + n, window.end()});
        const DottedPath bwd(bd.base(), {window.rbegin() + static_cast<std::ptrdiff_t>(n),
                                         window.rend()});
        const auto lf = random_lift(bd, fwd, start, rng).vertices();
        const auto lb = random_lift(bd, bwd, start, rng).vertices();
        for (std::size_t i = 0; i <= n; ++i) {
          lift[n + i] = lf[i];
          lift[n - i] = lb[i];
        }
      }
      (start == x0 ? pair.lift1 : pair.lift2) = std::move(lift);
    }
    if (!bd.trusted_vertices(pair.lift1) || !bd.trusted_vertices(pair.lift2)) continue;
    if (lift_epsilon(g, pair.lift1, k) > k || lift_epsilon(g, pair.lift2, k) > k) continue;
    pair.d_minus = bd.fiber_distance(pair.lift1.front(), pair.lift2.front());
    pair.d0 = bd.fiber_distance(x0, y0);
    pair.d_plus = bd.fiber_distance(pair.lift1.back(), pair.lift2.back());
    const Rational fwd(pair.d_plus, pair.d0), bwd(pair.d_minus, pair.d0);
    const Rational growth = max(fwd, bwd);
    report.nu = report.nu ? min(*report.nu, growth) : growth;
    report.forward_min = report.forward_min ? min(*report.forward_min, fwd) : fwd;
    report.backward_min = report.backward_min ? min(*report.backward_min, bwd) : bwd;
    report.pairs.push_back(std::move(pair));
  }
  report.samples = report.pairs.size();
  report.inconclusive = report.pairs.empty();
  if (report.nu && *report.nu <= Rational(1)) report.nu.reset();
  return report;
}

bool replay_flaring(const GraphBundle& bd, const FlaringReport& report) {
  if (!report.nu) return true;
  for (const auto& p : report.pairs) {
    const Distance d0 = bd.fiber_distance(p.lift1[report.n], p.lift2[report.n]);
    const Distance dm = bd.fiber_distance(p.lift1.front(), p.lift2.front());
    const Distance dp = bd.fiber_distance(p.lift1.back(), p.lift2.back());
    if (d0 != p.d0 || dm != p.d_minus || dp != p.d_plus) return false;
    if (*report.nu * Rational(d0) > Rational(std::max(dm, dp))) return false;
  }
  return true;
}

std::optional<FlaringReport> find_flaring_threshold(const GraphBundle& bd, Rational k,
                                                    Distance n,
                                                    const FlaringOptions& options) {
  const Distance top = bd.max_fiber_diameter();
  for (Distance m = 1; m <= top; ++m) {
    auto report = check_flaring(bd, k, n, m, options);
    if (report.nu) return report;
  }
  return std::nullopt;
}

BundleMorphism make_morphism(GraphBundle source, GraphBundle target,
                             std::vector<Vertex> vertex_map, std::vector<Vertex> base_map) {
  const auto& x1 = source.total();
  const auto& b1 = source.base();
  if (vertex_map.size() != x1.vertex_count() || base_map.size() != b1.vertex_count())
    throw InputError("morphism maps must be defined on every vertex");
  for (Vertex v : vertex_map) target.total().check_vertex(v);
  for (Vertex v : base_map) target.base().check_vertex(v);
  for (Vertex x = 0; x < x1.vertex_count(); ++x)
    if (target.project(vertex_map[x]) != base_map[source.project(x)])
      throw ValidationError("morphism does not commute with projections",
                            "vertex " + vertex_name(x));
  const auto edge_image = [](const MetricGraph& g, Vertex a, Vertex b) -> Distance {
    if (a == b) return 0;
    return g.adjacent(a, b) ? 1 : g.distance(a, b);
  };
  LipschitzReport lip;
  for (auto [u, v] : x1.edges())
    lip.vertex_map =
        std::max(lip.vertex_map, edge_image(target.total(), vertex_map[u], vertex_map[v]));
  for (auto [u, v] : b1.edges())
    lip.base_map = std::max(lip.base_map, edge_image(target.base(), base_map[u], base_map[v]));
  return {std::move(source), std::move(target), std::move(vertex_map), std::move(base_map),
          lip};
}

BundleMorphism identity_morphism(const GraphBundle& bd) {
  std::vector<Vertex> vx(bd.total().vertex_count()), vb(bd.base().vertex_count());
  for (Vertex i = 0; i < vx.size(); ++i) vx[i] = i;
  for (Vertex i = 0; i < vb.size(); ++i) vb[i] = i;
  return make_morphism(bd, bd, std::move(vx), std::move(vb));
}

Restriction restrict_bundle(const GraphBundle& bd, const VertexSet& a) {
  if (a.empty()) throw InputError("restrict: empty subbase");
  MetricGraph sub_base;
  try {
    sub_base = bd.base().induced(a);
  } catch (const ConnectivityError& e) {
    throw InputError("restrict: subbase is disconnected (component " + e.component() + ")");
  }
  std::vector<Vertex> total_ids;
  for (Vertex b : a) {
    const auto& f = bd.fiber(b);
    total_ids.insert(total_ids.end(), f.begin(), f.end());
  }
  std::sort(total_ids.begin(), total_ids.end());
  std::vector<Vertex> base_index(bd.base().vertex_count(), kUnreachable);
  for (std::size_t i = 0; i < a.size(); ++i) base_index[a[i]] = static_cast<Vertex>(i);
  std::vector<Vertex> projection;
  projection.reserve(total_ids.size());
  std::optional<std::vector<Distance>> vdepth;
  if (bd.vertex_depths()) vdepth.emplace();
  for (Vertex x : total_ids) {
    projection.push_back(base_index[bd.project(x)]);
    if (vdepth) vdepth->push_back((*bd.vertex_depths())[x]);
  }
  std::vector<Distance> depth;
  for (Vertex b : a) depth.push_back(bd.interior_depth(b));
  auto sub = validate_bundle(bd.total().induced(total_ids), std::move(sub_base),
                             std::move(projection), std::move(depth), std::move(vdepth));
  auto inclusion = make_morphism(sub, bd, total_ids, a);
  return {std::move(sub), std::move(inclusion), std::move(total_ids)};
}

Pullback pullback(const GraphBundle& bd, const MetricGraph& b1, std::vector<Vertex> g,
                  Distance lipschitz_bound) {
  if (g.size() != b1.vertex_count())
    throw InputError("pullback: base map must be defined on every vertex");
  for (Vertex c : g) bd.base().check_vertex(c);
  for (auto [u, v] : b1.edges())
    if (bd.base().distance(g[u], g[v]) > lipschitz_bound)
      throw InputError("pullback: base map stretches edge " + vertex_name(u) + "-" +
                       vertex_name(v) + " beyond the Lipschitz bound");

  std::vector<Vertex> offset(b1.vertex_count() + 1, 0);
  for (Vertex b = 0; b < b1.vertex_count(); ++b)
    offset[b + 1] = offset[b] + static_cast<Vertex>(bd.fiber(g[b]).size());
  const std::size_t n = offset.back();

  std::vector<Edge> edges;
  std::vector<Vertex> projection(n), vertex_map(n);
  std::optional<std::vector<Distance>> vdepth;
  if (bd.vertex_depths()) vdepth.emplace(n);
  for (Vertex b = 0; b < b1.vertex_count(); ++b) {
    const auto& f = bd.fiber(g[b]);
    for (Vertex i = 0; i < f.size(); ++i) {
      projection[offset[b] + i] = b;
      vertex_map[offset[b] + i] = f[i];
      if (vdepth) (*vdepth)[offset[b] + i] = (*bd.vertex_depths())[f[i]];
    }
    for (auto [u, v] : bd.fiber_graph(g[b]).edges())
      edges.emplace_back(offset[b] + u, offset[b] + v);
  }

  // Cross-edges: every endpoint of an isometric lift of the fixed geodesic
  // [g(b), g(b')], from every point of F_{g(b)}.
  std::vector<char> mark(bd.total().vertex_count(), 0);
  for (auto [u, v] : b1.edges()) {
    const auto gamma = geodesic(bd.base(), g[u], g[v]).vertices();
    const auto& fu = bd.fiber(g[u]);
    for (Vertex i = 0; i < fu.size(); ++i) {
      std::vector<Vertex> frontier{fu[i]};
      for (std::size_t s = 1; s < gamma.size(); ++s) {
        std::vector<Vertex> next;
        for (Vertex x : frontier)
          for (Vertex w : bd.total().neighbors(x))
            if (bd.project(w) == gamma[s] && !mark[w]) {
              mark[w] = 1;
              next.push_back(w);
            }
        for (Vertex w : next) mark[w] = 0;
        frontier = std::move(next);
      }
      for (Vertex y : frontier) edges.emplace_back(offset[u] + i, offset[v] + bd.local_id(y));
    }
  }

  std::vector<Distance> depth;
  for (Vertex c : g) depth.push_back(bd.interior_depth(c));
  auto result = validate_bundle(MetricGraph(n, edges), b1, std::move(projection),
                                std::move(depth), std::move(vdepth));
  for (Vertex b = 0; b < b1.vertex_count(); ++b) {
    std::vector<Vertex> id(result.fiber(b).size());
    for (Vertex i = 0; i < id.size(); ++i) id[i] = i;
    if (!is_isomorphism(result.fiber_graph(b), bd.fiber_graph(g[b]), id))
      throw InvariantError("pullback fibre over " + vertex_name(b) + " is not an isometric copy");
  }
  auto morphism = make_morphism(result, bd, std::move(vertex_map), std::move(g));
  return {std::move(result), std::move(morphism)};
}

MapConstants map_constants(const MetricGraph& a, const MetricGraph& b,
                           std::span<const Vertex> map) {
  if (map.size() != a.vertex_count()) throw InputError("map_constants: size mismatch");
  MapConstants out;
  std::int64_t eps = 0;
  for (Vertex u = 0; u < a.vertex_count(); ++u) {
    const auto ra = a.bfs(u);
    const auto rb = b.bfs(map[u]);
    for (Vertex v = u + 1; v < a.vertex_count(); ++v) {
      const std::int64_t diff =
          static_cast<std::int64_t>(ra[v]) - static_cast<std::int64_t>(rb[map[v]]);
      eps = std::max(eps, diff < 0 ? -diff : diff);
    }
  }
  out.certificate = {Rational(1), Rational(eps)};
  const auto reach = b.distances_to_set(make_vertex_set({map.begin(), map.end()}));
  out.reach = *std::max_element(reach.begin(), reach.end());
  return out;
}

IsomorphismReport check_isomorphism(const BundleMorphism& m, Rational max_epsilon,
                                    Distance max_reach) {
  IsomorphismReport report;
  report.base = map_constants(m.source.base(), m.target.base(), m.base_map);
  for (Vertex b = 0; b < m.source.base().vertex_count(); ++b) {
    const Vertex c = m.base_map[b];
    const auto& f = m.source.fiber(b);
    std::vector<Vertex> local(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) local[i] = m.target.local_id(m.vertex_map[f[i]]);
    const auto fc = map_constants(m.source.fiber_graph(b), m.target.fiber_graph(c), local);
    report.fiber_worst.certificate.epsilon =
        max(report.fiber_worst.certificate.epsilon, fc.certificate.epsilon);
    report.fiber_worst.reach = std::max(report.fiber_worst.reach, fc.reach);
  }
  report.isomorphism_by_criterion =
      report.base.certificate.epsilon <= max_epsilon && report.base.reach <= max_reach &&
      report.fiber_worst.certificate.epsilon <= max_epsilon &&
      report.fiber_worst.reach <= max_reach;
  return report;
}

}  // namespace coarse
