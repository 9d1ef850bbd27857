#include "coarse/metric_graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <unordered_map>

#include "coarse/parallel.hpp"

namespace coarse {

namespace detail {

struct GraphData {
  std::vector<std::size_t> offsets;  // size n+1
  std::vector<Vertex> targets;
  std::uint64_t fingerprint = 0;
};

class DistanceCache {
 public:
  using Row = std::shared_ptr<const std::vector<Distance>>;

  Row find(Vertex s) {
    std::lock_guard lock(mutex_);
    if (auto it = rows_.find(s); it != rows_.end()) return it->second;
    return nullptr;
  }

  Row insert(Vertex s, Row row, std::uint64_t fingerprint) {
    const OracleConfig config = oracle_config();
    std::lock_guard lock(mutex_);
    if (auto it = rows_.find(s); it != rows_.end()) return it->second;
    rows_.emplace(s, row);
    order_.push_back(s);
    cells_ += row->size();
    while (cells_ > config.max_cached_cells && order_.size() > 1) {
      const Vertex victim = order_.front();
      order_.pop_front();
      auto it = rows_.find(victim);
      cells_ -= it->second->size();
      if (config.spill_dir) spill(*config.spill_dir, fingerprint, victim, *it->second);
      rows_.erase(it);
    }
    return row;
  }

  static std::filesystem::path spill_path(const std::filesystem::path& dir,
                                          std::uint64_t fingerprint, Vertex s) {
    std::ostringstream name;
    name << std::hex << fingerprint << "-" << std::dec << s << ".row";
    return dir / name.str();
  }

 private:
  static void spill(const std::filesystem::path& dir, std::uint64_t fingerprint,
                    Vertex s, const std::vector<Distance>& row) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(spill_path(dir, fingerprint, s), std::ios::binary);
    if (!out) return;  // spilling is best effort; a miss recomputes
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(Distance)));
  }

  std::mutex mutex_;
  std::unordered_map<Vertex, Row> rows_;
  std::deque<Vertex> order_;
  std::size_t cells_ = 0;
};

}  // namespace detail

namespace {

std::mutex g_config_mutex;
OracleConfig g_config;

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t value) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffu;
    h *= 1099511628211ull;
  }
  return h;
}

void require_nonempty(std::span<const Vertex> set, const char* what) {
  if (set.empty()) throw InputError(std::string(what) + ": empty vertex set");
}

}  // namespace

void set_oracle_config(OracleConfig config) {
  std::lock_guard lock(g_config_mutex);
  g_config = std::move(config);
}

OracleConfig oracle_config() {
  std::lock_guard lock(g_config_mutex);
  return g_config;
}

VertexSet make_vertex_set(std::vector<Vertex> vertices) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  return vertices;
}

std::vector<VertexSet> connected_components(std::size_t n,
                                            std::span<const Edge> edges) {
  std::vector<std::vector<Vertex>> adj(n);
  for (auto [u, v] : edges) {
    if (u >= n || v >= n) throw InputError("edge endpoint out of range");
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  std::vector<int> seen(n, 0);
  std::vector<VertexSet> out;
  for (Vertex s = 0; s < n; ++s) {
    if (seen[s]) continue;
    VertexSet comp{s};
    seen[s] = 1;
    for (std::size_t i = 0; i < comp.size(); ++i)
      for (Vertex w : adj[comp[i]])
        if (!seen[w]) {
          seen[w] = 1;
          comp.push_back(w);
        }
    std::sort(comp.begin(), comp.end());
    out.push_back(std::move(comp));
  }
  return out;
}

MetricGraph::MetricGraph()
    : data_(std::make_shared<detail::GraphData>(
          detail::GraphData{{0}, {}, 14695981039346656037ull})),
      cache_(std::make_shared<detail::DistanceCache>()) {}

MetricGraph::MetricGraph(std::size_t vertex_count, std::span<const Edge> edges) {
  if (vertex_count > std::numeric_limits<Vertex>::max() / 2)
    throw SizeError("too many vertices");
  std::vector<Edge> list;
  list.reserve(edges.size() * 2);
  for (auto [u, v] : edges) {
    if (u >= vertex_count || v >= vertex_count)
      throw InputError("edge (" + std::to_string(u) + "," + std::to_string(v) +
                       ") references unknown vertex");
    if (u == v) throw InputError("loop at vertex " + std::to_string(u));
    list.emplace_back(u, v);
    list.emplace_back(v, u);
  }
  std::sort(list.begin(), list.end());
  list.erase(std::unique(list.begin(), list.end()), list.end());

  auto data = std::make_shared<detail::GraphData>();
  data->offsets.assign(vertex_count + 1, 0);
  for (auto [u, v] : list) ++data->offsets[u + 1];
  for (std::size_t i = 0; i < vertex_count; ++i)
    data->offsets[i + 1] += data->offsets[i];
  data->targets.reserve(list.size());
  for (auto [u, v] : list) data->targets.push_back(v);

  std::uint64_t h = fnv1a(14695981039346656037ull, vertex_count);
  for (auto [u, v] : list)
    if (u < v) h = fnv1a(fnv1a(h, u), v);
  data->fingerprint = h;

  data_ = std::move(data);
  cache_ = std::make_shared<detail::DistanceCache>();

  if (vertex_count > 0) {
    const auto row = bfs(0);
    std::vector<Vertex> missing;
    for (Vertex v = 0; v < vertex_count; ++v)
      if (row[v] == kUnreachable) missing.push_back(v);
    if (!missing.empty()) {
      std::vector<Edge> undirected;
      for (auto [u, v] : list)
        if (u < v) undirected.emplace_back(u, v);
      const auto comps = connected_components(vertex_count, undirected);
      std::ostringstream comp;
      for (std::size_t i = 0; i < comps[1].size(); ++i)
        comp << (i ? "," : "") << comps[1][i];
      throw ConnectivityError("graph is disconnected (" +
                                  std::to_string(comps.size()) + " components)",
                              comp.str());
    }
  }
}

std::size_t MetricGraph::vertex_count() const noexcept {
  return data_->offsets.size() - 1;
}

std::size_t MetricGraph::edge_count() const noexcept {
  return data_->targets.size() / 2;
}

std::span<const Vertex> MetricGraph::neighbors(Vertex v) const {
  check_vertex(v);
  return {data_->targets.data() + data_->offsets[v],
          data_->offsets[v + 1] - data_->offsets[v]};
}

bool MetricGraph::adjacent(Vertex u, Vertex v) const {
  const auto nb = neighbors(u);
  check_vertex(v);
  return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> MetricGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (Vertex u = 0; u < vertex_count(); ++u)
    for (Vertex v : neighbors(u))
      if (u < v) out.emplace_back(u, v);
  return out;
}

void MetricGraph::check_vertex(Vertex v) const {
  if (v >= vertex_count())
    throw InputError("unknown vertex id " + std::to_string(v));
}

std::uint64_t MetricGraph::fingerprint() const noexcept {
  return data_->fingerprint;
}

std::vector<Distance> MetricGraph::bfs(Vertex s, Distance max_depth) const {
  check_vertex(s);
  const std::size_t n = vertex_count();
  std::vector<Distance> dist(n, kUnreachable);
  std::vector<Vertex> queue;
  queue.reserve(n);
  dist[s] = 0;
  queue.push_back(s);
  const auto& off = data_->offsets;
  const auto& tgt = data_->targets;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Vertex u = queue[head];
    const Distance du = dist[u];
    if (du >= max_depth) continue;
    for (std::size_t e = off[u]; e < off[u + 1]; ++e) {
      const Vertex w = tgt[e];
      if (dist[w] == kUnreachable) {
        dist[w] = du + 1;
        queue.push_back(w);
      }
    }
  }
  return dist;
}

std::shared_ptr<const std::vector<Distance>> MetricGraph::distances_from(
    Vertex s) const {
  check_vertex(s);
  if (auto row = cache_->find(s)) return row;
  const OracleConfig config = oracle_config();
  if (config.spill_dir) {
    const auto path = detail::DistanceCache::spill_path(*config.spill_dir,
                                                        fingerprint(), s);
    std::ifstream in(path, std::ios::binary);
    if (in) {
      std::vector<Distance> row(vertex_count());
      in.read(reinterpret_cast<char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(Distance)));
      if (in.gcount() ==
          static_cast<std::streamsize>(row.size() * sizeof(Distance)))
        return cache_->insert(
            s, std::make_shared<const std::vector<Distance>>(std::move(row)),
            fingerprint());
    }
  }
  return cache_->insert(s, std::make_shared<const std::vector<Distance>>(bfs(s)),
                        fingerprint());
}

Distance MetricGraph::distance(Vertex u, Vertex v) const {
  check_vertex(v);
  return (*distances_from(u))[v];
}

std::vector<Distance> MetricGraph::distances_to_set(
    std::span<const Vertex> sources) const {
  return nearest_in_set(sources).first;
}

std::pair<std::vector<Distance>, std::vector<Vertex>> MetricGraph::nearest_in_set(
    std::span<const Vertex> sources) const {
  const std::size_t n = vertex_count();
  std::vector<Distance> dist(n, kUnreachable);
  std::vector<Vertex> label(n, 0);
  std::vector<Vertex> frontier;
  for (Vertex s : sources) {
    check_vertex(s);
    if (dist[s] == 0) {
      label[s] = std::min(label[s], s);
      continue;
    }
    dist[s] = 0;
    label[s] = s;
    frontier.push_back(s);
  }
  // Level-synchronous so that every vertex sees all predecessors of the
  // previous level before its label is final.
  std::vector<Vertex> next;
  Distance level = 0;
  while (!frontier.empty()) {
    next.clear();
    for (Vertex u : frontier)
      for (Vertex w : neighbors(u)) {
        if (dist[w] == kUnreachable) {
          dist[w] = level + 1;
          label[w] = label[u];
          next.push_back(w);
        } else if (dist[w] == level + 1 && label[u] < label[w]) {
          label[w] = label[u];
        }
      }
    frontier.swap(next);
    ++level;
  }
  return {std::move(dist), std::move(label)};
}

Distance MetricGraph::diameter() const {
  Distance best = 0;
  for (Vertex v = 0; v < vertex_count(); ++v) {
    const auto row = bfs(v);
    best = std::max(best, *std::max_element(row.begin(), row.end()));
  }
  return best;
}

MetricGraph MetricGraph::induced(const VertexSet& vertices) const {
  std::vector<Vertex> local(vertex_count(), kUnreachable);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    check_vertex(vertices[i]);
    local[vertices[i]] = static_cast<Vertex>(i);
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < vertices.size(); ++i)
    for (Vertex w : neighbors(vertices[i]))
      if (local[w] != kUnreachable && local[w] > i)
        edges.emplace_back(static_cast<Vertex>(i), local[w]);
  return MetricGraph(vertices.size(), edges);
}

DottedPath::DottedPath(MetricGraph host, std::vector<Vertex> vertices)
    : host_(std::move(host)), vertices_(std::move(vertices)) {
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    host_.check_vertex(vertices_[i]);
    if (i > 0 && vertices_[i] != vertices_[i - 1] &&
        !host_.adjacent(vertices_[i - 1], vertices_[i]))
      throw InputError("dotted path step " + std::to_string(vertices_[i - 1]) +
                       "->" + std::to_string(vertices_[i]) + " is not an edge");
  }
}

Distance DottedPath::length() const noexcept {
  Distance n = 0;
  for (std::size_t i = 1; i < vertices_.size(); ++i)
    if (vertices_[i] != vertices_[i - 1]) ++n;
  return n;
}

DottedPath geodesic(const MetricGraph& g, Vertex u, Vertex v) {
  g.check_vertex(u);
  const auto to_v = g.distances_from(v);
  std::vector<Vertex> path{u};
  Vertex cur = u;
  while (cur != v) {
    const Distance want = (*to_v)[cur] - 1;
    for (Vertex w : g.neighbors(cur))
      if ((*to_v)[w] == want) {
        cur = w;
        break;
      }
    path.push_back(cur);
  }
  return DottedPath(g, std::move(path));
}

DottedPath geodesic_near(const MetricGraph& g, Vertex u, Vertex v,
                         std::span<const Vertex> near) {
  require_nonempty(near, "geodesic_near");
  g.check_vertex(u);
  const auto du = g.distances_from(u);
  const auto dv = g.distances_from(v);
  const Distance d = (*du)[v];
  const auto dn = g.distances_to_set(near);
  std::vector<Vertex> inside;
  for (Vertex w = 0; w < g.vertex_count(); ++w)
    if ((*du)[w] + (*dv)[w] == d) inside.push_back(w);
  // Interval vertices with d(., near) <= h that lie on an allowed geodesic
  // towards v, found layer by layer from v.
  std::vector<char> ok(g.vertex_count(), 0);
  auto mark = [&](Distance h) {
    std::vector<Vertex> order = inside;
    std::sort(order.begin(), order.end(),
              [&](Vertex a, Vertex b) { return (*dv)[a] < (*dv)[b]; });
    for (Vertex w : order) {
      ok[w] = 0;
      if (dn[w] > h) continue;
      if (w == v) {
        ok[w] = 1;
        continue;
      }
      for (Vertex x : g.neighbors(w))
        if ((*dv)[x] + 1 == (*dv)[w] && ok[x]) {
          ok[w] = 1;
          break;
        }
    }
    return ok[u] != 0;
  };
  std::vector<Distance> levels;
  for (Vertex w : inside) levels.push_back(dn[w]);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::size_t lo = 0, hi = levels.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (mark(levels[mid])) hi = mid;
    else lo = mid + 1;
  }
  mark(levels[lo]);
  std::vector<Vertex> path{u};
  for (Vertex cur = u; cur != v;) {
    for (Vertex w : g.neighbors(cur))
      if ((*dv)[w] + 1 == (*dv)[cur] && ok[w]) {
        cur = w;
        break;
      }
    path.push_back(cur);
  }
  return DottedPath(g, std::move(path));
}

Distance hausdorff_to_geodesic(const DottedPath& p) {
  const auto& g = p.host();
  const auto& v = p.vertices();
  const Distance lex = hausdorff_distance(g, v, geodesic(g, p.front(), p.back()).vertices());
  const Distance near =
      hausdorff_distance(g, v, geodesic_near(g, p.front(), p.back(), v).vertices());
  return std::min(lex, near);
}

VertexSet interval(const MetricGraph& g, Vertex u, Vertex v) {
  const auto du = g.distances_from(u);
  const auto dv = g.distances_from(v);
  const Distance d = (*du)[v];
  VertexSet out;
  for (Vertex w = 0; w < g.vertex_count(); ++w)
    if ((*du)[w] + (*dv)[w] == d) out.push_back(w);
  return out;
}

Rational gromov_product(const MetricGraph& g, Vertex p, Vertex x, Vertex y) {
  const auto dp = g.distances_from(p);
  g.check_vertex(x);
  g.check_vertex(y);
  const std::int64_t twice = static_cast<std::int64_t>((*dp)[x]) + (*dp)[y] -
                             static_cast<std::int64_t>(g.distance(x, y));
  return Rational(twice, 2);
}

namespace {

struct QuadBest {
  std::int64_t gap = 0;  // L - M, i.e. twice the defect
  std::array<Vertex, 4> witness{0, 0, 0, 0};
};

// Updates best with the four-point gap of (a,b,c,d).
inline void score_quadruple(QuadBest& best, Vertex a, Vertex b, Vertex c, Vertex d,
                            std::int64_t s1, std::int64_t s2, std::int64_t s3) {
  // s1 pairs {a,b}{c,d}; s2 pairs {a,c}{b,d}; s3 pairs {a,d}{b,c}.
  std::int64_t largest, mid;
  std::array<Vertex, 4> w;
  if (s1 >= s2 && s1 >= s3) {
    largest = s1;
    mid = std::max(s2, s3);
    w = {c, a, b, d};
  } else if (s2 >= s3) {
    largest = s2;
    mid = std::max(s1, s3);
    w = {b, a, c, d};
  } else {
    largest = s3;
    mid = std::max(s1, s2);
    w = {b, a, d, c};
  }
  if (largest - mid > best.gap) {
    best.gap = largest - mid;
    best.witness = w;
  }
}

}  // namespace

DeltaReport gromov_delta(const MetricGraph& g, const DeltaOptions& options) {
  const std::size_t n = g.vertex_count();
  DeltaReport report;
  if (n == 0) return report;
  if (n > options.exhaustive_cap) {
    if (!options.allow_sampling)
      throw SizeError("gromov_delta: " + std::to_string(n) +
                      " vertices exceeds exhaustive cap " +
                      std::to_string(options.exhaustive_cap));
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<Vertex> pick(0, static_cast<Vertex>(n - 1));
    QuadBest best;
    for (std::uint64_t s = 0; s < options.samples; ++s) {
      const Vertex a = pick(rng), b = pick(rng), c = pick(rng), d = pick(rng);
      const auto ra = g.distances_from(a);
      const auto rb = g.distances_from(b);
      const auto rc = g.distances_from(c);
      score_quadruple(best, a, b, c, d, std::int64_t{(*ra)[b]} + (*rc)[d],
                      std::int64_t{(*ra)[c]} + (*rb)[d],
                      std::int64_t{(*ra)[d]} + (*rb)[c]);
    }
    report.delta = Rational(best.gap, 2);
    report.witness = best.witness;
    report.sampled = true;
    report.quadruples_examined = options.samples;
    return report;
  }

  std::vector<Distance> table(n * n);
  for (Vertex v = 0; v < n; ++v) {
    const auto row = g.bfs(v);
    std::copy(row.begin(), row.end(), table.begin() + static_cast<std::ptrdiff_t>(v * n));
  }
  const auto d = [&](Vertex a, Vertex b) -> std::int64_t { return table[a * n + b]; };

  std::vector<QuadBest> partial(thread_count());
  parallel_chunks(n, [&](unsigned worker, std::size_t begin, std::size_t end) {
    QuadBest best;
    for (Vertex a = static_cast<Vertex>(begin); a < end; ++a)
      for (Vertex b = a + 1; b < n; ++b) {
        const std::int64_t dab = d(a, b);
        for (Vertex c = b + 1; c < n; ++c) {
          const std::int64_t dac = d(a, c), dbc = d(b, c);
          for (Vertex e = c + 1; e < n; ++e)
            score_quadruple(best, a, b, c, e, dab + d(c, e), dac + d(b, e),
                            d(a, e) + dbc);
        }
      }
    partial[worker] = best;
  });
  QuadBest best;
  for (const auto& p : partial)
    if (p.gap > best.gap) best = p;
  report.delta = Rational(best.gap, 2);
  report.witness = best.witness;
  const std::uint64_t nn = n;
  report.quadruples_examined = n < 4 ? 0 : nn * (nn - 1) * (nn - 2) * (nn - 3) / 24;
  return report;
}

Distance slim_triangle_defect(const MetricGraph& g, Vertex x, Vertex y, Vertex z) {
  const std::array<VertexSet, 3> sides{geodesic(g, x, y).vertex_set(),
                                       geodesic(g, y, z).vertex_set(),
                                       geodesic(g, x, z).vertex_set()};
  Distance worst = 0;
  for (int i = 0; i < 3; ++i) {
    VertexSet others = sides[(i + 1) % 3];
    others.insert(others.end(), sides[(i + 2) % 3].begin(), sides[(i + 2) % 3].end());
    const auto dist = g.distances_to_set(make_vertex_set(std::move(others)));
    for (Vertex v : sides[i]) worst = std::max(worst, dist[v]);
  }
  return worst;
}

Rational lambda_grid(unsigned k) { return Rational(4 + k, 4); }

namespace {

// d(alpha_i, alpha_j) for all index pairs, via one cached row per distinct
// vertex.
std::vector<std::vector<Distance>> path_distance_table(const DottedPath& alpha) {
  const auto& vs = alpha.vertices();
  std::unordered_map<Vertex, std::shared_ptr<const std::vector<Distance>>> rows;
  for (Vertex v : vs)
    if (!rows.count(v)) rows.emplace(v, alpha.host().distances_from(v));
  std::vector<std::vector<Distance>> table(vs.size(), std::vector<Distance>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = 0; j < vs.size(); ++j) table[i][j] = (*rows.at(vs[i]))[vs[j]];
  return table;
}

}  // namespace

Rational min_epsilon(const DottedPath& alpha, Rational lambda) {
  if (alpha.empty()) throw InputError("certify: empty path");
  if (lambda < Rational(1)) throw InputError("certify: lambda must be >= 1");
  const auto table = path_distance_table(alpha);
  Rational eps{0};
  const std::size_t n = alpha.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Rational gap(static_cast<std::int64_t>(j - i));
      const Rational d(static_cast<std::int64_t>(table[i][j]));
      eps = max(eps, gap / lambda - d);
      eps = max(eps, d - lambda * gap);
    }
  return eps;
}

QiCertificate certify_quasigeodesic(const DottedPath& alpha) {
  // Lexicographic: the smallest grid lambda is always feasible for a finite
  // path, then epsilon is minimised for it.
  const Rational lambda = lambda_grid(0);
  return {lambda, min_epsilon(alpha, lambda)};
}

bool verify_certificate(const DottedPath& alpha, const QiCertificate& cert) {
  const auto table = path_distance_table(alpha);
  const std::size_t n = alpha.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const Rational gap(static_cast<std::int64_t>(i > j ? i - j : j - i));
      const Rational d(static_cast<std::int64_t>(table[i][j]));
      if (gap / cert.lambda - cert.epsilon > d) return false;
      if (d > cert.lambda * gap + cert.epsilon) return false;
    }
  return true;
}

Distance hausdorff_distance(const MetricGraph& g, std::span<const Vertex> a,
                            std::span<const Vertex> b) {
  require_nonempty(a, "hausdorff_distance");
  require_nonempty(b, "hausdorff_distance");
  const auto to_a = g.distances_to_set(a);
  const auto to_b = g.distances_to_set(b);
  Distance h = 0;
  for (Vertex x : a) h = std::max(h, to_b[x]);
  for (Vertex y : b) h = std::max(h, to_a[y]);
  return h;
}

Distance quasiconvexity_constant(const MetricGraph& g, std::span<const Vertex> a) {
  require_nonempty(a, "quasiconvexity_constant");
  const VertexSet set = make_vertex_set({a.begin(), a.end()});
  if (set.size() == g.vertex_count()) return 0;
  const auto to_a = g.distances_to_set(set);
  std::vector<std::shared_ptr<const std::vector<Distance>>> rows;
  rows.reserve(set.size());
  for (Vertex v : set) rows.push_back(g.distances_from(v));
  Distance k = 0;
  for (std::size_t i = 0; i < set.size(); ++i)
    for (std::size_t j = i + 1; j < set.size(); ++j) {
      const auto& ru = *rows[i];
      const auto& rv = *rows[j];
      const Distance d = ru[set[j]];
      for (Vertex w = 0; w < g.vertex_count(); ++w)
        if (ru[w] + rv[w] == d) k = std::max(k, to_a[w]);
    }
  return k;
}

Vertex project(const MetricGraph& g, std::span<const Vertex> a, Vertex x) {
  require_nonempty(a, "project");
  const auto row = g.distances_from(x);
  Vertex best = a[0];
  g.check_vertex(best);
  for (Vertex v : a) {
    g.check_vertex(v);
    if ((*row)[v] < (*row)[best] || ((*row)[v] == (*row)[best] && v < best)) best = v;
  }
  return best;
}

Distance set_diameter(const MetricGraph& g, std::span<const Vertex> a) {
  Distance d = 0;
  for (Vertex u : a) {
    const auto row = g.distances_from(u);
    for (Vertex v : a) d = std::max(d, (*row)[v]);
  }
  return d;
}

DottedPath concatenate(const MetricGraph& host,
                       const std::vector<std::vector<Vertex>>& pieces) {
  std::vector<Vertex> out;
  for (const auto& piece : pieces) {
    if (piece.empty()) continue;
    auto begin = piece.begin();
    if (!out.empty()) {
      if (out.back() != piece.front())
        throw InvariantError("concatenate: pieces do not share endpoints (" +
                             std::to_string(out.back()) + " vs " +
                             std::to_string(piece.front()) + ")");
      ++begin;
    }
    out.insert(out.end(), begin, piece.end());
  }
  return DottedPath(host, std::move(out));
}

ChainedPath chained_projection_path(const MetricGraph& g,
                                    const std::vector<VertexSet>& blocks, Vertex y,
                                    Vertex y_end) {
  if (blocks.empty()) throw InputError("chained_projection_path: no blocks");
  for (const auto& b : blocks) require_nonempty(b, "chained_projection_path block");
  ChainedPath out;
  std::vector<std::vector<Vertex>> pieces;
  Vertex cur = y;
  out.hops.push_back(y);
  for (std::size_t i = 1; i < blocks.size(); ++i) {
    const Vertex next = project(g, blocks[i], cur);
    pieces.push_back(geodesic(g, cur, next).vertices());
    out.hops.push_back(next);
    cur = next;
  }
  pieces.push_back(geodesic(g, cur, y_end).vertices());
  out.path = concatenate(g, pieces);
  return out;
}

Barycenter barycenter(const MetricGraph& g, Vertex x, Vertex y, Vertex z) {
  const auto dx = g.distances_to_set(interval(g, x, y));
  const auto dy = g.distances_to_set(interval(g, y, z));
  const auto dz = g.distances_to_set(interval(g, x, z));
  Barycenter best{0, kUnreachable};
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const Distance r = std::max({dx[v], dy[v], dz[v]});
    if (r < best.radius) best = {v, r};
  }
  return best;
}

GraphApproximation graph_approximation(
    const std::vector<std::vector<Rational>>& dist) {
  const std::size_t n = dist.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (dist[i].size() != n) throw InputError("metric table is not square");
    if (dist[i][i] != Rational(0)) throw InputError("metric table has nonzero diagonal");
    for (std::size_t j = 0; j < n; ++j) {
      if (dist[i][j] != dist[j][i]) throw InputError("metric table is not symmetric");
      if (i != j && dist[i][j] <= Rational(0))
        throw InputError("metric table has nonpositive off-diagonal entry");
      for (std::size_t k = 0; k < n; ++k)
        if (dist[i][k] > dist[i][j] + dist[j][k])
          throw InputError("metric table violates the triangle inequality at (" +
                           std::to_string(i) + "," + std::to_string(j) + "," +
                           std::to_string(k) + ")");
    }
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist[i][j] <= Rational(1))
        edges.emplace_back(static_cast<Vertex>(i), static_cast<Vertex>(j));
  GraphApproximation out{MetricGraph(n, edges), 0};
  for (Vertex i = 0; i < n; ++i) {
    const auto row = out.graph.bfs(i);
    for (Vertex j = 0; j < n; ++j) {
      const Rational dg(static_cast<std::int64_t>(row[j]));
      if (dist[i][j] > dg || dg > dist[i][j] + Rational(1)) ++out.bound_violations;
    }
  }
  return out;
}

bool is_isomorphism(const MetricGraph& a, const MetricGraph& b,
                    std::span<const Vertex> map) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() ||
      map.size() != a.vertex_count())
    return false;
  std::vector<char> hit(b.vertex_count(), 0);
  for (Vertex v : map) {
    if (v >= b.vertex_count() || hit[v]) return false;
    hit[v] = 1;
  }
  for (auto [u, v] : a.edges())
    if (!b.adjacent(map[u], map[v])) return false;
  return true;
}

Rational Rational::parse(const std::string& text) {
  try {
    if (auto slash = text.find('/'); slash != std::string::npos)
      return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
    if (auto dot = text.find('.'); dot != std::string::npos) {
      const std::string frac = text.substr(dot + 1);
      std::int64_t den = 1;
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      const bool neg = !text.empty() && text[0] == '-';
      const std::int64_t whole = dot == 0 || text.substr(0, dot) == "-"
                                     ? 0
                                     : std::llabs(std::stoll(text.substr(0, dot)));
      const std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
      const std::int64_t num = whole * den + part;
      return Rational(neg ? -num : num, den);
    }
    std::size_t used = 0;
    const std::int64_t v = std::stoll(text, &used);
    if (used != text.size()) throw InputError("trailing characters");
    return Rational(v);
  } catch (const std::logic_error&) {
    throw InputError("cannot parse rational '" + text + "'");
  }
}

}  // namespace coarse
