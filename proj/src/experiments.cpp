#include "coarse/experiments.hpp"

#include <algorithm>
#include <random>

#include "coarse/error.hpp"
#include "coarse/parallel.hpp"

namespace coarse {

namespace {

bool trusted_point(const GraphBundle& bd, Vertex x) {
  return bd.trusted_vertex(x) && bd.trusted_base(bd.project(x));
}

// Y ids whose parent vertex is trusted.
std::vector<Vertex> trusted_pool(const GraphBundle& bd, const Restriction& r) {
  std::vector<Vertex> out;
  for (Vertex k = 0; k < r.total_ids.size(); ++k)
    if (trusted_point(bd, r.total_ids[k])) out.push_back(k);
  return out;
}

Vertex y_id(const Restriction& r, Vertex x) {
  const auto& ids = r.total_ids;
  const auto it = std::lower_bound(ids.begin(), ids.end(), x);
  if (it == ids.end() || *it != x)
    throw InputError("vertex " + std::to_string(x) + " is not over the subbase");
  return static_cast<Vertex>(it - ids.begin());
}

}  // namespace

MitraCurve mitra_curve(const GraphBundle& bd, const VertexSet& a, Vertex p, Distance n_max,
                       std::size_t pairs, std::uint64_t seed) {
  const Restriction r = restrict_bundle(bd, a);
  if (!std::is_sorted(r.total_ids.begin(), r.total_ids.end()))
    throw InvariantError("restriction ids are not sorted");
  if (!trusted_point(bd, p)) throw InputError("mitra_curve: p outside the trusted interior");
  const Vertex py = y_id(r, p);
  const MetricGraph& x = bd.total();
  const MetricGraph& y = r.bundle.total();
  const auto pool = trusted_pool(bd, r);
  const auto dp_y = y.distances_from(py);
  const auto dp_x = x.distances_from(p);

  MitraCurve out;
  out.seed = seed;
  std::mt19937_64 rng(seed);
  for (Distance n = 0; n <= n_max; ++n) {
    MitraEntry e;
    e.n = n;
    std::vector<Vertex> far;
    for (Vertex v : pool)
      if ((*dp_y)[v] > n) far.push_back(v);
    if (far.size() < 2) {
      out.samples.push_back(e);
      continue;
    }
    std::uniform_int_distribution<std::size_t> pick(0, far.size() - 1);
    while (e.pairs < pairs && e.attempts < 50 * pairs) {
      ++e.attempts;
      const Vertex u = far[pick(rng)], v = far[pick(rng)];
      const auto du = y.distances_from(u), dv = y.distances_from(v);
      const Distance d = (*du)[v];
      bool avoids = true;
      for (Vertex w = 0; w < y.vertex_count() && avoids; ++w)
        if ((*du)[w] + (*dv)[w] == d && (*dp_y)[w] <= n) avoids = false;
      if (!avoids) continue;
      ++e.pairs;
      const Vertex xu = r.total_ids[u], xv = r.total_ids[v];
      const auto ru = x.distances_from(xu), rv = x.distances_from(xv);
      const Distance dx = (*ru)[xv];
      Distance m = kUnreachable;
      for (Vertex w = 0; w < x.vertex_count(); ++w)
        if ((*ru)[w] + (*rv)[w] == dx) m = std::min(m, (*dp_x)[w]);
      e.m = std::min(e.m.value_or(kUnreachable), m);
    }
    out.samples.push_back(e);
  }
  return out;
}

DistortionProfile distortion_profile(const GraphBundle& bd, const VertexSet& a, Distance m_max) {
  const Restriction r = restrict_bundle(bd, a);
  const MetricGraph& x = bd.total();
  const MetricGraph& y = r.bundle.total();
  const auto pool = trusted_pool(bd, r);

  const unsigned workers = thread_count();
  std::vector<std::vector<Distance>> best(workers, std::vector<Distance>(m_max + 1, 0));
  std::vector<std::size_t> counts(workers, 0);
  std::vector<char> below(workers, 0);
  parallel_chunks(pool.size(), [&](unsigned w, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vertex u = pool[i];
      const auto rx = x.bfs(r.total_ids[u], m_max);
      const auto ry = y.bfs(u);
      for (std::size_t j = i + 1; j < pool.size(); ++j) {
        const Vertex v = pool[j];
        const Distance dx = rx[r.total_ids[v]];
        if (dx > m_max) continue;
        if (ry[v] < dx) below[w] = 1;
        best[w][dx] = std::max(best[w][dx], ry[v]);
        ++counts[w];
      }
    }
  });
  DistortionProfile out;
  out.dy_max.assign(m_max + 1, 0);
  for (unsigned w = 0; w < workers; ++w) {
    if (below[w]) throw InvariantError("distortion_profile: d_Y < d_X");
    out.pairs += counts[w];
    for (Distance m = 0; m <= m_max; ++m) out.dy_max[m] = std::max(out.dy_max[m], best[w][m]);
  }
  for (Distance m = 1; m <= m_max; ++m)
    out.dy_max[m] = std::max(out.dy_max[m], out.dy_max[m - 1]);

  // Smallest k, then tightest (c, d), with k M + k + eta(c M + d) >= dy_max.
  std::optional<std::uint64_t> best_score;
  for (Distance k = 0; k <= kMaxEnvelopeSlope && !best_score; ++k)
    for (Distance ec = 1; ec <= 3; ++ec)
      for (Distance ed = 0; ed <= 3; ++ed) {
        const Envelope env{k, k, ec, ed};
        std::uint64_t score = 0;
        bool dominates = true;
        for (Distance m = 0; m <= m_max; ++m) {
          score += env(bd, m);
          dominates = dominates && env(bd, m) >= out.dy_max[m];
        }
        if (dominates && (!best_score || score < *best_score)) {
          best_score = score;
          out.envelope = env;
        }
      }
  out.dominated = best_score.has_value();
  return out;
}

DiagonalReport diagonal_embedding_measure(const GraphBundle& bd, Vertex split,
                                          std::size_t pairs, std::uint64_t seed) {
  const MetricGraph& base = bd.base();
  const std::size_t nb = base.vertex_count();
  base.check_vertex(split);
  if (base.edge_count() + 1 != nb)
    throw InputError("diagonal_embedding_measure: base is not a path");
  Vertex end = 0;
  for (Vertex b = 0; b < nb; ++b) {
    if (base.neighbors(b).size() > 2)
      throw InputError("diagonal_embedding_measure: base is not a path");
    if (base.neighbors(b).size() <= 1) end = b;
  }
  // Positions along the line from one end.
  const auto pos = base.distances_from(end);
  VertexSet plus, minus;
  for (Vertex b = 0; b < nb; ++b) {
    if ((*pos)[b] >= (*pos)[split]) plus.push_back(b);
    if ((*pos)[b] <= (*pos)[split]) minus.push_back(b);
  }
  const Restriction rp = restrict_bundle(bd, plus), rm = restrict_bundle(bd, minus);

  DiagonalReport out;
  const auto& f0 = bd.fiber(split);
  if (f0.size() < 2) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, f0.size() - 1);
  std::optional<Rational> hi, lo;
  for (std::size_t i = 0; i < pairs; ++i) {
    const Vertex u = f0[pick(rng)];
    Vertex v = f0[pick(rng)];
    while (v == u) v = f0[pick(rng)];
    const std::int64_t d0 = bd.fiber_distance(u, v);
    const std::int64_t dp = rp.bundle.total().distance(y_id(rp, u), y_id(rp, v));
    const std::int64_t dm = rm.bundle.total().distance(y_id(rm, u), y_id(rm, v));
    const std::int64_t num = dp * dp + dm * dm, den = d0 * d0;
    if (num > 2 * den) ++out.upper_violations;
    const Rational q(num, den);
    hi = hi ? max(*hi, q) : q;
    lo = lo ? min(*lo, q) : q;
    ++out.pairs;
  }
  out.max_ratio_sq = *hi;
  out.min_ratio_sq = *lo;
  // lambda^2 >= max ratio and lambda^2 * min ratio >= 1.
  unsigned k = 0;
  while (true) {
    const Rational l = lambda_grid(k);
    if (l * l >= *hi && l * l * *lo >= Rational(1)) break;
    ++k;
  }
  out.certificate = {lambda_grid(k), Rational(0)};
  return out;
}

std::vector<LaminationPair> detect_lamination_pairs(const GraphBundle& bd, Vertex b,
                                                    Rational ratio) {
  bd.base().check_vertex(b);
  const MetricGraph& x = bd.total();
  std::vector<Vertex> zs;
  for (Vertex z : bd.fiber(b))
    if (bd.trusted_vertex(z)) zs.push_back(z);
  std::vector<LaminationPair> out;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const auto rx = x.distances_from(zs[i]);
    const auto rf = bd.fiber_graph(b).distances_from(bd.local_id(zs[i]));
    for (std::size_t j = i + 1; j < zs.size(); ++j) {
      const Distance df = (*rf)[bd.local_id(zs[j])], dx = (*rx)[zs[j]];
      if (Rational(df) < ratio * Rational(dx)) continue;
      const auto rz = x.distances_from(zs[j]);
      std::vector<Vertex> bases;
      for (Vertex w = 0; w < x.vertex_count(); ++w)
        if ((*rx)[w] + (*rz)[w] == dx) bases.push_back(bd.project(w));
      out.push_back({zs[i], zs[j], df, dx,
                     set_diameter(bd.base(), make_vertex_set(std::move(bases)))});
    }
  }
  return out;
}

}  // namespace coarse
