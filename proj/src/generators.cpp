#include "coarse/generators.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace coarse {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string part;
  while (std::getline(in, part, sep)) out.push_back(part);
  return out;
}

std::size_t parse_size(const std::string& s, const std::string& spec) {
  try {
    std::size_t used = 0;
    const unsigned long v = std::stoul(s, &used);
    if (used == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw InputError("bad graph spec '" + spec + "'");
}

char inverse_letter(char c) {
  return std::islower(static_cast<unsigned char>(c)) ? static_cast<char>(std::toupper(c))
                                                     : static_cast<char>(std::tolower(c));
}

std::string invert(const std::string& w) {
  std::string out(w.rbegin(), w.rend());
  for (char& c : out) c = inverse_letter(c);
  return out;
}

// Generator letters in shortlex order: a A b B c C ...
std::vector<char> alphabet(std::size_t rank) {
  std::vector<char> out;
  for (std::size_t i = 0; i < rank; ++i) {
    out.push_back(static_cast<char>('a' + i));
    out.push_back(static_cast<char>('A' + i));
  }
  return out;
}

void check_letters(const std::string& w, std::size_t rank) {
  for (char c : w) {
    const char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lower < 'a' || static_cast<std::size_t>(lower - 'a') >= rank)
      throw InputError(std::string("unknown generator letter '") + c + "'");
  }
}

}  // namespace

bool shortlex_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  const auto key = [](char c) {
    return 2 * (std::tolower(static_cast<unsigned char>(c)) - 'a') +
           (std::isupper(static_cast<unsigned char>(c)) ? 1 : 0);
  };
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return key(a[i]) < key(b[i]);
  return false;
}

std::string reduce_word(const std::string& word) {
  std::string out;
  for (char c : word) {
    if (!out.empty() && out.back() == inverse_letter(c))
      out.pop_back();
    else
      out.push_back(c);
  }
  return out;
}

std::string apply_substitution(const std::vector<std::string>& images,
                               const std::string& word) {
  std::string out;
  for (char c : word) {
    const bool lower = std::islower(static_cast<unsigned char>(c));
    const std::size_t i = static_cast<std::size_t>(std::tolower(c) - 'a');
    if (i >= images.size()) throw InputError(std::string("unknown letter '") + c + "'");
    out += lower ? images[i] : invert(images[i]);
  }
  return reduce_word(out);
}

MetricGraph make_graph(const std::string& spec) {
  const auto parts = split(spec, ':');
  if (parts.empty()) throw InputError("empty graph spec");
  const std::string& kind = parts[0];
  std::vector<Edge> e;
  if (kind == "single" && parts.size() == 1) return MetricGraph(1, e);
  if (kind == "path" && parts.size() == 2) {
    const std::size_t n = parse_size(parts[1], spec);
    if (n == 0) throw InputError("path needs at least one vertex");
    for (Vertex i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return MetricGraph(n, e);
  }
  if (kind == "cycle" && parts.size() == 2) {
    const std::size_t n = parse_size(parts[1], spec);
    if (n < 3) throw InputError("cycle needs at least three vertices");
    for (Vertex i = 0; i < n; ++i) e.emplace_back(i, static_cast<Vertex>((i + 1) % n));
    return MetricGraph(n, e);
  }
  if (kind == "grid" && parts.size() == 2) {
    const auto dims = split(parts[1], 'x');
    if (dims.size() != 2) throw InputError("bad graph spec '" + spec + "'");
    const std::size_t w = parse_size(dims[0], spec), h = parse_size(dims[1], spec);
    if (w == 0 || h == 0) throw InputError("grid dimensions must be positive");
    for (Vertex y = 0; y < h; ++y)
      for (Vertex x = 0; x < w; ++x) {
        const Vertex v = static_cast<Vertex>(y * w + x);
        if (x + 1 < w) e.emplace_back(v, v + 1);
        if (y + 1 < h) e.emplace_back(v, static_cast<Vertex>(v + w));
      }
    return MetricGraph(w * h, e);
  }
  if (kind == "tree" && parts.size() == 3) {
    const std::size_t depth = parse_size(parts[1], spec), k = parse_size(parts[2], spec);
    if (k == 0) throw InputError("tree arity must be positive");
    std::size_t n = 1;
    std::vector<std::pair<std::size_t, std::size_t>> levels{{0, 1}};
    for (std::size_t d = 0; d < depth; ++d) {
      const auto [start, count] = levels.back();
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t c = 0; c < k; ++c)
          e.emplace_back(static_cast<Vertex>(start + i), static_cast<Vertex>(n + i * k + c));
      levels.emplace_back(n, count * k);
      n += count * k;
    }
    return MetricGraph(n, e);
  }
  throw InputError("bad graph spec '" + spec + "'");
}

GraphBundle gen_product(const MetricGraph& base, const MetricGraph& fiber) {
  const std::size_t nb = base.vertex_count(), nf = fiber.vertex_count();
  std::vector<Edge> e;
  std::vector<Vertex> projection(nb * nf);
  for (Vertex b = 0; b < nb; ++b) {
    for (Vertex f = 0; f < nf; ++f) projection[b * nf + f] = b;
    for (auto [u, v] : fiber.edges())
      e.emplace_back(static_cast<Vertex>(b * nf + u), static_cast<Vertex>(b * nf + v));
  }
  for (auto [a, b] : base.edges())
    for (Vertex f = 0; f < nf; ++f)
      e.emplace_back(static_cast<Vertex>(a * nf + f), static_cast<Vertex>(b * nf + f));
  return validate_bundle(MetricGraph(nb * nf, e), base, std::move(projection));
}

GraphBundle gen_dilation(std::size_t base_len, std::size_t fiber_size) {
  if (base_len == 0 || fiber_size == 0) throw InputError("dilation sizes must be positive");
  const std::size_t m = fiber_size, width = m + 1;
  std::vector<Edge> e;
  std::vector<Vertex> projection((base_len + 1) * width);
  std::vector<Distance> depth((base_len + 1) * width, 1);
  const auto id = [&](std::size_t i, std::size_t j) { return static_cast<Vertex>(i * width + j); };
  for (std::size_t i = 0; i <= base_len; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      projection[id(i, j)] = static_cast<Vertex>(i);
      // Doubling saturates above m/2; both ends of a clamped edge are untrusted.
      if ((i < base_len && 2 * j > m) || (i > 0 && j == m)) depth[id(i, j)] = 0;
      if (j < m) e.emplace_back(id(i, j), id(i, j + 1));
      if (i < base_len) {
        e.emplace_back(id(i, j), id(i + 1, std::min(2 * j, m)));
        e.emplace_back(id(i + 1, j), id(i, j / 2));
      }
    }
  }
  MetricGraph total(projection.size(), e);
  return validate_bundle(std::move(total),
                         make_graph("path:" + std::to_string(base_len + 1)), std::move(projection),
                         {}, std::move(depth));
}

Vertex ExtensionBundle::base_vertex(int k) const {
  const int n = static_cast<int>(spec.base_radius);
  if (k < -n || k > n) throw InputError("level " + std::to_string(k) + " outside the base ball");
  return static_cast<Vertex>(k + n);
}

int ExtensionBundle::level(Vertex b) const {
  bundle.base().check_vertex(b);
  return static_cast<int>(b) - static_cast<int>(spec.base_radius);
}

Vertex ExtensionBundle::vertex(int k, const std::string& w) const {
  const std::string r = reduce_word(w);
  const auto it = std::lower_bound(words.begin(), words.end(), r, shortlex_less);
  if (it != words.end() && *it == r)
    return static_cast<Vertex>(base_vertex(k) * fiber_size + (it - words.begin()));
  throw InputError("word '" + w + "' is outside the fibre ball");
}

std::string ExtensionBundle::word(Vertex x) const {
  bundle.total().check_vertex(x);
  return words[x % fiber_size];
}

std::vector<Vertex> ExtensionBundle::translate_section(Vertex x) const {
  const Vertex b0 = bundle.project(x);
  const std::size_t nb = bundle.base().vertex_count();
  std::vector<Vertex> s(nb);
  s[b0] = x;
  // t-edges are the only cross-edges of a vertex up to clamping; the
  // section follows them (the smallest-id neighbour is the unique one).
  for (Vertex b = b0 + 1; b < nb; ++b) s[b] = bundle.step(s[b - 1], b);
  for (Vertex b = b0; b-- > 0;) s[b] = bundle.step(s[b + 1], b);
  return s;
}

SectionFactory ExtensionBundle::section_factory() const {
  return [self = *this](Vertex x) { return self.translate_section(x); };
}

ExtensionBundle gen_extension(const ExtensionSpec& spec) {
  const std::size_t rank = spec.automorphism.size();
  if (rank == 0 || rank > 26) throw InputError("extension rank must be in 1..26");
  if (spec.inverse.size() != rank) throw InputError("inverse automorphism has wrong rank");
  for (const auto& w : spec.automorphism) check_letters(w, rank);
  for (const auto& w : spec.inverse) check_letters(w, rank);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::string g(1, static_cast<char>('a' + i));
    if (apply_substitution(spec.automorphism, apply_substitution(spec.inverse, g)) != g ||
        apply_substitution(spec.inverse, apply_substitution(spec.automorphism, g)) != g)
      throw InputError("automorphism tables are not mutually inverse at generator " + g);
  }

  const Distance r = spec.fiber_radius;
  const std::size_t nb = 2 * spec.base_radius + 1;
  // Fibre ball size 1 + 2 rank ((2 rank - 1)^R - 1) / (2 rank - 2).
  std::size_t ball = 1, sphere = 2 * rank;
  for (Distance i = 1; i <= r; ++i) {
    ball += sphere;
    sphere *= 2 * rank - 1;
    if (ball * nb > spec.max_vertices)
      throw SizeError("extension ball exceeds the vertex cap of " +
                      std::to_string(spec.max_vertices));
  }

  ExtensionBundle out;
  out.spec = spec;
  const auto letters = alphabet(rank);
  out.words.push_back("");
  for (std::size_t begin = 0, len = 0; len < r; ++len) {
    const std::size_t end = out.words.size();
    for (std::size_t i = begin; i < end; ++i)
      for (char c : letters) {
        const std::string& w = out.words[i];
        if (!w.empty() && w.back() == inverse_letter(c)) continue;
        out.words.push_back(w + c);
      }
    begin = end;
  }
  const std::size_t fs = out.words.size();
  out.fiber_size = fs;
  std::unordered_map<std::string, Vertex> index;
  for (std::size_t i = 0; i < fs; ++i) index.emplace(out.words[i], static_cast<Vertex>(i));
  const auto clamp = [&](const std::string& w) {
    return index.at(w.size() > r ? w.substr(0, r) : w);
  };

  std::vector<Edge> edges;
  std::vector<Vertex> projection(fs * nb);
  std::vector<Distance> vdepth(fs * nb);
  std::vector<Vertex> forward(fs), backward(fs);  // t and t^-1 on the fibre
  std::vector<char> forward_cut(fs), backward_cut(fs);
  for (std::size_t i = 0; i < fs; ++i) {
    const std::string f = apply_substitution(spec.inverse, out.words[i]);
    const std::string g = apply_substitution(spec.automorphism, out.words[i]);
    forward[i] = clamp(f);
    backward[i] = clamp(g);
    forward_cut[i] = f.size() > r;
    backward_cut[i] = g.size() > r;
  }
  for (Vertex b = 0; b < nb; ++b) {
    const Vertex off = static_cast<Vertex>(b * fs);
    for (std::size_t i = 0; i < fs; ++i) {
      const std::string& w = out.words[i];
      projection[off + i] = b;
      vdepth[off + i] = r - static_cast<Distance>(w.size()) + 1;
      if (w.size() < r)
        for (char c : letters) {
          if (!w.empty() && w.back() == inverse_letter(c)) continue;
          edges.emplace_back(off + static_cast<Vertex>(i), off + index.at(w + c));
        }
      if (b + 1 < nb) edges.emplace_back(off + static_cast<Vertex>(i), off + fs + forward[i]);
      if (b > 0) edges.emplace_back(off + static_cast<Vertex>(i), off - fs + backward[i]);
    }
  }
  // Depth 0 marks both ends of every clamped cross-edge.
  for (Vertex b = 0; b < nb; ++b) {
    const Vertex off = static_cast<Vertex>(b * fs);
    for (std::size_t i = 0; i < fs; ++i) {
      if (b + 1 < nb && forward_cut[i]) vdepth[off + i] = vdepth[off + fs + forward[i]] = 0;
      if (b > 0 && backward_cut[i]) vdepth[off + i] = vdepth[off - fs + backward[i]] = 0;
    }
  }
  std::vector<Distance> depth(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const int k = static_cast<int>(b) - static_cast<int>(spec.base_radius);
    depth[b] = spec.base_radius - static_cast<Distance>(k < 0 ? -k : k);
  }
  out.bundle = validate_bundle(MetricGraph(fs * nb, edges), make_graph("path:" + std::to_string(nb)),
                               std::move(projection), std::move(depth), std::move(vdepth));
  return out;
}

}  // namespace coarse
