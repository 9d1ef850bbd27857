#pragma once

#include <string>
#include <vector>

#include "coarse/bundle.hpp"

namespace coarse {

// "single", "path:N", "cycle:N", "grid:WxH", "tree:D:K" (complete K-ary
// tree of depth D).
MetricGraph make_graph(const std::string& spec);

// Vertex (b, f) has id b * |F| + f.
GraphBundle gen_product(const MetricGraph& base, const MetricGraph& fiber);

// Base path 0..base_len, fibre over i the path 0..fiber_size, cross-edges
// (i, j) - (i+1, min(2j, m)) and (i+1, j) - (i, j/2). Id i * (m+1) + j.
// Vertices touching a saturated doubling edge get vertex_depth 0.
GraphBundle gen_dilation(std::size_t base_len, std::size_t fiber_size);

// F_r semidirect Z, element t^k w with w a reduced word. Generators of F_r
// are a, b, c, ... with inverses A, B, C, .... The automorphism is given by
// the images of the generators and its inverse likewise; both are checked.
// Conjugation convention: t w t^-1 = phi(w).
struct ExtensionSpec {
  std::vector<std::string> automorphism{"b", "c", "ab"};
  std::vector<std::string> inverse{"cA", "a", "b"};
  Distance fiber_radius = 4;  // word length bound R
  Distance base_radius = 6;   // |k| <= n
  std::size_t max_vertices = 4'000'000;
};

// Truncated Cayley graph of the extension on the box |k| <= n, |w| <= R.
// Cross-edges follow right multiplication by t and t^-1 with the image
// clamped to its length-R prefix (the nearest point of the fibre ball).
// interior_depth is n - |k|. vertex_depth is 0 at both ends of every clamped
// edge and R - |w| + 1 elsewhere, so paths through positive-depth vertices
// are paths in the genuine Cayley graph.
struct ExtensionBundle {
  GraphBundle bundle;
  ExtensionSpec spec;
  std::size_t fiber_size = 0;
  // Reduced words of the fibre ball in shortlex order; id within a fibre.
  std::vector<std::string> words;

  Vertex base_vertex(int k) const;
  int level(Vertex b) const;
  Vertex vertex(int k, const std::string& word) const;
  std::string word(Vertex x) const;
  // Left translate of the <t> section through x, i.e. iterated t-edges.
  std::vector<Vertex> translate_section(Vertex x) const;
  SectionFactory section_factory() const;
};

ExtensionBundle gen_extension(const ExtensionSpec& spec);

// Shortlex order on reduced words with letters ordered a A b B c C ....
bool shortlex_less(const std::string& a, const std::string& b);
// Reduced product of two words in the letter convention above.
std::string reduce_word(const std::string& word);
// Image of a word under the letter substitution `images`.
std::string apply_substitution(const std::vector<std::string>& images,
                               const std::string& word);

}  // namespace coarse
