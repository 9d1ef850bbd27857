#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "coarse/bundle.hpp"

namespace coarse {

struct MitraEntry {
  Distance n = 0;
  // min over accepted pairs of d_X(p, interval_X(y1, y2)); absent when no
  // pair avoided the ball.
  std::optional<Distance> m;
  std::size_t pairs = 0;
  std::size_t attempts = 0;
};

struct MitraCurve {
  std::vector<MitraEntry> samples;  // N = 0 .. n_max
  std::uint64_t seed = 0;
};

// Y = pi^-1(a). Pairs of trusted Y vertices are drawn until `pairs` of them
// have a Y-interval missing the closed ball B_Y(p, N), or 50 * pairs draws.
// p is a vertex of X over a.
MitraCurve mitra_curve(const GraphBundle& bd, const VertexSet& a, Vertex p, Distance n_max,
                       std::size_t pairs, std::uint64_t seed);

// M -> a M + b + eta(c M + d). Fitted envelopes have a = b.
struct Envelope {
  Distance a = 0, b = 0, c = 1, d = 0;
  Distance operator()(const GraphBundle& bd, Distance m) const {
    return a * m + b + bd.eta(c * m + d);
  }
};

struct DistortionProfile {
  // dy_max[M]: max d_Y over trusted Y pairs with d_X <= M.
  std::vector<Distance> dy_max;
  // Smallest slope k <= kMaxEnvelopeSlope with a = b = k that dominates
  // dy_max, c and d in 1..3 and 0..3; dominated is false when none does.
  Envelope envelope;
  bool dominated = false;
  std::size_t pairs = 0;
};
inline constexpr Distance kMaxEnvelopeSlope = 8;

DistortionProfile distortion_profile(const GraphBundle& bd, const VertexSet& a, Distance m_max);

struct DiagonalReport {
  std::size_t pairs = 0;
  // Extremes of (d+^2 + d-^2) / d0^2 over sampled pairs.
  Rational max_ratio_sq{0}, min_ratio_sq{0};
  // Pairs with d+^2 + d-^2 > 2 d0^2.
  std::size_t upper_violations = 0;
  // lambda: smallest quarter-step value with
  // d0 / lambda <= d_l2 <= lambda d0 on every pair.
  QiCertificate certificate;
};

// Base must be a path; split is a base vertex. X+ and X- are the bundles
// over the two closed half-lines; F0 the fibre over split.
DiagonalReport diagonal_embedding_measure(const GraphBundle& bd, Vertex split,
                                          std::size_t pairs, std::uint64_t seed);

struct LaminationPair {
  Vertex z1 = 0, z2 = 0;
  Distance d_fiber = 0, d_x = 0;
  Distance pi_diameter = 0;  // diam of pi(interval_X(z1, z2))
};

// Pairs of trusted vertices of F_b with d_fiber >= ratio * d_X.
std::vector<LaminationPair> detect_lamination_pairs(const GraphBundle& bd, Vertex b,
                                                    Rational ratio);

}  // namespace coarse
