#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hopflax/space.hpp"
#include "hopflax/space_gen.hpp"

namespace testutil {

using hopflax::Edge;
using hopflax::MeasuredSpace;
using hopflax::ScalarField;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

inline MeasuredSpace two_point() {
  const Edge e{0, 1, 1.0};
  const double w[] = {1.0, 1.0};
  return hopflax::build_from_graph(2, std::span<const Edge>(&e, 1), w);
}

/// Connected graph: a random spanning tree plus extra random chords, with
/// random lengths and strictly positive random weights.
inline MeasuredSpace random_graph(std::mt19937_64& rng, std::size_t n, std::size_t extra = 3) {
  std::vector<Edge> edges;
  for (std::size_t i = 1; i < n; ++i) edges.push_back({below(rng, i), i, uniform(rng, 0.2, 2.0)});
  for (std::size_t k = 0; k < extra && n > 2; ++k) {
    const std::size_t a = below(rng, n);
    const std::size_t b = below(rng, n);
    if (a != b) edges.push_back({a, b, uniform(rng, 0.2, 2.0)});
  }
  std::vector<double> w(n);
  for (double& x : w) x = uniform(rng, 0.1, 1.0);
  return hopflax::build_from_graph(n, edges, w);
}

/// One of the canonical generators with a random small resolution.
inline MeasuredSpace random_generated(std::mt19937_64& rng) {
  using hopflax::SpaceSpec;
  switch (below(rng, 5)) {
    case 0: return hopflax::generate(SpaceSpec::circle(8 + below(rng, 120), uniform(rng, 1.0, 7.0)));
    case 1: return hopflax::generate(SpaceSpec::gaussian_interval(5 + 2 * below(rng, 60), uniform(rng, 0.5, 2.0), 4.0 * 2.0));
    case 2: return hopflax::generate(SpaceSpec::torus2d(3 + below(rng, 8), 3 + below(rng, 8), 1.0, uniform(rng, 0.5, 2.0)));
    case 3: return hopflax::generate(SpaceSpec::path(2 + below(rng, 100), uniform(rng, 1.0, 10.0)));
    default: return hopflax::generate(SpaceSpec::complete(2 + below(rng, 30)));
  }
}

inline ScalarField random_field(const MeasuredSpace& space, std::mt19937_64& rng, double amp = 1.0) {
  std::vector<double> v(space.size());
  for (double& x : v) x = uniform(rng, -amp, amp);
  return hopflax::make_field(space, std::move(v));
}

inline std::vector<double> random_probability(std::mt19937_64& rng, std::size_t n, double zero_chance = 0.0) {
  std::vector<double> p(n);
  double s = 0.0;
  for (double& x : p) {
    x = uniform(rng, 0.0, 1.0) < zero_chance ? 0.0 : uniform(rng, 0.01, 1.0);
    s += x;
  }
  if (s == 0.0) {
    p[below(rng, n)] = 1.0;
    return p;
  }
  for (double& x : p) x /= s;
  return p;
}

/// Q_t f by direct minimization in long double; independent of the library.
inline std::vector<double> naive_hopf_lax(const MeasuredSpace& space, const std::vector<double>& f, double t) {
  const std::size_t n = space.size();
  std::vector<double> out(n);
  for (std::size_t x = 0; x < n; ++x) {
    long double best = f[x];
    for (std::size_t y = 0; y < n; ++y) {
      const long double d = space.dist(x, y);
      best = std::min(best, static_cast<long double>(f[y]) + d * d / (2.0L * t));
    }
    out[x] = static_cast<double>(best);
  }
  return out;
}

}  // namespace testutil
