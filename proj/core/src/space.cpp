#include "hopflax/space.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <sstream>

#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"

namespace hopflax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t fnv1a(std::uint64_t h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<double> dijkstra(std::size_t n, const std::vector<std::vector<Neighbor>>& adj,
                             std::size_t source) {
  std::vector<double> d(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  d[source] = 0.0;
  heap.emplace(0.0, source);
  while (!heap.empty()) {
    auto [du, u] = heap.top();
    heap.pop();
    if (du > d[u]) continue;
    for (const auto& nb : adj[u]) {
      const double cand = du + nb.length;
      if (cand < d[nb.index]) {
        d[nb.index] = cand;
        heap.emplace(cand, nb.index);
      }
    }
  }
  return d;
}

// max over pairs (x, y) of min over z of |max(d(x,z), d(z,y)) - d(x,y)/2|.
// A pair whose inner minimum drops to the running maximum cannot raise it,
// so the z-loop stops early there.
double compute_midpoint_defect(std::size_t n, const std::vector<double>& dist) {
  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double* dx = dist.data() + x * n;
    for (std::size_t y = x + 1; y < n; ++y) {
      const double* dy = dist.data() + y * n;
      const double half = 0.5 * dx[y];
      double best = kInf;
      for (std::size_t z = 0; z < n && best > worst; ++z) {
        best = std::min(best, std::abs(std::max(dx[z], dy[z]) - half));
      }
      worst = std::max(worst, best);
    }
  }
  return worst;
}

}  // namespace

std::vector<Edge> MeasuredSpace::edges() const {
  std::vector<Edge> out;
  for (std::size_t i = 0; i < n_; ++i) {
    for (const auto& nb : adjacency_[i]) {
      if (i < nb.index) out.push_back({i, nb.index, nb.length});
    }
  }
  return out;
}

void MeasuredSpace::check_index(std::size_t x) const {
  if (x >= n_) {
    throw Error("point index " + std::to_string(x) + " out of range for space of " +
                std::to_string(n_) + " points");
  }
}

ScalarField make_field(const MeasuredSpace& space, std::vector<double> values) {
  if (values.size() != space.size()) {
    throw Error("field has " + std::to_string(values.size()) + " values, space has " +
                std::to_string(space.size()) + " points");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error("field value at point " + std::to_string(i) + " is not finite");
    }
  }
  return ScalarField{std::move(values), space.id()};
}

ScalarField constant_field(const MeasuredSpace& space, double c) {
  return make_field(space, std::vector<double>(space.size(), c));
}

void check_binding(const MeasuredSpace& space, const ScalarField& f) {
  if (f.space_id != space.id() || f.size() != space.size()) {
    throw Error("field is not bound to this space");
  }
}

MeasuredSpace build_from_graph(std::size_t n, std::span<const Edge> edges,
                               std::span<const double> weights, SpaceMeta meta) {
  if (n == 0) throw Error("space must have at least one point");
  if (weights.size() != n) {
    throw Error("measure has " + std::to_string(weights.size()) + " entries, expected n = " +
                std::to_string(n));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(weights[i]) || weights[i] < 0.0) {
      throw Error("measure weight at point " + std::to_string(i) +
                  " is negative or not finite");
    }
    total += weights[i];
  }
  if (!(total > 0.0)) throw Error("measure weights are all zero");

  std::vector<std::vector<Neighbor>> adj(n);
  for (const auto& e : edges) {
    if (e.i >= n || e.j >= n) {
      throw Error("edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                  ") references a point outside [0, " + std::to_string(n) + ")");
    }
    if (e.i == e.j) throw Error("self-loop edge at point " + std::to_string(e.i));
    if (!std::isfinite(e.length) || !(e.length > 0.0)) {
      std::ostringstream msg;
      msg << "edge (" << e.i << ", " << e.j << ") has nonpositive length " << e.length;
      throw Error(msg.str());
    }
    auto add = [&](std::size_t a, std::size_t b) {
      for (auto& nb : adj[a]) {
        if (nb.index == b) {
          nb.length = std::min(nb.length, e.length);
          return;
        }
      }
      adj[a].push_back({b, e.length});
    };
    add(e.i, e.j);
    add(e.j, e.i);
  }
  for (auto& list : adj) {
    std::sort(list.begin(), list.end(),
              [](const Neighbor& a, const Neighbor& b) { return a.index < b.index; });
  }

  MeasuredSpace s;
  s.n_ = n;
  s.dist_.assign(n * n, 0.0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = dijkstra(n, adj, x);
    for (std::size_t y = 0; y < n; ++y) {
      if (row[y] == kInf) {
        throw Error("graph is disconnected: point " + std::to_string(y) +
                    " is unreachable from point " + std::to_string(x));
      }
    }
    // Upper triangle comes from the lower-index source; mirrored for exact symmetry.
    for (std::size_t y = x; y < n; ++y) {
      s.dist_[x * n + y] = row[y];
      s.dist_[y * n + x] = row[y];
    }
  }

  s.measure_.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.measure_[i] = weights[i] / total;
  s.adjacency_ = std::move(adj);

  s.order_.resize(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    auto* row = s.order_.data() + x * n;
    std::iota(row, row + n, std::uint32_t{0});
    const double* dx = s.dist_.data() + x * n;
    std::stable_sort(row, row + n,
                     [dx](std::uint32_t a, std::uint32_t b) { return dx[a] < dx[b]; });
  }

  double mesh = 0.0;
  double diam = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    double nearest = kInf;
    for (std::size_t y = 0; y < n; ++y) {
      if (y == x) continue;
      nearest = std::min(nearest, s.dist(x, y));
      diam = std::max(diam, s.dist(x, y));
    }
    if (n > 1) mesh = std::max(mesh, nearest);
  }
  s.mesh_h_ = mesh;
  s.diameter_ = diam;
  s.midpoint_defect_ = compute_midpoint_defect(n, s.dist_);

  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(h, n);
  for (double v : s.dist_) h = fnv1a(h, std::bit_cast<std::uint64_t>(v));
  for (double v : s.measure_) h = fnv1a(h, std::bit_cast<std::uint64_t>(v));
  s.id_ = h;
  s.meta_ = std::move(meta);
  return s;
}

MetricReport validate_metric(std::size_t n, std::span<const double> dist,
                             std::span<const double> measure) {
  if (dist.size() != n * n) throw Error("distance matrix is not n x n");
  MetricReport r;
  auto d = [&](std::size_t a, std::size_t b) { return dist[a * n + b]; };
  for (std::size_t x = 0; x < n; ++x) {
    r.diagonal_defect = std::max(r.diagonal_defect, std::abs(d(x, x)));
    for (std::size_t y = 0; y < n; ++y) {
      r.symmetry_defect = std::max(r.symmetry_defect, std::abs(d(x, y) - d(y, x)));
      r.negativity = std::max(r.negativity, -d(x, y));
      if (x != y && d(x, y) == 0.0) r.diagonal_defect = std::max(r.diagonal_defect, 1.0);
      for (std::size_t z = 0; z < n; ++z) {
        r.triangle_violation = std::max(r.triangle_violation, d(x, z) - d(x, y) - d(y, z));
      }
    }
  }
  double sum = 0.0;
  for (double w : measure) {
    sum += w;
    r.negativity = std::max(r.negativity, -w);
  }
  r.measure_sum_defect = measure.size() == n ? std::abs(sum - 1.0) : 1.0;
  r.pass = r.triangle_violation <= r.tolerance && r.symmetry_defect <= r.tolerance &&
           r.diagonal_defect <= r.tolerance && r.negativity <= r.tolerance &&
           r.measure_sum_defect <= r.tolerance;
  return r;
}

MetricReport validate_metric(const MeasuredSpace& space) {
  return validate_metric(space.size(), space.dist_matrix(), space.measure());
}

std::vector<std::size_t> ball(const MeasuredSpace& space, std::size_t center, double radius) {
  space.check_index(center);
  if (!(radius >= 0.0)) throw Error("ball radius must be nonnegative");
  std::vector<std::size_t> out;
  const auto row = space.dist_row(center);
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] <= radius) out.push_back(y);
  }
  return out;
}

double ball_measure(const MeasuredSpace& space, std::size_t center, double radius) {
  space.check_index(center);
  if (!(radius >= 0.0)) throw Error("ball radius must be nonnegative");
  double m = 0.0;
  const auto row = space.dist_row(center);
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] <= radius) m += space.measure(y);
  }
  return m;
}

double doubling_constant(const MeasuredSpace& space, double r_min, double r_max,
                         std::size_t r_steps) {
  if (!(r_min > 0.0) || !(r_max >= r_min)) {
    throw Error("doubling sweep needs 0 < r_min <= r_max");
  }
  if (r_steps == 0) throw Error("doubling sweep needs at least one radius");
  double worst = 1.0;
  for (std::size_t k = 0; k < r_steps; ++k) {
    const double r =
        r_steps == 1 ? r_min
                     : r_min + (r_max - r_min) * static_cast<double>(k) /
                                   static_cast<double>(r_steps - 1);
    for (std::size_t x = 0; x < space.size(); ++x) {
      const double inner = ball_measure(space, x, r);
      if (!(inner > 0.0)) {
        std::ostringstream msg;
        msg << "ball B_r(x) has zero measure at x = " << x << ", r = " << r;
        throw Error(msg.str());
      }
      worst = std::max(worst, ball_measure(space, x, 2.0 * r) / inner);
    }
  }
  return worst;
}

double local_poincare_constant(const MeasuredSpace& space, const ScalarField& field,
                               double radius, double dilation) {
  check_binding(space, field);
  if (!(radius > 0.0)) throw Error("local Poincare radius must be positive");
  if (!(dilation >= 1.0)) throw Error("local Poincare dilation must be >= 1");
  const std::size_t n = space.size();
  std::vector<double> grad(n);
  for (std::size_t x = 0; x < n; ++x) grad[x] = grad_norm(space, field, x);

  double worst = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const auto inner = ball(space, x, radius);
    double mass = 0.0;
    double mean = 0.0;
    for (auto y : inner) {
      mass += space.measure(y);
      mean += field[y] * space.measure(y);
    }
    if (!(mass > 0.0)) {
      std::ostringstream msg;
      msg << "ball of radius " << radius << " around point " << x << " has zero measure";
      throw Error(msg.str());
    }
    mean /= mass;
    double lhs = 0.0;
    for (auto y : inner) lhs += std::abs(field[y] - mean) * space.measure(y);
    lhs /= mass;

    double outer_mass = 0.0;
    double rhs = 0.0;
    for (auto y : ball(space, x, dilation * radius)) {
      outer_mass += space.measure(y);
      rhs += grad[y] * space.measure(y);
    }
    rhs /= outer_mass;

    double ratio = 0.0;
    if (rhs > 0.0) {
      ratio = lhs / (radius * rhs);
    } else if (lhs > 0.0) {
      ratio = kInf;
    }
    worst = std::max(worst, ratio);
  }
  return worst;
}

}  // namespace hopflax
