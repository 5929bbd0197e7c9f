#include "hopflax/hopf_lax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hopflax/error.hpp"

namespace hopflax {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shared by apply and apply_pruned so both round identically.
inline double hopf_lax_cost(double fy, double d, double two_t) { return fy + (d * d) / two_t; }

void check_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw Error("Hopf-Lax time must be finite and >= 0");
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(std::string(what) + " must be finite and > 0");
  }
}

void check_has_neighbors(const MeasuredSpace& space, std::size_t x) {
  space.check_index(x);
  if (space.neighbors(x).empty()) {
    throw Error("point " + std::to_string(x) + " is isolated; slopes are undefined");
  }
}

}  // namespace

ScalarField apply(const MeasuredSpace& space, const ScalarField& f, double t) {
  check_binding(space, f);
  check_time(t);
  if (t == 0.0) return f;
  const std::size_t n = space.size();
  const double two_t = 2.0 * t;
  ScalarField out{std::vector<double>(n), space.id()};
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = space.dist_row(x);
    double best = kInf;
    for (std::size_t y = 0; y < n; ++y) {
      best = std::min(best, hopf_lax_cost(f[y], row[y], two_t));
    }
    out[x] = best;
  }
  return out;
}

ScalarField apply_pruned(const MeasuredSpace& space, const ScalarField& f, double t,
                         std::vector<std::size_t>* candidates) {
  check_binding(space, f);
  check_time(t);
  const std::size_t n = space.size();
  if (candidates) candidates->assign(n, 1);
  if (t == 0.0) return f;

  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  const double span = *hi - *lo;
  // Beyond this key the candidate value exceeds max f >= f(x), so it cannot
  // undercut the x = y candidate. The relative margin absorbs rounding.
  const double cutoff = span * (1.0 + 1e-12);
  const double two_t = 2.0 * t;

  ScalarField out{std::vector<double>(n), space.id()};
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = space.dist_row(x);
    const auto order = space.by_distance(x);
    double best = kInf;
    std::size_t visited = 0;
    for (auto y : order) {
      const double d = row[y];
      if ((d * d) / two_t > cutoff) break;
      best = std::min(best, hopf_lax_cost(f[y], d, two_t));
      ++visited;
    }
    out[x] = best;
    if (candidates) (*candidates)[x] = visited;
  }
  return out;
}

double grad_norm(const MeasuredSpace& space, const ScalarField& f, std::size_t x) {
  check_binding(space, f);
  check_has_neighbors(space, x);
  double best = 0.0;
  for (const auto& nb : space.neighbors(x)) {
    best = std::max(best, std::abs(f[nb.index] - f[x]) / space.dist(x, nb.index));
  }
  return best;
}

double subgrad_norm(const MeasuredSpace& space, const ScalarField& f, std::size_t x) {
  check_binding(space, f);
  check_has_neighbors(space, x);
  double best = 0.0;
  for (const auto& nb : space.neighbors(x)) {
    best = std::max(best, std::max(f[x] - f[nb.index], 0.0) / space.dist(x, nb.index));
  }
  return best;
}

std::vector<double> grad_norms(const MeasuredSpace& space, const ScalarField& f) {
  std::vector<double> out(space.size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = grad_norm(space, f, x);
  return out;
}

std::vector<double> subgrad_norms(const MeasuredSpace& space, const ScalarField& f) {
  std::vector<double> out(space.size());
  for (std::size_t x = 0; x < out.size(); ++x) out[x] = subgrad_norm(space, f, x);
  return out;
}

double lipschitz_constant(const MeasuredSpace& space, const ScalarField& f) {
  check_binding(space, f);
  const std::size_t n = space.size();
  if (n < 2) throw Error("Lipschitz constant needs at least two points");
  double best = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const auto row = space.dist_row(x);
    for (std::size_t y = x + 1; y < n; ++y) {
      best = std::max(best, std::abs(f[x] - f[y]) / row[y]);
    }
  }
  return best;
}

double semigroup_defect(const MeasuredSpace& space, const ScalarField& f, double t, double s) {
  check_positive(t, "semigroup time t");
  check_positive(s, "semigroup time s");
  const auto composed = apply(space, apply(space, f, s), t);
  const auto direct = apply(space, f, t + s);
  double worst = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    worst = std::max(worst, composed[x] - direct[x]);
  }
  return worst;
}

double midpoint_identity_defect(const MeasuredSpace& space, std::size_t x, std::size_t y,
                                double t, double s) {
  space.check_index(x);
  space.check_index(y);
  check_positive(t, "time t");
  check_positive(s, "time s");
  double best = kInf;
  for (std::size_t z = 0; z < space.size(); ++z) {
    const double a = space.dist(x, z);
    const double b = space.dist(z, y);
    best = std::min(best, a * a / t + b * b / s);
  }
  const double dxy = space.dist(x, y);
  return std::max(0.0, best - dxy * dxy / (t + s));
}

std::vector<double> hj_difference_quotient(const MeasuredSpace& space, const ScalarField& f,
                                           double t, double s) {
  check_time(t);
  check_positive(s, "residual step s");
  const auto now = apply(space, f, t);
  const auto later = apply(space, f, t + s);
  std::vector<double> q(space.size());
  for (std::size_t x = 0; x < q.size(); ++x) q[x] = (later[x] - now[x]) / s;
  return q;
}

ScalarField hj_forward_residual(const MeasuredSpace& space, const ScalarField& f, double t,
                                double s) {
  check_time(t);
  check_positive(s, "residual step s");
  const auto now = apply(space, f, t);
  const auto later = apply(space, f, t + s);
  ScalarField r{std::vector<double>(space.size()), space.id()};
  for (std::size_t x = 0; x < space.size(); ++x) {
    const double slope = subgrad_norm(space, now, x);
    r[x] = (later[x] - now[x]) / s + 0.5 * slope * slope;
  }
  return r;
}

ResidualSummary summarize_residual(const MeasuredSpace& space, const ScalarField& residual,
                                   double t, double s) {
  check_binding(space, residual);
  ResidualSummary out{t, s, 0.0, 0.0};
  for (std::size_t x = 0; x < space.size(); ++x) {
    const double a = std::abs(residual[x]);
    out.mean_abs += a * space.measure(x);
    out.max_abs = std::max(out.max_abs, a);
  }
  return out;
}

SemigroupTrace make_trace(const MeasuredSpace& space, const ScalarField& f,
                          std::span<const double> times, double residual_step) {
  check_binding(space, f);
  if (times.empty()) throw Error("time grid is empty");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
      throw Error("time grid entries must be finite and > 0");
    }
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw Error("time grid must be strictly increasing");
    }
  }
  check_positive(residual_step, "residual step");

  SemigroupTrace trace;
  trace.source = f;
  trace.times.assign(times.begin(), times.end());
  trace.residual_step = residual_step;
  trace.source_lipschitz = space.size() > 1 ? lipschitz_constant(space, f) : 0.0;
  for (double t : times) {
    auto qt = apply(space, f, t);
    trace.lip_constants.push_back(space.size() > 1 ? lipschitz_constant(space, qt) : 0.0);
    if (space.size() > 1) {
      auto r = hj_forward_residual(space, f, t, residual_step);
      trace.residual_summaries.push_back(summarize_residual(space, r, t, residual_step));
      trace.hj_residuals.push_back(std::move(r));
      const auto g = grad_norms(space, qt);
      const auto gm = subgrad_norms(space, qt);
      double mismatch = 0.0;
      for (std::size_t x = 0; x < space.size(); ++x) mismatch += space.measure(x) * (g[x] - gm[x]);
      trace.gradient_mismatch.push_back(mismatch);
    }
    trace.fields.push_back(std::move(qt));
  }
  for (std::size_t x = 0; x < space.size(); ++x) {
    trace.small_time_gap = std::max(trace.small_time_gap, std::abs(trace.fields[0][x] - f[x]));
  }
  return trace;
}

TraceCheck check_trace(const MeasuredSpace& space, const SemigroupTrace& trace) {
  TraceCheck c;
  const auto& f = trace.source.values;
  const double fmin = *std::min_element(f.begin(), f.end());
  for (std::size_t k = 0; k < trace.fields.size(); ++k) {
    const auto& q = trace.fields[k];
    for (std::size_t x = 0; x < q.size(); ++x) {
      c.range_violation = std::max({c.range_violation, fmin - q[x], q[x] - f[x]});
      if (k > 0) {
        c.monotonicity_violation =
            std::max(c.monotonicity_violation, q[x] - trace.fields[k - 1][x]);
      }
    }
    if (space.size() > 1) {
      c.lipschitz_excess = std::max(c.lipschitz_excess,
                                    trace.lip_constants[k] - space.diameter() / trace.times[k]);
    }
  }
  return c;
}

}  // namespace hopflax
