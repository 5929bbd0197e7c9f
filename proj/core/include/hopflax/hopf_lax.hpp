#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hopflax/space.hpp"

namespace hopflax {

/// Quadratic Hopf-Lax operator
///   (Q_t f)(x) = min_y [ f(y) + d(x,y)^2 / (2t) ],   Q_0 f = f,
/// by exhaustive minimization over all points.
ScalarField apply(const MeasuredSpace& space, const ScalarField& f, double t);

/// Same values as apply(), bit for bit, but each target point only visits
/// candidates inside the ball of radius sqrt(C t), C = 2 (max f - min f).
/// When `candidates` is non-null it receives the per-point candidate count.
ScalarField apply_pruned(const MeasuredSpace& space, const ScalarField& f, double t,
                         std::vector<std::size_t>* candidates = nullptr);

/// max over graph neighbours y of |f(y) - f(x)| / d(x,y).
double grad_norm(const MeasuredSpace& space, const ScalarField& f, std::size_t x);

/// max over graph neighbours y of [f(x) - f(y)]_+ / d(x,y). Zero at any
/// local minimum of f over its neighbours.
double subgrad_norm(const MeasuredSpace& space, const ScalarField& f, std::size_t x);

std::vector<double> grad_norms(const MeasuredSpace& space, const ScalarField& f);
std::vector<double> subgrad_norms(const MeasuredSpace& space, const ScalarField& f);

/// max over x != y of |f(x) - f(y)| / d(x,y).
double lipschitz_constant(const MeasuredSpace& space, const ScalarField& f);

/// max over x of Q_t(Q_s f)(x) - Q_{t+s} f(x). The difference is never
/// negative on a metric space, so no absolute value is taken; rounding
/// noise below zero is clamped.
double semigroup_defect(const MeasuredSpace& space, const ScalarField& f, double t, double s);

/// min_z [d(x,z)^2/t + d(z,y)^2/s] - d(x,y)^2/(t+s); zero when a point at
/// fraction t/(t+s) of a geodesic from x to y exists.
double midpoint_identity_defect(const MeasuredSpace& space, std::size_t x, std::size_t y,
                                double t, double s);

/// Forward difference quotient (Q_{t+s} f - Q_t f) / s, per point.
std::vector<double> hj_difference_quotient(const MeasuredSpace& space, const ScalarField& f,
                                           double t, double s);

/// r(x) = (Q_{t+s} f(x) - Q_t f(x)) / s + |grad^- Q_t f|(x)^2 / 2.
ScalarField hj_forward_residual(const MeasuredSpace& space, const ScalarField& f, double t,
                                double s);

/// nu-weighted mean and max of |r| for a residual field.
struct ResidualSummary {
  double time = 0.0;
  double step = 0.0;
  double mean_abs = 0.0;
  double max_abs = 0.0;
};
ResidualSummary summarize_residual(const MeasuredSpace& space, const ScalarField& residual,
                                   double t, double s);

struct SemigroupTrace {
  ScalarField source;
  std::vector<double> times;
  std::vector<ScalarField> fields;  // Q_t f for each time
  std::vector<double> lip_constants;
  std::vector<ScalarField> hj_residuals;
  std::vector<ResidualSummary> residual_summaries;
  double residual_step = 0.0;
  double source_lipschitz = 0.0;
  /// Per time, nu-mean of |grad Q_t f| - |grad^- Q_t f|. Vanishes a.e. in
  /// the continuum; reported as a diagnostic only.
  std::vector<double> gradient_mismatch;
  /// max |Q_{t_min} f - f|; bounded by Lip(f)^2 t_min / 2.
  double small_time_gap = 0.0;
};

/// Batches apply, lipschitz_constant and hj_forward_residual (forward step
/// `residual_step`) over a strictly increasing grid of positive times.
SemigroupTrace make_trace(const MeasuredSpace& space, const ScalarField& f,
                          std::span<const double> times, double residual_step = 1e-2);

/// Findings of the exact clauses that hold on every finite metric space.
struct TraceCheck {
  double range_violation = 0.0;        // max of (min f - Q_t f) and (Q_t f - f)
  double monotonicity_violation = 0.0; // max of Q_{t2} f - Q_{t1} f over t1 < t2
  double lipschitz_excess = 0.0;       // max of Lip(Q_t f) - diam / t
  bool pass(double slack = 1e-12) const {
    return range_violation <= slack && monotonicity_violation <= slack &&
           lipschitz_excess <= slack;
  }
};
TraceCheck check_trace(const MeasuredSpace& space, const SemigroupTrace& trace);

}  // namespace hopflax
