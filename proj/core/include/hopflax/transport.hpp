#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "hopflax/space.hpp"

namespace hopflax {

struct Coupling {
  std::size_t from = 0;
  std::size_t to = 0;
  double mass = 0.0;
};

/// Optimal coupling for the squared-distance cost. The coupling is stored
/// sparsely (basic cells with positive mass).
struct TransportPlan {
  std::size_t n = 0;
  std::vector<Coupling> coupling;
  std::vector<double> source_marginal;
  std::vector<double> target_marginal;
  double cost = 0.0;          // sum pi_xy d(x,y)^2
  double duality_gap = 0.0;   // |primal - dual| + max dual infeasibility
  std::size_t pivots = 0;

  std::vector<double> dense() const;  // n x n row-major
};

struct W2Result {
  double distance = 0.0;
  TransportPlan plan;
};

/// Exact order-2 Wasserstein distance between two probability vectors on
/// `space`, by a primal transportation simplex on the support of each
/// marginal. Zero entries are admitted.
W2Result w2(const MeasuredSpace& space, std::span<const double> mu0, std::span<const double> mu1);

/// Monotone-rearrangement W2 on spaces whose generating graph is a path.
/// Throws Unsupported otherwise.
double w2_oracle_1d(const MeasuredSpace& space, std::span<const double> mu0,
                    std::span<const double> mu1);

/// Minimum over every basic feasible solution of the n x n transportation
/// polytope (n <= 4). Throws Unsupported for larger spaces.
double brute_force_w2(const MeasuredSpace& space, std::span<const double> mu0,
                      std::span<const double> mu1);

/// Recomputes row/column sums and cost of a plan; all defects as maxima.
struct PlanCheck {
  double marginal_defect = 0.0;
  double min_entry = 0.0;
  double cost_defect = 0.0;  // relative
};
PlanCheck check_plan(const MeasuredSpace& space, const TransportPlan& plan);

}  // namespace hopflax
