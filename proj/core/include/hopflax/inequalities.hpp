#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hopflax/space.hpp"

namespace hopflax {

enum class Inequality { lsi, talagrand, poincare };

std::string_view to_string(Inequality which);

/// sum nu F^2 log F^2 after rescaling so that sum nu F^2 = 1 (0 log 0 = 0).
double entropy_functional(const MeasuredSpace& space, const ScalarField& F);

/// Largest K for which f satisfies the log-Sobolev inequality:
/// 2 sum nu |grad^- f|^2 / Ent(f^2), f normalized in L^2(nu).
double lsi_ratio(const MeasuredSpace& space, const ScalarField& f);

/// Largest K for which F satisfies the Talagrand inequality:
/// 2 Ent(F^2) / W2(F^2 nu, nu)^2.
double talagrand_ratio(const MeasuredSpace& space, const ScalarField& F);

/// Largest K for which h satisfies the Poincare inequality:
/// sum nu |grad^- h|^2 / sum nu h^2 with h centered.
double poincare_ratio(const MeasuredSpace& space, const ScalarField& h);

double inequality_ratio(const MeasuredSpace& space, Inequality which, const ScalarField& field);

struct Witness {
  std::string label;
  ScalarField field;
};

/// Candidate test functions searched by estimate_constant.
struct WitnessFamily {
  /// e^{alpha x / 2} along a non-periodic coordinate (LSI, T); the
  /// coordinate itself for P.
  bool tilts = true;
  std::vector<double> tilt_alphas{0.25, 0.5, 1.0, 1.5, 2.0};
  /// Lowest nonconstant eigenvectors of the nu-weighted graph Laplacian.
  std::size_t eigenfields = 4;
  /// Seeded uniform noise smoothed by Q_{t0}.
  std::size_t random_fields = 8;
  double smoothing_time = 0.0;  // <= 0 selects 10 * mesh_h^2
  /// Explicit witnesses appended after the generated ones.
  std::vector<Witness> custom;
};

/// Uniform [-amplitude, amplitude] values smoothed by the Hopf-Lax operator.
ScalarField random_smoothed_field(const MeasuredSpace& space, std::uint64_t seed,
                                  double smoothing_time, double amplitude = 1.0);

/// Generalized eigenvectors L phi = lambda diag(nu) phi of the graph Laplacian
/// with edge weights (nu_x + nu_y) / (2 d^2), skipping the constant mode.
/// Each is scaled to max |phi| = 1 with a positive first nonzero entry.
std::vector<ScalarField> laplacian_eigenfields(const MeasuredSpace& space, std::size_t count);

std::vector<Witness> family_witnesses(const MeasuredSpace& space, Inequality which,
                                      const WitnessFamily& family, std::uint64_t seed);

struct WitnessRatio {
  std::string label;
  double ratio = 0.0;
  bool admissible = true;
  std::string note;
};

struct ConstantEstimate {
  Inequality which = Inequality::lsi;
  double k_upper = 0.0;
  Witness witness;
  std::vector<WitnessRatio> candidates;
};

/// Smallest ratio over the family, each member then refined by `budget`
/// seeded coordinate-descent steps. The result bounds the best constant
/// from above.
ConstantEstimate estimate_constant(const MeasuredSpace& space, Inequality which,
                                   const WitnessFamily& family, std::size_t budget,
                                   std::uint64_t seed);

/// Default refinement budgets used by the CLI and the acceptance suite.
std::size_t default_budget(Inequality which);

/// log sum nu e^{K Q_1 g} - K sum nu g. Non-positive for every g under T(K).
double dual_talagrand_defect(const MeasuredSpace& space, const ScalarField& g, double K);

struct PsiTrace {
  std::string label;
  std::vector<double> times;
  std::vector<double> values;  // psi(t) = sum nu e^{K t Q_t h}, h centered
  double max_excess = 0.0;     // max psi - 1
};
PsiTrace psi_trace(const MeasuredSpace& space, const ScalarField& h, double K,
                   std::span<const double> times);

struct PhiTrace {
  std::string label;
  std::vector<double> times;
  std::vector<double> values;  // phi(t) = log(sum nu e^{K t Q_t g}) / (K t)
  double mean = 0.0;           // sum nu g
  double max_upward_step = 0.0;
  double small_time_defect = 0.0;  // |phi(t_min) - sum nu g|
};
PhiTrace phi_trace(const MeasuredSpace& space, const ScalarField& g, double K,
                   std::span<const double> times);

struct WitnessSuites {
  std::vector<Witness> lsi;
  std::vector<Witness> talagrand;
  std::vector<Witness> poincare;
};
WitnessSuites default_witness_suites(const MeasuredSpace& space, std::uint64_t seed);

enum class ChainVerdict {
  consistent,              // no witness refutes anything
  lsi_hypothesis_refuted,  // LSI(K) fails; no implication is violated
  lsi_to_t_counterexample,
  t_to_p_counterexample,
};
std::string_view to_string(ChainVerdict verdict);

struct ChainEntry {
  std::string witness;
  Inequality stage = Inequality::lsi;
  double ratio = 0.0;
  double threshold = 0.0;
  bool admissible = true;
  bool pass = true;
};

struct ChainReport {
  double K = 0.0;
  double tau = 0.0;
  std::vector<ChainEntry> entries;
  ChainVerdict verdict = ChainVerdict::consistent;
  bool lsi_refuted = false;
  bool talagrand_refuted = false;
  bool poincare_refuted = false;
  std::string first_counterexample;  // empty unless an implication fails
  bool implications_hold() const {
    return verdict == ChainVerdict::consistent || verdict == ChainVerdict::lsi_hypothesis_refuted;
  }
  std::string summary() const;
};

/// Witness-wise check of LSI(K) => T(K) => P(K) with per-stage slack (1 - tau).
ChainReport verify_chain(const MeasuredSpace& space, double K, const WitnessSuites& suites,
                         double tau);

struct InequalityReport {
  std::string space;
  std::uint64_t space_id = 0;
  std::optional<ConstantEstimate> lsi;
  std::optional<ConstantEstimate> talagrand;
  std::optional<ConstantEstimate> poincare;
  std::optional<ChainReport> chain;
  std::vector<PsiTrace> psi;
  std::vector<PhiTrace> phi;
  double ratio_tolerance = 1e-9;
};

}  // namespace hopflax
