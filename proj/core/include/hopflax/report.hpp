#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/transport.hpp"

namespace hopflax {

/// {times, fields, lip_constants, residual_summaries, ...checks}.
nlohmann::json trace_to_json(const SemigroupTrace& trace, const TraceCheck& check);

/// {n, coupling: [[from, to, mass], ...], cost, duality_gap, pivots}.
nlohmann::json plan_to_json(const TransportPlan& plan);

nlohmann::json psi_to_json(const PsiTrace& trace);
nlohmann::json phi_to_json(const PhiTrace& trace);
nlohmann::json chain_to_json(const ChainReport& chain);

/// Sidecar name used as field_ref for the witness of `which`.
std::string witness_filename(Inequality which);

/// {space, space_id, K_estimates, witnesses, candidates, chain, verdict,
///  traces: {psi, phi}, tolerances}.
nlohmann::json report_to_json(const InequalityReport& report);

enum class PlotKind { psi, phi, residual_vs_s, defect_vs_mesh };
PlotKind parse_plot_kind(std::string_view text);

/// Thrown when a report lacks the data a plot needs.
class MissingData : public Error {
 public:
  using Error::Error;
};

/// CSV with a header row. psi/phi: series,t,value. residual_vs_s:
/// t,s,mean_abs. defect_vs_mesh: n,mesh_h,defect.
std::string emit_plot_data(const nlohmann::json& report, PlotKind kind);

}  // namespace hopflax
