#include "hopflax/report.hpp"

#include <cmath>

#include "hopflax/error.hpp"
#include "hopflax/json_format.hpp"

namespace hopflax {

namespace {

nlohmann::json number(double v) {
  // Non-finite values serialize as null.
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

nlohmann::json numbers(const std::vector<double>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

const nlohmann::json& require_array(const nlohmann::json& doc, std::initializer_list<const char*> path,
                                    std::string_view what) {
  const nlohmann::json* node = &doc;
  for (const char* key : path) {
    if (!node->is_object() || !node->contains(key))
      throw MissingData("report has no " + std::string(what) + " data");
    node = &(*node)[key];
  }
  if (!node->is_array() || node->empty()) throw MissingData("report has no " + std::string(what) + " data");
  return *node;
}

std::string cell(const nlohmann::json& v) {
  if (v.is_number_float()) return format_number(v.get<double>());
  if (v.is_number()) return v.dump();
  if (v.is_null()) return "nan";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

nlohmann::json trace_to_json(const SemigroupTrace& trace, const TraceCheck& check) {
  nlohmann::json doc;
  doc["times"] = numbers(trace.times);
  nlohmann::json fields = nlohmann::json::array();
  for (const auto& f : trace.fields) fields.push_back(numbers(f.values));
  doc["fields"] = std::move(fields);
  doc["lip_constants"] = numbers(trace.lip_constants);
  nlohmann::json res = nlohmann::json::array();
  for (const auto& r : trace.residual_summaries)
    res.push_back({{"t", number(r.time)}, {"s", number(r.step)}, {"mean_abs", number(r.mean_abs)},
                   {"max_abs", number(r.max_abs)}});
  doc["residual_summaries"] = std::move(res);
  doc["source_lipschitz"] = number(trace.source_lipschitz);
  doc["gradient_mismatch"] = numbers(trace.gradient_mismatch);
  doc["small_time_gap"] = number(trace.small_time_gap);
  doc["checks"] = {{"range_violation", number(check.range_violation)},
                   {"monotonicity_violation", number(check.monotonicity_violation)},
                   {"lipschitz_excess", number(check.lipschitz_excess)},
                   {"pass", check.pass()}};
  return doc;
}

nlohmann::json plan_to_json(const TransportPlan& plan) {
  nlohmann::json coupling = nlohmann::json::array();
  for (const auto& c : plan.coupling) coupling.push_back({c.from, c.to, number(c.mass)});
  return {{"n", plan.n},
          {"coupling", std::move(coupling)},
          {"cost", number(plan.cost)},
          {"duality_gap", number(plan.duality_gap)},
          {"pivots", plan.pivots}};
}

nlohmann::json psi_to_json(const PsiTrace& trace) {
  return {{"label", trace.label},
          {"times", numbers(trace.times)},
          {"values", numbers(trace.values)},
          {"max_excess", number(trace.max_excess)}};
}

nlohmann::json phi_to_json(const PhiTrace& trace) {
  return {{"label", trace.label},
          {"times", numbers(trace.times)},
          {"values", numbers(trace.values)},
          {"mean", number(trace.mean)},
          {"max_upward_step", number(trace.max_upward_step)},
          {"small_time_defect", number(trace.small_time_defect)}};
}

nlohmann::json chain_to_json(const ChainReport& chain) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : chain.entries)
    rows.push_back({{"witness", e.witness},
                    {"stage", std::string(to_string(e.stage))},
                    {"ratio", number(e.ratio)},
                    {"threshold", number(e.threshold)},
                    {"admissible", e.admissible},
                    {"pass", e.pass}});
  return rows;
}

std::string witness_filename(Inequality which) {
  return "witness_" + std::string(to_string(which)) + ".csv";
}

nlohmann::json report_to_json(const InequalityReport& report) {
  nlohmann::json doc;
  doc["space"] = report.space;
  doc["space_id"] = report.space_id;

  nlohmann::json k = nlohmann::json::object();
  nlohmann::json witnesses = nlohmann::json::array();
  nlohmann::json candidates = nlohmann::json::object();
  for (const auto* est : {&report.lsi, &report.talagrand, &report.poincare}) {
    if (!*est) continue;
    const auto& e = **est;
    const std::string stage(to_string(e.which));
    k[stage] = number(e.k_upper);
    witnesses.push_back({{"field_ref", witness_filename(e.which)},
                         {"label", e.witness.label},
                         {"ratio", number(e.k_upper)},
                         {"stage", stage}});
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : e.candidates) {
      nlohmann::json row = {{"label", c.label}, {"ratio", number(c.ratio)}, {"admissible", c.admissible}};
      if (!c.note.empty()) row["note"] = c.note;
      rows.push_back(std::move(row));
    }
    candidates[stage] = std::move(rows);
  }
  doc["K_estimates"] = std::move(k);
  doc["witnesses"] = std::move(witnesses);
  doc["candidates"] = std::move(candidates);

  if (report.chain) {
    doc["chain"] = chain_to_json(*report.chain);
    doc["verdict"] = std::string(to_string(report.chain->verdict));
    doc["summary"] = report.chain->summary();
    doc["K"] = number(report.chain->K);
    doc["tau"] = number(report.chain->tau);
  } else {
    doc["chain"] = nlohmann::json::array();
  }

  nlohmann::json psi = nlohmann::json::array();
  for (const auto& t : report.psi) psi.push_back(psi_to_json(t));
  nlohmann::json phi = nlohmann::json::array();
  for (const auto& t : report.phi) phi.push_back(phi_to_json(t));
  doc["traces"] = {{"psi", std::move(psi)}, {"phi", std::move(phi)}};
  doc["tolerances"] = {{"ratio_reproduction", number(report.ratio_tolerance)}};
  return doc;
}

PlotKind parse_plot_kind(std::string_view text) {
  if (text == "psi") return PlotKind::psi;
  if (text == "phi") return PlotKind::phi;
  if (text == "residual_vs_s") return PlotKind::residual_vs_s;
  if (text == "defect_vs_mesh") return PlotKind::defect_vs_mesh;
  throw Error("unknown plot kind '" + std::string(text) +
              "' (expected psi, phi, residual_vs_s or defect_vs_mesh)");
}

std::string emit_plot_data(const nlohmann::json& report, PlotKind kind) {
  std::string out;
  auto row = [&out](std::initializer_list<std::string> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out.push_back(',');
      first = false;
      out += c;
    }
    out.push_back('\n');
  };

  switch (kind) {
    case PlotKind::psi:
    case PlotKind::phi: {
      const bool psi = kind == PlotKind::psi;
      const auto& traces = require_array(report, {"traces", psi ? "psi" : "phi"}, psi ? "psi trace" : "phi trace");
      row({"series", "t", psi ? "psi" : "phi"});
      for (const auto& tr : traces) {
        const auto& times = tr.at("times");
        const auto& values = tr.at("values");
        for (std::size_t i = 0; i < times.size() && i < values.size(); ++i)
          row({cell(tr.at("label")), cell(times[i]), cell(values[i])});
      }
      return out;
    }
    case PlotKind::residual_vs_s: {
      const auto& rows = require_array(report, {"residual_vs_s"}, "residual_vs_s");
      row({"t", "s", "mean_abs"});
      for (const auto& r : rows) row({cell(r.at("t")), cell(r.at("s")), cell(r.at("mean_abs"))});
      return out;
    }
    case PlotKind::defect_vs_mesh: {
      const auto& rows = require_array(report, {"defect_vs_mesh"}, "defect_vs_mesh");
      row({"n", "mesh_h", "defect"});
      for (const auto& r : rows) row({cell(r.at("n")), cell(r.at("mesh_h")), cell(r.at("defect"))});
      return out;
    }
  }
  throw Error("unknown plot kind");
}

}  // namespace hopflax
