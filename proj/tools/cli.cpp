#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hopflax/error.hpp"
#include "hopflax/fields.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/json_format.hpp"
#include "hopflax/report.hpp"
#include "hopflax/space_gen.hpp"
#include "hopflax/transport.hpp"

#ifndef HOPFLAX_VERSION
#define HOPFLAX_VERSION "unknown"
#endif

namespace hopflax::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Configuration mistakes detected after parsing; reported with exit 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

double parse_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size())
    throw UsageError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t j) {
  // splitmix64 step
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (j + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct Run {
  const RunConfig& config;
  std::ostream& out;
  std::ostream& err;
  json manifest_artifacts = json::array();
  json findings = json::object();

  void write_text(const std::string& name, const std::string& text) {
    const fs::path path = config.out_dir / name;
    write_file(path, text);
    manifest_artifacts.push_back(name);
  }

  static void write_file(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("cannot write '" + path.string() + "'");
    os << text;
    if (!os) throw UsageError("failed writing '" + path.string() + "'");
  }

  void write_json(const std::string& name, const json& doc) {
    write_text(name, dump_json(doc, config.indent));
  }

  SpaceSpec spec() const {
    if (config.space.empty()) throw UsageError("--space is required");
    return SpaceSpec::parse(config.space);
  }

  MeasuredSpace space() const {
    const SpaceSpec s = spec();
    s.validate();
    return generate(s);
  }

  int gen();
  int semigroup();
  int constants();
  int chain();
  int transport();
  int doubling();
  int plot();
};

int Run::gen() {
  const bool flags = !config.kind.empty();
  if (flags == !config.space.empty())
    throw UsageError("gen needs exactly one space source: --space SPEC or --kind with its parameters");
  SpaceSpec s;
  if (flags) {
    const std::string& k = config.kind;
    auto need_n = [&] {
      if (config.n == 0) throw UsageError("--n is required for --kind " + k);
      return config.n;
    };
    if (k == "circle")
      s = SpaceSpec::circle(need_n(), config.length.value_or(2.0 * std::acos(-1.0)));
    else if (k == "gauss" || k == "gaussian" || k == "gaussian_interval")
      s = SpaceSpec::gaussian_interval(need_n(), config.sigma, config.width);
    else if (k == "torus" || k == "torus2d")
      s = SpaceSpec::torus2d(need_n(), config.m == 0 ? config.n : config.m, config.side_x, config.side_y);
    else if (k == "path")
      s = SpaceSpec::path(need_n(), config.length.value_or(0.0));
    else if (k == "complete")
      s = SpaceSpec::complete(need_n());
    else
      throw UsageError("unknown --kind '" + k + "' (circle, gauss, torus, path, complete)");
  } else {
    s = spec();
  }
  s.validate();
  const MeasuredSpace space = generate(s);
  const fs::path target = config.out.empty() ? config.out_dir / "space.json" : config.out;
  write_file(target, dump_json(space_to_json(space), config.indent));
  manifest_artifacts.push_back(target.string());
  findings["space"] = s.describe();
  findings["n"] = space.size();
  findings["mesh_h"] = space.mesh_h();
  out << "wrote " << target.string() << " (" << s.describe() << ", n=" << space.size() << ")\n";
  return kPass;
}

int Run::semigroup() {
  const MeasuredSpace space = this->space();
  const auto& periods = space.meta().periods;
  const std::string field_spec =
      !config.field.empty() ? config.field
                            : (!periods.empty() && periods[0] > 0.0 ? "cos" : "coordinate");
  const ScalarField f = resolve_field(space, field_spec);
  const std::vector<double> times =
      config.times.values.empty() ? TimeGrid::parse("geo:0.001:1:16").values : config.times.values;

  const SemigroupTrace trace = make_trace(space, f, times, config.step);
  const TraceCheck check = check_trace(space, trace);
  json doc = trace_to_json(trace, check);

  bool pruned_ok = true;
  for (double t : times) {
    const ScalarField a = apply(space, f, t);
    const ScalarField b = apply_pruned(space, f, t);
    pruned_ok = pruned_ok && a.values == b.values;
  }
  doc["checks"]["pruned_matches_exhaustive"] = pruned_ok;
  doc["space"] = spec().describe();
  doc["field"] = field_spec;

  if (!config.steps.empty()) {
    json rows = json::array();
    for (double t : times)
      for (double s : config.steps) {
        const auto r = summarize_residual(space, hj_forward_residual(space, f, t, s), t, s);
        rows.push_back({{"t", r.time}, {"s", r.step}, {"mean_abs", r.mean_abs}, {"max_abs", r.max_abs}});
      }
    doc["residual_vs_s"] = std::move(rows);
  }

  if (config.mesh_levels > 0) {
    SpaceSpec s = spec();
    if (s.kind == SpaceKind::custom_file) throw UsageError("--mesh-levels needs a generator spec, not a file");
    json rows = json::array();
    for (std::size_t level = 0; level < config.mesh_levels; ++level) {
      const MeasuredSpace sp = generate(s);
      const ScalarField g = resolve_field(sp, field_spec);
      rows.push_back({{"n", sp.size()},
                      {"mesh_h", sp.mesh_h()},
                      {"defect", semigroup_defect(sp, g, config.defect_t, config.defect_s)}});
      if (level + 1 < config.mesh_levels) s = refine(s);
    }
    doc["defect_vs_mesh"] = std::move(rows);
  }

  write_json("trace.json", doc);
  const bool pass = check.pass() && pruned_ok;
  findings["checks_pass"] = pass;
  out << "semigroup " << spec().describe() << " field=" << field_spec << ": "
      << (pass ? "all exact checks pass" : "exact check FAILED") << "\n";
  return pass ? kPass : kFail;
}

std::vector<Inequality> selected(const std::string& which) {
  if (which == "all") return {Inequality::lsi, Inequality::talagrand, Inequality::poincare};
  std::vector<Inequality> out;
  for (auto part : split(which, ',')) {
    if (part == "lsi") out.push_back(Inequality::lsi);
    else if (part == "talagrand" || part == "t") out.push_back(Inequality::talagrand);
    else if (part == "poincare" || part == "p") out.push_back(Inequality::poincare);
    else throw UsageError("unknown inequality '" + std::string(part) + "' (lsi, talagrand, poincare, all)");
  }
  return out;
}

int Run::constants() {
  const MeasuredSpace space = this->space();
  InequalityReport report;
  report.space = spec().describe();
  report.space_id = space.id();
  bool reproducible = true;
  WitnessFamily family;
  if (config.smoothing) family.smoothing_time = *config.smoothing;
  for (Inequality which : selected(config.which)) {
    const std::size_t budget = config.budget.value_or(default_budget(which));
    ConstantEstimate est = estimate_constant(space, which, family, budget, config.seed);
    const double again = inequality_ratio(space, which, est.witness.field);
    reproducible = reproducible &&
                   std::abs(again - est.k_upper) <= report.ratio_tolerance * std::max(1.0, std::abs(again));
    write_text(witness_filename(which), field_to_csv(est.witness.field));
    out << to_string(which) << " K_upper=" << format_number(est.k_upper) << " witness=" << est.witness.label
        << "\n";
    switch (which) {
      case Inequality::lsi: report.lsi = std::move(est); break;
      case Inequality::talagrand: report.talagrand = std::move(est); break;
      case Inequality::poincare: report.poincare = std::move(est); break;
    }
  }
  write_json("report.json", report_to_json(report));
  findings["reproducible"] = reproducible;
  return reproducible ? kPass : kFail;
}

int Run::chain() {
  if (!config.K) throw UsageError("chain needs --K");
  const double K = *config.K;
  if (!(K > 0.0)) throw UsageError("--K must be positive");
  if (!(config.tau > 0.0 && config.tau < 1.0)) throw UsageError("--tau must lie in (0, 1)");
  const MeasuredSpace space = this->space();

  InequalityReport report;
  report.space = spec().describe();
  report.space_id = space.id();
  report.chain = verify_chain(space, K, default_witness_suites(space, config.seed), config.tau);

  const std::vector<double> times =
      config.times.values.empty() ? TimeGrid::parse("geo:0.01:1:12").values : config.times.values;
  const double h = space.mesh_h();
  const double t0 = config.smoothing.value_or(10.0 * h * h);
  double endpoint_gap = 0.0;
  const std::vector<double> one{1.0};
  for (std::size_t j = 0; j < config.traces; ++j) {
    const ScalarField hfield = random_smoothed_field(space, mix_seed(config.seed, 2 * j), t0);
    const ScalarField gfield = random_smoothed_field(space, mix_seed(config.seed, 2 * j + 1), t0);
    PsiTrace psi = psi_trace(space, hfield, K, times);
    psi.label = "h" + std::to_string(j);
    PhiTrace phi = phi_trace(space, gfield, K, times);
    phi.label = "g" + std::to_string(j);
    const PhiTrace at_one = phi_trace(space, gfield, K, one);
    endpoint_gap = std::max(endpoint_gap, std::abs(K * (at_one.values[0] - at_one.mean) -
                                                   dual_talagrand_defect(space, gfield, K)));
    report.psi.push_back(std::move(psi));
    report.phi.push_back(std::move(phi));
  }

  json doc = report_to_json(report);
  doc["endpoint_identity_gap"] = endpoint_gap;
  write_json("report.json", doc);

  const ChainReport& c = *report.chain;
  const bool endpoint_ok = endpoint_gap <= 1e-12;
  findings["verdict"] = std::string(to_string(c.verdict));
  findings["endpoint_identity_gap"] = endpoint_gap;
  out << c.summary() << "\n";
  if (!endpoint_ok) out << "endpoint identity FAILED: gap " << format_number(endpoint_gap) << "\n";
  return c.implications_hold() && endpoint_ok ? kPass : kFail;
}

std::vector<double> density(const MeasuredSpace& space, const std::string& spec) {
  const ScalarField f = resolve_field(space, spec);
  std::vector<double> mu(space.size());
  double total = 0.0;
  for (std::size_t x = 0; x < mu.size(); ++x) {
    if (f[x] < 0.0) throw UsageError("density '" + spec + "' is negative at point " + std::to_string(x));
    mu[x] = space.measure(x) * f[x];
    total += mu[x];
  }
  if (!(total > 0.0)) throw UsageError("density '" + spec + "' has zero mass");
  for (double& v : mu) v /= total;
  return mu;
}

int Run::transport() {
  const MeasuredSpace space = this->space();
  const std::string source = config.field.empty() ? "const:1" : config.field;
  const auto mu0 = density(space, source);
  const auto mu1 = density(space, config.target);
  const W2Result r = w2(space, mu0, mu1);
  const PlanCheck check = check_plan(space, r.plan);
  json doc = plan_to_json(r.plan);
  doc["distance"] = r.distance;
  doc["source"] = source;
  doc["target"] = config.target;
  doc["checks"] = {{"marginal_defect", check.marginal_defect},
                   {"min_entry", check.min_entry},
                   {"cost_defect", check.cost_defect}};
  write_json("plan.json", doc);
  const bool pass = check.marginal_defect <= 1e-9 && check.min_entry >= -1e-12 &&
                    r.plan.duality_gap <= 1e-9 * std::max(1.0, r.plan.cost);
  findings["distance"] = r.distance;
  findings["checks_pass"] = pass;
  out << "W2 = " << format_number(r.distance) << " duality_gap=" << format_number(r.plan.duality_gap) << "\n";
  return pass ? kPass : kFail;
}

int Run::doubling() {
  const MeasuredSpace space = this->space();
  const double r_min = config.r_min > 0.0 ? config.r_min : space.mesh_h();
  const double r_max = config.r_max > 0.0 ? config.r_max : 0.25 * space.diameter();
  if (!(r_max >= r_min)) throw UsageError("--r-max must not be below --r-min");
  const MetricReport metric = validate_metric(space);
  json doc;
  doc["space"] = spec().describe();
  doc["n"] = space.size();
  doc["mesh_h"] = space.mesh_h();
  doc["midpoint_defect"] = space.midpoint_defect();
  doc["diameter"] = space.diameter();
  doc["r_min"] = r_min;
  doc["r_max"] = r_max;
  doc["r_steps"] = config.r_steps;
  doc["doubling_constant"] = doubling_constant(space, r_min, r_max, config.r_steps);
  doc["metric"] = {{"triangle_violation", metric.triangle_violation},
                   {"symmetry_defect", metric.symmetry_defect},
                   {"diagonal_defect", metric.diagonal_defect},
                   {"negativity", metric.negativity},
                   {"measure_sum_defect", metric.measure_sum_defect},
                   {"pass", metric.pass}};
  if (!config.field.empty()) {
    const ScalarField f = resolve_field(space, config.field);
    doc["field"] = config.field;
    doc["dilation"] = config.dilation;
    doc["local_poincare_constant"] = local_poincare_constant(space, f, r_max, config.dilation);
  }
  write_json("doubling.json", doc);
  findings["doubling_constant"] = doc["doubling_constant"];
  out << "doubling constant " << format_number(doc["doubling_constant"].get<double>()) << " over r in ["
      << format_number(r_min) << ", " << format_number(r_max) << "]\n";
  return metric.pass ? kPass : kFail;
}

int Run::plot() {
  if (config.report.empty()) throw UsageError("plot needs --report FILE");
  if (config.plot_kind.empty()) throw UsageError("plot needs --kind");
  PlotKind kind;
  try {
    kind = parse_plot_kind(config.plot_kind);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  std::ifstream is(config.report, std::ios::binary);
  if (!is) throw UsageError("cannot open report '" + config.report + "'");
  json doc;
  try {
    is >> doc;
  } catch (const json::exception& e) {
    throw UsageError("report '" + config.report + "' is not valid JSON: " + e.what());
  }
  std::string csv;
  try {
    csv = emit_plot_data(doc, kind);
  } catch (const MissingData& e) {
    throw UsageError(e.what());
  }
  const std::string name = config.plot_kind + ".csv";
  write_text(name, csv);
  out << "wrote " << (config.out_dir / name).string() << "\n";
  return kPass;
}

json echo(const RunConfig& c) {
  json doc = {{"command", std::string(to_string(c.command))},
              {"seed", c.seed},
              {"tau", c.tau},
              {"which", c.which},
              {"step", c.step},
              {"traces", c.traces}};
  if (!c.space.empty()) doc["space"] = c.space;
  if (!c.kind.empty()) {
    doc["kind"] = c.kind;
    doc["n"] = c.n;
  }
  if (!c.field.empty()) doc["field"] = c.field;
  if (c.command == Command::transport) doc["target"] = c.target;
  if (c.K) doc["K"] = *c.K;
  if (!c.times.text.empty()) doc["times"] = c.times.text;
  if (!c.steps.empty()) doc["steps"] = c.steps;
  if (c.mesh_levels) doc["mesh_levels"] = c.mesh_levels;
  if (c.budget) doc["budget"] = *c.budget;
  if (c.smoothing) doc["smoothing"] = *c.smoothing;
  if (!c.report.empty()) doc["report"] = c.report;
  if (!c.plot_kind.empty()) doc["plot_kind"] = c.plot_kind;
  if (!c.out.empty()) doc["out"] = c.out.string();
  doc["out_dir"] = c.out_dir.string();
  return doc;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::gen: return "gen";
    case Command::semigroup: return "semigroup";
    case Command::constants: return "constants";
    case Command::chain: return "chain";
    case Command::transport: return "transport";
    case Command::doubling: return "doubling";
    case Command::plot: return "plot";
  }
  return "unknown";
}

TimeGrid TimeGrid::parse(std::string_view text) {
  TimeGrid grid;
  grid.text = std::string(text);
  const auto parts = split(text, ':');
  if (parts.size() == 4 && (parts[0] == "geo" || parts[0] == "lin")) {
    const double lo = parse_double(parts[1], "time grid minimum");
    const double hi = parse_double(parts[2], "time grid maximum");
    const double count = parse_double(parts[3], "time grid count");
    if (count < 1 || count != std::floor(count)) throw UsageError("time grid count must be a positive integer");
    if (!(lo > 0.0) || !(hi >= lo)) throw UsageError("time grid needs 0 < min <= max");
    const auto k = static_cast<std::size_t>(count);
    if (k > 1 && !(hi > lo)) throw UsageError("time grid with several points needs min < max");
    for (std::size_t i = 0; i < k; ++i) {
      const double u = k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1);
      grid.values.push_back(parts[0] == "geo" ? lo * std::pow(hi / lo, u) : lo + (hi - lo) * u);
    }
    grid.values.back() = hi;
  } else {
    for (auto part : split(text, ',')) grid.values.push_back(parse_double(part, "time"));
  }
  for (std::size_t i = 0; i < grid.values.size(); ++i) {
    if (!(grid.values[i] > 0.0)) throw UsageError("times must be strictly positive");
    if (i > 0 && !(grid.values[i] > grid.values[i - 1])) throw UsageError("times must be strictly increasing");
  }
  return grid;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  try {
    fs::create_directories(config.out_dir);
  } catch (const fs::filesystem_error& e) {
    err << "error: cannot create output directory '" << config.out_dir.string() << "': " << e.what() << "\n";
    return kUsage;
  }

  Run r{config, out, err};
  int code = kUsage;
  std::string message;
  try {
    switch (config.command) {
      case Command::gen: code = r.gen(); break;
      case Command::semigroup: code = r.semigroup(); break;
      case Command::constants: code = r.constants(); break;
      case Command::chain: code = r.chain(); break;
      case Command::transport: code = r.transport(); break;
      case Command::doubling: code = r.doubling(); break;
      case Command::plot: code = r.plot(); break;
    }
  } catch (const std::exception& e) {
    message = e.what();
    err << "error: " << message << "\n";
    code = kUsage;
  }

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest = {{"tool", "hopflax"},
                   {"version", HOPFLAX_VERSION},
                   {"compiler", __VERSION__},
                   {"config", echo(config)},
                   {"seed", config.seed},
                   {"exit_code", code},
                   {"wall_time_seconds", wall},
                   {"artifacts", r.manifest_artifacts},
                   {"findings", r.findings}};
  if (!message.empty()) manifest["error"] = message;
  try {
    Run::write_file(config.out_dir / "run.json", dump_json(manifest, config.indent));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return code;
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hopf-Lax semigroups, optimal transport and functional inequalities on finite metric measure spaces",
               "hopflax"};
  app.require_subcommand(1);
  app.set_version_flag("--version", HOPFLAX_VERSION);

  RunConfig config;
  std::string times;
  std::string out_dir;
  std::string out_file;
  std::string steps;

  auto common = [&](CLI::App* sub, bool needs_space) {
    auto* opt = sub->add_option("--space", config.space, "generator spec (circle:N:L, gauss:N:S:W, torus:N:M:LX:LY, path:N[:L], complete:N) or space file");
    if (needs_space) opt->required();
    sub->add_option("--seed", config.seed, "seed (default 7)");
    sub->add_option("--out-dir", out_dir, "artifact directory (default $HOPFLAX_OUT_DIR or hopflax_out)");
    sub->add_option("--indent", config.indent, "JSON indent, negative for compact");
  };

  auto* gen = app.add_subcommand("gen", "generate a space file");
  common(gen, false);
  gen->add_option("--kind", config.kind, "circle, gauss, torus, path or complete");
  gen->add_option("--n", config.n, "resolution");
  gen->add_option("--m", config.m, "second torus resolution");
  gen->add_option("--length", config.length, "circle circumference or path length");
  gen->add_option("--sigma", config.sigma, "gaussian scale");
  gen->add_option("--width", config.width, "gaussian half width");
  gen->add_option("--side-x", config.side_x, "torus side x");
  gen->add_option("--side-y", config.side_y, "torus side y");
  gen->add_option("--out", out_file, "space file to write");

  auto* semi = app.add_subcommand("semigroup", "Hopf-Lax trace with exact checks");
  common(semi, true);
  semi->add_option("--field", config.field, "cos, sin, coordinate, tilt:A, const:C, random:SEED or CSV file");
  semi->add_option("--times", times, "geo:MIN:MAX:COUNT, lin:MIN:MAX:COUNT or comma list");
  semi->add_option("--step", config.step, "forward step of the HJ residual");
  semi->add_option("--steps", steps, "comma list of steps for residual_vs_s");
  semi->add_option("--mesh-levels", config.mesh_levels, "refinement levels for defect_vs_mesh");
  semi->add_option("--defect-t", config.defect_t, "t of the semigroup defect");
  semi->add_option("--defect-s", config.defect_s, "s of the semigroup defect");

  auto* cons = app.add_subcommand("constants", "estimate LSI, Talagrand and Poincare constants");
  common(cons, true);
  cons->add_option("--which", config.which, "lsi, talagrand, poincare (comma list) or all");
  cons->add_option("--budget", config.budget, "refinement steps per witness");
  cons->add_option("--smoothing", config.smoothing, "smoothing time of random witnesses");

  auto* chain = app.add_subcommand("chain", "witness-wise check of LSI(K) => T(K) => P(K)");
  common(chain, true);
  chain->add_option("--K", config.K, "constant under test")->required();
  chain->add_option("--tau", config.tau, "per-stage slack");
  chain->add_option("--times", times, "time grid of the psi/phi traces");
  chain->add_option("--traces", config.traces, "number of seeded psi/phi traces");
  chain->add_option("--smoothing", config.smoothing, "smoothing time of random fields");

  auto* tr = app.add_subcommand("transport", "exact W2 between two densities relative to nu");
  common(tr, true);
  tr->add_option("--from", config.field, "source density (field spec, default const:1)");
  tr->add_option("--to", config.target, "target density (field spec, default const:1)");

  auto* dbl = app.add_subcommand("doubling", "doubling constant and metric validation");
  common(dbl, true);
  dbl->add_option("--r-min", config.r_min, "smallest radius (default mesh_h)");
  dbl->add_option("--r-max", config.r_max, "largest radius (default diameter / 4)");
  dbl->add_option("--r-steps", config.r_steps, "radii on the linear grid");
  dbl->add_option("--field", config.field, "field for the local Poincare certificate");
  dbl->add_option("--dilation", config.dilation, "ball dilation of the Poincare certificate");

  auto* plot = app.add_subcommand("plot", "CSV plot data from a report");
  plot->add_option("--report", config.report, "report or trace JSON")->required();
  plot->add_option("--kind", config.plot_kind, "psi, phi, residual_vs_s or defect_vs_mesh")->required();
  plot->add_option("--out-dir", out_dir, "artifact directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  const std::pair<CLI::App*, Command> commands[] = {
      {gen, Command::gen},         {semi, Command::semigroup}, {cons, Command::constants},
      {chain, Command::chain},     {tr, Command::transport},   {dbl, Command::doubling},
      {plot, Command::plot}};
  for (const auto& [sub, cmd] : commands)
    if (sub->parsed()) config.command = cmd;

  try {
    if (!times.empty()) config.times = TimeGrid::parse(times);
    if (!steps.empty())
      for (auto part : split(steps, ',')) {
        const double s = parse_double(part, "step");
        if (!(s > 0.0)) throw UsageError("steps must be positive");
        config.steps.push_back(s);
      }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("HOPFLAX_OUT_DIR");
    out_dir = env && *env ? env : "hopflax_out";
  }
  config.out_dir = out_dir;
  config.out = out_file;
  return run(config, out, err);
}

}  // namespace hopflax::cli
