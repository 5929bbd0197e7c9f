#include "hopflax/inequalities.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/transport.hpp"

namespace hopflax {

namespace {

constexpr double kInformationFloor = 1e-12;

std::uint64_t mix(std::uint64_t h, std::uint64_t word) {
  for (int b = 0; b < 8; ++b) {
    h ^= (word >> (8 * b)) & 0xffu;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix(std::uint64_t h, std::string_view text) {
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double second_moment(const MeasuredSpace& space, const ScalarField& f) {
  double z = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) z += space.measure(x) * f[x] * f[x];
  return z;
}

double subgrad_energy(const MeasuredSpace& space, const ScalarField& f) {
  double e = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const double g = subgrad_norm(space, f, x);
    e += space.measure(x) * g * g;
  }
  return e;
}

/// log sum nu e^{a}, skipping points of zero mass.
double log_mean_exp(const MeasuredSpace& space, std::span<const double> a) {
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.measure(x) > 0.0) top = std::max(top, a[x]);
  double s = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (space.measure(x) > 0.0) s += space.measure(x) * std::exp(a[x] - top);
  return top + std::log(s);
}

double mean(const MeasuredSpace& space, const ScalarField& f) {
  double m = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) m += space.measure(x) * f[x];
  return m;
}

/// First coordinate when the generator supplies a non-periodic one.
std::optional<std::vector<double>> line_coordinate(const MeasuredSpace& space) {
  const auto& meta = space.meta();
  if (meta.coords.size() != space.size() || space.size() == 0) return std::nullopt;
  if (!meta.periods.empty() && meta.periods[0] != 0.0) return std::nullopt;
  std::vector<double> x(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    if (meta.coords[i].empty()) return std::nullopt;
    x[i] = meta.coords[i][0];
  }
  return x;
}

std::string signed_label(const char* prefix, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%+g", prefix, value);
  return buf;
}

std::string scaled_label(double c) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ":c=%g", c);
  return buf;
}

ScalarField map_field(const MeasuredSpace& space, const ScalarField& f, auto op) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = op(f[i]);
  return make_field(space, std::move(v));
}

}  // namespace

std::string_view to_string(Inequality which) {
  switch (which) {
    case Inequality::lsi: return "lsi";
    case Inequality::talagrand: return "talagrand";
    case Inequality::poincare: return "poincare";
  }
  return "unknown";
}

std::string_view to_string(ChainVerdict verdict) {
  switch (verdict) {
    case ChainVerdict::consistent: return "consistent";
    case ChainVerdict::lsi_hypothesis_refuted: return "lsi_hypothesis_refuted";
    case ChainVerdict::lsi_to_t_counterexample: return "lsi_to_t_counterexample";
    case ChainVerdict::t_to_p_counterexample: return "t_to_p_counterexample";
  }
  return "unknown";
}

double entropy_functional(const MeasuredSpace& space, const ScalarField& F) {
  check_binding(space, F);
  const double z = second_moment(space, F);
  if (!(z > 0.0)) throw Error("entropy of a field that vanishes nu-almost everywhere");
  double ent = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const double p = F[x] * F[x] / z;
    if (p > 0.0) ent += space.measure(x) * p * std::log(p);
  }
  return std::max(ent, 0.0);
}

double lsi_ratio(const MeasuredSpace& space, const ScalarField& f) {
  const double ent = entropy_functional(space, f);
  if (ent <= kInformationFloor) throw Error("witness carries no information (entropy below 1e-12)");
  const double energy = subgrad_energy(space, f) / second_moment(space, f);
  return 2.0 * energy / ent;
}

double talagrand_ratio(const MeasuredSpace& space, const ScalarField& F) {
  const double ent = entropy_functional(space, F);
  const double z = second_moment(space, F);
  std::vector<double> density(space.size());
  for (std::size_t x = 0; x < space.size(); ++x) density[x] = space.measure(x) * F[x] * F[x] / z;
  const double w = w2(space, density, space.measure()).distance;
  if (w <= kInformationFloor) throw Error("zero transport distance between F^2 nu and nu");
  return 2.0 * ent / (w * w);
}

double poincare_ratio(const MeasuredSpace& space, const ScalarField& h) {
  check_binding(space, h);
  const double m = mean(space, h);
  double var = 0.0;
  double top = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) {
    const double c = h[x] - m;
    var += space.measure(x) * c * c;
    top = std::max(top, std::abs(h[x]));
  }
  if (!(var > kInformationFloor * top * top) || var <= 0.0)
    throw Error("poincare ratio of a nu-almost constant field");
  return subgrad_energy(space, h) / var;
}

double inequality_ratio(const MeasuredSpace& space, Inequality which, const ScalarField& field) {
  switch (which) {
    case Inequality::lsi: return lsi_ratio(space, field);
    case Inequality::talagrand: return talagrand_ratio(space, field);
    case Inequality::poincare: return poincare_ratio(space, field);
  }
  throw Error("unknown inequality");
}

ScalarField random_smoothed_field(const MeasuredSpace& space, std::uint64_t seed,
                                  double smoothing_time, double amplitude) {
  std::mt19937_64 rng(seed);
  std::vector<double> v(space.size());
  for (double& x : v) x = amplitude * (2.0 * unit_uniform(rng) - 1.0);
  const ScalarField raw = make_field(space, std::move(v));
  return smoothing_time > 0.0 ? apply_pruned(space, raw, smoothing_time) : raw;
}

std::vector<ScalarField> laplacian_eigenfields(const MeasuredSpace& space, std::size_t count) {
  const std::size_t n = space.size();
  if (n < 2 || count == 0) return {};
  double nu_max = 0.0;
  for (std::size_t x = 0; x < n; ++x) nu_max = std::max(nu_max, space.measure(x));
  std::vector<double> nu(n);
  for (std::size_t x = 0; x < n; ++x) nu[x] = std::max(space.measure(x), 1e-12 * nu_max);

  // Symmetrized form M^{-1/2} L M^{-1/2}.
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (const Edge& e : space.edges()) {
    const double d = space.dist(e.i, e.j);
    const double w = 0.5 * (nu[e.i] + nu[e.j]) / (d * d);
    const auto i = static_cast<Eigen::Index>(e.i);
    const auto j = static_cast<Eigen::Index>(e.j);
    a(i, i) += w;
    a(j, j) += w;
    a(i, j) -= w;
    a(j, i) -= w;
  }
  Eigen::VectorXd s(static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) s(static_cast<Eigen::Index>(x)) = 1.0 / std::sqrt(nu[x]);
  a = s.asDiagonal() * a * s.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw Error("graph Laplacian eigensolver did not converge");

  std::vector<ScalarField> out;
  const std::size_t last = std::min(count + 1, n);
  for (std::size_t k = 1; k < last; ++k) {
    std::vector<double> phi(n);
    double top = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
      phi[x] = solver.eigenvectors()(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(k)) *
               s(static_cast<Eigen::Index>(x));
      top = std::max(top, std::abs(phi[x]));
    }
    if (!(top > 0.0)) continue;
    double sign = 1.0;
    for (double v : phi)
      if (std::abs(v) > 1e-8 * top) {
        sign = v > 0.0 ? 1.0 : -1.0;
        break;
      }
    for (double& v : phi) v *= sign / top;
    out.push_back(make_field(space, std::move(phi)));
  }
  return out;
}

std::vector<Witness> family_witnesses(const MeasuredSpace& space, Inequality which,
                                      const WitnessFamily& family, std::uint64_t seed) {
  std::vector<Witness> out;

  if (family.tilts) {
    if (auto coord = line_coordinate(space)) {
      const auto [lo, hi] = std::minmax_element(coord->begin(), coord->end());
      const double center = 0.5 * (*lo + *hi);
      if (which == Inequality::poincare) {
        for (double sign : {1.0, -1.0}) {
          std::vector<double> v(space.size());
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = sign * ((*coord)[i] - center);
          out.push_back({sign > 0 ? "coordinate:+" : "coordinate:-", make_field(space, std::move(v))});
        }
      } else {
        for (double alpha : family.tilt_alphas) {
          for (double a : {alpha, -alpha}) {
            // Shifted so the largest exponent is zero; the ratios ignore scale.
            const double peak = a > 0 ? *hi : *lo;
            std::vector<double> v(space.size());
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(0.5 * a * ((*coord)[i] - peak));
            out.push_back({signed_label("tilt:", a), make_field(space, std::move(v))});
          }
        }
      }
    }
  }

  if (family.eigenfields > 0) {
    const auto phis = laplacian_eigenfields(space, family.eigenfields);
    for (std::size_t k = 0; k < phis.size(); ++k) {
      const std::string base = "eigen:" + std::to_string(k + 1);
      for (double sign : {1.0, -1.0}) {
        const char* tag = sign > 0 ? ":+" : ":-";
        if (which == Inequality::poincare) {
          out.push_back({base + tag, map_field(space, phis[k], [&](double p) { return sign * p; })});
        } else if (which == Inequality::lsi) {
          for (double c : {0.3, 0.8})
            out.push_back({base + tag + scaled_label(c),
                           map_field(space, phis[k], [&](double p) { return 1.0 + sign * c * p; })});
        } else {
          for (double c : {0.5, 0.9})
            out.push_back({base + tag + scaled_label(c),
                           map_field(space, phis[k],
                                     [&](double p) { return std::sqrt(1.0 + sign * c * p); })});
        }
      }
    }
  }

  if (family.random_fields > 0) {
    const double h = space.mesh_h();
    const double t0 = family.smoothing_time > 0.0 ? family.smoothing_time : 10.0 * h * h;
    for (std::size_t j = 0; j < family.random_fields; ++j) {
      const std::uint64_t s = mix(mix(0xcbf29ce484222325ull, seed), j);
      const ScalarField g = random_smoothed_field(space, s, t0);
      std::string label = "random:" + std::to_string(j);
      if (which == Inequality::poincare)
        out.push_back({std::move(label), g});
      else
        out.push_back({std::move(label), map_field(space, g, [](double v) { return std::exp(0.5 * v); })});
    }
  }

  for (const Witness& w : family.custom) {
    check_binding(space, w.field);
    out.push_back(w);
  }
  return out;
}

std::size_t default_budget(Inequality which) {
  switch (which) {
    case Inequality::lsi: return 1500;
    case Inequality::talagrand: return 40;
    case Inequality::poincare: return 1500;
  }
  return 1;
}

namespace {

/// Seeded coordinate descent. Multiplicative steps for LSI and T keep the
/// sign pattern of the witness; additive steps for P. Only strict
/// improvements are accepted, so the result never exceeds `ratio`.
std::pair<ScalarField, double> refine(const MeasuredSpace& space, Inequality which,
                                      ScalarField field, double ratio, std::size_t budget,
                                      std::uint64_t seed) {
  const std::size_t n = space.size();
  if (n == 0 || budget == 0) return {std::move(field), ratio};
  std::mt19937_64 rng(seed);
  double top = 0.0;
  for (double v : field.values) top = std::max(top, std::abs(v));
  const bool multiplicative = which != Inequality::poincare;
  double step = multiplicative ? 0.2 : 0.1 * top;
  std::size_t misses = 0;

  for (std::size_t it = 0; it < budget; ++it) {
    const std::size_t i = static_cast<std::size_t>(rng() % n);
    const double first = (rng() & 1u) ? 1.0 : -1.0;
    const double old = field[i];
    bool accepted = false;
    for (double dir : {first, -first}) {
      field[i] = multiplicative ? old * std::exp(dir * step) : old + dir * step;
      double r;
      try {
        r = inequality_ratio(space, which, field);
      } catch (const Error&) {
        continue;
      }
      if (r < ratio) {
        ratio = r;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      field[i] = old;
      if (++misses >= std::max<std::size_t>(n, 8)) {
        step *= 0.5;
        misses = 0;
      }
    }
  }
  return {std::move(field), ratio};
}

std::uint64_t content_seed(std::uint64_t seed, const Witness& w) {
  std::uint64_t h = mix(mix(0xcbf29ce484222325ull, seed), w.label);
  for (double v : w.field.values) h = mix(h, std::bit_cast<std::uint64_t>(v));
  return h;
}

}  // namespace

ConstantEstimate estimate_constant(const MeasuredSpace& space, Inequality which,
                                   const WitnessFamily& family, std::size_t budget,
                                   std::uint64_t seed) {
  if (budget < 1) throw Error("estimate_constant needs a budget of at least one step");
  const auto witnesses = family_witnesses(space, which, family, seed);
  if (witnesses.empty()) throw Error("witness family is empty on this space");

  ConstantEstimate est;
  est.which = which;
  est.k_upper = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const Witness& w : witnesses) {
    WitnessRatio row{w.label, 0.0, true, {}};
    double r;
    try {
      r = inequality_ratio(space, which, w.field);
    } catch (const Error& e) {
      row.admissible = false;
      row.ratio = std::numeric_limits<double>::quiet_NaN();
      row.note = e.what();
      est.candidates.push_back(std::move(row));
      continue;
    }
    auto [refined, rr] = refine(space, which, w.field, r, budget, content_seed(seed, w));
    row.ratio = rr;
    est.candidates.push_back(row);
    if (!any || rr < est.k_upper) {
      est.k_upper = rr;
      est.witness = {w.label, std::move(refined)};
      any = true;
    }
  }
  if (!any) throw Error("witness family is degenerate on this space: every witness was rejected");
  return est;
}

double dual_talagrand_defect(const MeasuredSpace& space, const ScalarField& g, double K) {
  check_binding(space, g);
  if (!(K > 0.0)) throw Error("dual Talagrand defect needs K > 0");
  const ScalarField q = apply_pruned(space, g, 1.0);
  std::vector<double> a(space.size());
  for (std::size_t x = 0; x < a.size(); ++x) a[x] = K * q[x];
  return log_mean_exp(space, a) - K * mean(space, g);
}

PsiTrace psi_trace(const MeasuredSpace& space, const ScalarField& h, double K,
                   std::span<const double> times) {
  check_binding(space, h);
  if (times.empty()) throw Error("psi trace needs a nonempty time grid");
  if (!(K > 0.0)) throw Error("psi trace needs K > 0");
  const double m = mean(space, h);
  const ScalarField centered = map_field(space, h, [m](double v) { return v - m; });
  PsiTrace out;
  out.times.assign(times.begin(), times.end());
  out.max_excess = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    if (!(t > 0.0)) throw Error("psi trace times must be positive");
    const ScalarField q = apply_pruned(space, centered, t);
    double s = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) s += space.measure(x) * std::exp(K * t * q[x]);
    out.values.push_back(s);
    out.max_excess = std::max(out.max_excess, s - 1.0);
  }
  return out;
}

PhiTrace phi_trace(const MeasuredSpace& space, const ScalarField& g, double K,
                   std::span<const double> times) {
  check_binding(space, g);
  if (times.empty()) throw Error("phi trace needs a nonempty time grid");
  if (!(K > 0.0)) throw Error("phi trace needs K > 0");
  PhiTrace out;
  out.mean = mean(space, g);
  out.times.assign(times.begin(), times.end());
  std::vector<double> a(space.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double t = times[k];
    if (!(t > 0.0)) throw Error("phi trace times must be positive");
    if (k > 0 && !(t > times[k - 1])) throw Error("phi trace times must be increasing");
    const ScalarField q = apply_pruned(space, g, t);
    for (std::size_t x = 0; x < a.size(); ++x) a[x] = K * t * q[x];
    out.values.push_back(log_mean_exp(space, a) / (K * t));
  }
  out.max_upward_step = 0.0;
  for (std::size_t k = 1; k < out.values.size(); ++k) {
    const double step = out.values[k] - out.values[k - 1];
    out.max_upward_step = k == 1 ? step : std::max(out.max_upward_step, step);
  }
  out.small_time_defect = std::abs(out.values.front() - out.mean);
  return out;
}

WitnessSuites default_witness_suites(const MeasuredSpace& space, std::uint64_t seed) {
  const WitnessFamily family;
  return {family_witnesses(space, Inequality::lsi, family, seed),
          family_witnesses(space, Inequality::talagrand, family, seed),
          family_witnesses(space, Inequality::poincare, family, seed)};
}

std::string ChainReport::summary() const {
  char buf[96];
  std::snprintf(buf, sizeof buf, "(K=%g, tau=%g)", K, tau);
  switch (verdict) {
    case ChainVerdict::consistent: return std::string("chain consistent at ") + buf;
    case ChainVerdict::lsi_hypothesis_refuted:
      return std::string("hypothesis LSI(K) fails at ") + buf + "; no implication violated";
    case ChainVerdict::lsi_to_t_counterexample:
      return std::string("counterexample to LSI(K) => T(K) at ") + buf + ": " + first_counterexample +
             "; rerun on a refined space";
    case ChainVerdict::t_to_p_counterexample:
      return std::string("counterexample to T(K) => P(K) at ") + buf + ": " + first_counterexample +
             "; rerun on a refined space";
  }
  return buf;
}

ChainReport verify_chain(const MeasuredSpace& space, double K, const WitnessSuites& suites,
                         double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw Error("verify_chain needs 0 < tau < 1");
  if (suites.lsi.empty() || suites.talagrand.empty() || suites.poincare.empty())
    throw Error("verify_chain needs a nonempty witness suite for every stage");

  ChainReport report;
  report.K = K;
  report.tau = tau;

  auto stage = [&](Inequality which, const std::vector<Witness>& suite, double threshold,
                   std::string& first_failure) {
    bool refuted = false;
    for (const Witness& w : suite) {
      ChainEntry e{w.label, which, 0.0, threshold, true, true};
      try {
        e.ratio = inequality_ratio(space, which, w.field);
        e.pass = e.ratio >= threshold;
      } catch (const Error&) {
        e.admissible = false;
        e.ratio = std::numeric_limits<double>::quiet_NaN();
      }
      if (!e.pass && !refuted) {
        refuted = true;
        char buf[64];
        std::snprintf(buf, sizeof buf, " ratio %.6g < %.6g", e.ratio, threshold);
        first_failure = std::string(to_string(which)) + " witness " + w.label + buf;
      }
      report.entries.push_back(std::move(e));
    }
    return refuted;
  };

  const double slack = 1.0 - tau;
  std::string lsi_fail, t_fail, p_fail;
  report.lsi_refuted = stage(Inequality::lsi, suites.lsi, K * slack, lsi_fail);
  report.talagrand_refuted = stage(Inequality::talagrand, suites.talagrand, K * slack * slack, t_fail);
  report.poincare_refuted =
      stage(Inequality::poincare, suites.poincare, K * slack * slack * slack, p_fail);

  if (!report.lsi_refuted && report.talagrand_refuted) {
    report.verdict = ChainVerdict::lsi_to_t_counterexample;
    report.first_counterexample = t_fail;
  } else if (!report.talagrand_refuted && report.poincare_refuted) {
    report.verdict = ChainVerdict::t_to_p_counterexample;
    report.first_counterexample = p_fail;
  } else if (report.lsi_refuted) {
    report.verdict = ChainVerdict::lsi_hypothesis_refuted;
  }
  return report;
}

}  // namespace hopflax
