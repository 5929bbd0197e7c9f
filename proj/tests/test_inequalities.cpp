#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/inequalities.hpp"
#include "hopflax/space_gen.hpp"
#include "hopflax/transport.hpp"
#include "test_util.hpp"

using namespace hopflax;
using testutil::kTwoPi;
using testutil::two_point;

namespace {

std::string message_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const MeasuredSpace& gauss201() {
  static const MeasuredSpace s = generate(SpaceSpec::gaussian_interval(201, 1.0, 4.0));
  return s;
}

ScalarField along_x(const MeasuredSpace& s, auto fn) {
  std::vector<double> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) v[i] = fn(s.meta().coords[i][0]);
  return make_field(s, std::move(v));
}

std::vector<double> geometric(double lo, double hi, int count) {
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(lo * std::pow(hi / lo, i / double(count - 1)));
  return t;
}

}  // namespace

TEST_CASE("entropy") {
  const auto s = two_point();
  CHECK(entropy_functional(s, constant_field(s, 1.0)) == 0.0);
  const auto F = make_field(s, {std::sqrt(2.0), 0.0});
  CHECK(entropy_functional(s, F) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  const auto G = make_field(s, {-3.0 * std::sqrt(2.0), 0.0});
  CHECK(entropy_functional(s, G) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(entropy_functional(s, constant_field(s, 0.0)), Error);
}

TEST_CASE("log-Sobolev ratio") {
  const auto s = two_point();
  const auto f = make_field(s, {std::sqrt(2.0), 0.0});
  CHECK(lsi_ratio(s, f) == doctest::Approx(2.0 / std::log(2.0)).epsilon(1e-14));
  CHECK(message_of([&] { lsi_ratio(s, make_field(s, {1.0, -1.0})); }).find("witness carries no information") !=
        std::string::npos);

  const auto& g = gauss201();
  const double r = lsi_ratio(g, along_x(g, [](double x) { return std::exp(x / 2.0); }));
  CHECK(r >= 0.9);
  CHECK(r <= 1.1);
}

TEST_CASE("Talagrand ratio") {
  const auto s = two_point();
  const auto F = make_field(s, {std::sqrt(2.0), 0.0});
  CHECK(talagrand_ratio(s, F) == doctest::Approx(2.0 * std::log(2.0) / 0.5).epsilon(1e-13));
  CHECK(message_of([&] { talagrand_ratio(s, constant_field(s, 1.0)); }).find("zero transport distance") !=
        std::string::npos);

  const auto& g = gauss201();
  const double alpha = 0.5;
  const auto tilt = along_x(g, [&](double x) { return std::exp(0.5 * (alpha * x - alpha * alpha / 2.0)); });
  const double r = talagrand_ratio(g, tilt);
  CHECK(r >= 0.9);
  CHECK(r <= 1.1);

  // Continuum transport distance between the tilted and untilted Gaussian is alpha.
  std::vector<double> mu(g.size());
  double z = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) z += mu[i] = g.measure(i) * tilt[i] * tilt[i];
  for (double& v : mu) v /= z;
  CHECK(w2_oracle_1d(g, mu, g.measure()) == doctest::Approx(alpha).epsilon(0.05));
}

TEST_CASE("Poincare ratio") {
  const auto s = two_point();
  CHECK(poincare_ratio(s, make_field(s, {-1.0, 1.0})) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK_THROWS_AS(poincare_ratio(s, constant_field(s, 4.0)), Error);

  // Same-mesh Rayleigh quotient of cos with one-sided differences.
  const auto c = generate(SpaceSpec::circle(512, kTwoPi));
  const std::size_t n = c.size();
  const double h = kTwoPi / n;
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(h * static_cast<double>(i));
  double energy = 0.0, var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double down = std::max({0.0, v[i] - v[(i + 1) % n], v[i] - v[(i + n - 1) % n]}) / h;
    energy += down * down / n;
    var += v[i] * v[i] / n;
  }
  const double r = poincare_ratio(c, make_field(c, v));
  CHECK(r == doctest::Approx(energy / var).epsilon(1e-12));
  CHECK(r == doctest::Approx(1.0).epsilon(0.05));

  std::vector<double> bump(n, 0.0);
  bump[17] = 1.0;
  const double b1 = poincare_ratio(c, make_field(c, bump));
  bump[17] = 2.0;
  CHECK(std::isfinite(b1));
  CHECK(b1 > 0.0);
  CHECK(poincare_ratio(c, make_field(c, bump)) == doctest::Approx(b1).epsilon(1e-14));
}

TEST_CASE("constant estimation") {
  const auto s = two_point();
  WitnessFamily only;
  only.tilts = false;
  only.eigenfields = 0;
  only.random_fields = 0;
  only.custom.push_back({"pair", make_field(s, {-1.0, 1.0})});
  const auto est = estimate_constant(s, Inequality::poincare, only, 50, 3);
  CHECK(est.k_upper == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(est.witness.label == "pair");

  WitnessFamily empty = only;
  empty.custom.clear();
  CHECK_THROWS_AS(estimate_constant(s, Inequality::poincare, empty, 10, 3), Error);
  CHECK_THROWS_AS(estimate_constant(s, Inequality::poincare, only, 0, 3), Error);

  WitnessFamily flat = only;
  flat.custom = {{"flat", constant_field(s, 1.0)}};
  CHECK_THROWS_AS(estimate_constant(s, Inequality::lsi, flat, 10, 3), Error);

  const auto c = generate(SpaceSpec::circle(512, kTwoPi));
  WitnessFamily spectral;
  spectral.tilts = false;
  spectral.random_fields = 0;
  const auto pc = estimate_constant(c, Inequality::poincare, spectral, 200, 5);
  CHECK(pc.k_upper >= 0.95);
  CHECK(pc.k_upper <= 1.05);
}

TEST_CASE("estimates reproduce from their witnesses and are deterministic") {
  const auto& g = gauss201();
  for (auto which : {Inequality::lsi, Inequality::poincare, Inequality::talagrand}) {
    const std::size_t budget = which == Inequality::talagrand ? 10 : 200;
    const auto a = estimate_constant(g, which, WitnessFamily{}, budget, 9);
    const auto b = estimate_constant(g, which, WitnessFamily{}, budget, 9);
    CHECK(a.k_upper >= 0.0);
    CHECK(a.k_upper == b.k_upper);
    CHECK(a.witness.field.values == b.witness.field.values);
    CHECK(inequality_ratio(g, which, a.witness.field) == doctest::Approx(a.k_upper).epsilon(1e-9));
  }
}

TEST_CASE("dual Talagrand defect") {
  const auto s = two_point();
  CHECK(dual_talagrand_defect(s, constant_field(s, 3.0), 0.7) == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  const double expected = std::log(0.5 * (1.0 + std::exp(1.0))) - 1.0;
  CHECK(dual_talagrand_defect(s, make_field(s, {0.0, 1.0}), 2.0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(-0.37989).epsilon(1e-4));
  CHECK_THROWS_AS(dual_talagrand_defect(s, constant_field(s, 1.0), 0.0), Error);

  const auto& g = gauss201();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto field = random_smoothed_field(g, 100 + seed, 0.01);
    CHECK(dual_talagrand_defect(g, field, 0.9) <= 0.02);
  }
}

TEST_CASE("psi trace") {
  const auto s = two_point();
  const double times[] = {0.1, 1.0, 3.0};
  const auto zero = psi_trace(s, constant_field(s, 0.0), 1.0, times);
  for (double v : zero.values) CHECK(v == 1.0);
  CHECK(zero.max_excess == 0.0);
  CHECK_THROWS_AS(psi_trace(s, constant_field(s, 0.0), 1.0, std::span<const double>{}), Error);

  std::mt19937_64 rng(31);
  const auto r = testutil::random_graph(rng, 15);
  const auto h = testutil::random_field(r, rng);
  const double tiny[] = {1e-6};
  const auto small = psi_trace(r, h, 0.8, tiny);
  double top = 0.0;
  for (double v : h.values) top = std::max(top, std::abs(v));
  CHECK(std::abs(small.values[0] - 1.0) <= 0.8 * 1e-6 * 2.0 * top + 1e-10);

  const auto& g = gauss201();
  double m = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) m += g.measure(i) * g.meta().coords[i][0];
  const auto x = along_x(g, [m](double v) { return v - m; });
  const auto tr = psi_trace(g, x, 0.9, geometric(0.01, 2.0, 12));
  CHECK(tr.max_excess <= 0.02);
}

TEST_CASE("phi trace") {
  const auto s = two_point();
  const double times[] = {0.5, 1.0};
  const auto c = phi_trace(s, constant_field(s, 1.5), 2.0, times);
  for (double v : c.values) CHECK(v == doctest::Approx(1.5).epsilon(1e-15));
  CHECK(c.max_upward_step == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));

  const auto g01 = make_field(s, {0.0, 1.0});
  const auto tr = phi_trace(s, g01, 2.0, times);
  CHECK(tr.values[1] == doctest::Approx(0.5 * std::log(0.5 * (1.0 + std::exp(1.0)))).epsilon(1e-14));
  CHECK(tr.values[0] == doctest::Approx(std::log(0.5 * (1.0 + std::exp(1.0)))).epsilon(1e-14));
  CHECK(tr.values[0] >= tr.values[1]);
  CHECK(2.0 * (tr.values[1] - tr.mean) == doctest::Approx(dual_talagrand_defect(s, g01, 2.0)).epsilon(1e-12));

  const double backwards[] = {1.0, 0.5};
  CHECK_THROWS_AS(phi_trace(s, g01, 2.0, backwards), Error);
  CHECK_THROWS_AS(phi_trace(s, g01, 2.0, std::span<const double>{}), Error);

  const auto& g = gauss201();
  const auto grid = geometric(0.01, 1.0, 12);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto field = random_smoothed_field(g, 500 + seed, 0.01);
    CHECK(phi_trace(g, field, 0.9, grid).max_upward_step <= 0.01);
  }
}

TEST_CASE("chain verification") {
  const auto& g = gauss201();
  const auto suites = default_witness_suites(g, 7);
  const auto vacuous = verify_chain(g, 1e-6, suites, 0.05);
  CHECK(vacuous.verdict == ChainVerdict::consistent);

  const auto at09 = verify_chain(g, 0.9, suites, 0.05);
  CHECK(at09.verdict == ChainVerdict::consistent);
  CHECK(at09.summary().find("chain consistent") != std::string::npos);
  CHECK(at09.entries.size() == suites.lsi.size() + suites.talagrand.size() + suites.poincare.size());

  const auto at15 = verify_chain(g, 1.5, suites, 0.05);
  CHECK(at15.verdict == ChainVerdict::lsi_hypothesis_refuted);
  CHECK(at15.implications_hold());
  CHECK(at15.summary().find("hypothesis LSI(K) fails") != std::string::npos);
  bool tilt_refutes = false;
  for (const auto& e : at15.entries)
    if (e.stage == Inequality::lsi && e.witness.starts_with("tilt:") && !e.pass) tilt_refutes = true;
  CHECK(tilt_refutes);

  CHECK_THROWS_AS(verify_chain(g, 0.9, suites, 0.0), Error);
  CHECK_THROWS_AS(verify_chain(g, 0.9, WitnessSuites{}, 0.05), Error);
}

TEST_CASE("a planted Talagrand failure is reported as a counterexample") {
  const auto s = two_point();
  WitnessSuites suites;
  suites.lsi = {{"a", make_field(s, {std::sqrt(2.0), 0.0})}};        // ratio 2.885
  suites.talagrand = {{"b", make_field(s, {std::sqrt(2.0), 0.0})}};  // ratio 2.773
  suites.poincare = {{"c", make_field(s, {-1.0, 1.0})}};              // ratio 2
  const auto r = verify_chain(s, 2.85, suites, 0.001);
  CHECK(r.verdict == ChainVerdict::lsi_to_t_counterexample);
  CHECK(r.first_counterexample.find("b") != std::string::npos);
  CHECK_FALSE(r.implications_hold());

  const auto q = verify_chain(s, 2.4, suites, 0.01);
  CHECK(q.verdict == ChainVerdict::t_to_p_counterexample);
}

TEST_CASE("Laplacian eigenfields") {
  const auto c = generate(SpaceSpec::circle(64, kTwoPi));
  const auto phis = laplacian_eigenfields(c, 4);
  REQUIRE(phis.size() == 4);
  for (const auto& p : phis) {
    double m = 0.0, top = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      m += c.measure(i) * p[i];
      top = std::max(top, std::abs(p[i]));
    }
    CHECK(m == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(top == doctest::Approx(1.0));
  }
  CHECK(poincare_ratio(c, phis[0]) == doctest::Approx(1.0).epsilon(0.05));
}
