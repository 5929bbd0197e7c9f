#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hopflax/error.hpp"
#include "hopflax/hopf_lax.hpp"
#include "hopflax/space_gen.hpp"
#include "test_util.hpp"

using namespace hopflax;
using testutil::kTwoPi;
using testutil::two_point;

namespace {

ScalarField cosine(const MeasuredSpace& s) {
  const std::size_t n = s.size();
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
  return make_field(s, std::move(v));
}

}  // namespace

TEST_CASE("apply at time zero and on constants") {
  std::mt19937_64 rng(11);
  const auto s = testutil::random_graph(rng, 12);
  const auto f = testutil::random_field(s, rng);
  CHECK(apply(s, f, 0.0).values == f.values);
  const auto c = constant_field(s, 2.5);
  for (double t : {1e-3, 0.5, 10.0}) {
    for (double v : apply(s, c, t).values) CHECK(v == 2.5);
    for (double v : apply_pruned(s, c, t).values) CHECK(v == 2.5);
  }
}

TEST_CASE("two point closed forms") {
  const auto s = two_point();
  const auto f = make_field(s, {0.0, 1.0});
  CHECK(apply(s, f, 1.0).values == std::vector<double>{0.0, 0.5});
  CHECK(apply(s, f, 0.25).values == std::vector<double>{0.0, 1.0});
  CHECK_THROWS_AS(apply(s, f, -1.0), Error);
  CHECK_THROWS_AS(apply_pruned(s, f, -1.0), Error);
}

TEST_CASE("apply matches an independent long double minimization") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = testutil::random_graph(rng, 3 + testutil::below(rng, 30), 5);
    const auto f = testutil::random_field(s, rng, 3.0);
    for (double t : {0.01, 0.3, 2.0, 50.0}) {
      const auto oracle = testutil::naive_hopf_lax(s, f.values, t);
      const auto got = apply(s, f, t);
      for (std::size_t x = 0; x < s.size(); ++x) CHECK(got[x] == doctest::Approx(oracle[x]).epsilon(1e-13));
    }
  }
}

TEST_CASE("pruned evaluation equals exhaustive evaluation") {
  const auto s = generate(SpaceSpec::circle(256, kTwoPi));
  const auto f = cosine(s);
  std::vector<std::size_t> cand;
  const auto p = apply_pruned(s, f, 0.01, &cand);
  CHECK(p.values == apply(s, f, 0.01).values);
  REQUIRE(cand.size() == 256);
  for (std::size_t c : cand) CHECK(c < 256);

  const auto flat = constant_field(s, 1.0);
  apply_pruned(s, flat, 1e-3, &cand);
  for (std::size_t c : cand) CHECK(c == 1);
}

TEST_CASE("gradient norms") {
  const auto s = two_point();
  const auto f = make_field(s, {0.0, 1.0});
  CHECK(grad_norm(s, f, 0) == 1.0);
  CHECK(grad_norm(s, f, 1) == 1.0);
  CHECK(subgrad_norm(s, f, 0) == 0.0);
  CHECK(subgrad_norm(s, f, 1) == 1.0);
  CHECK(lipschitz_constant(s, f) == 1.0);
  const auto c = constant_field(s, 4.0);
  CHECK(grad_norm(s, c, 0) == 0.0);
  CHECK(subgrad_norm(s, c, 1) == 0.0);
  CHECK(lipschitz_constant(s, c) == 0.0);

  const auto circle = generate(SpaceSpec::circle(256, kTwoPi));
  CHECK(grad_norm(circle, cosine(circle), 64) == doctest::Approx(1.0).epsilon(2.0 * circle.mesh_h()));

  std::vector<double> v(256, 5.0);
  v[10] = -1.0;
  CHECK(subgrad_norm(circle, make_field(circle, v), 10) == 0.0);

  const double w1[] = {1.0};
  const auto lone = build_from_graph(1, {}, w1);
  CHECK_THROWS_AS(grad_norm(lone, constant_field(lone, 0.0), 0), Error);
  CHECK_THROWS_AS(subgrad_norm(lone, constant_field(lone, 0.0), 0), Error);
}

TEST_CASE("Lipschitz bound of the semigroup") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const auto s = testutil::random_generated(rng);
    const auto f = testutil::random_field(s, rng);
    for (double t : {0.05, 0.5, 5.0}) CHECK(lipschitz_constant(s, apply(s, f, t)) <= s.diameter() / t + 1e-9);
  }
}

TEST_CASE("semigroup defect examples") {
  const auto s = two_point();
  const auto f = make_field(s, {0.0, 1.0});
  CHECK(semigroup_defect(s, f, 0.5, 0.5) == doctest::Approx(0.5));
  CHECK(semigroup_defect(s, constant_field(s, 1.0), 0.3, 0.7) == 0.0);
  CHECK_THROWS_AS(semigroup_defect(s, f, 0.0, 1.0), Error);
  CHECK_THROWS_AS(semigroup_defect(s, f, 1.0, -1.0), Error);

  double previous = 0.0;
  for (std::size_t n : {128u, 256u}) {
    const auto c = generate(SpaceSpec::circle(n, kTwoPi));
    const double d = semigroup_defect(c, cosine(c), 0.5, 0.5);
    CHECK(d <= 4.0 * c.midpoint_defect() / 0.5);
    if (previous > 0.0) {
      CHECK(d <= previous / 2.0 * 2.5);
      CHECK(d >= previous / 2.0 / 2.5);
    }
    previous = d;
  }
}

TEST_CASE("midpoint identity defect") {
  const auto s = two_point();
  CHECK(midpoint_identity_defect(s, 0, 0, 0.3, 0.9) == 0.0);
  CHECK(midpoint_identity_defect(s, 0, 1, 1.0, 1.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(midpoint_identity_defect(s, 0, 2, 1.0, 1.0), Error);
}

TEST_CASE("forward residual") {
  const auto s = two_point();
  const auto f = make_field(s, {0.0, 1.0});
  const auto r = hj_forward_residual(s, f, 1.0, 0.1);
  CHECK(r[0] == doctest::Approx(0.0));
  CHECK(r[1] == doctest::Approx((1.0 / 2.2 - 0.5) / 0.1 + 0.125).epsilon(1e-12));
  CHECK(r[1] == doctest::Approx(-0.3295).epsilon(1e-3));
  for (double v : hj_forward_residual(s, constant_field(s, 3.0), 0.5, 0.1).values) CHECK(v == 0.0);
  CHECK_THROWS_AS(hj_forward_residual(s, f, 1.0, 0.0), Error);

  const auto c = generate(SpaceSpec::circle(512, kTwoPi));
  const auto cf = cosine(c);
  double prev = INFINITY;
  for (double step : {0.1, 0.05, 0.025}) {
    const auto sum = summarize_residual(c, hj_forward_residual(c, cf, 0.5, step), 0.5, step);
    CHECK(sum.mean_abs <= prev * 1.1);
    prev = sum.mean_abs;
  }
}

TEST_CASE("traces") {
  const auto s = two_point();
  const double times[] = {0.25, 0.5, 1.0, 2.0};
  const auto tr = make_trace(s, make_field(s, {0.0, 1.0}), times);
  REQUIRE(tr.fields.size() == 4);
  const double expected[] = {1.0, 1.0, 0.5, 0.25};
  for (std::size_t k = 0; k < 4; ++k) CHECK(tr.fields[k][1] == doctest::Approx(expected[k]));
  CHECK(check_trace(s, tr).pass());
  // Only the lower point has a zero subgradient, so the mismatch is q/2.
  REQUIRE(tr.gradient_mismatch.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) CHECK(tr.gradient_mismatch[k] == doctest::Approx(expected[k] / 2));

  const double one[] = {1.0};
  const auto flat = make_trace(s, constant_field(s, 2.0), one);
  REQUIRE(flat.fields.size() == 1);
  CHECK(flat.fields[0].values == std::vector<double>{2.0, 2.0});

  const double unsorted[] = {1.0, 0.5};
  CHECK_THROWS_AS(make_trace(s, constant_field(s, 2.0), unsorted), Error);
  CHECK_THROWS_AS(make_trace(s, constant_field(s, 2.0), std::span<const double>{}), Error);

  const auto c = generate(SpaceSpec::circle(256, kTwoPi));
  std::vector<double> geo;
  for (int i = 0; i < 10; ++i) geo.push_back(1e-3 * std::pow(1e3, i / 9.0));
  const auto f = cosine(c);
  const auto ct = make_trace(c, f, geo);
  const double lip = lipschitz_constant(c, f);
  CHECK(ct.small_time_gap <= lip * lip * geo.front() / 2.0 + 1e-12);
  CHECK(check_trace(c, ct).pass());
}
