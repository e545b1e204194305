#include "doctest.h"

#include <random>

#include "lorcone/errors.hpp"
#include "lorcone/metricspace.hpp"
#include "oracles.hpp"

using namespace lorcone;

namespace {

FiniteMetricSpace two_point(double gap) { return FiniteMetricSpace(2, {0, gap, gap, 0}); }

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("construction rejects non-metrics") {
  CHECK(code_of([] { FiniteMetricSpace(2, {0, 1, 2, 0}); }) == ErrorCode::InvalidMetric);
  CHECK(code_of([] { FiniteMetricSpace(2, {1, 1, 1, 0}); }) == ErrorCode::InvalidMetric);
  CHECK(code_of([] { FiniteMetricSpace(2, {0, 0, 0, 0}); }) == ErrorCode::InvalidMetric);
  CHECK(code_of([] { FiniteMetricSpace(3, {0, 1, 5, 1, 0, 1, 5, 1, 0}); }) == ErrorCode::InvalidMetric);
  CHECK(code_of([] { FiniteMetricSpace(2, {0, 1, 1, 0}, 2); }) == ErrorCode::InvalidMetric);
  CHECK_NOTHROW(FiniteMetricSpace(3, {0, 1, 2, 1, 0, 1, 2, 1, 0}));
}

TEST_CASE("presets") {
  auto S = segment(4, 5);
  CHECK(S.size() == 5);
  CHECK(S(0, 4) == doctest::Approx(4));
  CHECK(S.diameter() == doctest::Approx(4));
  auto C = circle_arc(2, 1, 11);
  CHECK(C(0, 10) == doctest::Approx(2));
  CHECK(C(3, 7) == doctest::Approx(0.8));
}

TEST_CASE("gh worked examples") {
  auto A = segment(1, 3);
  auto id = gh_distance(A, A, GhMode::Exact);
  CHECK(id.lower == 0);
  CHECK(id.upper == 0);
  CHECK(is_correspondence(id.witness, 3, 3));

  auto g13 = gh_distance(two_point(1), two_point(3), GhMode::Exact);
  CHECK(g13.lower == doctest::Approx(1));
  CHECK(g13.upper == doctest::Approx(1));
  CHECK(oracle::gh_brute(two_point(1).table(), 2, two_point(3).table(), 2) == doctest::Approx(1));

  FiniteMetricSpace P(1, {0});
  auto gp = gh_distance(P, two_point(2), GhMode::Exact);
  CHECK(gp.lower == doctest::Approx(1));
  CHECK(gp.upper == doctest::Approx(1));
  CHECK(gp.witness.pairs.size() == 2);
}

TEST_CASE("exact gh matches brute force on 3-point spaces") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    auto a = oracle::random_planar_metric(3, rng), b = oracle::random_planar_metric(3, rng);
    FiniteMetricSpace A(3, a), B(3, b);
    auto g = gh_distance(A, B, GhMode::Exact);
    double ref = oracle::gh_brute(a, 3, b, 3);
    CHECK(g.upper == doctest::Approx(ref).epsilon(1e-12));
    CHECK(g.lower == doctest::Approx(ref).epsilon(1e-12));
    CHECK(distortion(A, B, g.witness.pairs) == doctest::Approx(2 * g.upper));
  }
}

TEST_CASE("gh is symmetric and bounded by half the larger diameter") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> sz(1, 6);
  for (int trial = 0; trial < 50; ++trial) {
    std::size_t na = sz(rng), nb = sz(rng);
    FiniteMetricSpace A(na, oracle::random_planar_metric(na, rng));
    FiniteMetricSpace B(nb, oracle::random_planar_metric(nb, rng));
    auto ab = gh_distance(A, B, GhMode::Exact), ba = gh_distance(B, A, GhMode::Exact);
    CHECK(ab.upper == doctest::Approx(ba.upper).epsilon(1e-12));
    CHECK(ab.upper <= 0.5 * std::max(A.diameter(), B.diameter()) + 1e-12);
    auto h = gh_distance(A, B, GhMode::Heuristic);
    CHECK(h.lower <= ab.upper + 1e-12);
    CHECK(h.upper >= ab.upper - 1e-12);
    CHECK(is_correspondence(h.witness, na, nb));
  }
}

TEST_CASE("exact search is capped") {
  auto A = segment(1, 9);
  CHECK(code_of([&] { gh_distance(A, A, GhMode::Exact); }) == ErrorCode::SizeLimit);
  CHECK_NOTHROW(gh_distance(A, A, GhMode::Heuristic));
}

TEST_CASE("balls") {
  auto S = segment(4, 5);
  CHECK(ball_subspace(S, 0).size() == 1);
  CHECK(ball_subspace(S, 10).size() == 5);
  auto idx = ball_indices(S, 2);
  CHECK(idx == std::vector<std::size_t>{0, 1, 2});

  // monotone in the radius
  auto C = circle_arc(1, 2, 21);
  std::size_t prev = 0;
  for (double r = 0; r <= 2.5; r += 0.05) {
    auto now = ball_indices(C, r);
    CHECK(now.size() >= prev);
    auto wider = ball_indices(C, r + 0.05);
    for (auto i : now) CHECK(std::find(wider.begin(), wider.end(), i) != wider.end());
    prev = now.size();
  }
}

TEST_CASE("scaling multiplies every distance") {
  auto C = circle_arc(1, 2, 7).scaled(3);
  CHECK(C.diameter() == doctest::Approx(6));
  CHECK(gh_lower_bound(C, C) == 0);
}
