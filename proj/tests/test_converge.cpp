#include "doctest.h"

#include <cmath>

#include "lorcone/converge.hpp"
#include "lorcone/errors.hpp"
#include "lorcone/numeric.hpp"

using namespace lorcone;

namespace {

ConeOptions dist(std::size_t steps) {
  ConeOptions o;
  o.distSteps = steps;
  return o;
}

GeneralizedCone cos_power(double i) {
  auto f = WarpingFunction::sample(-kPi / 2, kPi / 2, 100, [i](double t) { return std::pow(std::max(0.0, std::cos(t)), 1 / i); });
  return GeneralizedCone(f, segment(1, 51), 1, dist(50));
}

GeneralizedCone flat(double c = 1, double length = 1, std::size_t n = 51) {
  return GeneralizedCone(presets::constant(c, -kPi / 2, kPi / 2, 100), segment(length, n), 1, dist(50));
}

ConeSequence constant_sequence() {
  return ConeSequence{{flat(), flat(), flat()}, flat(), 2, 0.0};
}

}  // namespace

TEST_CASE("constant sequence") {
  auto seq = constant_sequence();
  for (const auto& e : covered_gh(seq, 2)) {
    CHECK(e.lower == 0);
    CHECK(e.upper == 0);
  }
  auto m = uniform_modulus(seq, 1, 2, 2);
  CHECK(m.eps1 == 0);
  CHECK(m.eps2 == 0);
  CHECK(m.inclusionB);
  auto r = ell_converge_check(seq, default_schedule(2));
  CHECK(r.verdict == Verdict::Pass);
  for (const auto& mm : r.moduli) CHECK(std::max(mm.eps1, mm.eps2) == 0);
  for (const auto& e : measured_converge_check(seq, 2)) CHECK(e.w1 == 0);
}

TEST_CASE("scaled warps: upper bracket decays like 1/i") {
  std::vector<GeneralizedCone> cs;
  for (int i : {1, 2, 4, 8}) cs.push_back(GeneralizedCone(presets::sin(0, kPi, 100).scaled(1 + 1.0 / i), segment(1, 21), 1, dist(20)));
  ConeSequence seq{cs, GeneralizedCone(presets::sin(0, kPi, 100), segment(1, 21), 1, dist(20)), 2};
  auto gh = covered_gh(seq, 2);
  const double C = 1.0 * 1.0;  // max f times the fiber diameter
  int idx = 0;
  for (int i : {1, 2, 4, 8}) {
    CHECK(gh[std::size_t(idx)].upper <= C / i + 1e-12);
    CHECK(gh[std::size_t(idx)].lower <= gh[std::size_t(idx)].upper);
    ++idx;
  }
}

TEST_CASE("stretched fibers: upper bracket at most 1/(2i)") {
  std::vector<int> is{1, 2, 4, 8};
  std::vector<GeneralizedCone> cs;
  for (int i : is) cs.push_back(flat(1, 1 + 1.0 / i, 11));
  ConeSequence seq{cs, flat(1, 1, 11), 2, 0.0};
  auto gh = covered_gh(seq, 2);
  for (std::size_t k = 0; k < is.size(); ++k) {
    double i = is[k];
    CHECK(gh[k].upper <= 1 / (2 * i) + 1e-12);
    // endpoints alone are two-point spaces at gap 1 + 1/i and 1
    CHECK(gh[k].lower >= 1 / (2 * i) - 1e-12);
  }
}

TEST_CASE("smaller warp: the one-sided modulus vanishes") {
  auto f = presets::cos(-kPi / 2, kPi / 2, 100);
  GeneralizedCone big(f, segment(1, 51), 1, dist(50));
  GeneralizedCone small(f.scaled(0.8), segment(1, 51), 1, dist(50));
  ConeSequence seq{{small}, big, 2, 0.0};
  auto m = uniform_modulus(seq, 0, 2, 2, 0.0);
  CHECK(m.eps2 == 0);
  CHECK(m.eps1 > 0);
}

TEST_CASE("swapping the roles swaps the moduli") {
  auto a = cos_power(4), b = flat();
  ConeSequence ab{{a}, b, 2, 0.0}, ba{{b}, a, 2, 0.0};
  auto x = uniform_modulus(ab, 0, 2, 2), y = uniform_modulus(ba, 0, 2, 2);
  // each direction snaps to its own limit's grid, so allow both brackets
  auto bracket = [](const GeneralizedCone& c) {
    auto lvl = c.cover(2, 0.0).back();
    const auto& T = c.tables();
    double w = 0;
    for (std::size_t s = lvl.tlo; s <= lvl.thi; ++s)
      for (std::size_t t = s; t <= lvl.thi; ++t)
        for (std::size_t j = 0; j < c.dist_points(); ++j)
          if (T.hi(s, t, j) > kNegInf) w = std::max(w, T.hi(s, t, j) - std::max(0.0, T.lo(s, t, j)));
    return w;
  };
  const double width = bracket(a) + bracket(b);
  CHECK(std::abs(x.eps1 - y.eps2) <= width);
  CHECK(std::abs(x.eps2 - y.eps1) <= width);
}

TEST_CASE("cos powers: moduli shrink and the weak inclusion holds in range") {
  ConeSequence seq{{cos_power(1), cos_power(4), cos_power(16)}, flat(), 2, 0.0};
  double prev = kInf;
  for (std::size_t i = 0; i < 3; ++i) {
    auto m = uniform_modulus(seq, i, 2, 2);
    CHECK(m.eps1 < prev);
    prev = m.eps1;
    CHECK(m.inclusionB);
    if (m.remarkApplies) CHECK(m.violationsWeakA == 0);
  }
  CHECK(prev <= 0.2);
}

TEST_CASE("identical cones satisfy both inclusions at eps = 0") {
  auto seq = constant_sequence();
  auto m = uniform_modulus(seq, 0, 2, 2, 0.0);
  CHECK(m.eps1 == 0);
  CHECK(m.violationsA == 0);
  CHECK(m.violationsWeakA == 0);
}

TEST_CASE("limit separation is no less continuous than the sequence") {
  std::vector<GeneralizedCone> cs{cos_power(2), cos_power(8), cos_power(16)};
  auto lim = flat();
  auto lvl = lim.cover(2, 0.0).back();
  auto omega = [&](const GeneralizedCone& c) {
    double w = 0;
    for (std::size_t s = lvl.tlo; s <= lvl.thi; ++s)
      for (std::size_t t = s; t < lvl.thi; ++t)
        for (std::size_t j = 0; j < c.dist_points(); ++j) {
          double a = c.tables().lo(s, t, j), b = c.tables().lo(s, t + 1, j);
          if (a > kNegInf && b > kNegInf) w = std::max(w, std::abs(b - a));
        }
    return w;
  };
  ConeSequence seq{cs, lim, 2, 0.0};
  double best = kInf;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto m = uniform_modulus(seq, i, 2, 2);
    best = std::min(best, omega(cs[i]) + std::max(m.eps1, m.eps2));
  }
  CHECK(omega(lim) <= best + 1e-12);
}

TEST_CASE("maximizer lengths converge with the moduli") {
  std::vector<GeneralizedCone> cs{cos_power(2), cos_power(8), cos_power(16)};
  auto lim = flat();
  ConeSequence seq{cs, lim, 2, 0.0};
  auto lvl = lim.cover(2, 0.0).back();
  GridPoint p{lvl.tlo, 0}, q{lvl.thi, 20};
  double L = lim.maximizer(p, q).tauLength;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    auto m = uniform_modulus(seq, i, 2, 2);
    double Li = cs[i].maximizer(p, q).tauLength;
    CHECK(std::abs(Li - L) <= m.eps1 + m.eps2 + 1e-12);
  }
}

TEST_CASE("blown-up fibers fail") {
  std::vector<GeneralizedCone> cs;
  for (double c : {4.0, 16.0, 64.0, 256.0}) cs.push_back(flat(c, 1, 11));
  ConeSequence seq{cs, flat(1, 1, 11), 2, 0.0};
  auto r = ell_converge_check(seq, {{2, 2, -1}});
  CHECK(r.verdict == Verdict::Fail);
  CHECK(r.gh.back().lower > r.gh.front().lower);
}

TEST_CASE("empty level set") {
  ConeSequence seq{{flat()}, flat(), 1, 0.0};
  try {
    uniform_modulus(seq, 0, 1, 1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLevelSet);
  }
}

TEST_CASE("measured convergence") {
  ConeSequence seq{{cos_power(1), cos_power(2), cos_power(4)}, flat(), 2, 0.0};
  auto m = measured_converge_check(seq, 2);
  REQUIRE(m.size() == 3);
  CHECK(m[2].w1 < m[0].w1);
  for (const auto& e : m) CHECK(e.w1 <= e.diameter * e.tv + 0.5 * match_cover(seq.cones[e.i], seq.limit, 2, 0).distortion + 1e-12);
}

TEST_CASE("precompactness harness") {
  std::vector<GeneralizedCone> same(3, GeneralizedCone(presets::sin(0, kPi, 60), segment(1, 11), 1, dist(20)));
  auto r = precompact_harness(same, 1, 2, 4);
  CHECK(r.hasLimit);
  CHECK(r.convergence.verdict == Verdict::Pass);

  auto a = GeneralizedCone(presets::sin(0, kPi, 60), segment(1, 11), 1, dist(20));
  auto b = GeneralizedCone(presets::sin(0, kPi, 60).scaled(2), segment(1, 11), 1, dist(20));
  auto alt = precompact_harness({a, b, a, b, a}, 1, 2, 4);
  CHECK(alt.selected == std::vector<std::size_t>{0, 2, 4});

  auto longer = GeneralizedCone(presets::sin(0, kPi, 60), segment(1, 11), 1, dist(20));
  auto pre = precompact_harness({longer}, 4, 2, 10);
  CHECK_FALSE(pre.profiles[0].accepted);
  auto wide = precompact_harness({longer}, 1, 2, 2);
  CHECK_FALSE(wide.profiles[0].accepted);

  auto bump = GeneralizedCone(WarpingFunction::sample(0, kPi, 60, [](double t) { return std::sin(t) + 0.1; }), segment(1, 11), 1, dist(20));
  auto rej = precompact_harness({a, bump}, 1, 2, 4);
  CHECK_FALSE(rej.profiles[1].accepted);
  CHECK(rej.profiles[1].location > 0);
  CHECK(rej.profiles[1].location < kPi);
}

TEST_CASE("tangent cones") {
  auto c = GeneralizedCone(presets::linear(1, 0, 0.5, 2, 150), segment(1, 41), 1, dist(40));
  auto m = tangent_member(c, 50, 1, 4, 100);
  for (std::size_t i = 0; i < m.warp().size(); ++i)
    CHECK(m.warp()[i] == doctest::Approx(c.warp()(c.time(50) + m.warp().t(i)) / c.warp()[50]));

  auto r = tangent_cone(c, 50, {0.25, 0.125, 0.0625}, 2, 60);
  CHECK(r.productOK);
  for (const auto& e : r.entries)
    for (std::size_t k = 0; k < e.warpDeviation.size(); ++k) CHECK(e.warpDeviation[k] <= 2 * e.eps);

  auto flatStrip = GeneralizedCone(presets::constant(1, 0, 2, 100), segment(1, 21), 1, dist(20));
  auto fr = tangent_cone(flatStrip, 50, {1.0 / 64}, 2, 60);
  for (double d : fr.entries[0].warpDeviation) CHECK(d <= 1e-3);

  CHECK_THROWS_AS(tangent_member(c, 0, 0.5, 2, 50), Error);
}
