// Acceptance suite: one line per criterion, exit status 1 if any fails.

#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "lorcone/converge.hpp"
#include "lorcone/errors.hpp"
#include "lorcone/lorot.hpp"
#include "lorcone/model2d.hpp"
#include "lorcone/smoothcurv.hpp"
#include "lp_oracle.hpp"
#include "oracles.hpp"

using namespace lorcone;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ",") + fmt(x);
  return s;
}

ConeOptions dist(std::size_t steps) {
  ConeOptions o;
  o.distSteps = steps;
  return o;
}

GeneralizedCone strip_cone(TableKernel kernel = TableKernel::Parallel) {
  GeneralizedCone c(presets::constant(1, 0, 2, 200), segment(1, 101), 2, dist(100));
  c.build(kernel);
  return c;
}

GeneralizedCone linear_cone() { return GeneralizedCone(presets::linear(1, 0, 0.5, 2, 200), segment(1, 101), 1, dist(100)); }

GeneralizedCone cos_arc_cone() {
  return GeneralizedCone(presets::cos(-kPi / 2, kPi / 2, 120), circle_arc(1, 0.5, 26), 1, dist(50));
}

Outcome c1() {
  int threads = omp_get_max_threads();
  omp_set_num_threads(1);
  auto t0 = std::chrono::steady_clock::now();
  auto c = strip_cone(TableKernel::Serial);
  double secs = seconds_since(t0);
  omp_set_num_threads(threads);
  double worst = 0;
  std::size_t causal = 0, orderBad = 0;
  for (std::size_t s = 0; s <= 200; ++s)
    for (std::size_t t = s; t <= 200; ++t)
      for (std::size_t j = 0; j <= 100; ++j) {
        double d = c.fiber()(0, j), truth = oracle::strip_tau(c.time(t) - c.time(s), d);
        double lo = c.tau2d_lo(s, t, d), hi = c.tau2d_hi(s, t, d);
        if (!(lo <= truth + 1e-12) || !(truth <= hi + 1e-12)) ++orderBad;
        if (truth == -oracle::inf) continue;
        ++causal;
        worst = std::max(worst, std::abs(lo - truth));
      }
  return {worst <= 0.05 && orderBad == 0 && secs <= 30,
          "max |lo - truth| = " + fmt(worst) + " over " + std::to_string(causal) + " causal pairs (tol 0.05), " +
              std::to_string(orderBad) + " bracket violations, single-thread build " + fmt(secs) + " s (limit 30)"};
}

Outcome c2() {
  auto c = linear_cone();
  double worst = 0;
  std::size_t n = 0;
  for (std::size_t s = 0; s <= 200; ++s)
    for (std::size_t t = s; t <= 200; ++t)
      for (std::size_t j = 0; j <= 100; ++j) {
        double d = c.fiber()(0, j), lo = c.tau2d_lo(s, t, d);
        if (lo == kNegInf) continue;
        ++n;
        worst = std::max(worst, std::abs(lo * lo - oracle::cone_tau2(c.time(s), c.time(t), d)));
      }
  return {worst <= 0.1, "max |lo^2 - embedding tau^2| = " + fmt(worst) + " over " + std::to_string(n) + " causal pairs (tol 0.1)"};
}

double worst_rti(const GeneralizedCone& c, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> ti(0, c.time_points() - 1), xi(0, c.fiber().size() - 1);
  double worst = oracle::inf;
  std::size_t found = 0;
  while (found < samples) {
    std::array<std::size_t, 3> t{ti(rng), ti(rng), ti(rng)};
    std::sort(t.begin(), t.end());
    GridPoint p{t[0], xi(rng)}, q{t[1], xi(rng)}, r{t[2], xi(rng)};
    double pq = c.ell(p, q), qr = c.ell(q, r);
    if (pq == kNegInf || qr == kNegInf) continue;
    ++found;
    worst = std::min(worst, c.ell(p, r) - pq - qr);
  }
  return worst;
}

Outcome c3() {
  double a = worst_rti(strip_cone(), 10000, 1), b = worst_rti(linear_cone(), 10000, 2), c = worst_rti(cos_arc_cone(), 10000, 3);
  return {std::min({a, b, c}) >= -1e-9,
          "worst slack strip " + fmt(a) + ", cone " + fmt(b) + ", cos arc " + fmt(c) + " over 10^4 triples each (tol -1e-9)"};
}

Outcome c4() {
  std::size_t bad = 0, nestBad = 0, entries = 0;
  for (int which = 0; which < 2; ++which) {
    GeneralizedCone f = which == 0 ? cos_arc_cone() : linear_cone();
    GeneralizedCone g(f.warp().scaled(0.8), f.fiber(), f.N(), f.options());
    const auto &A = f.tables().lo_data(), &B = g.tables().lo_data();
    for (std::size_t k = 0; k < A.size(); ++k) {
      ++entries;
      if (!(B[k] >= A[k])) ++bad;
      if (A[k] > kNegInf && B[k] == kNegInf) ++nestBad;
    }
  }
  return {bad == 0 && nestBad == 0, std::to_string(bad) + " entries with l_g < l_f, " + std::to_string(nestBad) +
                                        " causal pairs lost, out of " + std::to_string(entries) + " (cos arc and f=t)"};
}

Outcome c5() {
  double a = scaling_isomorphism_check(strip_cone(), 2), b = scaling_isomorphism_check(linear_cone(), 2);
  return {a <= 1e-12 && b <= 1e-12, "lambda=2 deviation strip " + fmt(a) + ", cone " + fmt(b) + " (tol 1e-12)"};
}

DiscreteMeasure random_measure(std::size_t n, std::size_t tlo, std::size_t thi, std::mt19937_64& rng, bool uniform) {
  std::uniform_int_distribution<std::size_t> t(tlo, thi), x(0, 50);
  std::uniform_real_distribution<double> m(0.1, 1);
  std::vector<Atom> atoms;
  std::vector<GridPoint> used;
  while (atoms.size() < n) {
    GridPoint p{t(rng), x(rng)};
    if (std::find(used.begin(), used.end(), p) != used.end()) continue;
    used.push_back(p);
    atoms.push_back({p, uniform ? 1.0 : m(rng)});
  }
  return make_measure(atoms);
}

Outcome c6() {
  GeneralizedCone c(presets::constant(1, 0, 2, 100), segment(1, 51), 2, dist(50));
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> pp(0.2, 1);
  auto weights = [&](const DiscreteMeasure& a, const DiscreteMeasure& b, double p, std::vector<char>& allowed) {
    std::vector<double> w;
    for (const auto& x : a)
      for (const auto& y : b) {
        double l = c.ell(x.p, y.p);
        allowed.push_back(l >= 0);
        w.push_back(l >= 0 ? std::pow(l, p) : -oracle::inf);
      }
    return w;
  };
  double worstVertex = 0, worstPerm = 0;
  int n4 = 0, n5 = 0;
  while (n4 < 20) {
    auto a = random_measure(4, 0, 40, rng, false), b = random_measure(4, 40, 100, rng, false);
    double p = pp(rng);
    std::vector<char> allowed;
    auto w = weights(a, b, p, allowed);
    std::vector<double> sa, sb;
    for (auto& x : a) sa.push_back(x.mass);
    for (auto& x : b) sb.push_back(x.mass);
    double ref = oracle::transport_vertex_max(sa, sb, w, allowed);
    if (ref == -oracle::inf) continue;
    ++n4;
    worstVertex = std::max(worstVertex, std::abs(solve_lp(c, a, b, p).pValue - ref));
  }
  while (n5 < 10) {
    auto a = random_measure(5, 0, 40, rng, true), b = random_measure(5, 40, 100, rng, true);
    std::vector<char> allowed;
    auto w = weights(a, b, 1, allowed);
    double ref = oracle::best_permutation(w, 5);
    if (ref == -oracle::inf) continue;
    ++n5;
    worstPerm = std::max(worstPerm, std::abs(solve_lp(c, a, b, 1).pValue - ref));
  }
  return {worstVertex <= 1e-8 && worstPerm <= 1e-8,
          "max gap to vertex enumeration " + fmt(worstVertex) + " (20 4x4), to best permutation " + fmt(worstPerm) +
              " (10 uniform 5-atom), tol 1e-8"};
}

Outcome c7() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> K(-4, 4), N(1, 8), t(0, 1), u(0.01, 1);
  bool flatExact = true;
  for (int k = 0; k < 100; ++k) {
    double tt = t(rng);
    flatExact = flatExact && distortion_coefficient(0, N(rng), tt, 5 * u(rng)) == tt;
  }
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    double k0 = K(rng), n0 = N(rng), t0 = t(rng), kappa = k0 / n0;
    double theta = kappa > 0 ? 0.95 * kPi / std::sqrt(kappa) * u(rng) : 3 * u(rng);
    double got = distortion_coefficient(k0, n0, t0, theta), ref = oracle::sigma_ode(kappa, t0, theta);
    worst = std::max(worst, std::abs(got - ref) / std::max(1.0, std::abs(ref)));
  }
  bool infinite = true;
  for (double k0 : {0.1, 1.0, 5.0})
    for (double th : {0.01, 1.0, 10.0}) infinite = infinite && distortion_coefficient(k0, 1, 0.5, th, true) == oracle::inf;
  return {flatExact && worst <= 1e-6 && infinite,
          std::string("sigma_{0,N} = t exactly: ") + (flatExact ? "yes" : "no") + ", max deviation from RK4 " + fmt(worst) +
              " on 100 samples (tol 1e-6), tau_{K,1} infinite for K > 0: " + (infinite ? "yes" : "no")};
}

DiscreteMeasure bump(std::size_t t, std::size_t x, std::size_t spacing) {
  std::vector<Atom> atoms;
  const double r = double(spacing);
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      double q = (r * a * r * a + r * b * r * b) / (4 * r * r);
      atoms.push_back({{std::size_t(long(t) + a * long(spacing)), std::size_t(long(x) + b * long(spacing))}, std::exp(-1 / (1 - q))});
    }
  return make_measure(atoms);
}

const std::vector<double> kEighths{0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875};

Outcome c8() {
  auto c = strip_cone();
  auto t0 = std::chrono::steady_clock::now();
  auto r = tcd_verify(c, bump(44, 34, 4), bump(144, 64, 4), 0.5, 0, 2, TcdFlavor::Entropic, kEighths, 0.05);
  double secs = seconds_since(t0);
  double minMargin = oracle::inf;
  for (const auto& s : r.slots)
    if (!s.excluded) minMargin = std::min(minMargin, std::min(s.marginLo, s.marginHi));
  return {minMargin >= -0.05 && secs <= 60,
          "min margin " + fmt(minMargin) + " (tol -0.05), bracket width " + fmt(r.bestMargin - r.worstMargin) +
              ", theta in [" + fmt(r.thetaLo) + ", " + fmt(r.thetaHi) + "], " + fmt(secs) + " s (limit 60)"};
}

Outcome c9() {
  auto flat = tmcp_verify(strip_cone(), bump(60, 50, 4), {180, 50}, 0, 2, kEighths, 0.05);
  GeneralizedCone s(presets::sin(0, kPi, 150), circle_arc(1, 1, 41), 2, dist(60));
  auto curved = tmcp_verify(s, bump(40, 20, 2), {110, 20}, 2, 3, kEighths, 0.05);
  auto ok = [](const CurvatureReport& r) { return r.verdict != Verdict::Fail; };
  return {ok(flat) && ok(curved), "flat strip TMCP(0,2): " + verdict_name(flat.verdict) + " worst margin " +
                                      fmt(flat.worstMargin) + "; sin cone TMCP(2,3): " + verdict_name(curved.verdict) +
                                      " worst margin " + fmt(curved.worstMargin) + ", bracket " +
                                      fmt(curved.bestMargin - curved.worstMargin)};
}

Outcome c10() {
  auto c = strip_cone();
  auto a = tcbb_verify(c, 0, 500, 0.02, 7), b = tcbb_verify(c, 0, 500, 0.02, 7);
  bool same = a.worstMargin == b.worstMargin && a.attempts == b.attempts && a.valid == b.valid;
  auto arc = tcbb_verify(cos_arc_cone(), -1, 500, 0.02, 11);
  FourPointConfig good{0.5, 1.0, 1.6, 0.49, 1.08, 0.9, false, {}}, bad = good;
  bad.zz = 0;
  auto inj = tcbb_check({good, bad}, 0, 0.02);
  return {a.pass && same && arc.pass && !inj.pass,
          "strip K=0: " + std::string(a.pass ? "pass" : "fail") + " worst " + fmt(a.worstMargin) + " on " +
              std::to_string(a.valid) + " configs, rerun identical: " + (same ? "yes" : "no") + "; cos arc K=-1: " +
              (arc.pass ? "pass" : "fail") + " worst " + fmt(arc.worstMargin) + "; injected: " +
              (inj.pass ? "missed" : "flagged") + " (margin " + fmt(inj.worstMargin) + ")"};
}

Outcome c11() {
  std::vector<GeneralizedCone> cones;
  for (double i : {1.0, 2.0, 4.0, 8.0, 16.0}) {
    auto f = WarpingFunction::sample(-kPi / 2, kPi / 2, 100, [i](double t) { return std::pow(std::max(0.0, std::cos(t)), 1 / i); });
    cones.push_back(GeneralizedCone(f, segment(1, 51), 1, dist(50)));
  }
  ConeSequence seq{cones, GeneralizedCone(presets::constant(1, -kPi / 2, kPi / 2, 100), segment(1, 51), 1, dist(50)), 2, 0.0};
  std::vector<double> e1, e2, va, vb, vw;
  bool dec1 = true, dec2 = true, incl = true;
  for (std::size_t i = 0; i < seq.cones.size(); ++i) {
    auto m = uniform_modulus(seq, i, 2, 2);
    if (i > 0) dec1 = dec1 && m.eps1 < e1.back(), dec2 = dec2 && m.eps2 < e2.back();
    e1.push_back(m.eps1);
    e2.push_back(m.eps2);
    va.push_back(double(m.violationsA));
    vb.push_back(double(m.violationsB));
    vw.push_back(double(m.violationsWeakA));
    if (m.remarkApplies) incl = incl && m.inclusionOK();
  }
  bool small = e1.back() <= 0.2 && e2.back() <= 0.2;
  return {dec1 && dec2 && small && incl,
          "eps1 [" + join(e1) + "] strictly decreasing: " + (dec1 ? "yes" : "no") + "; eps2 [" + join(e2) +
              "] strictly decreasing: " + (dec2 ? "yes" : "no") + "; <= 0.2 at i=16: " + (small ? "yes" : "no") +
              "; inclusion violations A [" + join(va) + "], B [" + join(vb) + "], A at level 1/l-2eps [" + join(vw) + "]"};
}

Outcome c12() {
  auto cone = [](WarpingFunction f) { return GeneralizedCone(std::move(f), segment(1, 11), 1, dist(20)); };
  std::vector<GeneralizedCone> cs{
      cone(presets::sin(0, kPi, 60)),
      cone(WarpingFunction::sample(1, 1 + kPi, 60, [](double t) { return 2 * std::sin(t - 1); })),
      cone(presets::cos(-kPi / 2, kPi / 2, 60).scaled(0.5)),
      cone(WarpingFunction::sample(0.3, kPi - 0.3, 60, [](double t) { return 1.5 * std::sin(t); })),
      cone(WarpingFunction::sample(0.1, 2.5, 60, [](double t) { return 3 * std::sin(t); })),
      cone(WarpingFunction::sample(0, kPi, 60, [](double t) { return std::sin(t) + 0.1; })),
  };
  auto r = precompact_harness(cs, 1, 2, 4);
  bool good = true;
  for (std::size_t i = 0; i < 5; ++i) good = good && r.profiles[i].accepted;
  const auto& last = r.profiles[5];
  bool located = !last.accepted && last.location > 0 && last.location < kPi;
  std::size_t acc = 0;
  for (std::size_t i = 0; i < 5; ++i) acc += r.profiles[i].accepted;
  return {good && located, std::to_string(acc) + "/5 FK-concave profiles accepted; bump profile " +
                               (last.accepted ? "accepted" : "rejected (" + last.reason + ") at t = " + fmt(last.location))};
}

Outcome c13() {
  GeneralizedCone c(presets::linear(1, 0, 0.5, 2, 150), segment(1, 41), 1, dist(40));
  auto r = tangent_cone(c, 50, {0.25, 0.125, 0.0625, 0.03125, 0.015625}, 4, 100, 2.0);
  double worstRatio = 0;
  for (const auto& e : r.entries)
    for (double d : e.warpDeviation) worstRatio = std::max(worstRatio, d / e.eps);
  return {worstRatio <= 2 && r.verdict == Verdict::Pass,
          "max warp deviation / eps = " + fmt(worstRatio) + " (limit 2), verdict " + verdict_name(r.verdict) +
              ", width " + fmt(r.convergence.width)};
}

Outcome c14() {
  auto sinf = presets::sin(0, kPi, 200);
  auto bumpf = WarpingFunction::sample(0, kPi, 200, [](double t) { return std::sin(t) + 0.1; });
  bool r1 = ricci_reduction(sinf, 1, 2, 1).verdict;
  bool r2 = ricci_reduction(presets::constant(1, 0, 1, 50), 0, 3, 0).verdict;
  bool r3 = !ricci_reduction(bumpf, 1, 2, 1).verdict;
  bool s1 = sectional_reduction(presets::cos(-kPi / 2, kPi / 2, 200), 1, -1).verdict;
  bool s2 = sectional_reduction(presets::linear(0.7, 1, 0, 2, 100), 0, 0).verdict;
  bool s3 = !sectional_reduction(bumpf, 1, 0).verdict;
  bool w = sectional_reduction(sinf, 1, -1).verdict && !sectional_reduction(sinf, 0, -1).verdict;
  auto yn = [](bool b) { return b ? "ok" : "wrong"; };
  return {r1 && r2 && r3 && s1 && s2 && s3 && w,
          std::string("ricci sin/const/bump ") + yn(r1) + "/" + yn(r2) + "/" + yn(r3) + ", sectional cos/linear/bump " +
              yn(s1) + "/" + yn(s2) + "/" + yn(s3) + ", witness pass at K=1 and fail at K'=0: " + yn(w)};
}

Outcome c15() {
  auto two = [](double g) { return FiniteMetricSpace(2, {0, g, g, 0}); };
  auto A = segment(1, 4);
  auto e1 = gh_distance(A, A, GhMode::Exact);
  auto e2 = gh_distance(two(1), two(3), GhMode::Exact);
  auto e3 = gh_distance(FiniteMetricSpace(1, {0}), two(2), GhMode::Exact);
  bool ex = e1.upper == 0 && std::abs(e2.upper - 1) < 1e-12 && std::abs(e3.upper - 1) < 1e-12 &&
            std::abs(e2.upper - oracle::gh_brute(two(1).table(), 2, two(3).table(), 2)) < 1e-12;
  std::mt19937_64 rng(15);
  std::uniform_int_distribution<std::size_t> sz(1, 6);
  double worst = 0;
  for (int k = 0; k < 50; ++k) {
    std::size_t na = sz(rng), nb = sz(rng);
    FiniteMetricSpace a(na, oracle::random_planar_metric(na, rng)), b(nb, oracle::random_planar_metric(nb, rng));
    worst = std::max(worst, std::abs(gh_distance(a, b, GhMode::Exact).upper - gh_distance(b, a, GhMode::Exact).upper));
  }
  return {ex && worst <= 1e-12,
          std::string("worked examples ") + (ex ? "reproduced" : "wrong") + ", max |GH(A,B) - GH(B,A)| = " + fmt(worst) + " on 50 pairs"};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13, c14, c15};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu: %s  %s  [%.1f s]\n", i + 1, o.pass ? "PASS" : "FAIL", o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
