#include "lorcone/converge.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lorcone/errors.hpp"
#include "lorcone/numeric.hpp"

namespace lorcone {

namespace {

std::size_t nearest_index(const WarpingFunction& f, double t, std::size_t lo, std::size_t hi) {
  auto first = f.ts().begin() + long(lo), last = f.ts().begin() + long(hi) + 1;
  auto it = std::lower_bound(first, last, t);
  std::size_t j = std::size_t(it - f.ts().begin());
  if (j > hi) return hi;
  if (j > lo && std::abs(f.t(j - 1) - t) <= std::abs(f.t(j) - t)) return j - 1;
  return j;
}

std::vector<std::size_t> affine_match(const WarpingFunction& from, std::size_t flo, std::size_t fhi,
                                      const WarpingFunction& to, std::size_t tlo, std::size_t thi) {
  std::vector<std::size_t> out;
  double fa = from.t(flo), fs = from.t(fhi) - fa;
  double ta = to.t(tlo), ts = to.t(thi) - ta;
  for (std::size_t s = flo; s <= fhi; ++s) {
    double u = fs > 0 ? (from.t(s) - fa) / fs : 0.0;
    out.push_back(nearest_index(to, ta + u * ts, tlo, thi));
  }
  return out;
}

FiniteMetricSpace ball_of(const GeneralizedCone& c, const CoverLevel& lv) {
  const auto& pts = lv.fiberPoints;
  std::size_t base = std::size_t(std::find(pts.begin(), pts.end(), c.fiber().base()) - pts.begin());
  return c.fiber().subspace(pts, base);
}

bool same_table(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  if (A.size() != B.size()) return false;
  for (std::size_t k = 0; k < A.table().size(); ++k)
    if (std::abs(A.table()[k] - B.table()[k]) > 1e-12) return false;
  return true;
}

}  // namespace

CoverMatch match_cover(const GeneralizedCone& ci, const GeneralizedCone& lim, std::size_t k, double center) {
  if (k < 1) throw Error(ErrorCode::InvalidInput, "cover levels start at 1");
  CoverMatch M;
  M.ci = ci.cover(k, center).back();
  M.cl = lim.cover(k, center).back();
  const auto &fi = ci.warp(), &fl = lim.warp();
  M.timeTo = affine_match(fi, M.ci.tlo, M.ci.thi, fl, M.cl.tlo, M.cl.thi);
  M.timeBack = affine_match(fl, M.cl.tlo, M.cl.thi, fi, M.ci.tlo, M.ci.thi);
  M.Fi = std::max(fi.max_on(M.ci.tlo, M.ci.thi), 1e-12);
  M.Fl = std::max(fl.max_on(M.cl.tlo, M.cl.thi), 1e-12);

  std::vector<std::pair<double, double>> tp;  // matched base times
  for (std::size_t s = M.ci.tlo; s <= M.ci.thi; ++s) tp.push_back({fi.t(s), fl.t(M.timeTo[s - M.ci.tlo])});
  for (std::size_t u = M.cl.tlo; u <= M.cl.thi; ++u) tp.push_back({fi.t(M.timeBack[u - M.cl.tlo]), fl.t(u)});
  for (auto [a, b] : tp) M.timeMismatch = std::max(M.timeMismatch, std::abs(a - b));

  FiniteMetricSpace Bi = ball_of(ci, M.ci), Bl = ball_of(lim, M.cl);
  FiniteMetricSpace Si = Bi.scaled(M.Fi), Sl = Bl.scaled(M.Fl);
  Correspondence W;
  if (same_table(Bi, Bl)) {
    for (std::size_t a = 0; a < Bi.size(); ++a) W.pairs.push_back({a, a});
  } else {
    GhMode mode = std::max(Si.size(), Sl.size()) <= kExactGhCap ? GhMode::Exact : GhMode::Heuristic;
    W = gh_distance(Si, Sl, mode).witness;
  }
  M.fiberTo.assign(Bi.size(), SIZE_MAX);
  M.fiberBack.assign(Bl.size(), SIZE_MAX);
  for (auto [a, b] : W.pairs) {
    if (M.fiberTo[a] == SIZE_MAX) M.fiberTo[a] = b;
    if (M.fiberBack[b] == SIZE_MAX) M.fiberBack[b] = a;
  }

  // The surrogate metric is a sum of a base and a fiber term and the relation
  // is a product, so the extremes of the two signed gaps add up.
  double maxA = 0, minA = 0, maxB = 0, minB = 0;
  for (std::size_t p = 0; p < tp.size(); ++p)
    for (std::size_t q = p + 1; q < tp.size(); ++q) {
      double g = std::abs(tp[p].first - tp[q].first) - std::abs(tp[p].second - tp[q].second);
      maxA = std::max(maxA, g), minA = std::min(minA, g);
    }
  for (std::size_t p = 0; p < W.pairs.size(); ++p)
    for (std::size_t q = p + 1; q < W.pairs.size(); ++q) {
      double g = Si(W.pairs[p].first, W.pairs[q].first) - Sl(W.pairs[p].second, W.pairs[q].second);
      maxB = std::max(maxB, g), minB = std::min(minB, g);
    }
  M.distortion = std::max(maxA + maxB, -(minA + minB));
  double di = fi.t(M.ci.thi) - fi.t(M.ci.tlo) + Si.diameter();
  double dl = fl.t(M.cl.thi) - fl.t(M.cl.tlo) + Sl.diameter();
  M.lower = 0.5 * std::abs(di - dl);
  return M;
}

std::vector<CoveredGhEntry> covered_gh(const ConeSequence& seq, std::size_t k) {
  std::vector<CoveredGhEntry> out(seq.cones.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < long(seq.cones.size()); ++i) {
    CoverMatch M = match_cover(seq.cones[std::size_t(i)], seq.limit, k, seq.center);
    out[std::size_t(i)] = {std::size_t(i), k, M.lower, 0.5 * M.distortion};
  }
  return out;
}

namespace {

struct Offset {
  std::size_t idx;
  double cost;
};

// Base indices of a cover level within `delta` of index u.
std::vector<std::vector<Offset>> time_neighbours(const WarpingFunction& f, const CoverLevel& lv, double delta) {
  std::vector<std::vector<Offset>> nb(lv.thi - lv.tlo + 1);
  for (std::size_t u = lv.tlo; u <= lv.thi; ++u)
    for (std::size_t w = lv.tlo; w <= lv.thi; ++w) {
      double c = std::abs(f.t(w) - f.t(u));
      if (c <= delta + 1e-12) nb[u - lv.tlo].push_back({w, c});
    }
  return nb;
}

// Distinct (own distance, image distance) pairs over the fiber ball.
std::vector<std::pair<double, double>> distance_pairs(const FiniteMetricSpace& own, const CoverLevel& lv,
                                                      const FiniteMetricSpace& other,
                                                      const std::vector<std::size_t>& to) {
  std::map<std::pair<long long, long long>, std::pair<double, double>> seen;
  const auto& pts = lv.fiberPoints;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a; b < pts.size(); ++b) {
      double r = own(pts[a], pts[b]), q = other(to[a], to[b]);
      seen.emplace(std::make_pair(std::llround(r * 1e9), std::llround(q * 1e9)), std::make_pair(r, q));
    }
  std::vector<std::pair<double, double>> out;
  for (auto& [key, v] : seen) out.push_back(v);
  return out;
}

// Widest gap between the upper and lower tables on a cover, reading a
// missing lower value as 0.
double bracket_width(const GeneralizedCone& c, const CoverLevel& lv) {
  const TauTables& T = c.tables();
  double w = 0;
  for (std::size_t s = lv.tlo; s <= lv.thi; ++s)
    for (std::size_t t = s; t <= lv.thi; ++t)
      for (std::size_t j = 0; j < T.dist_points(); ++j) {
        double hi = T.hi(s, t, j), lo = T.lo(s, t, j);
        if (hi == kNegInf) continue;
        w = std::max(w, hi - (lo == kNegInf ? 0.0 : lo));
      }
  return w;
}

// Distinct fiber distances realized inside a cover ball, sorted.
std::vector<double> ball_distances(const FiniteMetricSpace& X, const CoverLevel& lv) {
  std::vector<double> d;
  for (std::size_t a = 0; a < lv.fiberPoints.size(); ++a)
    for (std::size_t b = a; b < lv.fiberPoints.size(); ++b) d.push_back(X(lv.fiberPoints[a], lv.fiberPoints[b]));
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end(), [](double x, double y) { return y - x <= 1e-12; }), d.end());
  return d;
}

// Largest realized distance <= r + slack and smallest >= r - slack. The
// image distance r itself is realized, so both exist.
double reach_up(const std::vector<double>& d, double r, double slack) {
  auto it = std::upper_bound(d.begin(), d.end(), r + slack + 1e-12);
  return it == d.begin() ? r : std::max(r, *(it - 1));
}
double reach_down(const std::vector<double>& d, double r, double slack) {
  auto it = std::lower_bound(d.begin(), d.end(), r - slack - 1e-12);
  return it == d.end() ? r : std::min(r, *it);
}

double clip_tau(double l) { return l == kNegInf ? 0.0 : std::max(0.0, l); }

}  // namespace

ConvergenceModulus uniform_modulus(const ConeSequence& seq, std::size_t i, std::size_t k, std::size_t l,
                                   double delta) {
  if (i >= seq.cones.size()) throw Error(ErrorCode::InvalidInput, "sequence index out of range");
  if (l < 1) throw Error(ErrorCode::InvalidInput, "level l must be >= 1");
  const GeneralizedCone& C = seq.cones[i];
  const GeneralizedCone& L = seq.limit;
  CoverMatch M = match_cover(C, L, k, seq.center);
  ConvergenceModulus out;
  out.i = i, out.k = k, out.l = l;
  out.delta = delta < 0 ? std::max(0.5 * M.distortion, M.timeMismatch) : delta;
  const double dlt = out.delta, level = 1.0 / double(l);

  // Fiber images in absolute fiber indices of the other space.
  std::vector<std::size_t> to(M.ci.fiberPoints.size()), back(M.cl.fiberPoints.size());
  for (std::size_t a = 0; a < to.size(); ++a) to[a] = M.cl.fiberPoints[M.fiberTo[a]];
  for (std::size_t b = 0; b < back.size(); ++b) back[b] = M.ci.fiberPoints[M.fiberBack[b]];
  auto dpI = distance_pairs(C.fiber(), M.ci, L.fiber(), to);
  auto dpL = distance_pairs(L.fiber(), M.cl, C.fiber(), back);
  const auto dI = ball_distances(C.fiber(), M.ci), dL = ball_distances(L.fiber(), M.cl);
  auto nbL = time_neighbours(L.warp(), M.cl, dlt);
  auto nbI = time_neighbours(C.warp(), M.ci, dlt);
  C.build();
  L.build();

  // Property (1): l_i against every limit pair within delta of the image.
  // The separation is nonincreasing in the fiber distance, so the smallest
  // value over the allowed distance range sits at the largest realized
  // distance in it. Limit pairs outside the causal relation enter as tau = 0.
  auto minLimit = [&](std::size_t s, std::size_t t, double rl) {
    double best = kInf;
    for (const auto& a : nbL[M.timeTo[s - M.ci.tlo] - M.cl.tlo])
      for (const auto& b : nbL[M.timeTo[t - M.ci.tlo] - M.cl.tlo]) {
        double rem = dlt - a.cost - b.cost;
        if (rem < -1e-12) continue;
        best = std::min(best, clip_tau(L.tau2d_lo(a.idx, b.idx, reach_up(dL, rl, std::max(0.0, rem) / M.Fl))));
      }
    return best;
  };
  auto minOwn = [&](std::size_t u, std::size_t v, double ri) {
    double best = kInf;
    for (const auto& a : nbI[M.timeBack[u - M.cl.tlo] - M.ci.tlo])
      for (const auto& b : nbI[M.timeBack[v - M.cl.tlo] - M.ci.tlo]) {
        double rem = dlt - a.cost - b.cost;
        if (rem < -1e-12) continue;
        best = std::min(best, clip_tau(C.tau2d_lo(a.idx, b.idx, reach_up(dI, ri, std::max(0.0, rem) / M.Fi))));
      }
    return best;
  };
  auto maxLimit = [&](std::size_t s, std::size_t t, double rl) {
    double best = kNegInf;
    for (const auto& a : nbL[M.timeTo[s - M.ci.tlo] - M.cl.tlo])
      for (const auto& b : nbL[M.timeTo[t - M.ci.tlo] - M.cl.tlo]) {
        double rem = dlt - a.cost - b.cost;
        if (rem < -1e-12) continue;
        best = std::max(best, L.tau2d_lo(a.idx, b.idx, reach_down(dL, rl, std::max(0.0, rem) / M.Fl)));
      }
    return best;
  };

  double eps1 = 0, eps2 = 0;
  std::size_t levelSize = 0, violB = 0;
  const long ni = long(M.ci.thi - M.ci.tlo + 1), nl = long(M.cl.thi - M.cl.tlo + 1);
#pragma omp parallel for schedule(dynamic, 1) reduction(max : eps1)
  for (long ss = 0; ss < ni; ++ss) {
    std::size_t s = M.ci.tlo + std::size_t(ss);
    for (std::size_t t = s; t <= M.ci.thi; ++t)
      for (auto [ri, rl] : dpI) {
        double li = C.tau2d_lo(s, t, ri);
        if (li == kNegInf) continue;
        eps1 = std::max(eps1, li - minLimit(s, t, rl));
      }
  }
#pragma omp parallel for schedule(dynamic, 1) reduction(max : eps2) reduction(+ : levelSize, violB)
  for (long uu = 0; uu < nl; ++uu) {
    std::size_t u = M.cl.tlo + std::size_t(uu);
    for (std::size_t v = u; v <= M.cl.thi; ++v)
      for (auto [rl, ri] : dpL) {
        double ll = L.tau2d_lo(u, v, rl);
        if (!(ll >= level)) continue;
        ++levelSize;
        double w = minOwn(u, v, ri);
        eps2 = std::max(eps2, ll - w);
        if (w < 0.5 * level) ++violB;
      }
  }
  if (levelSize == 0)
    throw Error(ErrorCode::EmptyLevelSet, "no limit pair with separation >= 1/" + std::to_string(l) +
                                              " in cover level " + std::to_string(k));
  out.eps1 = std::max(0.0, eps1);
  out.eps2 = std::max(0.0, eps2);
  out.levelSetSize = levelSize;
  out.violationsB = violB;

  const double eps = std::max(out.eps1, out.eps2);
  std::size_t violA = 0, violWeak = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : violA, violWeak)
  for (long ss = 0; ss < ni; ++ss) {
    std::size_t s = M.ci.tlo + std::size_t(ss);
    for (std::size_t t = s; t <= M.ci.thi; ++t)
      for (auto [ri, rl] : dpI) {
        double li = C.tau2d_lo(s, t, ri);
        if (!(li >= level - eps)) continue;
        double m = maxLimit(s, t, rl);
        if (!(m >= level)) ++violA;
        if (!(m >= level - 2 * eps - 1e-12)) ++violWeak;
      }
  }
  out.violationsA = violA;
  out.violationsWeakA = violWeak;
  out.remarkApplies = eps < 0.5 * level;
  out.inclusionA = violA == 0;
  out.inclusionB = violB == 0;
  return out;
}

std::vector<ScheduleEntry> default_schedule(std::size_t depth) {
  std::vector<ScheduleEntry> s;
  for (std::size_t k = 1; k <= depth; ++k)
    for (std::size_t l : {1, 2, 4, 8}) s.push_back({k, l, -1});
  return s;
}

EllConvergenceReport ell_converge_check(const ConeSequence& seq, const std::vector<ScheduleEntry>& schedule) {
  EllConvergenceReport r;
  const std::size_t n = seq.cones.size();
  const auto& fl = seq.limit.warp();
  if (n == 0) {
    r.notes.push_back("empty sequence");
    return r;
  }
  std::vector<std::size_t> ks;
  for (const auto& e : schedule) ks.push_back(e.k);
  for (std::size_t k = 1; k <= seq.depth; ++k) ks.push_back(k);
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());

  for (std::size_t k : ks) {
    auto g = covered_gh(seq, k);
    r.gh.insert(r.gh.end(), g.begin(), g.end());
  }
  const std::size_t depth = ks.back();
  r.width = bracket_width(seq.limit, seq.limit.cover(depth, seq.center).back());
  r.imprison.assign(n, std::vector<double>(depth, 0.0));
  r.imprisonBound.assign(depth, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto cov = seq.cones[i].cover(depth, seq.center);
    for (std::size_t k = 0; k < depth; ++k) {
      r.imprison[i][k] = seq.cones[i].nonimprisonment_bound(cov[k]);
      r.imprisonBound[k] = std::max(r.imprisonBound[k], r.imprison[i][k]);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : schedule) {
      try {
        r.moduli.push_back(uniform_modulus(seq, i, e.k, e.l, e.delta));
      } catch (const Error& err) {
        if (err.code() != ErrorCode::EmptyLevelSet) throw;
        r.notes.push_back("i=" + std::to_string(i) + ": " + err.what());
      }
    }

  // Local uniform convergence: the warp gap is taken on the deepest cover.
  const CoverLevel deep = seq.limit.cover(depth, seq.center).back();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& c = seq.cones[i];
    r.baseGap.push_back(std::abs(c.warp().a() - fl.a()) + std::abs(c.warp().b() - fl.b()));
    const auto &A = c.fiber(), &B = seq.limit.fiber();
    GhMode mode = std::max(A.size(), B.size()) <= kExactGhCap ? GhMode::Exact : GhMode::Heuristic;
    r.fiberGhUpper.push_back(same_table(A, B) ? 0.0 : gh_distance(A, B, mode).upper);
    double sup = 0;
    for (std::size_t j = deep.tlo; j <= deep.thi; ++j)
      if (fl.t(j) >= c.warp().a() && fl.t(j) <= c.warp().b())
        sup = std::max(sup, std::abs(c.warp()(fl.t(j)) - fl[j]));
    r.warpSup.push_back(sup);
  }
  r.sufficientConditions =
      r.baseGap.back() <= r.width && r.fiberGhUpper.back() <= r.width && r.warpSup.back() <= r.width;

  auto bad = [&](std::size_t i, double thr, bool useLower) {
    for (const auto& g : r.gh)
      if (g.i == i && (useLower ? g.lower : g.upper) > thr) return true;
    for (const auto& m : r.moduli)
      if (m.i == i && (m.eps1 > thr || m.eps2 > thr)) return true;
    return false;
  };
  bool bFinite = std::all_of(r.imprisonBound.begin(), r.imprisonBound.end(), [](double c) { return std::isfinite(c); });
  bool persistent = true;
  for (std::size_t i = n / 2; i < n; ++i) persistent = persistent && bad(i, 10 * r.width, true);
  if (!bFinite) {
    r.verdict = Verdict::Fail;
    r.notes.push_back("non-imprisonment bound is infinite");
  } else if (persistent) {
    r.verdict = Verdict::Fail;
  } else if (!bad(n - 1, r.width, false)) {
    r.verdict = Verdict::Pass;
  } else {
    r.verdict = Verdict::Inconclusive;
  }
  return r;
}

std::vector<MeasuredEntry> measured_converge_check(const ConeSequence& seq, std::size_t k) {
  const GeneralizedCone& L = seq.limit;
  // Blocks of cover cells; atoms sit at the middle cell of each block.
  struct Block {
    std::size_t t, x;  // representative indices
    double mass;
  };
  auto blocks = [](const GeneralizedCone& c, const CoverLevel& lv) {
    std::size_t nt = lv.thi - lv.tlo + 1, nx = lv.fiberPoints.size();
    std::size_t bt = (nt + 7) / 8, bx = (nx + 7) / 8;
    std::vector<Block> out;
    double total = 0;
    for (std::size_t t0 = 0; t0 < nt; t0 += bt)
      for (std::size_t x0 = 0; x0 < nx; x0 += bx) {
        std::size_t t1 = std::min(nt, t0 + bt), x1 = std::min(nx, x0 + bx);
        double m = 0;
        for (std::size_t t = t0; t < t1; ++t)
          for (std::size_t x = x0; x < x1; ++x) m += c.cell_weight({lv.tlo + t, lv.fiberPoints[x]});
        out.push_back({lv.tlo + (t0 + t1 - 1) / 2, (x0 + x1 - 1) / 2, m});
        total += m;
      }
    if (!(total > 0)) throw Error(ErrorCode::ZeroReferenceCell, "cover set carries no reference mass");
    for (auto& b : out) b.mass /= total;
    return out;
  };
  std::vector<MeasuredEntry> res(seq.cones.size());
  for (std::size_t i = 0; i < seq.cones.size(); ++i) {
    const GeneralizedCone& C = seq.cones[i];
    CoverMatch M = match_cover(C, L, k, seq.center);
    auto bi = blocks(C, M.ci), bl = blocks(L, M.cl);
    const auto& X = L.fiber();
    auto dist = [&](std::size_t t1, std::size_t x1, std::size_t t2, std::size_t x2) {
      return std::abs(L.time(t1) - L.time(t2)) + M.Fl * X(x1, x2);
    };
    std::vector<double> sup, dem, cost;
    for (const auto& b : bi) sup.push_back(b.mass);
    for (const auto& b : bl) dem.push_back(b.mass);
    // Pushed atoms land on the correspondence image; the distortion is the
    // slack of the gluing.
    std::map<std::pair<std::size_t, std::size_t>, double> pushed, lim;
    for (const auto& a : bi) {
      std::size_t tt = M.timeTo[a.t - M.ci.tlo], xx = M.cl.fiberPoints[M.fiberTo[a.x]];
      pushed[{tt, xx}] += a.mass;
      for (const auto& b : bl)
        cost.push_back(dist(tt, xx, b.t, M.cl.fiberPoints[b.x]) + (M.distortion > 0 ? 0.5 * M.distortion : 0.0));
    }
    for (const auto& b : bl) lim[{b.t, M.cl.fiberPoints[b.x]}] += b.mass;
    double tv = 0;
    for (auto& [key, m] : pushed) tv += std::abs(m - (lim.count(key) ? lim[key] : 0.0));
    for (auto& [key, m] : lim)
      if (!pushed.count(key)) tv += m;
    double sumS = 0, sumD = 0;
    for (double s : sup) sumS += s;
    for (double d : dem) sumD += d;
    for (double& d : dem) d *= sumS / sumD;
    std::vector<char> allowed(sup.size() * dem.size(), 1);
    auto plan = min_cost_transport(sup, dem, cost, allowed);
    if (!plan) throw Error(ErrorCode::InvalidInput, "transport between normalized measures failed");
    double w1 = 0;
    for (std::size_t q = 0; q < plan->size(); ++q) w1 += (*plan)[q] * cost[q];
    double diam = L.time(M.cl.thi) - L.time(M.cl.tlo) + M.Fl * ball_of(L, M.cl).diameter();
    res[i] = {i, w1, 0.5 * tv, diam};
  }
  return res;
}

PrecompactReport precompact_harness(const std::vector<GeneralizedCone>& cones, double K, double N, double D,
                                    std::size_t depth) {
  PrecompactReport rep;
  std::vector<GeneralizedCone> normalized;
  std::vector<std::size_t> acceptedIdx;
  for (std::size_t i = 0; i < cones.size(); ++i) {
    const auto& f = cones[i].warp();
    ProfileOutcome o;
    o.index = i;
    double len = f.b() - f.a();
    if (len > D) {
      o.reason = "interval length " + std::to_string(len) + " exceeds D";
      rep.profiles.push_back(o);
      continue;
    }
    if (K > 0 && len > pi_kappa(K) * (1 + 1e-9)) {
      o.reason = "interval longer than pi_K";
      rep.profiles.push_back(o);
      continue;
    }
    if (f.is_zero()) {
      o.reason = "identically zero profile";
      rep.profiles.push_back(o);
      continue;
    }
    NormalizeResult nr = normalize_and_bound(f, K);
    o.lambda = nr.lambda;
    ConcavityReport cr = fk_concavity(nr.g, K);
    if (!cr.fk_concave) {
      o.reason = "not FK-concave: residual " + std::to_string(cr.maxViolation);
      o.location = nr.g.t(cr.argmaxViolation);
      rep.profiles.push_back(o);
      continue;
    }
    if (!nr.slopeBoundOK) {
      o.reason = "log-slope bound violated (excess " + std::to_string(nr.worst_excess) + ")";
      o.location = nr.g.t(nr.worst_index);
      rep.profiles.push_back(o);
      continue;
    }
    o.accepted = true;
    rep.profiles.push_back(o);
    acceptedIdx.push_back(i);
    // Scaling isomorphism: f / lambda over X * lambda is the same cone.
    normalized.emplace_back(nr.g, cones[i].fiber().scaled(nr.lambda), N, cones[i].options(),
                            cones[i].fiber_weights());
  }
  if (normalized.empty()) return rep;

  // Grid-scale Arzela-Ascoli: even positions first, odd positions if the
  // even subsequence does not settle.
  auto gap = [&](std::size_t a, std::size_t b) {
    const auto &fa = normalized[a].warp(), &fb = normalized[b].warp();
    double g = 0;
    for (std::size_t j = 0; j < fb.size(); ++j) g = std::max(g, std::abs(fa(fb.t(j)) - fb[j]));
    return g + std::abs(fa.a() - fb.a()) + std::abs(fa.b() - fb.b());
  };
  auto settles = [&](const std::vector<std::size_t>& sub) {
    if (sub.size() < 2) return true;
    double tolSel = 2 * normalized[sub.back()].warp().max_step();
    return gap(sub[sub.size() - 2], sub.back()) <= tolSel;
  };
  std::vector<std::size_t> even, odd;
  for (std::size_t p = 0; p < normalized.size(); ++p) (p % 2 == 0 ? even : odd).push_back(p);
  std::vector<std::size_t> pick = settles(even) || odd.empty() || !settles(odd) ? even : odd;
  for (std::size_t p : pick) rep.selected.push_back(acceptedIdx[p]);

  std::vector<GeneralizedCone> seqCones;
  for (std::size_t p : pick) seqCones.push_back(normalized[p]);
  GeneralizedCone limit = normalized[pick.back()];
  ConeSequence seq{seqCones, limit, depth};
  rep.hasLimit = true;
  rep.convergence = ell_converge_check(seq, default_schedule(depth));
  return rep;
}

GeneralizedCone tangent_member(const GeneralizedCone& cone, std::size_t t0, double eps, std::size_t depth,
                               std::size_t timeSteps) {
  const auto& f = cone.warp();
  if (t0 == 0 || t0 + 1 >= f.size()) throw Error(ErrorCode::BoundaryPoint, "tangent point must be interior");
  if (!(f[t0] > 0)) throw Error(ErrorCode::BoundaryPoint, "warping vanishes at the tangent point");
  if (!(eps > 0)) throw Error(ErrorCode::InvalidInput, "eps must be positive");
  double c = f[t0], tc = f.t(t0);
  double lo = std::max(-0.5 * double(depth), (f.a() - tc) / eps);
  double hi = std::min(0.5 * double(depth), (f.b() - tc) / eps);
  WarpingFunction g =
      WarpingFunction::sample(lo, hi, timeSteps, [&](double s) { return f(tc + eps * s) / c; });
  return GeneralizedCone(g, cone.fiber(), cone.N(), cone.options(), cone.fiber_weights());
}

TangentReport tangent_cone(const GeneralizedCone& cone, std::size_t t0, const std::vector<double>& epsList,
                           std::size_t depth, std::size_t timeSteps, double tolFactor) {
  TangentReport rep;
  if (epsList.empty()) throw Error(ErrorCode::InvalidInput, "empty eps list");
  std::vector<GeneralizedCone> members;
  rep.productOK = true;
  const double c = cone.warp()[t0];
  for (double eps : epsList) {
    members.push_back(tangent_member(cone, t0, eps, depth, timeSteps));
    const auto& g = members.back().warp();
    TangentEntry e;
    e.eps = eps;
    for (std::size_t k = 1; k <= depth; ++k) {
      double dev = 0;
      for (std::size_t j = 0; j < g.size(); ++j)
        if (std::abs(g.t(j)) <= 0.5 * double(k) + 1e-12) dev = std::max(dev, std::abs(g[j] - 1));
      e.warpDeviation.push_back(dev);
      if (dev > tolFactor * eps) rep.productOK = false;
    }
    auto ball = ball_subspace(cone.fiber().scaled(c / eps), std::ldexp(1.0, int(depth)));
    e.fiberBallSize = ball.size();
    e.fiberBallDiameter = ball.diameter();
    rep.entries.push_back(e);
  }
  const auto& g = members.back().warp();
  GeneralizedCone limit(WarpingFunction::sample(g.a(), g.b(), timeSteps, [](double) { return 1.0; }), cone.fiber(),
                        cone.N(), cone.options(), cone.fiber_weights());
  ConeSequence seq{members, limit, depth, 0.0};
  std::vector<ScheduleEntry> sched;
  for (std::size_t k = 1; k <= depth; ++k) sched.push_back({k, 2, -1});
  rep.convergence = ell_converge_check(seq, sched);
  rep.verdict = rep.productOK ? rep.convergence.verdict : Verdict::Fail;
  return rep;
}

}  // namespace lorcone
