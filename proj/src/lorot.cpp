#include "lorcone/lorot.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

#include "lorcone/errors.hpp"

namespace lorcone {

DiscreteMeasure make_measure(std::vector<Atom> atoms) {
  std::map<std::pair<std::size_t, std::size_t>, double> merged;
  double total = 0;
  for (const auto& a : atoms) {
    if (!(a.mass > 0) || !std::isfinite(a.mass)) throw Error(ErrorCode::InvalidInput, "atom masses must be positive");
    merged[{a.p.t, a.p.x}] += a.mass;
    total += a.mass;
  }
  if (merged.empty()) throw Error(ErrorCode::InvalidInput, "empty measure");
  DiscreteMeasure mu;
  for (const auto& [k, m] : merged) mu.push_back({{k.first, k.second}, m / total});
  return mu;
}

void validate_measure(const GeneralizedCone& cone, const DiscreteMeasure& mu) {
  if (mu.empty()) throw Error(ErrorCode::InvalidInput, "empty measure");
  double total = 0;
  for (const auto& a : mu) {
    if (a.p.t >= cone.time_points() || a.p.x >= cone.fiber().size())
      throw Error(ErrorCode::InvalidInput, "atom outside the cone grid");
    if (!(a.mass > 0)) throw Error(ErrorCode::InvalidInput, "atom masses must be positive");
    total += a.mass;
  }
  if (std::abs(total - 1) > 1e-12) throw Error(ErrorCode::InvalidInput, "measure masses must sum to 1");
}

std::optional<std::vector<double>> min_cost_transport(const std::vector<double>& supply,
                                                      const std::vector<double>& demand,
                                                      const std::vector<double>& cost,
                                                      const std::vector<char>& allowed) {
  const std::size_t n = supply.size(), m = demand.size();
  const std::size_t V = n + m + 2, S = n + m, T = n + m + 1;
  struct Arc {
    std::size_t to;
    double cap, cost;
  };
  std::vector<Arc> arcs;
  std::vector<std::vector<std::size_t>> out(V);
  auto add = [&](std::size_t a, std::size_t b, double cap, double c) {
    out[a].push_back(arcs.size());
    arcs.push_back({b, cap, c});
    out[b].push_back(arcs.size());
    arcs.push_back({a, 0.0, -c});
  };
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) add(S, i, supply[i], 0.0), total += supply[i];
  std::vector<std::size_t> cell(n * m, SIZE_MAX);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (allowed[i * m + j]) {
        cell[i * m + j] = arcs.size();
        add(i, n + j, kInf, cost[i * m + j]);
      }
  for (std::size_t j = 0; j < m; ++j) add(n + j, T, demand[j], 0.0);

  const double capEps = 1e-15;
  double flow = 0;
  std::vector<double> dist(V);
  std::vector<std::size_t> via(V);
  while (flow < total - 1e-13) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(via.begin(), via.end(), SIZE_MAX);
    dist[S] = 0;
    for (std::size_t round = 0; round < V; ++round) {
      bool changed = false;
      for (std::size_t u = 0; u < V; ++u) {
        if (dist[u] == kInf) continue;
        for (std::size_t e : out[u]) {
          const Arc& a = arcs[e];
          if (a.cap <= capEps) continue;
          double nd = dist[u] + a.cost;
          if (nd < dist[a.to] - 1e-12 * (1 + std::abs(nd))) {
            dist[a.to] = nd;
            via[a.to] = e;
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[T] == kInf) break;
    double push = kInf;
    for (std::size_t v = T; v != S; v = arcs[via[v] ^ 1].to) push = std::min(push, arcs[via[v]].cap);
    for (std::size_t v = T; v != S; v = arcs[via[v] ^ 1].to) {
      arcs[via[v]].cap -= push;
      arcs[via[v] ^ 1].cap += push;
    }
    flow += push;
  }
  if (flow < total - 1e-9) return std::nullopt;
  std::vector<double> plan(n * m, 0.0);
  for (std::size_t k = 0; k < n * m; ++k)
    if (cell[k] != SIZE_MAX) plan[k] = arcs[cell[k] ^ 1].cap;
  return plan;
}

CausalCoupling solve_lp(const GeneralizedCone& cone, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                        double p, bool strict) {
  if (!(p > 0 && p <= 1)) throw Error(ErrorCode::InvalidInput, "p must lie in (0,1]");
  validate_measure(cone, mu0);
  validate_measure(cone, mu1);
  CausalCoupling c;
  c.mu0 = mu0;
  c.mu1 = mu1;
  c.p = p;
  const std::size_t n = mu0.size(), m = mu1.size();
  c.ell.resize(n * m);
  std::vector<double> cost(n * m, 0.0), sup(n), dem(m);
  std::vector<char> allowed(n * m, 0);
  for (std::size_t i = 0; i < n; ++i) {
    sup[i] = mu0[i].mass;
    for (std::size_t j = 0; j < m; ++j) {
      double l = cone.ell(mu0[i].p, mu1[j].p);
      c.ell[i * m + j] = l;
      if (strict ? l > 0 : l >= 0) {
        allowed[i * m + j] = 1;
        cost[i * m + j] = -std::pow(l, p);
      }
    }
  }
  for (std::size_t j = 0; j < m; ++j) dem[j] = mu1[j].mass;
  auto plan = min_cost_transport(sup, dem, cost, allowed);
  if (!plan)
    throw Error(ErrorCode::NotCausallyCouplable, strict ? "no coupling supported on timelike pairs"
                                                        : "no coupling supported on causal pairs");
  c.plan = std::move(*plan);
  for (std::size_t k = 0; k < n * m; ++k)
    if (c.plan[k] > 0) c.pValue += c.plan[k] * std::pow(c.ell[k], p);
  return c;
}

double check_cyclical_monotonicity(const CausalCoupling& c, std::size_t cycles, std::uint64_t seed) {
  const std::size_t m = c.mu1.size();
  std::vector<std::pair<std::size_t, std::size_t>> supp;
  for (std::size_t k = 0; k < c.plan.size(); ++k)
    if (c.plan[k] > 1e-14) supp.push_back({k / m, k % m});
  if (supp.size() < 2) return 0.0;
  auto lp = [&](std::size_t i, std::size_t j) {
    double l = c.ell_at(i, j);
    return l == kNegInf ? kNegInf : std::pow(l, c.p);
  };
  auto slack = [&](const std::vector<std::size_t>& cyc) {
    double lhs = 0, rhs = 0;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      auto [xi, yi] = supp[cyc[k]];
      lhs += lp(xi, yi);
      rhs += lp(supp[cyc[(k + 1) % cyc.size()]].first, yi);
    }
    return rhs == kNegInf ? kInf : lhs - rhs;
  };
  double worst = kInf;
  if (supp.size() <= 400)
    for (std::size_t a = 0; a < supp.size(); ++a)
      for (std::size_t b = a + 1; b < supp.size(); ++b) worst = std::min(worst, slack({a, b}));
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < cycles; ++s) {
    std::size_t len = 2 + s % 4;
    if (len > supp.size()) len = supp.size();
    std::vector<std::size_t> idx(supp.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(len);
    worst = std::min(worst, slack(idx));
  }
  return worst == kInf ? 0.0 : worst;
}

DynamicalPlan build_dynamical_plan(const GeneralizedCone& cone, const CausalCoupling& c) {
  DynamicalPlan dp;
  const auto& X = cone.fiber();
  const std::size_t m = c.mu1.size();
  for (std::size_t k = 0; k < c.plan.size(); ++k) {
    if (!(c.plan[k] > 1e-15)) continue;
    PlanPath path;
    path.i0 = k / m;
    path.i1 = k % m;
    path.mass = c.plan[k];
    GridPoint a = c.mu0[path.i0].p, b = c.mu1[path.i1].p;
    try {
      path.geo = cone.maximizer(a, b);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NotCausallyRelated)
        throw Error(ErrorCode::NoMaximizer, "support pair without a causal path");
      throw;
    }
    double D = X(a.x, b.x);
    for (std::size_t s = 0; s < path.geo.states.size(); ++s) {
      if (s == 0) {
        path.fiber.push_back(a.x);
        continue;
      }
      if (s + 1 == path.geo.states.size()) {
        path.fiber.push_back(b.x);
        continue;
      }
      double r = path.geo.states[s].fiberDistance;
      std::size_t best = a.x;
      double bestErr = kInf;
      for (std::size_t z = 0; z < X.size(); ++z) {
        double e = std::abs(X(a.x, z) - r) + std::abs(X(z, b.x) - (D - r));
        if (e < bestErr - 1e-12) bestErr = e, best = z;
      }
      path.fiber.push_back(best);
    }
    dp.paths.push_back(std::move(path));
  }
  return dp;
}

DiscreteMeasure DynamicalPlan::slice(double t) const {
  std::map<std::pair<std::size_t, std::size_t>, double> agg;
  for (const auto& path : paths) {
    const auto& st = path.geo.states;
    std::size_t k = 0;
    if (t >= 1) {
      k = st.size() - 1;
    } else if (t > 0) {
      const double L = path.geo.tauLength;
      if (L > 1e-12) {
        double target = t * L, cum = 0, bestErr = std::abs(target);
        for (std::size_t s = 1; s < st.size(); ++s) {
          cum += path.geo.stepWeights[s - 1];
          if (std::abs(cum - target) < bestErr - 1e-12) bestErr = std::abs(cum - target), k = s;
        }
      } else {
        double t0 = double(st.front().timeIndex), t1 = double(st.back().timeIndex);
        double target = t0 + t * (t1 - t0), bestErr = kInf;
        for (std::size_t s = 0; s < st.size(); ++s)
          if (std::abs(double(st[s].timeIndex) - target) < bestErr - 1e-12)
            bestErr = std::abs(double(st[s].timeIndex) - target), k = s;
      }
    }
    agg[{st[k].timeIndex, path.fiber[k]}] += path.mass;
  }
  DiscreteMeasure mu;
  for (const auto& [key, mass] : agg) mu.push_back({{key.first, key.second}, mass});
  return mu;
}

double entropy(const GeneralizedCone& cone, const DiscreteMeasure& mu, EntropyKind kind, double N) {
  if (!(N >= 1) && kind != EntropyKind::Boltzmann) throw Error(ErrorCode::InvalidInput, "N must be >= 1");
  double sum = 0;
  for (const auto& a : mu) {
    double w = cone.cell_weight(a.p);
    if (!(w > 0)) {
      if (kind == EntropyKind::Renyi)
        throw Error(ErrorCode::ZeroReferenceCell, "atom on a cell of zero reference weight");
      return kind == EntropyKind::Boltzmann ? kInf : 0.0;
    }
    if (kind == EntropyKind::Renyi)
      sum -= std::pow(a.mass, 1 - 1 / N) * std::pow(w, 1 / N);
    else
      sum += a.mass * std::log(a.mass / w);
  }
  return kind == EntropyKind::U ? std::exp(-sum / N) : sum;
}

namespace {

double sigma(double K, double N, double t, double theta) {
  if (theta == 0) return t;
  double kappa = K / N;
  if (kappa == 0) return t;  // (t theta) / theta can be off by an ulp
  if (kappa > 0 && theta >= pi_kappa(kappa)) return kInf;
  return sin_kappa(kappa, t * theta) / sin_kappa(kappa, theta);
}

}  // namespace

double distortion_coefficient(double K, double N, double t, double theta, bool modified) {
  if (!(t >= 0 && t <= 1)) throw Error(ErrorCode::InvalidInput, "t must lie in [0,1]");
  if (!(theta >= 0)) throw Error(ErrorCode::InvalidInput, "theta must be >= 0");
  if (!(N >= 1)) throw Error(ErrorCode::InvalidInput, "N must be >= 1");
  if (!modified) return sigma(K, N, t, theta);
  if (N == 1) {
    if (K > 0) return theta > 0 ? kInf : t;
    return t;
  }
  double s = sigma(K, N - 1, t, theta);
  if (s == kInf) return kInf;
  return std::pow(t, 1 / N) * std::pow(s, 1 - 1 / N);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

namespace {

double median_density(const GeneralizedCone& cone, const DiscreteMeasure& mu) {
  std::vector<double> d;
  for (const auto& a : mu) {
    double w = cone.cell_weight(a.p);
    if (w > 0) d.push_back(a.mass / w);
  }
  if (d.empty()) return kInf;
  std::nth_element(d.begin(), d.begin() + long(d.size() / 2), d.end());
  return d[d.size() / 2];
}

bool over_cap(const GeneralizedCone& cone, const DiscreteMeasure& mu, double cap) {
  for (const auto& a : mu) {
    double w = cone.cell_weight(a.p);
    if (!(w > 0) || a.mass / w > cap) return true;
  }
  return false;
}

void finish(CurvatureReport& r, double tol) {
  r.worstMargin = kInf;
  r.bestMargin = kInf;
  bool any = false;
  for (const auto& s : r.slots) {
    if (s.excluded) continue;
    any = true;
    r.worstMargin = std::min(r.worstMargin, std::min(s.marginLo, s.marginHi));
    r.bestMargin = std::min(r.bestMargin, std::max(s.marginLo, s.marginHi));
  }
  if (!any)
    r.verdict = Verdict::Inconclusive;
  else if (r.worstMargin >= -tol)
    r.verdict = Verdict::Pass;
  else if (r.bestMargin < -tol)
    r.verdict = Verdict::Fail;
  else
    r.verdict = Verdict::Inconclusive;
}

}  // namespace

CurvatureReport tcd_verify(const GeneralizedCone& cone, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                           double p, double K, double N, TcdFlavor flavor, const std::vector<double>& tGrid,
                           double tol, double densityCap) {
  try {
    solve_lp(cone, mu0, mu1, p, true);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NotCausallyCouplable)
      throw Error(ErrorCode::NotTimelikeDualizable, "measures admit no timelike coupling");
    throw;
  }
  CausalCoupling c = solve_lp(cone, mu0, mu1, p);
  if (!(c.pValue > 0)) throw Error(ErrorCode::NotTimelikeDualizable, "optimal coupling has zero cost");
  DynamicalPlan plan = build_dynamical_plan(cone, c);

  CurvatureReport r;
  r.pValue = c.pValue;
  const std::size_t m = mu1.size();
  std::vector<double> ellHi(c.plan.size(), 0.0);
  double s2lo = 0, s2hi = 0;
  for (std::size_t k = 0; k < c.plan.size(); ++k) {
    if (!(c.plan[k] > 0)) continue;
    ellHi[k] = cone.ell_hi(mu0[k / m].p, mu1[k % m].p);
    s2lo += c.plan[k] * c.ell[k] * c.ell[k];
    s2hi += c.plan[k] * ellHi[k] * ellHi[k];
  }
  r.thetaLo = std::sqrt(s2lo);
  r.thetaHi = std::sqrt(s2hi);

  DiscreteMeasure both = mu0;
  both.insert(both.end(), mu1.begin(), mu1.end());
  const double cap = densityCap * median_density(cone, both);
  const double U0 = entropy(cone, mu0, EntropyKind::U, N), U1 = entropy(cone, mu1, EntropyKind::U, N);

  r.slots.resize(tGrid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long q = 0; q < long(tGrid.size()); ++q) {
    SlotMargin& s = r.slots[std::size_t(q)];
    s.t = tGrid[std::size_t(q)];
    DiscreteMeasure mt = plan.slice(s.t);
    if (over_cap(cone, mt, cap)) {
      s.excluded = true;
      s.reason = "density above cap";
      continue;
    }
    if (flavor == TcdFlavor::Entropic) {
      double Ut = entropy(cone, mt, EntropyKind::U, N);
      auto margin = [&](double th) {
        double a = distortion_coefficient(K, N, 1 - s.t, th), b = distortion_coefficient(K, N, s.t, th);
        if (a == kInf || b == kInf) return kNegInf;
        return Ut - (a * U0 + b * U1);
      };
      s.marginLo = margin(r.thetaLo);
      s.marginHi = margin(r.thetaHi);
    } else {
      double St = entropy(cone, mt, EntropyKind::Renyi, N);
      double rhsLo = 0, rhsHi = 0;
      for (std::size_t k = 0; k < c.plan.size(); ++k) {
        if (!(c.plan[k] > 0)) continue;
        const Atom &a = mu0[k / m], &b = mu1[k % m];
        double r0 = std::pow(a.mass / cone.cell_weight(a.p), -1 / N);
        double r1 = std::pow(b.mass / cone.cell_weight(b.p), -1 / N);
        auto term = [&](double th) {
          return distortion_coefficient(K, N, 1 - s.t, th, true) * r0 +
                 distortion_coefficient(K, N, s.t, th, true) * r1;
        };
        rhsLo -= c.plan[k] * term(c.ell[k]);
        rhsHi -= c.plan[k] * term(ellHi[k]);
      }
      s.marginLo = rhsLo - St;
      s.marginHi = rhsHi - St;
    }
  }
  finish(r, tol);
  return r;
}

CurvatureReport tmcp_verify(const GeneralizedCone& cone, const DiscreteMeasure& mu0, GridPoint x1, double K,
                            double N, const std::vector<double>& tGrid, double tol, double densityCap) {
  validate_measure(cone, mu0);
  std::string bad;
  for (const auto& a : mu0)
    if (!(cone.ell(a.p, x1) > 0)) bad += " (" + std::to_string(a.p.t) + "," + std::to_string(a.p.x) + ")";
  if (!bad.empty()) throw Error(ErrorCode::AtomNotInPast, "atoms not in the timelike past of x1:" + bad);

  CausalCoupling c;
  c.mu0 = mu0;
  c.mu1 = {{x1, 1.0}};
  c.p = 1;
  double s2lo = 0, s2hi = 0;
  for (const auto& a : mu0) {
    double lo = cone.ell(a.p, x1), hi = cone.ell_hi(a.p, x1);
    c.plan.push_back(a.mass);
    c.ell.push_back(lo);
    c.pValue += a.mass * lo;
    s2lo += a.mass * lo * lo;
    s2hi += a.mass * hi * hi;
  }
  DynamicalPlan plan = build_dynamical_plan(cone, c);
  CurvatureReport r;
  r.pValue = c.pValue;
  r.thetaLo = std::sqrt(s2lo);
  r.thetaHi = std::sqrt(s2hi);
  const double cap = densityCap * median_density(cone, mu0);
  const double U0 = entropy(cone, mu0, EntropyKind::U, N);
  r.slots.resize(tGrid.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long q = 0; q < long(tGrid.size()); ++q) {
    SlotMargin& s = r.slots[std::size_t(q)];
    s.t = tGrid[std::size_t(q)];
    if (s.t >= 1) {
      s.excluded = true;
      s.reason = "Dirac endpoint";
      continue;
    }
    DiscreteMeasure mt = plan.slice(s.t);
    if (over_cap(cone, mt, cap)) {
      s.excluded = true;
      s.reason = "density above cap";
      continue;
    }
    double Ut = entropy(cone, mt, EntropyKind::U, N);
    auto margin = [&](double th) {
      double a = distortion_coefficient(K, N, 1 - s.t, th);
      return a == kInf ? kNegInf : Ut - a * U0;
    };
    s.marginLo = margin(r.thetaLo);
    s.marginHi = margin(r.thetaHi);
  }
  finish(r, tol);
  return r;
}

}  // namespace lorcone
