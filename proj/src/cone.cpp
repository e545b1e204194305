#include "lorcone/cone.hpp"

#include <algorithm>
#include <cmath>

#include "lorcone/errors.hpp"
#include "lorcone/numeric.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lorcone {

double step_weight(double dt, double f, double dr) {
  double x = f * dr;
  double v = dt * dt - x * x;
  if (v <= 1e-12 * dt * dt) return 0.0;
  return std::sqrt(v);
}

namespace {
// The upper table must not round near-null steps down.
double upper_weight(double dt, double f, double dr) {
  double x = f * dr;
  return std::sqrt(std::max(0.0, dt * dt - x * x));
}
}  // namespace

namespace {

constexpr double kRel = 1e-12;

struct Ctx {
  const std::vector<double>& t;
  const std::vector<double>& f;
  std::vector<double> seg;  // max of f over [t_i, t_{i+1}]
  double h;
  std::size_t T1, R;
  std::size_t W;  // 0 = all pairs
  std::size_t band;
  std::vector<double> hints;
  std::size_t stride;

  Ctx(const WarpingFunction& wf, double h_, std::size_t R_, const ConeOptions& o)
      : t(wf.ts()), f(wf.vals()), h(h_), T1(wf.size()), R(R_), W(o.window), band(o.band),
        hints(o.nullHints) {
    seg.resize(T1 > 0 ? T1 - 1 : 0);
    for (std::size_t i = 0; i + 1 < T1; ++i) seg[i] = std::max(f[i], f[i + 1]);
    stride = o.hiStride ? o.hiStride : (W ? 2 * W : T1);
  }

  // Largest fiber step that keeps the edge causal for a step maximum fmax.
  std::size_t null_index(double dt, double fmax) const {
    double fh = fmax * h;
    if (!(fh > 0)) return R;
    double x = dt / fh * (1 + kRel);
    if (x >= double(R)) return R;
    return std::size_t(x);
  }

  std::size_t band_center(double dt, double hint) const {
    double x = dt / (hint * h) * (1 + kRel);
    if (x >= double(R) + double(band)) return R + band;
    return std::size_t(x);
  }

  bool short_edge(std::size_t di) const { return W == 0 || di <= W; }

  bool lo_edge(std::size_t di, double dt, double fmax, std::size_t dj) const {
    if (dj > null_index(dt, fmax)) return false;
    if (short_edge(di)) return true;
    for (double hint : hints) {
      std::size_t c = band_center(dt, hint);
      if (dj <= c && dj + band >= c) return true;
    }
    return false;
  }

  double hi_dr(std::size_t dj, bool from_source) const {
    std::size_t slack = from_source ? 0 : 1;
    return dj > slack ? double(dj - slack) * h : 0.0;
  }

  std::size_t hi_anchor(std::size_t s, std::size_t i) const { return s + stride * ((i - s - 1) / stride); }
};

struct Pred {
  std::int32_t ip = -1;  // -1: none, -2: free move from j+1 on the same slice
  std::int32_t jp = -1;
  std::int32_t dj = 0;
};

// One source of the lower table, push style. Rows rows[i - s] have R+1
// entries. When Track is set, pred receives the argmax structure.
template <bool Track>
void lo_source(const Ctx& c, std::size_t s, std::size_t upto, double* const* rows, Pred* pred) {
  const std::size_t R1 = c.R + 1;
  std::vector<std::size_t> reach(upto - s + 1, 0);
  rows[0][0] = 0.0;
  for (std::size_t j = 1; j < R1; ++j) rows[0][j] = kNegInf;
  for (std::size_t i = s + 1; i <= upto; ++i) {
    double* out = rows[i - s];
    Pred* pr = Track ? pred + (i - s) * R1 : nullptr;
    for (std::size_t j = 0; j < R1; ++j) out[j] = kNegInf;
    double fmax = 0;
    for (std::size_t ip = i; ip-- > s;) {
      fmax = std::max(fmax, c.seg[ip]);
      const double* in = rows[ip - s];
      const std::size_t di = i - ip;
      const double dt = c.t[i] - c.t[ip];
      const std::size_t nj = c.null_index(dt, fmax);
      const std::size_t rin = reach[ip - s];
      auto relax = [&](std::size_t dj) {
        const double w = step_weight(dt, fmax, double(dj) * c.h);
        const std::size_t lim = std::min(rin, c.R - dj);
        if constexpr (Track) {
          for (std::size_t jp = 0; jp <= lim; ++jp) {
            double v = in[jp] + w;
            if (v > out[jp + dj]) out[jp + dj] = v, pr[jp + dj] = {std::int32_t(ip), std::int32_t(jp), std::int32_t(dj)};
          }
          for (std::size_t jp = c.R - dj + 1; jp <= rin && dj > 0; ++jp) {
            double v = in[jp] + w;
            if (v > out[c.R]) out[c.R] = v, pr[c.R] = {std::int32_t(ip), std::int32_t(jp), std::int32_t(dj)};
          }
        } else {
          double* o = out + dj;
          for (std::size_t jp = 0; jp <= lim; ++jp) o[jp] = std::max(o[jp], in[jp] + w);
          if (dj > 0) {
            double m = out[c.R];
            for (std::size_t jp = c.R - dj + 1; jp <= rin; ++jp) m = std::max(m, in[jp] + w);
            out[c.R] = m;
          }
        }
      };
      if (c.short_edge(di)) {
        for (std::size_t dj = 0; dj <= nj; ++dj) relax(dj);
      } else {
        // Overlapping bands relax an edge twice, which is harmless for a max.
        for (double hint : c.hints) {
          std::size_t cj = c.band_center(dt, hint);
          std::size_t lo = cj > c.band ? cj - c.band : 0;
          std::size_t hi = std::min(cj, nj);
          for (std::size_t dj = lo; dj <= hi; ++dj) relax(dj);
        }
      }
    }
    // Free move toward smaller fiber distance.
    for (std::size_t j = c.R; j-- > 0;) {
      if (out[j + 1] > out[j]) {
        out[j] = out[j + 1];
        if constexpr (Track) pr[j] = {-2, std::int32_t(j + 1), 0};
      }
    }
    std::size_t r = 0;
    while (r + 1 < R1 && out[r + 1] > kNegInf) ++r;
    reach[i - s] = out[0] > kNegInf ? r : 0;
  }
}

void hi_source(const Ctx& c, std::size_t s, TauTables& tab) {
  const std::size_t R1 = c.R + 1;
  double* src = tab.hi_row(s, s);
  src[0] = 0.0;
  std::vector<std::size_t> reach(c.T1, 0);
  for (std::size_t i = s + 1; i < c.T1; ++i) {
    std::size_t k = c.hi_anchor(s, i);
    const double* in = tab.hi_row(s, k);
    double* out = tab.hi_row(s, i);
    double fmin = c.f[k];
    for (std::size_t q = k + 1; q <= i; ++q) fmin = std::min(fmin, c.f[q]);
    const double dt = c.t[i] - c.t[k];
    const bool from_source = (k == s);
    const std::size_t rin = reach[k];
    for (std::size_t dj = 0; dj < R1; ++dj) {
      double dr = c.hi_dr(dj, from_source);
      if (fmin * dr > dt * (1 + kRel)) break;
      const double w = upper_weight(dt, fmin, dr);
      const std::size_t lim = std::min(rin, c.R - dj);
      double* o = out + dj;
      for (std::size_t jp = 0; jp <= lim; ++jp) o[jp] = std::max(o[jp], in[jp] + w);
    }
    for (std::size_t j = 1; j < R1; ++j) out[j] = std::min(out[j], out[j - 1]);
    std::size_t r = 0;
    while (r + 1 < R1 && out[r + 1] > kNegInf) ++r;
    reach[i] = r;
  }
}

// Straightforward pull-style evaluation of the same edge sets, kept as an
// independent check of the push kernels.
void reference_source(const Ctx& c, std::size_t s, TauTables& tab, const WarpingFunction& wf) {
  const std::size_t R1 = c.R + 1;
  tab.lo_row(s, s)[0] = 0.0;
  for (std::size_t i = s + 1; i < c.T1; ++i) {
    double* out = tab.lo_row(s, i);
    for (std::size_t j = 0; j < R1; ++j) {
      double best = kNegInf;
      for (std::size_t ip = s; ip < i; ++ip) {
        const double fmax = wf.max_on(ip, i);
        const double dt = c.t[i] - c.t[ip];
        const double* in = tab.lo_row(s, ip);
        for (std::size_t jp = 0; jp < R1; ++jp) {
          if (in[jp] == kNegInf) continue;
          if (j < c.R) {
            if (jp > j || !c.lo_edge(i - ip, dt, fmax, j - jp)) continue;
            best = std::max(best, in[jp] + step_weight(dt, fmax, double(j - jp) * c.h));
          } else {
            for (std::size_t dj = c.R - jp; dj <= c.R; ++dj)
              if (c.lo_edge(i - ip, dt, fmax, dj))
                best = std::max(best, in[jp] + step_weight(dt, fmax, double(dj) * c.h));
          }
        }
      }
      out[j] = best;
    }
    for (std::size_t j = c.R; j-- > 0;) out[j] = std::max(out[j], out[j + 1]);
  }

  tab.hi_row(s, s)[0] = 0.0;
  for (std::size_t i = s + 1; i < c.T1; ++i) {
    std::size_t k = c.hi_anchor(s, i);
    const double fmin = wf.min_on(k, i);
    const double dt = c.t[i] - c.t[k];
    const double* in = tab.hi_row(s, k);
    double* out = tab.hi_row(s, i);
    for (std::size_t j = 0; j < R1; ++j) {
      double best = kNegInf;
      for (std::size_t jp = 0; jp <= j; ++jp) {
        double dr = c.hi_dr(j - jp, k == s);
        if (in[jp] == kNegInf || fmin * dr > dt * (1 + kRel)) continue;
        best = std::max(best, in[jp] + upper_weight(dt, fmin, dr));
      }
      out[j] = best;
    }
    for (std::size_t j = 1; j < R1; ++j) out[j] = std::min(out[j], out[j - 1]);
  }
}

void zero_warp_tables(const Ctx& c, TauTables& tab) {
  for (std::size_t s = 0; s < c.T1; ++s)
    for (std::size_t t = s; t < c.T1; ++t)
      for (std::size_t j = 0; j <= c.R; ++j) {
        double v = (t == s && j > 0) ? kNegInf : c.t[t] - c.t[s];
        tab.lo_row(s, t)[j] = v;
        tab.hi_row(s, t)[j] = v;
      }
}

double work_estimate(const Ctx& c) {
  double T1 = double(c.T1), R1 = double(c.R + 1);
  double W = c.W ? double(std::min(c.W, c.T1)) : T1;
  double per_state = W * std::min(W, R1) / 2 + double(c.hints.size()) * double(c.band + 1) * T1 / 3;
  return T1 * T1 / 2 * R1 * per_state;
}

}  // namespace

TauTables build_tau_tables(const WarpingFunction& f, double h, std::size_t R, const ConeOptions& opt,
                           TableKernel kernel) {
  Ctx c(f, h, R, opt);
  if (work_estimate(c) > opt.budget)
    throw Error(ErrorCode::ResourceLimit, "table build exceeds the configured work budget");
  TauTables tab(c.T1, R + 1);
  if (f.is_zero()) {
    zero_warp_tables(c, tab);
    return tab;
  }
  auto lo_for = [&](std::size_t s) {
    std::vector<double*> rows(c.T1 - s);
    for (std::size_t i = s; i < c.T1; ++i) rows[i - s] = tab.lo_row(s, i);
    lo_source<false>(c, s, c.T1 - 1, rows.data(), nullptr);
    hi_source(c, s, tab);
  };
  const long T1 = long(c.T1);
  switch (kernel) {
    case TableKernel::Reference:
      for (std::size_t s = 0; s < c.T1; ++s) reference_source(c, s, tab, f);
      break;
    case TableKernel::Serial:
      for (std::size_t s = 0; s < c.T1; ++s) lo_for(s);
      break;
    case TableKernel::Parallel:
      // Early sources carry the most work; hand them out first.
#pragma omp parallel for schedule(dynamic, 1)
      for (long s = 0; s < T1; ++s) lo_for(std::size_t(s));
      break;
  }
  return tab;
}

GeneralizedCone::GeneralizedCone(WarpingFunction f, FiniteMetricSpace X, double N, ConeOptions opt,
                                 std::vector<double> fiberWeights)
    : f_(std::move(f)), X_(std::move(X)), N_(N), opt_(std::move(opt)), w_(std::move(fiberWeights)) {
  if (!(N_ >= 1)) throw Error(ErrorCode::InvalidInput, "N must be >= 1");
  if (opt_.nullHints.empty()) opt_.nullHints = {1.0};
  for (double hint : opt_.nullHints)
    if (!(hint > 0)) throw Error(ErrorCode::InvalidInput, "null hints must be positive");
  if (w_.empty()) w_.assign(X_.size(), 1.0);
  if (w_.size() != X_.size()) throw Error(ErrorCode::InvalidInput, "fiber weight count mismatch");
  for (double w : w_)
    if (!(w > 0) || !std::isfinite(w)) throw Error(ErrorCode::InvalidInput, "fiber weights must be positive");
  if (X_.diameter() > 0) {
    if (opt_.distSteps == 0) throw Error(ErrorCode::InvalidInput, "distSteps must be positive");
    R_ = opt_.distSteps;
    h_ = X_.diameter() / double(R_);
  }
}

const TauTables& GeneralizedCone::tables() const {
  build();
  return *lazy_->tables;
}

void GeneralizedCone::build(TableKernel kernel) const {
  std::call_once(lazy_->tables_once, [&] {
    lazy_->tables = std::make_unique<TauTables>(build_tau_tables(f_, h_, R_, opt_, kernel));
  });
}

std::size_t GeneralizedCone::lo_index(double d) const {
  if (R_ == 0) return 0;
  double x = std::ceil(d / h_ - 1e-9);
  return x <= 0 ? 0 : std::min(R_, std::size_t(x));
}

std::size_t GeneralizedCone::hi_index(double d) const {
  if (R_ == 0) return 0;
  double x = std::floor(d / h_ + 1e-9);
  return x <= 0 ? 0 : std::min(R_, std::size_t(x));
}

double GeneralizedCone::tau2d_lo(std::size_t s, std::size_t t, double d) const {
  if (t < s) return kNegInf;
  if (t == s) return d > 1e-9 * std::max(1.0, h_) ? kNegInf : 0.0;
  return tables().lo(s, t, lo_index(d));
}

double GeneralizedCone::tau2d_hi(std::size_t s, std::size_t t, double d) const {
  if (t < s) return kNegInf;
  if (t == s) return d > 1e-9 * std::max(1.0, h_) ? kNegInf : 0.0;
  return tables().hi(s, t, hi_index(d));
}

double GeneralizedCone::ell(GridPoint p, GridPoint q) const {
  if (p == q) return 0.0;
  return tau2d_lo(p.t, q.t, X_(p.x, q.x));
}

double GeneralizedCone::ell_hi(GridPoint p, GridPoint q) const {
  if (p == q) return 0.0;
  return tau2d_hi(p.t, q.t, X_(p.x, q.x));
}

GridGeodesic GeneralizedCone::maximizer(GridPoint p, GridPoint q) const {
  if (ell(p, q) == kNegInf)
    throw Error(ErrorCode::NotCausallyRelated, "no causal grid path between the points");
  return maximizer2d(p.t, q.t, X_(p.x, q.x));
}

GridGeodesic GeneralizedCone::maximizer2d(std::size_t s, std::size_t t, double d) const {
  if (tau2d_lo(s, t, d) == kNegInf)
    throw Error(ErrorCode::NotCausallyRelated, "no causal grid path between the points");
  GridGeodesic g;
  g.states.push_back({s, 0.0});
  if (t == s) return g;

  struct Edge {
    std::size_t ip, i, dj;
  };
  std::vector<Edge> edges;
  const std::size_t R1 = R_ + 1;
  if (f_.is_zero()) {
    edges.push_back({s, t, lo_index(d)});
  } else {
    Ctx c(f_, h_, R_, opt_);
    std::vector<double> store((t - s + 1) * R1);
    std::vector<double*> rows(t - s + 1);
    for (std::size_t i = 0; i <= t - s; ++i) rows[i] = store.data() + i * R1;
    std::vector<Pred> pred((t - s + 1) * R1);
    lo_source<true>(c, s, t, rows.data(), pred.data());
    std::size_t i = t, j = lo_index(d);
    while (!(i == s && j == 0)) {
      const Pred& pr = pred[(i - s) * R1 + j];
      if (pr.ip == -2) {
        j = std::size_t(pr.jp);
        continue;
      }
      if (pr.ip < 0) throw Error(ErrorCode::NoMaximizer, "broken predecessor chain");
      edges.push_back({std::size_t(pr.ip), i, std::size_t(pr.dj)});
      i = std::size_t(pr.ip);
      j = std::size_t(pr.jp);
    }
    std::reverse(edges.begin(), edges.end());
  }

  double reach = 0;
  for (auto& e : edges) reach += double(e.dj) * h_;
  // The path may overshoot the target distance (free moves, clamping);
  // shrinking every fiber step keeps it causal and does not lower its length.
  double scale = reach > 0 ? std::min(1.0, d / reach) : 0.0;
  double cum = 0;
  bool all_null = true, all_timelike = true;
  for (auto& e : edges) {
    double dt = f_.t(e.i) - f_.t(e.ip);
    double dr = double(e.dj) * h_ * scale;
    double fm = f_.max_on(e.ip, e.i);
    double w = step_weight(dt, fm, dr);
    cum += dr;
    g.states.push_back({e.i, cum});
    g.stepWeights.push_back(w);
    g.tauLength += w;
    if (w > 1e-9 * dt) all_null = false;
    else all_timelike = false;
  }
  g.character = all_timelike ? CausalCharacter::Timelike
                             : (all_null ? CausalCharacter::Null : CausalCharacter::Mixed);
  return g;
}

const std::vector<double>& GeneralizedCone::reference_measure() const {
  std::call_once(lazy_->measure_once, [&] {
    std::size_t T1 = f_.size(), n = X_.size();
    auto& m = lazy_->measure;
    m.assign(T1 * n, 0.0);
    for (std::size_t i = 0; i < T1; ++i) {
      double lo = i > 0 ? 0.5 * (f_.t(i - 1) + f_.t(i)) : f_.a();
      double hi = i + 1 < T1 ? 0.5 * (f_.t(i) + f_.t(i + 1)) : f_.b();
      double base = f_.integral_pow(N_, lo, hi);
      for (std::size_t x = 0; x < n; ++x) m[i * n + x] = base * w_[x];
    }
  });
  return lazy_->measure;
}

std::vector<CoverLevel> GeneralizedCone::cover(std::size_t depth, double center) const {
  if (std::isnan(center)) center = 0.5 * (f_.a() + f_.b());
  std::vector<CoverLevel> out;
  for (std::size_t k = 1; k <= depth; ++k) {
    CoverLevel c;
    c.k = k;
    double lo = center - 0.5 * double(k), hi = center + 0.5 * double(k);
    std::size_t a = f_.size(), b = 0;
    for (std::size_t i = 0; i < f_.size(); ++i)
      if (f_.t(i) >= lo - 1e-12 && f_.t(i) <= hi + 1e-12) a = std::min(a, i), b = std::max(b, i);
    if (a > b) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < f_.size(); ++i)
        if (std::abs(f_.t(i) - center) < std::abs(f_.t(best) - center)) best = i;
      a = b = best;
    }
    c.tlo = a;
    c.thi = b;
    c.fiberRadius = std::ldexp(1.0, int(k));
    c.fiberPoints = ball_indices(X_, c.fiberRadius);
    out.push_back(std::move(c));
  }
  return out;
}

double GeneralizedCone::nonimprisonment_bound(const CoverLevel& c) const {
  double len = f_.t(c.thi) - f_.t(c.tlo);
  double fmin = f_.min_on(c.tlo, c.thi);
  if (!(fmin > 0)) return kInf;
  return len * (1 + 1 / fmin);
}

std::size_t GeneralizedCone::diamond_size(GridPoint p, GridPoint q) const {
  std::size_t count = 0;
  for (std::size_t i = p.t; i <= q.t; ++i)
    for (std::size_t x = 0; x < X_.size(); ++x) {
      GridPoint z{i, x};
      if (ell(p, z) > kNegInf && ell(z, q) > kNegInf) ++count;
    }
  return count;
}

GeneralizedCone rescale(const GeneralizedCone& c, double eps) {
  if (!(eps > 0)) throw Error(ErrorCode::InvalidInput, "eps must be positive");
  return GeneralizedCone(c.warp().affine_pullback(0.0, eps, 1.0), c.fiber().scaled(1.0 / eps), c.N(),
                         c.options(), c.fiber_weights());
}

double scaling_isomorphism_check(const GeneralizedCone& c, double lambda) {
  if (!(lambda > 0)) throw Error(ErrorCode::InvalidInput, "lambda must be positive");
  // null hints are warp values, so they scale with f
  ConeOptions o = c.options();
  for (double& hint : o.nullHints) hint *= lambda;
  GeneralizedCone d(c.warp().scaled(lambda), c.fiber().scaled(1.0 / lambda), c.N(), o, c.fiber_weights());
  std::vector<double> dc, dd;
  const auto& X = c.fiber();
  const auto& Y = d.fiber();
  for (std::size_t x = 0; x < X.size(); ++x)
    for (std::size_t y = x; y < X.size(); ++y) dc.push_back(X(x, y)), dd.push_back(Y(x, y));
  double worst = 0;
  for (std::size_t s = 0; s < c.time_points(); ++s)
    for (std::size_t t = s; t < c.time_points(); ++t)
      for (std::size_t q = 0; q < dc.size(); ++q) {
        double u = c.tau2d_lo(s, t, dc[q]), v = d.tau2d_lo(s, t, dd[q]);
        if (u == kNegInf || v == kNegInf) {
          if (u != v) return kInf;
          continue;
        }
        worst = std::max(worst, std::abs(u - v));
      }
  return worst;
}

WarpingFunction resample(const WarpingFunction& f, std::size_t steps) {
  return WarpingFunction::sample(f.a(), f.b(), steps, [&f](double t) { return f(t); });
}

}  // namespace lorcone
