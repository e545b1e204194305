#include "lorcone/smoothcurv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lorcone/errors.hpp"

namespace lorcone {

namespace {

// Largest gap between G built from local slopes and G built from centered
// derivatives; this is the discretization level of K_f on the grid.
double slope_gap(const WarpingFunction& f, double K) {
  double gap = 0;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    double d = (f[i + 1] - f[i - 1]) / (f.t(i + 1) - f.t(i - 1));
    double s = slope(f, i);
    gap = std::max(gap, std::abs((K * f[i] * f[i] + s * s) - (K * f[i] * f[i] + d * d)));
  }
  return gap;
}

CurvatureReductionReport reduce(ReductionKind kind, const WarpingFunction& f, double K, std::size_t n,
                                double bound, double tol) {
  if (f.size() < 3) throw Error(ErrorCode::GridTooCoarse, "curvature reduction needs at least 3 samples");
  if (n < 1) throw Error(ErrorCode::InvalidInput, "fiber dimension must be >= 1");
  CurvatureReductionReport r;
  r.kind = kind;
  r.K = K;
  r.n = n;
  r.fiberBound = bound;
  r.cond1 = fk_concavity(f, K, tol);
  r.Kf = r.cond1.Kf;
  double mult = kind == ReductionKind::Ricci ? double(n - 1) : 1.0;
  r.threshold = mult * r.Kf;
  r.cond2Tol = r.cond1.tol + mult * slope_gap(f, K);
  r.cond2 = bound >= r.threshold - r.cond2Tol;
  r.verdict = r.cond1.fk_concave && r.cond2;
  return r;
}

}  // namespace

CurvatureReductionReport ricci_reduction(const WarpingFunction& f, double K, std::size_t n, double fiberRicBound,
                                         double tol) {
  return reduce(ReductionKind::Ricci, f, K, n, fiberRicBound, tol);
}

CurvatureReductionReport sectional_reduction(const WarpingFunction& f, double K, double fiberSecBound, double tol) {
  return reduce(ReductionKind::Sectional, f, K, 2, fiberSecBound, tol);
}

std::vector<OneillPoint> oneill_diagnostics(const WarpingFunction& f, std::size_t n) {
  if (f.size() < 3) throw Error(ErrorCode::GridTooCoarse, "diagnostics need at least 3 samples");
  std::vector<OneillPoint> out;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    OneillPoint p;
    p.t = f.t(i);
    if (f[i] < 1e-8) {
      p.nearZero = true;
      p.radial = p.tangential = std::numeric_limits<double>::quiet_NaN();
      out.push_back(p);
      continue;
    }
    double h1 = f.t(i) - f.t(i - 1), h2 = f.t(i + 1) - f.t(i);
    double d2 = 2.0 / (h1 + h2) * ((f[i + 1] - f[i]) / h2 - (f[i] - f[i - 1]) / h1);
    double d1 = (f[i + 1] - f[i - 1]) / (h1 + h2);
    p.radial = -double(n) * d2 / f[i];
    p.tangential = d2 / f[i] + double(n - 1) * d1 * d1 / (f[i] * f[i]);
    out.push_back(p);
  }
  return out;
}

}  // namespace lorcone
