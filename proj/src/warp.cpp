#include "lorcone/warp.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "lorcone/errors.hpp"
#include "lorcone/numeric.hpp"

namespace lorcone {

WarpingFunction::WarpingFunction(std::vector<double> ts, std::vector<double> vals)
    : ts_(std::move(ts)), vals_(std::move(vals)) {
  if (ts_.size() < 2 || ts_.size() != vals_.size())
    throw Error(ErrorCode::InvalidInput, "warping function needs >= 2 samples and matching sizes");
  for (std::size_t i = 0; i + 1 < ts_.size(); ++i) {
    if (!(ts_[i + 1] > ts_[i])) throw Error(ErrorCode::InvalidInput, "sample grid not increasing");
    hmax_ = std::max(hmax_, ts_[i + 1] - ts_[i]);
  }
  for (double v : vals_) {
    if (!std::isfinite(v) || v < 0) throw Error(ErrorCode::InvalidInput, "warping values must be finite and >= 0");
    max_ = std::max(max_, v);
  }
  zero_ = (max_ == 0.0);
  if (!zero_)
    for (std::size_t i = 1; i + 1 < vals_.size(); ++i)
      if (!(vals_[i] > 0))
        throw Error(ErrorCode::InvalidInput, "warping function vanishes at an interior point");
}

WarpingFunction WarpingFunction::sample(double a, double b, std::size_t steps,
                                        const std::function<double(double)>& fn) {
  if (steps < 1 || !(b > a)) throw Error(ErrorCode::InvalidInput, "bad sampling interval");
  std::vector<double> ts(steps + 1), vs(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    ts[i] = i == steps ? b : a + (b - a) * double(i) / double(steps);
    double v = fn(ts[i]);
    // Roundoff at a zero of the profile (sin(pi), cos(pi/2)).
    if (v < 0 && v > -1e-12) v = 0;
    vs[i] = v;
  }
  return WarpingFunction(std::move(ts), std::move(vs));
}

double WarpingFunction::operator()(double t) const {
  if (t <= ts_.front()) return vals_.front();
  if (t >= ts_.back()) return vals_.back();
  auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
  std::size_t j = std::size_t(it - ts_.begin());
  std::size_t i = j - 1;
  double w = (t - ts_[i]) / (ts_[j] - ts_[i]);
  return (1 - w) * vals_[i] + w * vals_[j];
}

double WarpingFunction::max_on(std::size_t i, std::size_t j) const {
  return *std::max_element(vals_.begin() + long(i), vals_.begin() + long(j) + 1);
}

double WarpingFunction::min_on(std::size_t i, std::size_t j) const {
  return *std::min_element(vals_.begin() + long(i), vals_.begin() + long(j) + 1);
}

double WarpingFunction::integral_pow(double N, double lo, double hi) const {
  static const std::array<double, 8> x = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                          -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                          0.7966664774136267,  0.9602898564975363};
  static const std::array<double, 8> w = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                          0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};
  lo = std::max(lo, a());
  hi = std::min(hi, b());
  double total = 0;
  for (std::size_t i = 0; i + 1 < ts_.size(); ++i) {
    double l = std::max(lo, ts_[i]), r = std::min(hi, ts_[i + 1]);
    if (!(r > l)) continue;
    double c = 0.5 * (l + r), hw = 0.5 * (r - l);
    for (std::size_t q = 0; q < 8; ++q) total += w[q] * hw * std::pow((*this)(c + hw * x[q]), N);
  }
  return total;
}

WarpingFunction WarpingFunction::scaled(double c) const {
  std::vector<double> v(vals_);
  for (auto& x : v) x *= c;
  return WarpingFunction(ts_, std::move(v));
}

WarpingFunction WarpingFunction::affine_pullback(double t0, double eps, double norm) const {
  std::vector<double> s(ts_.size()), v(vals_.size());
  for (std::size_t i = 0; i < ts_.size(); ++i) {
    s[i] = (ts_[i] - t0) / eps;
    v[i] = vals_[i] / norm;
  }
  return WarpingFunction(std::move(s), std::move(v));
}

double slope(const WarpingFunction& f, std::size_t i) {
  std::size_t n = f.size();
  double s = 0;
  if (i + 1 < n) s = std::max(s, (f[i + 1] - f[i]) / (f.t(i + 1) - f.t(i)));
  if (i > 0) s = std::max(s, -(f[i] - f[i - 1]) / (f.t(i) - f.t(i - 1)));
  return s;
}

double default_fk_tol(const WarpingFunction& f, double K) {
  double h = f.max_step();
  return 1e-6 * (1 + std::abs(K) * f.max_value()) + h * h * (1 + std::abs(K)) * f.max_value();
}

ConcavityReport fk_concavity(const WarpingFunction& f, double K, double tol) {
  if (f.size() < 3) throw Error(ErrorCode::GridTooCoarse, "FK-concavity needs at least 3 samples");
  ConcavityReport r;
  r.K = K;
  r.tol = tol < 0 ? default_fk_tol(f, K) : tol;
  r.maxViolation = kNegInf;
  for (std::size_t i = 1; i + 1 < f.size(); ++i) {
    double h1 = f.t(i) - f.t(i - 1), h2 = f.t(i + 1) - f.t(i);
    double d2 = 2.0 / (h1 + h2) * ((f[i + 1] - f[i]) / h2 - (f[i] - f[i - 1]) / h1);
    double res = d2 + K * f[i];
    r.residuals.push_back(res);
    if (res > r.maxViolation) r.maxViolation = res, r.argmaxViolation = i;
  }
  double gmin = kInf;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double s = slope(f, i);
    double g = K * f[i] * f[i] + s * s;
    if (g < gmin) gmin = g, r.argminG = i;
  }
  r.Kf = -gmin;
  r.fk_concave = r.maxViolation <= r.tol;
  return r;
}

NormalizeResult normalize_and_bound(const WarpingFunction& f, double K) {
  if (f.is_zero() || !(f.max_value() > 0)) throw Error(ErrorCode::ZeroFunction, "max f = 0");
  NormalizeResult out;
  out.lambda = f.max_value();
  out.g = f.scaled(1.0 / out.lambda);
  const auto& g = out.g;
  double a = g.a(), b = g.b();
  auto bound = [&](double t) { return std::max(cot_kappa(K, t - a), cot_kappa(K, b - t)); };
  out.slopeBoundOK = true;
  out.worst_excess = kNegInf;
  // Mean value theorem: the secant of log g on a cell equals (log g)' somewhere
  // inside it, and the bound is largest at one of the cell endpoints.
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    if (!(g[i] > 0) || !(g[i + 1] > 0)) continue;
    double sec = (std::log(g[i + 1]) - std::log(g[i])) / (g.t(i + 1) - g.t(i));
    double bd = std::max(bound(g.t(i)), bound(g.t(i + 1)));
    double excess = std::abs(sec) - bd;
    if (excess > out.worst_excess) {
      out.worst_excess = excess;
      out.worst_index = i;
    }
    if (std::abs(sec) > bd * (1 + 1e-9) + 1e-12) out.slopeBoundOK = false;
  }
  return out;
}

namespace {

WarpingFunction moving_average(const WarpingFunction& f, double width) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double t = f.t(i);
    double hw = std::min({0.5 * width, t - f.a(), f.b() - t});
    if (hw <= 1e-14 * (f.b() - f.a())) {
      v[i] = f[i];
      continue;
    }
    v[i] = f.integral_pow(1.0, t - hw, t + hw) / (2 * hw);
  }
  return WarpingFunction(f.ts(), std::move(v));
}

}  // namespace

WarpingFunction mollify_fk(const WarpingFunction& f, double K, double eta) {
  if (!(eta > 0 && eta < 1)) throw Error(ErrorCode::InvalidInput, "eta must lie in (0,1)");
  double width = eta * (f.b() - f.a()) / 2;
  double K1 = K * (1 - eta);
  for (int attempt = 0; attempt <= 10; ++attempt) {
    WarpingFunction cand = moving_average(f, width);
    if (fk_concavity(cand, K1).fk_concave) return cand;
    width *= 0.5;
  }
  throw Error(ErrorCode::MollifyFailed, "smoothed profile is not FK(1-eta)-concave after 10 retries");
}

namespace presets {

WarpingFunction constant(double c, double a, double b, std::size_t steps) {
  return WarpingFunction::sample(a, b, steps, [c](double) { return c; });
}
WarpingFunction linear(double m, double c, double a, double b, std::size_t steps) {
  return WarpingFunction::sample(a, b, steps, [m, c](double t) { return m * t + c; });
}
WarpingFunction sin(double a, double b, std::size_t steps) {
  return WarpingFunction::sample(a, b, steps, [](double t) { return std::sin(t); });
}
WarpingFunction cos(double a, double b, std::size_t steps) {
  return WarpingFunction::sample(a, b, steps, [](double t) { return std::cos(t); });
}
WarpingFunction sin_k(double K, double a, double b, std::size_t steps) {
  return WarpingFunction::sample(a, b, steps, [K](double t) { return sin_kappa(K, t); });
}
WarpingFunction power(double p, double a, double b, std::size_t steps) {
  return WarpingFunction::sample(a, b, steps, [p](double t) { return std::pow(t, p); });
}

}  // namespace presets

}  // namespace lorcone
