#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace lorcone {

class WarpingFunction {
public:
  WarpingFunction() = default;
  // ts strictly increasing from a to b, vals >= 0 and positive in the interior
  // unless the function is identically zero.
  WarpingFunction(std::vector<double> ts, std::vector<double> vals);

  static WarpingFunction sample(double a, double b, std::size_t steps,
                                const std::function<double(double)>& fn);

  double a() const { return ts_.front(); }
  double b() const { return ts_.back(); }
  std::size_t size() const { return ts_.size(); }
  const std::vector<double>& ts() const { return ts_; }
  const std::vector<double>& vals() const { return vals_; }
  double t(std::size_t i) const { return ts_[i]; }
  double operator[](std::size_t i) const { return vals_[i]; }
  bool is_zero() const { return zero_; }
  double max_value() const { return max_; }
  double max_step() const { return hmax_; }

  double operator()(double t) const;
  // Exact max/min of the interpolant over [t_i, t_j], i <= j.
  double max_on(std::size_t i, std::size_t j) const;
  double min_on(std::size_t i, std::size_t j) const;
  // Integral of f^N over [lo, hi] for the interpolant.
  double integral_pow(double N, double lo, double hi) const;

  WarpingFunction scaled(double c) const;
  // s -> f(t0 + eps*s) / norm, sampled on the image grid of [lo, hi].
  WarpingFunction affine_pullback(double t0, double eps, double norm) const;

private:
  std::vector<double> ts_, vals_;
  bool zero_ = false;
  double max_ = 0, hmax_ = 0;
};

// Local slope at grid point i with the boundary convention of the one-sided
// quotients (backward at a and forward at b never contribute).
double slope(const WarpingFunction& f, std::size_t i);

struct ConcavityReport {
  double K = 0;
  std::vector<double> residuals;  // interior points 1..n-2
  double maxViolation = 0;
  std::size_t argmaxViolation = 0;
  double Kf = 0;
  std::size_t argminG = 0;
  double tol = 0;
  bool fk_concave = false;
};

// Default tolerance: 1e-6 (1 + |K| max f) plus the O(h^2) truncation level of
// the 3-point stencil on the given grid.
double default_fk_tol(const WarpingFunction& f, double K);

ConcavityReport fk_concavity(const WarpingFunction& f, double K, double tol = -1);

struct NormalizeResult {
  WarpingFunction g;
  double lambda = 0;
  bool slopeBoundOK = false;
  std::size_t worst_index = 0;  // left end of the cell with the tightest check
  double worst_excess = 0;      // log-slope minus bound there (positive = violated)
};

NormalizeResult normalize_and_bound(const WarpingFunction& f, double K);

WarpingFunction mollify_fk(const WarpingFunction& f, double K, double eta);

namespace presets {
WarpingFunction constant(double c, double a, double b, std::size_t steps);
WarpingFunction linear(double slope, double intercept, double a, double b, std::size_t steps);
WarpingFunction sin(double a, double b, std::size_t steps);
WarpingFunction cos(double a, double b, std::size_t steps);
WarpingFunction sin_k(double K, double a, double b, std::size_t steps);
// t^p on [a,b]
WarpingFunction power(double p, double a, double b, std::size_t steps);
}  // namespace presets

}  // namespace lorcone
