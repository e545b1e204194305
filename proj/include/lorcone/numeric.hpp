#pragma once

#include <cmath>
#include <limits>

namespace lorcone {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846;

// sin_kappa: the solution of v'' + kappa v = 0 with v(0)=0, v'(0)=1.
inline double sin_kappa(double kappa, double x) {
  if (kappa > 0) {
    double s = std::sqrt(kappa);
    return std::sin(s * x) / s;
  }
  if (kappa < 0) {
    double s = std::sqrt(-kappa);
    return std::sinh(s * x) / s;
  }
  return x;
}

inline double cos_kappa(double kappa, double x) {
  if (kappa > 0) return std::cos(std::sqrt(kappa) * x);
  if (kappa < 0) return std::cosh(std::sqrt(-kappa) * x);
  return 1.0;
}

// pi/sqrt(kappa) for kappa > 0, infinity otherwise.
inline double pi_kappa(double kappa) {
  return kappa > 0 ? kPi / std::sqrt(kappa) : kInf;
}

// cot_kappa = sin_kappa'/sin_kappa on (0, pi_kappa). At 0 it is +inf; past
// pi_kappa it carries no information and is reported as -inf.
inline double cot_kappa(double kappa, double x) {
  if (x <= 0) return kInf;
  if (x >= pi_kappa(kappa)) return kNegInf;
  return cos_kappa(kappa, x) / sin_kappa(kappa, x);
}

}  // namespace lorcone
