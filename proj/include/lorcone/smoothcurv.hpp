#pragma once

#include <cstddef>
#include <vector>

#include "lorcone/warp.hpp"

namespace lorcone {

enum class ReductionKind { Ricci, Sectional };

// Warped-product reduction of a Ricci or sectional lower bound. The fiber
// bound is a declared input: a finite fiber sample carries no curvature.
struct CurvatureReductionReport {
  ReductionKind kind = ReductionKind::Ricci;
  double K = 0;
  std::size_t n = 1;
  double fiberBound = 0;
  ConcavityReport cond1;
  double Kf = 0;
  double threshold = 0;  // (n-1) K_f for Ricci, K_f for sectional
  double cond2Tol = 0;
  bool cond2 = false;
  bool verdict = false;
};

CurvatureReductionReport ricci_reduction(const WarpingFunction& f, double K, std::size_t n, double fiberRicBound,
                                         double tol = -1);
CurvatureReductionReport sectional_reduction(const WarpingFunction& f, double K, double fiberSecBound,
                                             double tol = -1);

struct OneillPoint {
  double t = 0;
  double radial = 0;      // -n f''/f
  double mixed = 0;       // always 0 for warped products
  double tangential = 0;  // f''/f + (n-1) (f')^2/f^2
  bool nearZero = false;  // f < 1e-8, values not computed
};

// Interior grid points, centered differences.
std::vector<OneillPoint> oneill_diagnostics(const WarpingFunction& f, std::size_t n);

}  // namespace lorcone
