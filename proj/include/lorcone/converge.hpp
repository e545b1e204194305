#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "lorcone/cone.hpp"
#include "lorcone/lorot.hpp"
#include "lorcone/metricspace.hpp"

namespace lorcone {

struct ConeSequence {
  std::vector<GeneralizedCone> cones;
  GeneralizedCone limit;
  std::size_t depth = 2;
  double center = std::numeric_limits<double>::quiet_NaN();  // cover center, default midpoint
};

// Correspondence between cover sets U^k_i and U^k of the limit: a monotone
// base match times a fiber witness. Distances use the surrogate metric
// |s - t| + F d_X(x, y), F = max of f over the cover base interval.
struct CoverMatch {
  CoverLevel ci, cl;
  std::vector<std::size_t> timeTo;    // cone_i time index - ci.tlo -> limit time index
  std::vector<std::size_t> timeBack;  // limit time index - cl.tlo -> cone_i time index
  std::vector<std::size_t> fiberTo;   // position in ci.fiberPoints -> limit fiber index
  std::vector<std::size_t> fiberBack;
  double Fi = 1, Fl = 1;
  double timeMismatch = 0;  // largest |t_i - t_lim| over matched time indices
  double distortion = 0;
  double lower = 0;  // GH lower bound from the diameters
};

CoverMatch match_cover(const GeneralizedCone& ci, const GeneralizedCone& lim, std::size_t k, double center);

struct CoveredGhEntry {
  std::size_t i = 0, k = 0;
  double lower = 0, upper = 0;
};

std::vector<CoveredGhEntry> covered_gh(const ConeSequence& seq, std::size_t k);

struct ConvergenceModulus {
  std::size_t i = 0, k = 0, l = 0;
  double delta = 0;
  double eps1 = 0, eps2 = 0;
  // Remark inclusions at eps = max(eps1, eps2):
  //   A: {l_i >= 1/l - eps} inside the delta-neighbourhood of {l_lim >= 1/l}
  //   B: the delta-neighbourhood of {l_lim >= 1/l} inside {l_i >= 1/(2l)}
  bool inclusionA = false, inclusionB = false;
  std::size_t violationsA = 0, violationsB = 0;
  // A with the target level lowered to 1/l - 2 eps, which is what property
  // (1) actually yields.
  std::size_t violationsWeakA = 0;
  bool remarkApplies = false;  // eps < 1/(2l), the range in which the inclusions are claimed
  std::size_t levelSetSize = 0;
  bool inclusionOK() const { return inclusionA && inclusionB; }
};

// delta < 0 selects the smallest admissible radius: the GH upper bracket
// (half the distortion), or the time mismatch if that is larger.
ConvergenceModulus uniform_modulus(const ConeSequence& seq, std::size_t i, std::size_t k, std::size_t l,
                                   double delta = -1);

struct ScheduleEntry {
  std::size_t k = 1, l = 1;
  double delta = -1;
};

std::vector<ScheduleEntry> default_schedule(std::size_t depth);

struct EllConvergenceReport {
  std::vector<CoveredGhEntry> gh;              // (a)
  std::vector<std::vector<double>> imprison;   // (b) C_i(k), [i][k-1]
  std::vector<double> imprisonBound;           // sup over i per k
  std::vector<ConvergenceModulus> moduli;      // (c)
  std::vector<std::string> notes;
  double width = 0;  // largest tau bracket (hi - lo) of the limit on the deepest cover
  // Cross-check of the sufficient conditions for cones.
  std::vector<double> baseGap, fiberGhUpper, warpSup;
  bool sufficientConditions = false;
  Verdict verdict = Verdict::Inconclusive;
};

EllConvergenceReport ell_converge_check(const ConeSequence& seq, const std::vector<ScheduleEntry>& schedule);

struct MeasuredEntry {
  std::size_t i = 0;
  double w1 = 0;
  double tv = 0;        // total variation between pushed and limit blocks
  double diameter = 0;  // of the limit cover set in the surrogate metric
};

std::vector<MeasuredEntry> measured_converge_check(const ConeSequence& seq, std::size_t k);

struct ProfileOutcome {
  std::size_t index = 0;
  bool accepted = false;
  std::string reason;
  double location = 0;  // base time of the located violation
  double lambda = 0;
};

struct PrecompactReport {
  std::vector<ProfileOutcome> profiles;
  std::vector<std::size_t> selected;
  bool hasLimit = false;
  EllConvergenceReport convergence;
};

PrecompactReport precompact_harness(const std::vector<GeneralizedCone>& cones, double K, double N, double D,
                                    std::size_t depth = 2);

struct TangentEntry {
  double eps = 0;
  std::vector<double> warpDeviation;  // per cover level k = 1..depth
  std::size_t fiberBallSize = 0;      // ball of radius 2^depth in X * f(t0) / eps
  double fiberBallDiameter = 0;
};

struct TangentReport {
  std::vector<TangentEntry> entries;
  bool productOK = false;
  EllConvergenceReport convergence;
  Verdict verdict = Verdict::Inconclusive;
};

// The fiber of every rescaled member is the fixed model fiber X; the blown-up
// fiber ball is only reported.
TangentReport tangent_cone(const GeneralizedCone& cone, std::size_t t0, const std::vector<double>& epsList,
                           std::size_t depth = 4, std::size_t timeSteps = 100, double tolFactor = 2.0);

// Tangent member at scale eps: s -> f(t0 + eps s) / f(t0) on
// [-depth/2, depth/2] clipped to the rescaled interval.
GeneralizedCone tangent_member(const GeneralizedCone& cone, std::size_t t0, double eps, std::size_t depth,
                               std::size_t timeSteps);

}  // namespace lorcone
