#pragma once

#include <cstddef>
#include <limits>
#include <memory>
#include <mutex>
#include <vector>

#include "lorcone/metricspace.hpp"
#include "lorcone/warp.hpp"

namespace lorcone {

struct ConeOptions {
  std::size_t distSteps = 100;
  // DP horizon in time steps for general edges; 0 means all pairs.
  std::size_t window = 8;
  // Longer edges are kept only in narrow bands of fiber steps below the slope
  // dt/(hint*h) for each hint. The bands do not depend on f, so the edge set
  // stays monotone in f and closed under concatenation.
  std::size_t band = 2;
  std::vector<double> nullHints = {1.0};
  // Stride of the aligned slices used by the upper table; 0 means 2*window.
  std::size_t hiStride = 0;
  double budget = 1e11;
};

enum class TableKernel { Parallel, Serial, Reference };

class TauTables {
public:
  TauTables(std::size_t T1, std::size_t R1)
      : T1_(T1), R1_(R1), lo_(T1 * T1 * R1, kNegInfValue), hi_(T1 * T1 * R1, kNegInfValue) {}

  std::size_t time_points() const { return T1_; }
  std::size_t dist_points() const { return R1_; }
  std::size_t index(std::size_t s, std::size_t t, std::size_t j) const { return (s * T1_ + t) * R1_ + j; }
  double lo(std::size_t s, std::size_t t, std::size_t j) const { return lo_[index(s, t, j)]; }
  double hi(std::size_t s, std::size_t t, std::size_t j) const { return hi_[index(s, t, j)]; }
  double* lo_row(std::size_t s, std::size_t t) { return &lo_[index(s, t, 0)]; }
  double* hi_row(std::size_t s, std::size_t t) { return &hi_[index(s, t, 0)]; }
  const std::vector<double>& lo_data() const { return lo_; }
  const std::vector<double>& hi_data() const { return hi_; }

private:
  static constexpr double kNegInfValue = -std::numeric_limits<double>::infinity();
  std::size_t T1_, R1_;
  std::vector<double> lo_, hi_;
};

// Edge weight shared by every kernel so that they agree bit for bit.
double step_weight(double dt, double f, double dr);

TauTables build_tau_tables(const WarpingFunction& f, double h, std::size_t R, const ConeOptions& opt,
                           TableKernel kernel = TableKernel::Parallel);

struct GridPoint {
  std::size_t t = 0;
  std::size_t x = 0;
  bool operator==(const GridPoint&) const = default;
};

enum class CausalCharacter { Timelike, Null, Mixed, Trivial };

struct GridGeodesic {
  struct State {
    std::size_t timeIndex;
    double fiberDistance;
  };
  std::vector<State> states;
  std::vector<double> stepWeights;
  double tauLength = 0;
  CausalCharacter character = CausalCharacter::Trivial;
};

struct CoverLevel {
  std::size_t k = 0;
  std::size_t tlo = 0, thi = 0;  // inclusive time index range of I^k
  double fiberRadius = 0;
  std::vector<std::size_t> fiberPoints;
};

class GeneralizedCone {
public:
  GeneralizedCone(WarpingFunction f, FiniteMetricSpace X, double N = 1.0, ConeOptions opt = {},
                  std::vector<double> fiberWeights = {});

  const WarpingFunction& warp() const { return f_; }
  const FiniteMetricSpace& fiber() const { return X_; }
  double N() const { return N_; }
  const ConeOptions& options() const { return opt_; }
  const std::vector<double>& fiber_weights() const { return w_; }

  std::size_t time_points() const { return f_.size(); }
  std::size_t dist_points() const { return R_ + 1; }
  double dist_step() const { return h_; }
  double time(std::size_t i) const { return f_.t(i); }

  // Lazily built, thread-safe.
  const TauTables& tables() const;
  void build(TableKernel kernel = TableKernel::Parallel) const;

  // Fiber distance to grid index: rounded up for lo, down for hi. The true
  // separation is nonincreasing in the fiber distance.
  std::size_t lo_index(double d) const;
  std::size_t hi_index(double d) const;

  double tau2d_lo(std::size_t s, std::size_t t, double d) const;
  double tau2d_hi(std::size_t s, std::size_t t, double d) const;
  double ell(GridPoint p, GridPoint q) const;
  double ell_hi(GridPoint p, GridPoint q) const;
  bool causal(GridPoint p, GridPoint q) const { return ell(p, q) > kNegInfLimit; }

  GridGeodesic maximizer(GridPoint p, GridPoint q) const;
  GridGeodesic maximizer2d(std::size_t s, std::size_t t, double d) const;

  // Cell weights f^N dt (x) w over the dual time cells, row-major [time][fiber].
  const std::vector<double>& reference_measure() const;
  double cell_weight(GridPoint p) const { return reference_measure()[p.t * X_.size() + p.x]; }

  // Base windows of width k centered at `center` (default: midpoint of I).
  std::vector<CoverLevel> cover(std::size_t depth, double center = std::numeric_limits<double>::quiet_NaN()) const;
  // Bound on the metric length of causal curves inside a cover level.
  double nonimprisonment_bound(const CoverLevel& c) const;
  std::size_t diamond_size(GridPoint p, GridPoint q) const;

private:
  static constexpr double kNegInfLimit = -std::numeric_limits<double>::infinity();
  WarpingFunction f_;
  FiniteMetricSpace X_;
  double N_;
  ConeOptions opt_;
  std::vector<double> w_;
  std::size_t R_ = 0;
  double h_ = 1.0;

  // Shared by copies, which describe the same cone.
  struct Lazy {
    std::once_flag tables_once, measure_once;
    std::unique_ptr<TauTables> tables;
    std::vector<double> measure;
  };
  std::shared_ptr<Lazy> lazy_ = std::make_shared<Lazy>();
};

GeneralizedCone rescale(const GeneralizedCone& c, double eps);
// Builds the cone with f <- lambda f and X <- X/lambda and returns the largest
// difference of lo entries over all grid triples.
double scaling_isomorphism_check(const GeneralizedCone& c, double lambda);
// Same sample values on a uniform grid of `steps` intervals.
WarpingFunction resample(const WarpingFunction& f, std::size_t steps);

}  // namespace lorcone
