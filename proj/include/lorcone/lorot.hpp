#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lorcone/cone.hpp"
#include "lorcone/numeric.hpp"

namespace lorcone {

struct Atom {
  GridPoint p;
  double mass = 0;
};

// Atoms with positive mass summing to one (checked to 1e-12 after the
// caller-side normalization done by make_measure).
using DiscreteMeasure = std::vector<Atom>;

DiscreteMeasure make_measure(std::vector<Atom> atoms);
void validate_measure(const GeneralizedCone& cone, const DiscreteMeasure& mu);

// Minimum-cost transportation between supplies and demands of equal total
// mass. Cells with allowed[i*m+j] == false carry no mass. Returns nullopt if
// no feasible plan exists. Ties are broken by index order.
std::optional<std::vector<double>> min_cost_transport(const std::vector<double>& supply,
                                                      const std::vector<double>& demand,
                                                      const std::vector<double>& cost,
                                                      const std::vector<char>& allowed);

struct CausalCoupling {
  DiscreteMeasure mu0, mu1;
  std::vector<double> plan;  // row-major |mu0| x |mu1|
  std::vector<double> ell;   // lower-table separations, -inf where not causal
  double p = 1;
  double pValue = 0;  // sum of ell^p over the plan
  double at(std::size_t i, std::size_t j) const { return plan[i * mu1.size() + j]; }
  double ell_at(std::size_t i, std::size_t j) const { return ell[i * mu1.size() + j]; }
};

// Maximizes sum ell^p pi over couplings supported where ell >= 0 (or ell > 0
// when strict). Throws NotCausallyCouplable when no such coupling exists.
CausalCoupling solve_lp(const GeneralizedCone& cone, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                        double p, bool strict = false);

// Worst slack over cycles of the support; +inf contributions from
// non-causal reassignments make those cycles irrelevant.
double check_cyclical_monotonicity(const CausalCoupling& c, std::size_t cycles, std::uint64_t seed = 1);

struct PlanPath {
  std::size_t i0 = 0, i1 = 0;  // atom indices in mu0 and mu1
  double mass = 0;
  GridGeodesic geo;
  std::vector<std::size_t> fiber;  // fiber point chosen at every geodesic state
};

struct DynamicalPlan {
  std::vector<PlanPath> paths;
  DiscreteMeasure slice(double t) const;
};

DynamicalPlan build_dynamical_plan(const GeneralizedCone& cone, const CausalCoupling& c);

enum class EntropyKind { Renyi, Boltzmann, U };

// Sum forms with density mass / cell weight: Renyi -sum rho^(1-1/N) w,
// Boltzmann sum rho log rho w, and U = exp(-Ent/N).
double entropy(const GeneralizedCone& cone, const DiscreteMeasure& mu, EntropyKind kind, double N = 1);

// Distortion coefficient sigma_{K,N}^{(t)}(theta) or its modified version
// tau_{K,N}^{(t)}(theta).
double distortion_coefficient(double K, double N, double t, double theta, bool modified = false);

enum class Verdict { Pass, Fail, Inconclusive };
std::string verdict_name(Verdict v);

struct SlotMargin {
  double t = 0;
  bool excluded = false;
  std::string reason;
  double marginLo = 0, marginHi = 0;  // with theta from the lower / upper table
};

struct CurvatureReport {
  std::vector<SlotMargin> slots;
  double worstMargin = kInf;  // pessimistic over the bracket
  double bestMargin = kInf;   // optimistic over the bracket
  double thetaLo = 0, thetaHi = 0;
  double pValue = 0;
  Verdict verdict = Verdict::Inconclusive;
};

enum class TcdFlavor { Entropic, Renyi };

CurvatureReport tcd_verify(const GeneralizedCone& cone, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
                           double p, double K, double N, TcdFlavor flavor, const std::vector<double>& tGrid,
                           double tol, double densityCap = 1e6);

CurvatureReport tmcp_verify(const GeneralizedCone& cone, const DiscreteMeasure& mu0, GridPoint x1, double K,
                            double N, const std::vector<double>& tGrid, double tol, double densityCap = 1e6);

}  // namespace lorcone
