#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lorcone/cone.hpp"
#include "lorcone/numeric.hpp"

namespace lorcone {

// A point of the model plane of constant curvature K. For K = 0 the
// coordinates are (t, x, 0). Otherwise they are embedding coordinates on the
// quadric <p,p> = -r^2 (K < 0, signature (-,-,+)) or <p,p> = r^2 (K > 0,
// signature (-,+,+)), r = 1/sqrt|K|.
struct ModelPoint {
  double K = 0;
  std::array<double, 3> c{0, 0, 0};
};

double model_radius(double K);
double model_inner(double K, const std::array<double, 3>& p, const std::array<double, 3>& q);

ModelPoint minkowski_point(double t, double x);
// Point at proper time s along the unit timelike geodesic leaving the base
// event with rapidity phi.
ModelPoint model_geodesic_point(double K, double phi, double s);

// Signed time separation p -> q in the model; -inf when q is not in the
// causal future of p.
double model_tau(const ModelPoint& p, const ModelPoint& q);

// Separations of a 4-point configuration. In the future case
// y << x << z1 <= z2 and zz = tau(z1, z2); in the past case
// z2 <= z1 << x << y, every entry is read with the arguments reversed and
// zz = tau(z2, z1).
struct FourPointConfig {
  double yx = 0, yz1 = 0, yz2 = 0, xz1 = 0, xz2 = 0, zz = 0;
  bool past = false;
  // Grid provenance when sampled from a cone.
  std::optional<std::array<GridPoint, 4>> points;  // y, x, z1, z2
};

struct Realization {
  ModelPoint y, x, z1, z2;
  double residual = 0;
  // Model separation of the comparison pair, clipped at 0.
  double tauBar = 0;
};

// Closed-form realization via the law of cosines in each model. Throws
// DomainViolation if tau(y,z2) is outside the normal chart and Unrealizable
// if the side lengths violate the reverse triangle inequality.
Realization realize_comparison(const FourPointConfig& cfg, double K);

struct TcbbViolation {
  FourPointConfig cfg;
  Realization model;
  double margin = 0;
};

struct TcbbReport {
  double K = 0;
  double tol = 0;
  std::size_t attempts = 0;
  std::size_t valid = 0;
  std::size_t futureCount = 0, pastCount = 0;
  std::size_t domainRejected = 0;
  std::size_t unrealizable = 0;
  double worstMargin = kInf;
  std::optional<TcbbViolation> worst;
  double bracketWidth = 0;  // largest hi - lo used on the left side
  bool pass = false;
};

// Evaluates prepared configurations directly (also used for injected,
// non-geometric separation data).
TcbbReport tcbb_check(const std::vector<FourPointConfig>& cfgs, double K, double tol);

// Rejection-samples configurations from grid points, alternating future and
// past cases; attempt i uses a generator seeded from (seed, i).
TcbbReport tcbb_verify(const GeneralizedCone& cone, double K, std::size_t samples, double tol,
                       std::uint64_t seed);

}  // namespace lorcone
