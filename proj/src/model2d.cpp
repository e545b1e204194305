#include "lorcone/model2d.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lorcone/errors.hpp"
#include "lorcone/numeric.hpp"

namespace lorcone {

double model_radius(double K) { return K == 0 ? kInf : 1.0 / std::sqrt(std::abs(K)); }

double model_inner(double K, const std::array<double, 3>& p, const std::array<double, 3>& q) {
  if (K < 0) return -p[0] * q[0] - p[1] * q[1] + p[2] * q[2];
  if (K > 0) return -p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
  return -p[0] * q[0] + p[1] * q[1];
}

ModelPoint minkowski_point(double t, double x) { return ModelPoint{0.0, {t, x, 0.0}}; }

ModelPoint model_geodesic_point(double K, double phi, double s) {
  ModelPoint p;
  p.K = K;
  double ch = std::cosh(phi), sh = std::sinh(phi);
  if (K == 0) {
    p.c = {s * ch, s * sh, 0.0};
  } else if (K < 0) {
    double r = model_radius(K), a = s / r;
    p.c = {r * std::cos(a), r * std::sin(a) * ch, r * std::sin(a) * sh};
  } else {
    double r = model_radius(K), a = s / r;
    p.c = {r * std::sinh(a) * ch, r * std::cosh(a), r * std::sinh(a) * sh};
  }
  return p;
}

namespace {

constexpr double kNullTol = 1e-12;

bool same_point(const ModelPoint& p, const ModelPoint& q) {
  double scale = 1 + std::abs(p.c[0]) + std::abs(p.c[1]) + std::abs(p.c[2]);
  return std::abs(p.c[0] - q.c[0]) + std::abs(p.c[1] - q.c[1]) + std::abs(p.c[2] - q.c[2]) <= 1e-14 * scale;
}

}  // namespace

double model_tau(const ModelPoint& p, const ModelPoint& q) {
  if (p.K != q.K) throw Error(ErrorCode::MixedModels, "points lie on different model spaces");
  if (same_point(p, q)) return 0.0;
  const double K = p.K;
  if (K == 0) {
    double dt = q.c[0] - p.c[0], dx = q.c[1] - p.c[1];
    if (dt <= 0) return kNegInf;
    double s = dt * dt - dx * dx;
    if (s < -kNullTol * dt * dt) return kNegInf;
    return std::sqrt(std::max(0.0, s));
  }
  double r = model_radius(K);
  if (K < 0) {
    double c = -model_inner(K, p.c, q.c) / (r * r);
    if (c > 1 + kNullTol) return kNegInf;
    // atan2(v, u) is a global time function on the quadric.
    double dth = std::atan2(q.c[1], q.c[0]) - std::atan2(p.c[1], p.c[0]);
    dth = std::remainder(dth, 2 * kPi);
    if (!(dth > 0)) return kNegInf;
    return r * std::acos(std::clamp(c, -1.0, 1.0));
  }
  double c = model_inner(K, p.c, q.c) / (r * r);
  if (c < 1 - kNullTol) return kNegInf;
  if (!(q.c[0] > p.c[0])) return kNegInf;
  return r * std::acosh(std::max(1.0, c));
}

namespace {

// cosh of the rapidity between the axis and the geodesic from the base of
// length a whose endpoint is at separation b from the axis point at c.
double rapidity_cosh(double K, double a, double c, double b) {
  if (K == 0) return (a * a + c * c - b * b) / (2 * a * c);
  double r = model_radius(K);
  double A = a / r, C = c / r, B = b / r;
  if (K < 0) return (std::cos(B) - std::cos(A) * std::cos(C)) / (std::sin(A) * std::sin(C));
  return (std::cosh(A) * std::cosh(C) - std::cosh(B)) / (std::sinh(A) * std::sinh(C));
}

}  // namespace

Realization realize_comparison(const FourPointConfig& cfg, double K) {
  if (K < 0) {
    double lim = pi_kappa(-K);
    if (!(cfg.yz2 < lim) || !(cfg.yz1 < lim))
      throw Error(ErrorCode::DomainViolation, "separation from y exceeds the timelike diameter of the model");
  }
  if (!(cfg.yx > 0) || !(cfg.yz1 > 0) || !(cfg.yz2 > 0))
    throw Error(ErrorCode::Unrealizable, "degenerate configuration: y must precede x, z1, z2 chronologically");
  double phi[2];
  const double a[2] = {cfg.yz1, cfg.yz2}, b[2] = {cfg.xz1, cfg.xz2};
  for (int i = 0; i < 2; ++i) {
    double ch = rapidity_cosh(K, a[i], cfg.yx, b[i]);
    if (!std::isfinite(ch) || ch < 1 - 1e-9)
      throw Error(ErrorCode::Unrealizable,
                  "no comparison point: side lengths violate the reverse triangle inequality (cosh = " +
                      std::to_string(ch) + ")");
    phi[i] = std::acosh(std::max(1.0, ch));
  }
  Realization R;
  R.y = model_geodesic_point(K, 0, 0);
  R.x = model_geodesic_point(K, 0, cfg.yx);
  R.z1 = model_geodesic_point(K, phi[0], a[0]);
  R.z2 = model_geodesic_point(K, -phi[1], a[1]);
  auto err = [](double got, double want) { return got == kNegInf ? kInf : std::abs(got - want); };
  R.residual = std::max({err(model_tau(R.y, R.x), cfg.yx), err(model_tau(R.y, R.z1), a[0]),
                         err(model_tau(R.y, R.z2), a[1]), err(model_tau(R.x, R.z1), b[0]),
                         err(model_tau(R.x, R.z2), b[1])});
  double scale = 1 + std::max(a[0], a[1]);
  if (!(R.residual <= 1e-7 * scale))
    throw Error(ErrorCode::Unrealizable, "realized points miss the constraints (residual " +
                                             std::to_string(R.residual) + ")");
  R.tauBar = std::max(0.0, model_tau(R.z1, R.z2));
  return R;
}

namespace {

struct Outcome {
  enum Kind { Ok, Domain, Unreal } kind = Ok;
  Realization model;
  double margin = 0;
};

Outcome evaluate(const FourPointConfig& cfg, double K) {
  Outcome o;
  try {
    o.model = realize_comparison(cfg, K);
    o.margin = cfg.zz - o.model.tauBar;
  } catch (const Error& e) {
    o.kind = e.code() == ErrorCode::DomainViolation ? Outcome::Domain : Outcome::Unreal;
  }
  return o;
}

void accumulate(TcbbReport& rep, const FourPointConfig& cfg, const Outcome& o) {
  if (o.kind == Outcome::Domain) {
    ++rep.domainRejected;
    return;
  }
  if (o.kind == Outcome::Unreal) {
    ++rep.unrealizable;
    return;
  }
  ++rep.valid;
  (cfg.past ? rep.pastCount : rep.futureCount)++;
  if (o.margin < rep.worstMargin) {
    rep.worstMargin = o.margin;
    rep.worst = TcbbViolation{cfg, o.model, o.margin};
  }
}

}  // namespace

TcbbReport tcbb_check(const std::vector<FourPointConfig>& cfgs, double K, double tol) {
  TcbbReport rep;
  rep.K = K;
  rep.tol = tol;
  rep.attempts = cfgs.size();
  std::vector<Outcome> out(cfgs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long i = 0; i < long(cfgs.size()); ++i) out[std::size_t(i)] = evaluate(cfgs[std::size_t(i)], K);
  for (std::size_t i = 0; i < cfgs.size(); ++i) accumulate(rep, cfgs[i], out[i]);
  rep.pass = rep.valid > 0 && rep.worstMargin >= -tol;
  return rep;
}

TcbbReport tcbb_verify(const GeneralizedCone& cone, double K, std::size_t samples, double tol,
                       std::uint64_t seed) {
  cone.build();
  const std::size_t T1 = cone.time_points(), n = cone.fiber().size();
  const std::size_t maxAttempts = 200 * std::max<std::size_t>(samples, 1);
  std::vector<FourPointConfig> cfgs;
  double width = 0;
  std::size_t attempt = 0;
  for (; attempt < maxAttempts && cfgs.size() < samples; ++attempt) {
    std::seed_seq ss{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(attempt)};
    std::mt19937_64 rng(ss);
    std::uniform_int_distribution<std::size_t> ut(0, T1 - 1), ux(0, n - 1);
    std::array<GridPoint, 4> P;
    for (auto& p : P) p = {ut(rng), ux(rng)};
    std::stable_sort(P.begin(), P.end(), [](GridPoint a, GridPoint b) { return a.t < b.t; });
    FourPointConfig c;
    c.past = attempt % 2 == 1;
    GridPoint y, x, z1, z2;
    if (!c.past) {
      y = P[0], x = P[1], z1 = P[2], z2 = P[3];
      if (!(cone.ell(y, x) > 0) || !(cone.ell(x, z1) > 0) || cone.ell(z1, z2) == kNegInf) continue;
      c.yx = cone.ell(y, x);
      c.yz1 = cone.ell(y, z1), c.yz2 = cone.ell(y, z2);
      c.xz1 = cone.ell(x, z1), c.xz2 = cone.ell(x, z2);
      c.zz = cone.ell_hi(z1, z2);
      width = std::max(width, c.zz - cone.ell(z1, z2));
    } else {
      z2 = P[0], z1 = P[1], x = P[2], y = P[3];
      if (cone.ell(z2, z1) == kNegInf || !(cone.ell(z1, x) > 0) || !(cone.ell(x, y) > 0)) continue;
      c.yx = cone.ell(x, y);
      c.yz1 = cone.ell(z1, y), c.yz2 = cone.ell(z2, y);
      c.xz1 = cone.ell(z1, x), c.xz2 = cone.ell(z2, x);
      c.zz = cone.ell_hi(z2, z1);
      width = std::max(width, c.zz - cone.ell(z2, z1));
    }
    c.points = std::array<GridPoint, 4>{y, x, z1, z2};
    cfgs.push_back(c);
  }
  TcbbReport rep = tcbb_check(cfgs, K, tol);
  rep.attempts = attempt;
  rep.bracketWidth = width;
  if (rep.valid < 10)
    throw Error(ErrorCode::InsufficientSamples,
                "only " + std::to_string(rep.valid) + " valid configurations after " + std::to_string(attempt) +
                    " attempts");
  return rep;
}

}  // namespace lorcone
