#include "lorcone/metricspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lorcone/errors.hpp"

namespace lorcone {

FiniteMetricSpace::FiniteMetricSpace(std::size_t n, std::vector<double> dist, std::size_t base,
                                     double tol)
    : n_(n), base_(base), d_(std::move(dist)) {
  if (n_ == 0) throw Error(ErrorCode::InvalidMetric, "metric space needs at least one point");
  if (d_.size() != n_ * n_) throw Error(ErrorCode::InvalidMetric, "distance table is not n x n");
  if (base_ >= n_) throw Error(ErrorCode::InvalidMetric, "base point out of range");
  for (std::size_t i = 0; i < n_; ++i) {
    if ((*this)(i, i) != 0.0) throw Error(ErrorCode::InvalidMetric, "nonzero diagonal");
    for (std::size_t j = 0; j < n_; ++j) {
      double v = (*this)(i, j);
      if (!std::isfinite(v)) throw Error(ErrorCode::InvalidMetric, "non-finite distance");
      if (i != j && !(v > 0)) throw Error(ErrorCode::InvalidMetric, "distinct points at distance 0");
      if (std::abs(v - (*this)(j, i)) > tol) throw Error(ErrorCode::InvalidMetric, "asymmetric table");
      diam_ = std::max(diam_, v);
    }
  }
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j)
      for (std::size_t k = 0; k < n_; ++k)
        if ((*this)(i, k) > (*this)(i, j) + (*this)(j, k) + tol)
          throw Error(ErrorCode::InvalidMetric, "triangle inequality fails");
}

FiniteMetricSpace FiniteMetricSpace::scaled(double s) const {
  std::vector<double> d(d_);
  for (auto& v : d) v *= s;
  return FiniteMetricSpace(n_, std::move(d), base_);
}

FiniteMetricSpace FiniteMetricSpace::subspace(const std::vector<std::size_t>& idx,
                                              std::size_t new_base) const {
  std::size_t m = idx.size();
  std::vector<double> d(m * m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) d[i * m + j] = (*this)(idx[i], idx[j]);
  return FiniteMetricSpace(m, std::move(d), new_base);
}

FiniteMetricSpace segment(double length, std::size_t n) {
  if (n == 0 || !(length > 0 || n == 1))
    throw Error(ErrorCode::InvalidInput, "segment needs n >= 1 and positive length");
  std::vector<double> d(n * n);
  double h = n > 1 ? length / double(n - 1) : 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      d[i * n + j] = h * std::abs(double(i) - double(j));
  return FiniteMetricSpace(n, std::move(d), 0);
}

FiniteMetricSpace circle_arc(double radius, double angle, std::size_t n) {
  if (!(radius > 0) || !(angle > 0) || angle > 2 * 3.14159265358979323846)
    throw Error(ErrorCode::InvalidInput, "circle arc needs radius > 0 and angle in (0, 2pi]");
  std::vector<double> d(n * n);
  double step = n > 1 ? angle / double(n - 1) : 0.0;
  double full = 2 * 3.14159265358979323846 * radius;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double arc = radius * step * std::abs(double(i) - double(j));
      d[i * n + j] = std::min(arc, full - arc);
    }
  return FiniteMetricSpace(n, std::move(d), 0);
}

std::vector<std::size_t> ball_indices(const FiniteMetricSpace& X, double radius) {
  if (radius < 0) throw Error(ErrorCode::InvalidInput, "negative ball radius");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < X.size(); ++i)
    if (X(X.base(), i) <= radius) idx.push_back(i);
  return idx;
}

FiniteMetricSpace ball_subspace(const FiniteMetricSpace& X, double radius) {
  auto idx = ball_indices(X, radius);
  auto it = std::find(idx.begin(), idx.end(), X.base());
  return X.subspace(idx, std::size_t(it - idx.begin()));
}

double distortion(const FiniteMetricSpace& A, const FiniteMetricSpace& B,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  double dis = 0;
  for (std::size_t u = 0; u < pairs.size(); ++u)
    for (std::size_t v = u + 1; v < pairs.size(); ++v) {
      auto [a, b] = pairs[u];
      auto [a2, b2] = pairs[v];
      dis = std::max(dis, std::abs(A(a, a2) - B(b, b2)));
    }
  return dis;
}

bool is_correspondence(const Correspondence& c, std::size_t na, std::size_t nb) {
  std::vector<char> ca(na, 0), cb(nb, 0);
  for (auto [a, b] : c.pairs) {
    if (a >= na || b >= nb) return false;
    ca[a] = cb[b] = 1;
  }
  return std::all_of(ca.begin(), ca.end(), [](char x) { return x; }) &&
         std::all_of(cb.begin(), cb.end(), [](char x) { return x; });
}

namespace {

std::vector<double> distance_values(const FiniteMetricSpace& X) {
  std::vector<double> v;
  for (std::size_t i = 0; i < X.size(); ++i)
    for (std::size_t j = i; j < X.size(); ++j) v.push_back(X(i, j));
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

double directed_gap(const std::vector<double>& from, const std::vector<double>& to) {
  double worst = 0;
  for (double x : from) {
    auto it = std::lower_bound(to.begin(), to.end(), x);
    double best = std::numeric_limits<double>::infinity();
    if (it != to.end()) best = *it - x;
    if (it != to.begin()) best = std::min(best, x - *(it - 1));
    worst = std::max(worst, best);
  }
  return worst;
}

// Base-anchored greedy matching, then a few passes of single-pair reassignment.
Correspondence greedy_witness(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  std::size_t na = A.size(), nb = B.size();
  std::vector<std::size_t> phi(na), psi(nb);
  for (std::size_t a = 0; a < na; ++a) {
    double ra = A(A.base(), a), best = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < nb; ++b) {
      double g = std::abs(ra - B(B.base(), b));
      if (g < best) best = g, phi[a] = b;
    }
  }
  for (std::size_t b = 0; b < nb; ++b) {
    double rb = B(B.base(), b), best = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < na; ++a) {
      double g = std::abs(rb - A(A.base(), a));
      if (g < best) best = g, psi[b] = a;
    }
  }
  auto build = [&] {
    std::vector<std::pair<std::size_t, std::size_t>> p;
    for (std::size_t a = 0; a < na; ++a) p.emplace_back(a, phi[a]);
    for (std::size_t b = 0; b < nb; ++b) p.emplace_back(psi[b], b);
    std::sort(p.begin(), p.end());
    p.erase(std::unique(p.begin(), p.end()), p.end());
    return p;
  };
  auto pairs = build();
  double dis = distortion(A, B, pairs);
  for (int pass = 0; pass < 3; ++pass) {
    bool improved = false;
    for (std::size_t a = 0; a < na; ++a) {
      std::size_t keep = phi[a];
      for (std::size_t b = 0; b < nb; ++b) {
        if (b == keep) continue;
        phi[a] = b;
        auto cand = build();
        double d = distortion(A, B, cand);
        if (d < dis) dis = d, pairs = cand, keep = b, improved = true;
      }
      phi[a] = keep;
    }
    for (std::size_t b = 0; b < nb; ++b) {
      std::size_t keep = psi[b];
      for (std::size_t a = 0; a < na; ++a) {
        if (a == keep) continue;
        psi[b] = a;
        auto cand = build();
        double d = distortion(A, B, cand);
        if (d < dis) dis = d, pairs = cand, keep = a, improved = true;
      }
      psi[b] = keep;
    }
    if (!improved) break;
  }
  return {pairs, dis};
}

// Pairs points by index rank. Useful when both spaces come from grids sampled
// in the same order, where the base-anchored match confuses mirror images.
Correspondence rank_relation(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  std::size_t na = A.size(), nb = B.size();
  auto scale = [](std::size_t k, std::size_t from, std::size_t to) {
    return from < 2 ? std::size_t(0) : std::size_t(std::llround(double(k) * double(to - 1) / double(from - 1)));
  };
  Correspondence c;
  for (std::size_t a = 0; a < na; ++a) c.pairs.emplace_back(a, scale(a, na, nb));
  for (std::size_t b = 0; b < nb; ++b) c.pairs.emplace_back(scale(b, nb, na), b);
  std::sort(c.pairs.begin(), c.pairs.end());
  c.pairs.erase(std::unique(c.pairs.begin(), c.pairs.end()), c.pairs.end());
  c.distortion = distortion(A, B, c.pairs);
  return c;
}

Correspondence full_relation(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  Correspondence c;
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t b = 0; b < B.size(); ++b) c.pairs.emplace_back(a, b);
  c.distortion = distortion(A, B, c.pairs);
  return c;
}

// Branch and bound over minimal correspondences: a map phi: A -> B followed by
// partners for the points of B that phi misses. Every correspondence contains
// one of these, and distortion is monotone under inclusion.
struct ExactSearch {
  const FiniteMetricSpace& A;
  const FiniteMetricSpace& B;
  std::vector<std::size_t> order;
  std::vector<std::pair<std::size_t, std::size_t>> cur;
  std::vector<int> cover;
  std::vector<std::size_t> missing;
  double best;
  std::vector<std::pair<std::size_t, std::size_t>> best_pairs;

  double added_cost(std::size_t a, std::size_t b) const {
    double d = 0;
    for (auto [a2, b2] : cur) d = std::max(d, std::abs(A(a, a2) - B(b, b2)));
    return d;
  }

  void fill_missing(std::size_t k, double dis) {
    if (k == missing.size()) {
      best = dis;
      best_pairs = cur;
      return;
    }
    std::size_t b = missing[k];
    for (std::size_t a = 0; a < A.size(); ++a) {
      double d = std::max(dis, added_cost(a, b));
      if (d >= best) continue;
      cur.emplace_back(a, b);
      fill_missing(k + 1, d);
      cur.pop_back();
    }
  }

  void assign(std::size_t k, double dis) {
    if (k == order.size()) {
      missing.clear();
      for (std::size_t b = 0; b < B.size(); ++b)
        if (cover[b] == 0) missing.push_back(b);
      fill_missing(0, dis);
      return;
    }
    std::size_t a = order[k];
    for (std::size_t b = 0; b < B.size(); ++b) {
      double d = std::max(dis, added_cost(a, b));
      if (d >= best) continue;
      cur.emplace_back(a, b);
      ++cover[b];
      assign(k + 1, d);
      --cover[b];
      cur.pop_back();
    }
  }
};

}  // namespace

double gh_lower_bound(const FiniteMetricSpace& A, const FiniteMetricSpace& B) {
  auto va = distance_values(A), vb = distance_values(B);
  return 0.5 * std::max(directed_gap(va, vb), directed_gap(vb, va));
}

GhBracket gh_distance(const FiniteMetricSpace& A, const FiniteMetricSpace& B, GhMode mode) {
  Correspondence seed = greedy_witness(A, B);
  Correspondence full = full_relation(A, B);
  if (full.distortion < seed.distortion) seed = full;
  Correspondence rank = rank_relation(A, B);
  if (rank.distortion < seed.distortion) seed = rank;

  if (mode == GhMode::Heuristic) {
    double lo = gh_lower_bound(A, B);
    return {std::min(lo, 0.5 * seed.distortion), 0.5 * seed.distortion, seed};
  }
  if (std::max(A.size(), B.size()) > kExactGhCap)
    throw Error(ErrorCode::SizeLimit, "exact GH search is capped at 8 points per space");

  std::vector<std::size_t> order(A.size());
  std::iota(order.begin(), order.end(), 0);
  // Far-apart points first: they constrain the search most.
  std::vector<double> ecc(A.size(), 0);
  for (std::size_t a = 0; a < A.size(); ++a)
    for (std::size_t a2 = 0; a2 < A.size(); ++a2) ecc[a] = std::max(ecc[a], A(a, a2));
  std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return ecc[x] > ecc[y]; });

  // Slightly above the seed so that the seed itself can be rediscovered.
  double start = seed.distortion * (1 + 1e-12) + 1e-300;
  std::size_t first = order[0];
  std::vector<double> branch_best(B.size(), start);
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> branch_pairs(B.size());

#pragma omp parallel for schedule(dynamic)
  for (std::size_t b0 = 0; b0 < B.size(); ++b0) {
    ExactSearch s{A, B, order, {}, std::vector<int>(B.size(), 0), {}, start, {}};
    s.cur.emplace_back(first, b0);
    s.cover[b0] = 1;
    s.assign(1, 0.0);
    branch_best[b0] = s.best;
    branch_pairs[b0] = std::move(s.best_pairs);
  }

  Correspondence w = seed;
  for (std::size_t b0 = 0; b0 < B.size(); ++b0)
    if (!branch_pairs[b0].empty() && branch_best[b0] < w.distortion) {
      w.pairs = branch_pairs[b0];
      w.distortion = branch_best[b0];
    }
  std::sort(w.pairs.begin(), w.pairs.end());
  w.distortion = distortion(A, B, w.pairs);
  return {0.5 * w.distortion, 0.5 * w.distortion, w};
}

}  // namespace lorcone
