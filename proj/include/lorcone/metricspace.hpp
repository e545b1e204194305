#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace lorcone {

class FiniteMetricSpace {
public:
  FiniteMetricSpace() = default;
  // Validates symmetry, zero diagonal, positivity and the triangle inequality.
  FiniteMetricSpace(std::size_t n, std::vector<double> dist, std::size_t base = 0,
                    double tol = 1e-9);

  std::size_t size() const { return n_; }
  std::size_t base() const { return base_; }
  double operator()(std::size_t i, std::size_t j) const { return d_[i * n_ + j]; }
  const std::vector<double>& table() const { return d_; }
  double diameter() const { return diam_; }

  // Every distance multiplied by s > 0.
  FiniteMetricSpace scaled(double s) const;
  FiniteMetricSpace subspace(const std::vector<std::size_t>& idx, std::size_t new_base) const;

private:
  std::size_t n_ = 0;
  std::size_t base_ = 0;
  std::vector<double> d_;
  double diam_ = 0;
};

FiniteMetricSpace segment(double length, std::size_t n);
// Arc of a circle with the intrinsic (arc-length) metric.
FiniteMetricSpace circle_arc(double radius, double angle, std::size_t n);

FiniteMetricSpace ball_subspace(const FiniteMetricSpace& X, double radius);
std::vector<std::size_t> ball_indices(const FiniteMetricSpace& X, double radius);

struct Correspondence {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double distortion = 0;
};

double distortion(const FiniteMetricSpace& A, const FiniteMetricSpace& B,
                  const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
bool is_correspondence(const Correspondence& c, std::size_t na, std::size_t nb);

enum class GhMode { Exact, Heuristic };

struct GhBracket {
  double lower = 0;
  double upper = 0;
  Correspondence witness;
};

inline constexpr std::size_t kExactGhCap = 8;

GhBracket gh_distance(const FiniteMetricSpace& A, const FiniteMetricSpace& B, GhMode mode);

// Lower bound alone: half the Hausdorff distance between the distance-value sets.
double gh_lower_bound(const FiniteMetricSpace& A, const FiniteMetricSpace& B);

}  // namespace lorcone
