#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>

#include "octgeom/error.hpp"

namespace octgeom {

template <int D>
concept SupportedDim = (D == 2 || D == 3);

/// Coordinates are stored in single precision throughout; the exact-distance
/// referee promotes to double internally.
template <int D>
  requires SupportedDim<D>
using Point = Eigen::Matrix<float, D, 1>;

template <int D>
using PointD = Eigen::Matrix<double, D, 1>;

template <int D>
bool is_finite(const Point<D>& p) {
  for (int c = 0; c < D; ++c)
    if (!std::isfinite(p[c])) return false;
  return true;
}

template <int D>
  requires SupportedDim<D>
struct Aabb {
  Point<D> min = Point<D>::Zero();
  Point<D> max = Point<D>::Zero();

  static Aabb unit() { return {Point<D>::Zero(), Point<D>::Ones()}; }

  Point<D> extent() const { return max - min; }

  bool valid() const {
    for (int c = 0; c < D; ++c)
      if (!(min[c] <= max[c]) || !std::isfinite(min[c]) || !std::isfinite(max[c])) return false;
    return true;
  }

  /// Inclusive containment with an absolute slack per axis of tol * extent.
  bool contains(const Point<D>& p, float tol = 0.0f) const {
    for (int c = 0; c < D; ++c) {
      const float slack = tol * (max[c] - min[c]);
      if (p[c] < min[c] - slack || p[c] > max[c] + slack) return false;
    }
    return true;
  }

  double measure() const {
    double m = 1.0;
    for (int c = 0; c < D; ++c) m *= double(max[c]) - double(min[c]);
    return m;
  }

  void expand(const Point<D>& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }

  friend bool operator==(const Aabb& a, const Aabb& b) { return a.min == b.min && a.max == b.max; }
};

/// z-component of the 2D cross product.
inline float cross2(const Point<2>& a, const Point<2>& b) { return a[0] * b[1] - a[1] * b[0]; }

}  // namespace octgeom
