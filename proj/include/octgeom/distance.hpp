#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>

#include "octgeom/error.hpp"
#include "octgeom/point.hpp"

namespace octgeom {

/// Degeneracy test in double: a triangle whose doubled area falls below
/// 1e-12 * (longest edge)^2 has no usable normal.
inline bool is_degenerate_triangle(const Point<3>& v1, const Point<3>& v2, const Point<3>& v3) {
  const PointD<3> a = v1.cast<double>(), b = v2.cast<double>(), c = v3.cast<double>();
  const double scale2 = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
  return scale2 == 0.0 || (b - a).cross(c - a).norm() < 1e-12 * scale2;
}

inline bool is_degenerate_edge(const Point<2>& v1, const Point<2>& v2) { return (v2 - v1).squaredNorm() == 0.0f; }

template <int D>
bool is_degenerate_face(const std::array<Point<D>, D>& f) {
  if constexpr (D == 2)
    return is_degenerate_edge(f[0], f[1]);
  else
    return is_degenerate_triangle(f[0], f[1], f[2]);
}

/// Union of three vertex balls, three edge cylinders clipped at the endpoint
/// planes, and the prism of half-thickness d_spec over the triangle. The
/// caller guarantees a non-degenerate triangle.
inline bool near_triangle(const Point<3>& x, const Point<3>& v1, const Point<3>& v2, const Point<3>& v3,
                          float d_spec) noexcept {
  const float r2 = d_spec * d_spec;
  const std::array<Point<3>, 3> v{v1, v2, v3};
  std::array<Point<3>, 3> unit_edge;

  for (int k = 0; k < 3; ++k) {
    const Point<3>& a = v[k];
    const Point<3>& b = v[(k + 1) % 3];
    if ((x - a).squaredNorm() <= r2) return true;  // vertex ball

    const Point<3> edge = b - a;
    const float len2 = edge.squaredNorm();
    const float dist2 = edge.cross(a - x).squaredNorm() / len2;
    unit_edge[k] = edge / std::sqrt(len2);
    const float along_from_a = -(a - x).dot(unit_edge[k]);
    const float along_to_b = (b - x).dot(unit_edge[k]);
    if (dist2 <= r2 && along_from_a >= 0.0f && along_to_b >= 0.0f) return true;  // edge cylinder
  }

  const Point<3> n = (v2 - v1).cross(v3 - v1).normalized();
  // Inside all three edge half-spaces. n x e_k points into the triangle for
  // the winding that defines n.
  for (int k = 0; k < 3; ++k)
    if (-(v[k] - x).dot(n.cross(unit_edge[k])) < 0.0f) return false;
  // Between the planes offset by +-d_spec along n.
  const bool above_lower = -(v1 - d_spec * n - x).dot(n) >= 0.0f;
  const bool below_upper = (v1 + d_spec * n - x).dot(n) >= 0.0f;
  return above_lower && below_upper;
}

/// 2D form: two disks plus the rectangle of half-width d_spec along the edge.
inline bool near_edge(const Point<2>& x, const Point<2>& v1, const Point<2>& v2, float d_spec) noexcept {
  const float r2 = d_spec * d_spec;
  if ((x - v1).squaredNorm() <= r2 || (x - v2).squaredNorm() <= r2) return true;
  const Point<2> edge = v2 - v1;
  const float len2 = edge.squaredNorm();
  const float c = cross2(edge, v1 - x);
  const float dist2 = c * c / len2;
  const Point<2> e = edge / std::sqrt(len2);
  const float along_from_a = -(v1 - x).dot(e);
  const float along_to_b = (v2 - x).dot(e);
  return dist2 <= r2 && along_from_a >= 0.0f && along_to_b >= 0.0f;
}

template <int D>
bool near_face(const Point<D>& x, const std::array<Point<D>, D>& f, float d_spec) noexcept {
  if constexpr (D == 2)
    return near_edge(x, f[0], f[1], d_spec);
  else
    return near_triangle(x, f[0], f[1], f[2], d_spec);
}

inline bool check_near_triangle(const Point<3>& x, const Point<3>& v1, const Point<3>& v2, const Point<3>& v3,
                                float d_spec) {
  if (!(d_spec > 0.0f)) throw Error(ErrorCode::invalid_parameter, "near-wall distance must be positive");
  if (is_degenerate_triangle(v1, v2, v3)) throw Error(ErrorCode::degenerate_face, "degenerate triangle");
  return near_triangle(x, v1, v2, v3, d_spec);
}

inline bool check_near_edge(const Point<2>& x, const Point<2>& v1, const Point<2>& v2, float d_spec) {
  if (!(d_spec > 0.0f)) throw Error(ErrorCode::invalid_parameter, "near-wall distance must be positive");
  if (is_degenerate_edge(v1, v2)) throw Error(ErrorCode::degenerate_face, "degenerate edge");
  return near_edge(x, v1, v2, d_spec);
}

/// Squared distance to the closed segment [a, b], by clamped projection in
/// double precision.
template <int D>
double point_segment_distance_sq(const Point<D>& x, const Point<D>& a, const Point<D>& b) {
  const PointD<D> xd = x.template cast<double>(), ad = a.template cast<double>(), bd = b.template cast<double>();
  const PointD<D> ab = bd - ad;
  const double len2 = ab.squaredNorm();
  if (len2 == 0.0) throw Error(ErrorCode::degenerate_face, "degenerate segment");
  const double t = std::clamp((xd - ad).dot(ab) / len2, 0.0, 1.0);
  return (xd - (ad + t * ab)).squaredNorm();
}

/// Exact Euclidean distance to the closed triangle, via the closest point over
/// the vertex, edge and face Voronoi regions, in double precision.
inline double exact_point_triangle_distance(const Point<3>& x, const Point<3>& v1, const Point<3>& v2,
                                            const Point<3>& v3) {
  if (is_degenerate_triangle(v1, v2, v3)) throw Error(ErrorCode::degenerate_face, "degenerate triangle");
  using V = PointD<3>;
  const V p = x.cast<double>(), a = v1.cast<double>(), b = v2.cast<double>(), c = v3.cast<double>();

  const V ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();

  const V bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double t = d1 / (d1 - d3);
    return (p - (a + t * ab)).norm();
  }

  const V cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double t = d2 / (d2 - d6);
    return (p - (a + t * ac)).norm();
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return (p - (b + t * (c - b))).norm();
  }

  const double denom = 1.0 / (va + vb + vc);
  const double s = vb * denom, t = vc * denom;
  return (p - (a + s * ab + t * ac)).norm();
}

/// Exact distance to a face of either dimension (segment or triangle).
template <int D>
double exact_point_face_distance(const Point<D>& x, const std::array<Point<D>, D>& f) {
  if constexpr (D == 2)
    return std::sqrt(point_segment_distance_sq<2>(x, f[0], f[1]));
  else
    return exact_point_triangle_distance(x, f[0], f[1], f[2]);
}

}  // namespace octgeom
