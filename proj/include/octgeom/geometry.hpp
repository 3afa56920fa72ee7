#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "octgeom/error.hpp"
#include "octgeom/point.hpp"

namespace octgeom {

using FaceId = std::int32_t;

/// Shared vertex array plus D vertex indices per face (edges in 2D,
/// triangles in 3D).
template <int D>
struct IndexedGeometry {
  static constexpr int dim = D;
  using Face = std::array<std::int32_t, D>;

  std::vector<Point<D>> vertices;
  std::vector<Face> faces;

  std::size_t n_faces() const { return faces.size(); }

  /// Throws invalid_parameter when an index is out of range, a face repeats a
  /// vertex, or a coordinate is not finite.
  void validate() const {
    for (std::size_t v = 0; v < vertices.size(); ++v)
      if (!is_finite<D>(vertices[v]))
        throw Error(ErrorCode::invalid_parameter, "vertex " + std::to_string(v) + " is not finite");
    for (std::size_t f = 0; f < faces.size(); ++f) {
      for (int j = 0; j < D; ++j) {
        const auto idx = faces[f][j];
        if (idx < 0 || std::size_t(idx) >= vertices.size())
          throw Error(ErrorCode::invalid_parameter,
                      "face " + std::to_string(f) + " references missing vertex " + std::to_string(idx));
        for (int k = 0; k < j; ++k)
          if (faces[f][k] == idx)
            throw Error(ErrorCode::invalid_parameter, "face " + std::to_string(f) + " repeats a vertex");
      }
    }
  }

  /// Appends another sub-mesh, shifting its indices past the current vertices.
  void append(const IndexedGeometry& other) {
    const auto offset = std::int32_t(vertices.size());
    vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
    faces.reserve(faces.size() + other.faces.size());
    for (Face f : other.faces) {
      for (auto& i : f) i += offset;
      faces.push_back(f);
    }
  }
};

/// Per-face vertex coordinates in structure-of-arrays form: component c of
/// vertex j for every face is one contiguous run of n_faces floats.
template <int D>
class CoordListGeometry {
 public:
  static constexpr int dim = D;

  CoordListGeometry() = default;
  explicit CoordListGeometry(std::size_t n_faces) : n_faces_(n_faces), coords_(n_faces * D * D, 0.0f) {}

  std::size_t n_faces() const { return n_faces_; }
  bool empty() const { return n_faces_ == 0; }

  std::span<const float> component(int vertex, int c) const {
    return {coords_.data() + run_offset(vertex, c), n_faces_};
  }
  std::span<float> component(int vertex, int c) { return {coords_.data() + run_offset(vertex, c), n_faces_}; }

  Point<D> vertex(std::size_t face, int j) const {
    Point<D> p;
    for (int c = 0; c < D; ++c) p[c] = coords_[run_offset(j, c) + face];
    return p;
  }

  void set_vertex(std::size_t face, int j, const Point<D>& p) {
    for (int c = 0; c < D; ++c) coords_[run_offset(j, c) + face] = p[c];
  }

  std::array<Point<D>, D> face(std::size_t f) const {
    std::array<Point<D>, D> out;
    for (int j = 0; j < D; ++j) out[j] = vertex(f, j);
    return out;
  }

  static CoordListGeometry from_faces(std::span<const std::array<Point<D>, D>> faces) {
    CoordListGeometry out(faces.size());
    for (std::size_t f = 0; f < faces.size(); ++f)
      for (int j = 0; j < D; ++j) out.set_vertex(f, j, faces[f][j]);
    return out;
  }

  std::span<const float> raw() const { return coords_; }

  friend bool operator==(const CoordListGeometry&, const CoordListGeometry&) = default;

 private:
  std::size_t run_offset(int vertex, int c) const { return std::size_t(vertex * D + c) * n_faces_; }

  std::size_t n_faces_ = 0;
  std::vector<float> coords_;
};

/// Closed polygon of n_edges edges, vertex k at angle 2*pi*k/n_edges.
inline IndexedGeometry<2> generate_circle(const Point<2>& center, double radius, int n_edges) {
  if (n_edges < 3) throw Error(ErrorCode::invalid_parameter, "circle needs at least 3 edges");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::invalid_parameter, "circle radius must be positive");
  IndexedGeometry<2> g;
  g.vertices.reserve(std::size_t(n_edges));
  g.faces.reserve(std::size_t(n_edges));
  for (int k = 0; k < n_edges; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / n_edges;
    g.vertices.emplace_back(float(center[0] + radius * std::cos(angle)),
                            float(center[1] + radius * std::sin(angle)));
    g.faces.push_back({k, (k + 1) % n_edges});
  }
  return g;
}

/// Latitude-longitude sphere: triangle fans at both poles and two triangles
/// per interior quad, wound so (v2-v1)x(v3-v1) points outward.
inline IndexedGeometry<3> generate_sphere(const Point<3>& center, double radius, int n_lat, int n_lon) {
  if (n_lat < 2 || n_lon < 3)
    throw Error(ErrorCode::invalid_parameter, "sphere needs n_lat >= 2 and n_lon >= 3");
  if (!(radius > 0.0) || !std::isfinite(radius))
    throw Error(ErrorCode::invalid_parameter, "sphere radius must be positive");

  IndexedGeometry<3> g;
  auto add_vertex = [&](double theta, double phi) {
    g.vertices.emplace_back(float(center[0] + radius * std::sin(theta) * std::cos(phi)),
                            float(center[1] + radius * std::sin(theta) * std::sin(phi)),
                            float(center[2] + radius * std::cos(theta)));
  };

  add_vertex(0.0, 0.0);
  for (int i = 1; i < n_lat; ++i)
    for (int j = 0; j < n_lon; ++j)
      add_vertex(std::numbers::pi * i / n_lat, 2.0 * std::numbers::pi * j / n_lon);
  add_vertex(std::numbers::pi, 0.0);

  const std::int32_t north = 0;
  const auto south = std::int32_t(g.vertices.size() - 1);
  auto ring = [n_lon](int i, int j) { return std::int32_t(1 + (i - 1) * n_lon + (j % n_lon)); };

  g.faces.reserve(std::size_t(2 * n_lon + 2 * (n_lat - 2) * n_lon));
  for (int j = 0; j < n_lon; ++j) g.faces.push_back({north, ring(1, j), ring(1, j + 1)});
  for (int i = 1; i + 1 < n_lat; ++i)
    for (int j = 0; j < n_lon; ++j) {
      g.faces.push_back({ring(i, j), ring(i + 1, j), ring(i + 1, j + 1)});
      g.faces.push_back({ring(i, j), ring(i + 1, j + 1), ring(i, j + 1)});
    }
  for (int j = 0; j < n_lon; ++j) g.faces.push_back({south, ring(n_lat - 1, j + 1), ring(n_lat - 1, j)});
  return g;
}

/// Expands an indexed mesh into per-face coordinates, keeping face order and
/// winding. Shared vertices are duplicated.
template <int D>
CoordListGeometry<D> index_to_coords(const IndexedGeometry<D>& g) {
  g.validate();
  CoordListGeometry<D> out(g.n_faces());
  for (int j = 0; j < D; ++j)
    for (int c = 0; c < D; ++c) {
      auto run = out.component(j, c);
      for (std::size_t f = 0; f < g.n_faces(); ++f) run[f] = g.vertices[std::size_t(g.faces[f][j])][c];
    }
  return out;
}

template <int D>
Aabb<D> bounding_box(const CoordListGeometry<D>& g) {
  if (g.empty()) throw Error(ErrorCode::empty_geometry, "bounding box of an empty geometry");
  Aabb<D> box{g.vertex(0, 0), g.vertex(0, 0)};
  for (int j = 0; j < D; ++j)
    for (int c = 0; c < D; ++c) {
      const auto run = g.component(j, c);
      const auto [lo, hi] = std::minmax_element(run.begin(), run.end());
      box.min[c] = std::min(box.min[c], *lo);
      box.max[c] = std::max(box.max[c], *hi);
    }
  return box;
}

}  // namespace octgeom
