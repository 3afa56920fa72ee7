#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <tuple>
#include <vector>

#include "octgeom/distance.hpp"
#include "octgeom/forest.hpp"

namespace octgeom {

struct PredicateAgreement {
  std::size_t samples = 0;
  std::size_t in_band = 0;        // exempt: |exact - d| within the tie band
  std::size_t near_samples = 0;   // predicate true
  std::size_t disagreements = 0;  // outside the band, predicate != referee
};

/// Relative width of the tie band around d_spec inside which single-precision
/// predicates and the double-precision referee may legitimately differ.
inline constexpr double kBoundaryBand = 1e-4;

/// Seeded comparison of the range predicate (check_near_edge / check_near_triangle)
/// against exact distances. Faces have vertices uniform in [-2, 2]^D and
/// d_spec is log-uniform in [1e-3, 1]. A third of the query points are
/// uniform in the box; the rest are scattered around a random point of the
/// face at distances up to 2 d_spec so both outcomes are well represented.
template <int D>
PredicateAgreement sample_predicate_agreement(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-2.0, 2.0), unit(0.0, 1.0), log_d(std::log(1e-3), 0.0);
  std::normal_distribution<double> gauss;

  PredicateAgreement out;
  while (out.samples < n) {
    std::array<Point<D>, D> face;
    for (auto& v : face)
      for (int c = 0; c < D; ++c) v[c] = float(box(rng));
    if (is_degenerate_face<D>(face)) continue;
    const float d_spec = float(std::exp(log_d(rng)));

    PointD<D> q;
    if (unit(rng) < 1.0 / 3.0) {
      for (int c = 0; c < D; ++c) q[c] = box(rng);
    } else {
      // Random point on the face (corners and edges included with positive
      // probability), then a random offset.
      std::array<double, D> w{};
      double sum = 0.0;
      for (auto& x : w) {
        x = unit(rng) < 0.2 ? 0.0 : -std::log(1.0 - unit(rng));
        sum += x;
      }
      if (sum == 0.0) w[0] = sum = 1.0;
      q.setZero();
      for (int j = 0; j < D; ++j) q += (w[std::size_t(j)] / sum) * face[std::size_t(j)].template cast<double>();
      PointD<D> dir;
      for (int c = 0; c < D; ++c) dir[c] = gauss(rng);
      if (dir.norm() == 0.0) continue;
      q += dir.normalized() * (2.0 * d_spec * unit(rng));
      for (int c = 0; c < D; ++c) q[c] = std::clamp(q[c], -2.0, 2.0);
    }
    const Point<D> x = q.template cast<float>();

    double scale = 0.0;
    for (int j = 0; j < D; ++j)
      scale = std::max(scale, double((face[std::size_t((j + 1) % D)] - face[std::size_t(j)]).norm()));
    const double exact = exact_point_face_distance<D>(x, face);
    bool predicate;
    if constexpr (D == 2)
      predicate = check_near_edge(x, face[0], face[1], d_spec);
    else
      predicate = check_near_triangle(x, face[0], face[1], face[2], d_spec);

    ++out.samples;
    out.near_samples += predicate;
    if (std::abs(exact - double(d_spec)) <= kBoundaryBand * std::max(1.0, scale)) {
      ++out.in_band;
      continue;
    }
    if (predicate != (exact <= double(d_spec))) ++out.disagreements;
  }
  return out;
}

template <int D>
using BlockKey = std::tuple<int, LatticeIndex<D>>;

/// (level, lattice position) of every block, sorted; comparable across
/// forests whose block IDs were assigned in different orders.
template <int D>
std::vector<BlockKey<D>> block_keys(const Forest<D>& forest) {
  std::vector<BlockKey<D>> keys;
  keys.reserve(forest.size());
  for (const auto& b : forest.blocks()) keys.emplace_back(b.level, b.pos);
  std::sort(keys.begin(), keys.end());
  return keys;
}

template <int D>
std::vector<BlockKey<D>> leaf_keys(const Forest<D>& forest) {
  std::vector<BlockKey<D>> keys;
  for (const auto& b : forest.blocks())
    if (!b.has_children()) keys.emplace_back(b.level, b.pos);
  std::sort(keys.begin(), keys.end());
  return keys;
}

/// True when `fine` refines everywhere `coarse` does: every block of
/// `coarse` also exists in `fine`, so no region of `fine` is less resolved.
template <int D>
bool refines_at_least(const Forest<D>& fine, const Forest<D>& coarse) {
  const auto a = block_keys(fine), b = block_keys(coarse);
  return std::includes(a.begin(), a.end(), b.begin(), b.end());
}

/// Face-adjacent leaves differ by at most one level.
template <int D>
bool is_2to1_balanced(const Forest<D>& forest) {
  for (BlockId id = 0; id < BlockId(forest.size()); ++id) {
    if (!forest.is_leaf(id)) continue;
    for (BlockId nb : face_neighbor_leaves(forest, id))
      if (std::abs(forest.block(nb).level - forest.block(id).level) > 1) return false;
  }
  return true;
}

}  // namespace octgeom
