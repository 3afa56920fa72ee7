#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "octgeom/distance.hpp"
#include "octgeom/error.hpp"
#include "octgeom/executor.hpp"
#include "octgeom/geometry.hpp"

namespace octgeom {

template <int D>
using BinCoord = std::array<int, D>;

template <int D>
struct BinIndex {
  BinCoord<D> coord{};
  std::size_t linear = 0;

  friend bool operator==(const BinIndex&, const BinIndex&) = default;
};

/// Regular grid of B bins per axis over a domain.
template <int D>
class BinGrid {
 public:
  BinGrid(const Aabb<D>& domain, int density) : domain_(domain), density_(density) {
    if (density < 1) throw Error(ErrorCode::invalid_parameter, "bin density must be >= 1");
    if (!domain.valid()) throw Error(ErrorCode::invalid_parameter, "invalid bin domain");
    bin_length_ = domain.extent() / float(density);
    for (int c = 0; c < D; ++c)
      if (!(bin_length_[c] > 0.0f)) throw Error(ErrorCode::invalid_parameter, "bin domain has zero extent");
    n_bins_ = 1;
    for (int c = 0; c < D; ++c) n_bins_ *= std::size_t(density);
  }

  const Aabb<D>& domain() const { return domain_; }
  int density() const { return density_; }
  const Point<D>& bin_length() const { return bin_length_; }
  std::size_t n_bins() const { return n_bins_; }

  std::size_t linearize(const BinCoord<D>& b) const {
    std::size_t idx = 0;
    for (int c = D - 1; c >= 0; --c) idx = idx * std::size_t(density_) + std::size_t(b[c]);
    return idx;
  }

  BinCoord<D> delinearize(std::size_t idx) const {
    BinCoord<D> b{};
    for (int c = 0; c < D; ++c) {
      b[c] = int(idx % std::size_t(density_));
      idx /= std::size_t(density_);
    }
    return b;
  }

  /// Bin of a point known to lie in the domain; coordinates are clamped into
  /// [0, B-1] per axis.
  BinIndex<D> locate_clamped(const Point<D>& p) const noexcept {
    BinIndex<D> out;
    for (int c = 0; c < D; ++c) {
      const float t = std::floor((p[c] - domain_.min[c]) / bin_length_[c]);
      out.coord[c] = t < 0.0f ? 0 : (t >= float(density_) ? density_ - 1 : int(t));
    }
    out.linear = linearize(out.coord);
    return out;
  }

  friend bool operator==(const BinGrid& a, const BinGrid& b) {
    return a.domain_ == b.domain_ && a.density_ == b.density_;
  }

 private:
  Aabb<D> domain_;
  int density_;
  Point<D> bin_length_;
  std::size_t n_bins_;
};

/// Relative tolerance (of the domain extent) for points sitting on or just
/// past the domain boundary.
inline constexpr float kDomainTolerance = 1e-6f;

template <int D>
BinIndex<D> bin_of_point(const Point<D>& p, const BinGrid<D>& grid) {
  if (!grid.domain().contains(p, kDomainTolerance))
    throw Error(ErrorCode::point_outside_domain, "point lies outside the binning domain");
  return grid.locate_clamped(p);
}

/// Number of batches and bins per batch for the fill pass.
struct BinFraction {
  int fraction = 1;

  std::size_t bins_per_batch(std::size_t n_bins) const {
    if (fraction < 1) throw Error(ErrorCode::invalid_parameter, "bin fraction must be >= 1");
    return std::max<std::size_t>(1, (n_bins + std::size_t(fraction) - 1) / std::size_t(fraction));
  }
};

/// Smallest bin fraction whose per-batch indicator fits in max_slots.
inline int min_bin_fraction(std::size_t n_faces, std::size_t n_bins, std::size_t max_slots) {
  if (n_faces == 0) return 1;
  const std::size_t bins_fit = std::max<std::size_t>(1, max_slots / n_faces);
  return int(std::min(n_bins, (n_bins + bins_fit - 1) / bins_fit));
}

/// Visits sample points of a face spaced no further apart than `spacing`.
/// An edge of length l yields ceil(l/spacing)+1 points including both ends.
/// A triangle samples edge v1-v2 that way, then each segment from those
/// points to v3; v3 is emitted once at the end.
template <int D, typename Fn>
void for_each_sample(const std::array<Point<D>, D>& face, float spacing, Fn&& fn) {
  auto segment_steps = [spacing](const Point<D>& a, const Point<D>& b) {
    const float len = (b - a).norm();
    return std::max(1, int(std::ceil(len / spacing)));
  };
  auto lerp = [](const Point<D>& a, const Point<D>& b, float t) {
    Point<D> p;
    for (int c = 0; c < D; ++c) p[c] = std::lerp(a[c], b[c], t);
    return p;
  };

  const int n = segment_steps(face[0], face[1]);
  if constexpr (D == 2) {
    for (int i = 0; i <= n; ++i) fn(lerp(face[0], face[1], float(i) / float(n)));
  } else {
    for (int i = 0; i <= n; ++i) {
      const Point<3> base = lerp(face[0], face[1], float(i) / float(n));
      const int m = segment_steps(base, face[2]);
      for (int j = 0; j < m; ++j) fn(lerp(base, face[2], float(j) / float(m)));
    }
    fn(face[2]);
  }
}

template <int D>
std::vector<Point<D>> discretize_face(const std::array<Point<D>, D>& face, float spacing) {
  if (!(spacing > 0.0f)) throw Error(ErrorCode::invalid_parameter, "sample spacing must be positive");
  if (is_degenerate_face<D>(face)) throw Error(ErrorCode::degenerate_face, "cannot discretize a degenerate face");
  std::vector<Point<D>> out;
  for_each_sample<D>(face, spacing, [&](const Point<D>& p) { out.push_back(p); });
  return out;
}

/// Per-batch occupancy slots, bin-major: slot (b, r) for local bin b holds a
/// face ID or `empty`. The fill pass gives each face its own row r = face ID.
struct FaceBinIndicator {
  static constexpr FaceId empty = -1;

  std::size_t first_bin = 0;
  std::size_t n_bins = 0;
  std::size_t n_rows = 0;
  std::vector<FaceId> slots;

  FaceBinIndicator() = default;
  FaceBinIndicator(std::size_t first, std::size_t bins, std::size_t rows)
      : first_bin(first), n_bins(bins), n_rows(rows), slots(bins * rows, empty) {}

  std::span<const FaceId> bin_slots(std::size_t local) const { return {slots.data() + local * n_rows, n_rows}; }
  FaceId& at(std::size_t local, std::size_t row) { return slots[local * n_rows + row]; }
};

/// Face IDs grouped by bin: bin b owns ids[offsets[b], offsets[b] + counts[b]),
/// sorted ascending.
struct BinnedFaces {
  std::vector<FaceId> ids;
  std::vector<std::uint32_t> counts;
  std::vector<std::uint32_t> offsets;

  std::size_t n_bins() const { return counts.size(); }

  std::span<const FaceId> faces_in(std::size_t bin) const { return {ids.data() + offsets[bin], counts[bin]}; }

  friend bool operator==(const BinnedFaces&, const BinnedFaces&) = default;
};

/// Stream-compacts one batch of indicators onto the end of `out`: per-bin
/// counts, exclusive prefix sum into offsets, then a contiguous copy of the
/// occupied slots, sorted per bin. Batches must arrive in bin order.
inline void compact_indicators(const FaceBinIndicator& ind, BinnedFaces& out, std::size_t capacity,
                               Backend backend = Backend::serial) {
  if (out.counts.size() != ind.first_bin)
    throw Error(ErrorCode::invalid_parameter, "indicator batches must be compacted in bin order");
  const auto is_set = [](FaceId id) { return id != FaceBinIndicator::empty; };

  std::vector<std::uint32_t> counts(ind.n_bins);
  parallel_for(backend, ind.n_bins, [&](std::size_t b) {
    const auto s = ind.bin_slots(b);
    counts[b] = std::uint32_t(std::count_if(s.begin(), s.end(), is_set));
  });

  std::vector<std::uint32_t> offsets(ind.n_bins);
  std::exclusive_scan(counts.begin(), counts.end(), offsets.begin(), std::uint32_t(out.ids.size()));
  const std::size_t total = out.ids.size() + std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  if (total > capacity)
    throw Error(ErrorCode::capacity_exceeded,
                "binned face list needs " + std::to_string(total) + " entries but holds " + std::to_string(capacity) +
                    "; raise the overlap factor or the bin fraction");

  out.ids.resize(total);
  parallel_for(backend, ind.n_bins, [&](std::size_t b) {
    const auto s = ind.bin_slots(b);
    auto* dst = out.ids.data() + offsets[b];
    std::copy_if(s.begin(), s.end(), dst, is_set);
    std::sort(dst, dst + counts[b]);
  });
  out.counts.insert(out.counts.end(), counts.begin(), counts.end());
  out.offsets.insert(out.offsets.end(), offsets.begin(), offsets.end());
}

struct FillOptions {
  /// Sample spacing; 0 selects half the smallest bin length.
  float spacing = 0.0f;
  /// Capacity of the binned ID list, as a multiple of the face count.
  double overlap_factor = 10.0;
  /// Upper bound on indicator slots (faces x bins) allocated per batch.
  std::size_t max_indicator_slots = std::size_t(1) << 26;
};

template <int D>
float default_sample_spacing(const BinGrid<D>& grid) {
  return 0.5f * grid.bin_length().minCoeff();
}

/// Checks every face is non-degenerate and inside `domain`.
template <int D>
void validate_faces(const CoordListGeometry<D>& g, const Aabb<D>& domain) {
  for (std::size_t f = 0; f < g.n_faces(); ++f) {
    const auto face = g.face(f);
    if (is_degenerate_face<D>(face))
      throw Error(ErrorCode::degenerate_face, "face " + std::to_string(f) + " is degenerate");
    for (const auto& v : face)
      if (!domain.contains(v, kDomainTolerance))
        throw Error(ErrorCode::face_outside_domain, "face " + std::to_string(f) + " lies outside the domain");
  }
}

/// Assigns every face to each bin holding at least one of its sample points.
/// The result does not depend on the bin fraction or the backend.
template <int D>
BinnedFaces fill_bins(const CoordListGeometry<D>& g, const BinGrid<D>& grid, BinFraction frac,
                      const FillOptions& opts = {}, Backend backend = Backend::serial) {
  validate_faces(g, grid.domain());
  const float spacing = opts.spacing > 0.0f ? opts.spacing : default_sample_spacing(grid);
  const std::size_t n_faces = g.n_faces();
  const std::size_t n_bins = grid.n_bins();
  const std::size_t per_batch = frac.bins_per_batch(n_bins);

  if (n_faces * per_batch > opts.max_indicator_slots)
    throw Error(ErrorCode::capacity_exceeded,
                "bin indicator needs " + std::to_string(n_faces * per_batch) + " slots per batch (limit " +
                    std::to_string(opts.max_indicator_slots) + "); raise the bin fraction to at least " +
                    std::to_string(min_bin_fraction(n_faces, n_bins, opts.max_indicator_slots)));
  const auto capacity = std::size_t(std::ceil(opts.overlap_factor * double(n_faces)));

  BinnedFaces out;
  out.counts.reserve(n_bins);
  out.offsets.reserve(n_bins);
  for (std::size_t first = 0; first < n_bins; first += per_batch) {
    FaceBinIndicator ind(first, std::min(per_batch, n_bins - first), n_faces);
    parallel_for(backend, n_faces, [&](std::size_t f) {
      for_each_sample<D>(g.face(f), spacing, [&](const Point<D>& p) {
        const std::size_t b = grid.locate_clamped(p).linear;
        if (b >= ind.first_bin && b < ind.first_bin + ind.n_bins) ind.at(b - ind.first_bin, f) = FaceId(f);
      });
    });
    compact_indicators(ind, out, capacity, backend);
  }
  return out;
}

}  // namespace octgeom
