#pragma once

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "octgeom/binning.hpp"
#include "octgeom/distance.hpp"
#include "octgeom/executor.hpp"
#include "octgeom/forest.hpp"
#include "octgeom/geometry.hpp"

namespace octgeom {

enum class Strategy { naive, binned };

constexpr std::string_view to_string(Strategy s) { return s == Strategy::naive ? "naive" : "binned"; }

inline Strategy parse_strategy(std::string_view s) {
  if (s == "naive") return Strategy::naive;
  if (s == "binned") return Strategy::binned;
  throw Error(ErrorCode::config_error, "unknown strategy '" + std::string(s) + "'");
}

/// Which blocks count as neighbors when dilating marks: the 2D sides only,
/// or every block touching a side, edge or corner (3^D - 1).
enum class Stencil { face, full };

namespace detail {

/// Bounding sphere per face, used to skip a face for a whole block before any
/// per-cell predicate runs. The skip is conservative, so results match a
/// plain all-cells-all-faces loop exactly.
template <int D>
struct FaceSpheres {
  std::vector<Point<D>> center;
  std::vector<float> radius;

  explicit FaceSpheres(const CoordListGeometry<D>& g) : center(g.n_faces()), radius(g.n_faces()) {
    for (std::size_t f = 0; f < g.n_faces(); ++f) {
      const auto face = g.face(f);
      Point<D> c = Point<D>::Zero();
      for (const auto& v : face) c += v;
      c /= float(D);
      float r = 0.0f;
      for (const auto& v : face) r = std::max(r, (v - c).norm());
      center[f] = c;
      radius[f] = r;
    }
  }
};

template <int D>
struct BlockCells {
  std::array<Point<D>, kCellsPerBlock<D>> centers;
  Point<D> middle;
  float half_diagonal;

  BlockCells(const Forest<D>& forest, BlockId id) : centers(cell_centers(forest, id)) {
    const auto box = forest.bounds(id);
    middle = 0.5f * (box.min + box.max);
    half_diagonal = 0.5f * box.extent().norm();
  }
};

/// Pads a rejection radius by a relative and an absolute margin so rounding
/// in the single-precision predicate can never reach past it.
template <int D>
float conservative_reach(float reach, const Point<D>& at) {
  return reach * 1.0001f + 1e-5f * (1.0f + at.cwiseAbs().maxCoeff());
}

/// True when any selected cell center is within d_spec of any face in `faces`.
template <int D, typename FaceRange>
bool cells_near_faces(const BlockCells<D>& cells, std::uint64_t cell_mask, const CoordListGeometry<D>& g,
                      const FaceSpheres<D>& spheres, const FaceRange& faces, float d_spec) {
  for (const auto f : faces) {
    const auto fi = std::size_t(f);
    const float reach = conservative_reach(cells.half_diagonal + spheres.radius[fi] + d_spec, cells.middle);
    if ((cells.middle - spheres.center[fi]).squaredNorm() > reach * reach) continue;
    const auto face = g.face(fi);
    for (int c = 0; c < kCellsPerBlock<D>; ++c)
      if (((cell_mask >> c) & 1u) && near_face<D>(cells.centers[std::size_t(c)], face, d_spec)) return true;
  }
  return false;
}

template <int D>
constexpr std::uint64_t all_cells_mask() {
  return kCellsPerBlock<D> == 64 ? ~std::uint64_t(0) : (std::uint64_t(1) << kCellsPerBlock<D>) - 1;
}

struct FaceIota {
  FaceId n;
  struct iterator {
    FaceId i;
    FaceId operator*() const { return i; }
    iterator& operator++() { ++i; return *this; }
    bool operator!=(const iterator& o) const { return i != o.i; }
  };
  iterator begin() const { return {0}; }
  iterator end() const { return {n}; }
};

template <int D>
void check_marking_inputs(const Forest<D>& forest, const CoordListGeometry<D>& g, float d_spec) {
  if (g.empty()) throw Error(ErrorCode::empty_geometry, "near-wall marking needs at least one face");
  if (!(d_spec > 0.0f)) throw Error(ErrorCode::invalid_parameter, "near-wall distance must be positive");
  validate_faces(g, forest.domain());
}

template <int D>
std::size_t count_marked(const Forest<D>& forest, int level) {
  std::size_t n = 0;
  for (BlockId id : forest.id_set(level)) n += forest.mark(id) == RefineMark::marked;
  return n;
}

}  // namespace detail

/// MARKED leaf IDs of a level, ascending.
template <int D>
std::vector<BlockId> marked_blocks(const Forest<D>& forest, int level) {
  std::vector<BlockId> out;
  for (BlockId id : forest.id_set(level))
    if (forest.mark(id) == RefineMark::marked) out.push_back(id);
  return out;
}

/// Marks each leaf of `level` having a cell center within d_spec of any face.
/// Returns the number of MARKED blocks on the level afterwards.
template <int D>
std::size_t mark_near_wall_naive(Forest<D>& forest, int level, const CoordListGeometry<D>& g, float d_spec,
                                 Backend backend = Backend::serial) {
  detail::check_marking_inputs(forest, g, d_spec);
  const detail::FaceSpheres<D> spheres(g);
  const auto leaves = leaf_blocks_at(forest, level);
  const detail::FaceIota all{FaceId(g.n_faces())};
  auto& marks = forest.marks();
  parallel_for(backend, leaves.size(), [&](std::size_t i) {
    const detail::BlockCells<D> cells(forest, leaves[i]);
    if (detail::cells_near_faces(cells, detail::all_cells_mask<D>(), g, spheres, all, d_spec))
      marks[std::size_t(leaves[i])] = RefineMark::marked;
  });
  return detail::count_marked(forest, level);
}

/// Same criterion as the naive pass, but each cell only tests the faces in
/// the bin holding its center. The marked set is a subset of the naive one.
template <int D>
std::size_t mark_near_wall_binned(Forest<D>& forest, int level, const CoordListGeometry<D>& g,
                                  const BinnedFaces& bins, const BinGrid<D>& grid, float d_spec,
                                  Backend backend = Backend::serial) {
  detail::check_marking_inputs(forest, g, d_spec);
  if (bins.n_bins() != grid.n_bins() || !(grid.domain() == forest.domain()))
    throw Error(ErrorCode::invalid_parameter, "bins were not built over this forest's domain");
  const detail::FaceSpheres<D> spheres(g);
  const auto leaves = leaf_blocks_at(forest, level);
  auto& marks = forest.marks();
  parallel_for(backend, leaves.size(), [&](std::size_t i) {
    const detail::BlockCells<D> cells(forest, leaves[i]);
    std::array<std::size_t, kCellsPerBlock<D>> cell_bin;
    for (int c = 0; c < kCellsPerBlock<D>; ++c)
      cell_bin[std::size_t(c)] = grid.locate_clamped(cells.centers[std::size_t(c)]).linear;

    std::uint64_t pending = detail::all_cells_mask<D>();
    while (pending != 0) {
      const int first = std::countr_zero(pending);
      const std::size_t bin = cell_bin[std::size_t(first)];
      std::uint64_t group = 0;
      for (int c = first; c < kCellsPerBlock<D>; ++c)
        if (cell_bin[std::size_t(c)] == bin) group |= std::uint64_t(1) << c;
      pending &= ~group;
      if (detail::cells_near_faces(cells, group, g, spheres, bins.faces_in(bin), d_spec)) {
        marks[std::size_t(leaves[i])] = RefineMark::marked;
        return;
      }
    }
  });
  return detail::count_marked(forest, level);
}

/// 1 + floor(d_spec / block_length): dilation rounds needed to cover d_spec.
inline int propagation_rounds(double d_spec, double block_length) {
  return 1 + int(std::floor(d_spec / block_length));
}

template <int D>
double min_block_length(const Forest<D>& forest, int level) {
  double len = std::numeric_limits<double>::infinity();
  for (int c = 0; c < D; ++c)
    len = std::min(len, (double(forest.domain().max[c]) - double(forest.domain().min[c])) /
                            double(forest.lattice_extent(level, c)));
  return len;
}

/// Dilates MARKED leaves of `level` by `rounds` neighbor hops. Each round is
/// two passes: unmarked leaves next to a MARKED one become INTERMEDIATE
/// (each block reads neighbors and writes only itself), then INTERMEDIATE
/// becomes MARKED.
template <int D>
void dilate_marks(Forest<D>& forest, int level, int rounds, Backend backend = Backend::serial,
                  Stencil stencil = Stencil::face) {
  const auto leaves = leaf_blocks_at(forest, level);
  auto& marks = forest.marks();
  for (const auto id : leaves)
    if (marks[std::size_t(id)] == RefineMark::intermediate)
      throw Error(ErrorCode::invalid_parameter, "dilate_marks called with intermediate marks present");

  std::vector<LatticeIndex<D>> offsets;
  int total = 1;
  for (int c = 0; c < D; ++c) total *= 3;
  for (int k = 0; k < total; ++k) {
    LatticeIndex<D> off{};
    int rest = k, nonzero = 0;
    for (int c = 0; c < D; ++c) {
      off[c] = rest % 3 - 1;
      rest /= 3;
      nonzero += off[c] != 0;
    }
    if (nonzero == 0 || (stencil == Stencil::face && nonzero != 1)) continue;
    offsets.push_back(off);
  }

  for (int r = 0; r < rounds; ++r) {
    parallel_for(backend, leaves.size(), [&](std::size_t i) {
      const BlockId id = leaves[i];
      std::atomic_ref<RefineMark> own(marks[std::size_t(id)]);
      if (own.load(std::memory_order_relaxed) != RefineMark::none) return;
      for (const auto& off : offsets) {
        const auto nb = neighbor_across<D>(forest, id, off);
        if (nb && std::atomic_ref<RefineMark>(marks[std::size_t(*nb)]).load(std::memory_order_relaxed) ==
                      RefineMark::marked) {
          own.store(RefineMark::intermediate, std::memory_order_relaxed);
          return;
        }
      }
    });
    parallel_for(backend, leaves.size(), [&](std::size_t i) {
      auto& m = marks[std::size_t(leaves[i])];
      if (m == RefineMark::intermediate) m = RefineMark::marked;
    });
  }
}

/// Dilates the marks of `level` far enough to cover d_spec; returns the
/// number of rounds performed.
template <int D>
int propagate_marks(Forest<D>& forest, int level, float d_spec, Backend backend = Backend::serial,
                    Stencil stencil = Stencil::face) {
  if (!(d_spec > 0.0f)) throw Error(ErrorCode::invalid_parameter, "near-wall distance must be positive");
  const int rounds = propagation_rounds(d_spec, min_block_length(forest, level));
  dilate_marks(forest, level, rounds, backend, stencil);
  return rounds;
}

struct NearWallParams {
  float d_spec = 0.1f;
  /// Total grid levels after refinement; n_levels - 1 refinement passes.
  int n_levels = 3;
  Strategy strategy = Strategy::naive;
  int bin_density = 1;
  int bin_fraction = 1;
  Backend backend = Backend::serial;
  Stencil stencil = Stencil::face;
  FillOptions fill;
};

struct StageTiming {
  std::string stage;
  int level = 0;
  double milliseconds = 0.0;
};

template <int D>
struct RefineReport {
  std::vector<StageTiming> timings;
  /// Per refined level: MARKED blocks straight after face detection, and
  /// after propagation (the set that was refined).
  std::vector<std::vector<BlockId>> detected;
  std::vector<std::vector<BlockId>> marked;
  std::optional<BinGrid<D>> grid;
  std::optional<BinnedFaces> bins;

  double total_ms(std::string_view stage) const {
    double t = 0.0;
    for (const auto& s : timings)
      if (s.stage == stage) t += s.milliseconds;
    return t;
  }
};

namespace detail {

template <typename Fn>
double time_ms(Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

/// Bins the faces (binned strategy), then for each level below the finest:
/// detect near-wall blocks, propagate (binned only), refine. A bin density
/// of 1 is the naive search.
template <int D>
RefineReport<D> refine_near_wall(Forest<D>& forest, const CoordListGeometry<D>& g, const NearWallParams& p) {
  if (p.n_levels < 1) throw Error(ErrorCode::invalid_parameter, "need at least one grid level");
  RefineReport<D> report;
  if (p.n_levels == 1) return report;

  const bool binned = p.strategy == Strategy::binned && p.bin_density > 1;
  if (binned) {
    report.grid.emplace(forest.domain(), p.bin_density);
    report.timings.push_back({"bin_setup", 0, detail::time_ms([&] {
                                report.bins = fill_bins(g, *report.grid, BinFraction{p.bin_fraction}, p.fill, p.backend);
                              })});
  }

  for (int level = 0; level + 1 < p.n_levels; ++level) {
    report.timings.push_back({"face_detection", level, detail::time_ms([&] {
                                if (binned)
                                  mark_near_wall_binned(forest, level, g, *report.bins, *report.grid, p.d_spec, p.backend);
                                else
                                  mark_near_wall_naive(forest, level, g, p.d_spec, p.backend);
                              })});
    report.detected.push_back(marked_blocks(forest, level));
    if (binned)
      report.timings.push_back({"propagation", level, detail::time_ms([&] {
                                  propagate_marks(forest, level, p.d_spec, p.backend, p.stencil);
                                })});
    report.marked.push_back(marked_blocks(forest, level));
    report.timings.push_back({"refinement", level, detail::time_ms([&] { refine_marked(forest, level); })});
  }
  return report;
}

/// Face IDs within link distance of each finest-level cell, in CSR form.
struct CellFaceLinks {
  struct Cell {
    BlockId block;
    int local;

    friend bool operator==(const Cell&, const Cell&) = default;
  };

  int capacity = 16;
  std::vector<Cell> cells;
  std::vector<std::uint32_t> offsets{0};
  std::vector<FaceId> faces;

  std::size_t size() const { return cells.size(); }
  std::span<const FaceId> faces_of(std::size_t i) const {
    return {faces.data() + offsets[i], offsets[i + 1] - offsets[i]};
  }
};

template <int D>
float default_link_distance(const Forest<D>& forest) {
  const int finest = forest.depth() - 1;
  return std::sqrt(float(D)) * forest.cell_length(finest).norm();
}

/// For each cell of the finest-level leaves, the faces of its bin within
/// d_link of its center (ascending). Throws capacity_exceeded naming the
/// fullest cell when any list would exceed `capacity`.
template <int D>
CellFaceLinks build_cell_face_links(const Forest<D>& forest, const CoordListGeometry<D>& g, const BinnedFaces& bins,
                                    const BinGrid<D>& grid, float d_link, int capacity = 16,
                                    Backend backend = Backend::serial) {
  if (!(d_link > 0.0f)) throw Error(ErrorCode::invalid_parameter, "link distance must be positive");
  if (capacity < 1) throw Error(ErrorCode::invalid_parameter, "link capacity must be >= 1");
  if (bins.n_bins() != grid.n_bins() || !(grid.domain() == forest.domain()))
    throw Error(ErrorCode::invalid_parameter, "bins were not built over this forest's domain");
  validate_faces(g, forest.domain());

  const auto leaves = leaf_blocks_at(forest, forest.depth() - 1);
  const detail::FaceSpheres<D> spheres(g);
  std::vector<std::array<std::vector<FaceId>, kCellsPerBlock<D>>> per_block(leaves.size());
  parallel_for(backend, leaves.size(), [&](std::size_t i) {
    const detail::BlockCells<D> cells(forest, leaves[i]);
    for (int c = 0; c < kCellsPerBlock<D>; ++c) {
      const auto& x = cells.centers[std::size_t(c)];
      auto& list = per_block[i][std::size_t(c)];
      for (const FaceId f : bins.faces_in(grid.locate_clamped(x).linear)) {
        const float reach = detail::conservative_reach(spheres.radius[std::size_t(f)] + d_link, x);
        if ((x - spheres.center[std::size_t(f)]).squaredNorm() > reach * reach) continue;
        if (near_face<D>(x, g.face(std::size_t(f)), d_link)) list.push_back(f);
      }
    }
  });

  CellFaceLinks out;
  out.capacity = capacity;
  std::size_t worst = 0;
  CellFaceLinks::Cell worst_cell{-1, -1};
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (int c = 0; c < kCellsPerBlock<D>; ++c) {
      const auto& list = per_block[i][std::size_t(c)];
      if (list.empty()) continue;
      if (list.size() > worst) {
        worst = list.size();
        worst_cell = {leaves[i], c};
      }
      out.cells.push_back({leaves[i], c});
      out.faces.insert(out.faces.end(), list.begin(), list.end());
      out.offsets.push_back(std::uint32_t(out.faces.size()));
    }
  if (worst > std::size_t(capacity))
    throw Error(ErrorCode::capacity_exceeded,
                "cell " + std::to_string(worst_cell.local) + " of block " + std::to_string(worst_cell.block) +
                    " links " + std::to_string(worst) + " faces; capacity is " + std::to_string(capacity));
  return out;
}

}  // namespace octgeom
