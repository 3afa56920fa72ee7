#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "octgeom/error.hpp"
#include "octgeom/point.hpp"

namespace octgeom {

using BlockId = std::int32_t;

enum class RefineMark : std::uint8_t { none = 0, marked = 1, intermediate = 2 };

/// Cells per block along one axis, and per block in total (4^D).
inline constexpr int kCellsPerAxis = 4;

template <int D>
inline constexpr int kCellsPerBlock = D == 2 ? 16 : 64;

template <int D>
inline constexpr int kChildren = 1 << D;

template <int D>
using LatticeIndex = std::array<std::int32_t, D>;

/// One node of an octree (quadtree in 2D). `pos` is the block's integer
/// position on the uniform lattice of its level; children are allocated
/// together so their IDs are first_child .. first_child + 2^D - 1.
template <int D>
struct Block {
  int level = 0;
  LatticeIndex<D> pos{};
  BlockId parent = -1;
  BlockId first_child = -1;

  bool has_children() const { return first_child >= 0; }
  BlockId child(int k) const { return first_child + k; }

  friend bool operator==(const Block&, const Block&) = default;
};

/// Forest of octrees over a box. The level-0 roots form a structured root
/// grid; block IDs are dense and assigned in creation order; id_set(L) lists
/// the blocks of level L in ascending ID order. Refinement marks live in a
/// separate per-block array.
template <int D>
class Forest {
 public:
  static constexpr int dim = D;

  Forest(const Aabb<D>& domain, const std::array<int, D>& root_dims, int max_level = 10)
      : domain_(domain), root_dims_(root_dims), max_level_(max_level) {
    if (!domain.valid() || !(domain.measure() > 0.0))
      throw Error(ErrorCode::invalid_parameter, "forest domain must have positive extent");
    if (max_level < 0) throw Error(ErrorCode::invalid_parameter, "max level must be >= 0");
    std::size_t n_roots = 1;
    for (int c = 0; c < D; ++c) {
      if (root_dims[c] < 1) throw Error(ErrorCode::invalid_parameter, "root grid dimensions must be >= 1");
      n_roots *= std::size_t(root_dims[c]);
    }
    blocks_.reserve(n_roots);
    id_sets_.resize(1);
    for (std::size_t r = 0; r < n_roots; ++r) {
      Block<D> b;
      std::size_t rest = r;
      for (int c = 0; c < D; ++c) {
        b.pos[c] = std::int32_t(rest % std::size_t(root_dims[c]));
        rest /= std::size_t(root_dims[c]);
      }
      push(b);
    }
  }

  const Aabb<D>& domain() const { return domain_; }
  const std::array<int, D>& root_dims() const { return root_dims_; }
  int max_level() const { return max_level_; }

  std::size_t size() const { return blocks_.size(); }
  const Block<D>& block(BlockId id) const { return blocks_[std::size_t(id)]; }
  const std::vector<Block<D>>& blocks() const { return blocks_; }

  RefineMark mark(BlockId id) const { return marks_[std::size_t(id)]; }
  void set_mark(BlockId id, RefineMark m) { marks_[std::size_t(id)] = m; }
  std::vector<RefineMark>& marks() { return marks_; }
  const std::vector<RefineMark>& marks() const { return marks_; }

  /// Number of levels holding at least one block.
  int depth() const { return int(id_sets_.size()); }

  const std::vector<BlockId>& id_set(int level) const {
    static const std::vector<BlockId> none;
    return level >= 0 && level < depth() ? id_sets_[std::size_t(level)] : none;
  }

  bool is_leaf(BlockId id) const { return !block(id).has_children(); }

  /// Blocks per axis on the lattice of `level`.
  std::int64_t lattice_extent(int level, int axis) const { return std::int64_t(root_dims_[axis]) << level; }

  bool in_domain(int level, const LatticeIndex<D>& pos) const {
    for (int c = 0; c < D; ++c)
      if (pos[c] < 0 || pos[c] >= lattice_extent(level, c)) return false;
    return true;
  }

  Point<D> block_length(int level) const {
    Point<D> len;
    for (int c = 0; c < D; ++c)
      len[c] = float((double(domain_.max[c]) - double(domain_.min[c])) / double(lattice_extent(level, c)));
    return len;
  }

  Point<D> cell_length(int level) const { return block_length(level) / float(kCellsPerAxis); }

  /// Coordinate of lattice plane `i` on `axis`, with `sub` subdivisions per
  /// block, computed in double.
  double lattice_coord(int level, int axis, double i, int sub = 1) const {
    const double n = double(lattice_extent(level, axis)) * sub;
    return double(domain_.min[axis]) + (double(domain_.max[axis]) - double(domain_.min[axis])) * (i / n);
  }

  Aabb<D> bounds(BlockId id) const {
    const auto& b = block(id);
    Aabb<D> box;
    for (int c = 0; c < D; ++c) {
      box.min[c] = float(lattice_coord(b.level, c, b.pos[c]));
      box.max[c] = float(lattice_coord(b.level, c, b.pos[c] + 1));
    }
    return box;
  }

  Point<D> origin(BlockId id) const { return bounds(id).min; }

  /// Deepest existing block at level <= `level` covering lattice position
  /// `pos` of `level`. `pos` must be in the domain.
  BlockId locate(int level, const LatticeIndex<D>& pos) const {
    std::size_t root = 0;
    for (int c = D - 1; c >= 0; --c) root = root * std::size_t(root_dims_[c]) + std::size_t(pos[c] >> level);
    auto id = BlockId(root);
    for (int l = 1; l <= level; ++l) {
      const auto& b = block(id);
      if (!b.has_children()) break;
      int k = 0;
      for (int c = 0; c < D; ++c) k |= ((pos[c] >> (level - l)) & 1) << c;
      id = b.child(k);
    }
    return id;
  }

  /// Block at exactly (level, pos), if it exists.
  std::optional<BlockId> find(int level, const LatticeIndex<D>& pos) const {
    if (level < 0 || !in_domain(level, pos)) return std::nullopt;
    const BlockId id = locate(level, pos);
    if (block(id).level != level) return std::nullopt;
    return id;
  }

  /// Splits a leaf into 2^D children appended to id_set(level + 1).
  void subdivide(BlockId id) {
    if (!is_leaf(id)) throw Error(ErrorCode::invalid_parameter, "block " + std::to_string(id) + " is already split");
    const int level = block(id).level;
    if (level + 1 > max_level_)
      throw Error(ErrorCode::max_level_exceeded,
                  "refining block " + std::to_string(id) + " would exceed max level " + std::to_string(max_level_));
    const auto first = BlockId(blocks_.size());
    const auto parent_pos = block(id).pos;
    for (int k = 0; k < kChildren<D>; ++k) {
      Block<D> child;
      child.level = level + 1;
      child.parent = id;
      for (int c = 0; c < D; ++c) child.pos[c] = 2 * parent_pos[c] + ((k >> c) & 1);
      push(child);
    }
    blocks_[std::size_t(id)].first_child = first;
  }

  friend bool operator==(const Forest& a, const Forest& b) {
    return a.domain_ == b.domain_ && a.root_dims_ == b.root_dims_ && a.max_level_ == b.max_level_ &&
           a.blocks_ == b.blocks_ && a.marks_ == b.marks_ && a.id_sets_ == b.id_sets_;
  }

 private:
  void push(const Block<D>& b) {
    if (std::size_t(b.level) >= id_sets_.size()) id_sets_.resize(std::size_t(b.level) + 1);
    id_sets_[std::size_t(b.level)].push_back(BlockId(blocks_.size()));
    blocks_.push_back(b);
    marks_.push_back(RefineMark::none);
  }

  Aabb<D> domain_;
  std::array<int, D> root_dims_;
  int max_level_;
  std::vector<Block<D>> blocks_;
  std::vector<RefineMark> marks_;
  std::vector<std::vector<BlockId>> id_sets_;
};

template <int D>
Forest<D> init_root_grid(const Aabb<D>& domain, const std::array<int, D>& root_dims, int max_level = 10) {
  return Forest<D>(domain, root_dims, max_level);
}

/// Centers of the 4^D cells of a block, x fastest.
template <int D>
std::array<Point<D>, kCellsPerBlock<D>> cell_centers(const Forest<D>& forest, BlockId id) {
  const auto& b = forest.block(id);
  std::array<Point<D>, kCellsPerBlock<D>> out;
  for (int i = 0; i < kCellsPerBlock<D>; ++i) {
    int rest = i;
    for (int c = 0; c < D; ++c) {
      const int local = rest % kCellsPerAxis;
      rest /= kCellsPerAxis;
      out[std::size_t(i)][c] =
          float(forest.lattice_coord(b.level, c, kCellsPerAxis * double(b.pos[c]) + local + 0.5, kCellsPerAxis));
    }
  }
  return out;
}

/// Leaf blocks of a level in ascending ID order.
template <int D>
std::vector<BlockId> leaf_blocks_at(const Forest<D>& forest, int level) {
  std::vector<BlockId> out;
  for (BlockId id : forest.id_set(level))
    if (forest.is_leaf(id)) out.push_back(id);
  return out;
}

/// Block across the side (axis, dir) of `id`: the same-level block if it
/// exists, else the coarser leaf covering that side; nullopt on the domain
/// boundary. The same-level block may itself be split.
template <int D>
std::optional<BlockId> neighbor_across(const Forest<D>& forest, BlockId id, const LatticeIndex<D>& offset) {
  const auto& b = forest.block(id);
  LatticeIndex<D> p = b.pos;
  for (int c = 0; c < D; ++c) p[c] += offset[c];
  if (!forest.in_domain(b.level, p)) return std::nullopt;
  return forest.locate(b.level, p);
}

/// One slot per side, ordered -x, +x, -y, +y[, -z, +z].
template <int D>
std::array<std::optional<BlockId>, 2 * D> face_neighbors(const Forest<D>& forest, BlockId id) {
  std::array<std::optional<BlockId>, 2 * D> out;
  for (int axis = 0; axis < D; ++axis)
    for (int s = 0; s < 2; ++s) {
      LatticeIndex<D> off{};
      off[axis] = s == 0 ? -1 : 1;
      out[std::size_t(2 * axis + s)] = neighbor_across<D>(forest, id, off);
    }
  return out;
}

/// Every leaf sharing a face (edge in 2D) with `id`, ascending.
template <int D>
std::vector<BlockId> face_neighbor_leaves(const Forest<D>& forest, BlockId id) {
  std::vector<BlockId> out;
  const auto slots = face_neighbors(forest, id);
  for (int axis = 0; axis < D; ++axis)
    for (int s = 0; s < 2; ++s) {
      const auto nb = slots[std::size_t(2 * axis + s)];
      if (!nb) continue;
      // Descend into a split neighbor through the children touching the
      // shared face: low side along the axis when the neighbor is on the + side.
      const int touching_bit = s == 0 ? 1 : 0;
      std::vector<BlockId> stack{*nb};
      while (!stack.empty()) {
        const BlockId cur = stack.back();
        stack.pop_back();
        const auto& cb = forest.block(cur);
        if (!cb.has_children()) {
          out.push_back(cur);
          continue;
        }
        for (int k = 0; k < kChildren<D>; ++k)
          if (((k >> axis) & 1) == touching_bit) stack.push_back(cb.child(k));
      }
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Refines coarse leaves until face-adjacent leaves differ by at most one
/// level. Violators are split in ascending ID order, sweep after sweep.
template <int D>
void balance_2to1(Forest<D>& forest) {
  for (;;) {
    std::vector<BlockId> coarse;
    for (BlockId id = 0; id < BlockId(forest.size()); ++id) {
      const auto& b = forest.block(id);
      if (b.has_children() || b.level < 2) continue;
      for (const auto& nb : face_neighbors(forest, id))
        if (nb && forest.block(*nb).level < b.level - 1) coarse.push_back(*nb);
    }
    if (coarse.empty()) return;
    std::sort(coarse.begin(), coarse.end());
    coarse.erase(std::unique(coarse.begin(), coarse.end()), coarse.end());
    for (BlockId id : coarse) forest.subdivide(id);
  }
}

/// Splits every MARKED leaf of `level` (ascending ID), clears the marks on
/// that level, then restores 2:1 face balance.
template <int D>
void refine_marked(Forest<D>& forest, int level) {
  std::vector<BlockId> targets;
  for (BlockId id : forest.id_set(level)) {
    if (forest.mark(id) == RefineMark::intermediate)
      throw Error(ErrorCode::invalid_parameter, "refine_marked called with intermediate marks present");
    if (forest.mark(id) == RefineMark::marked && forest.is_leaf(id)) targets.push_back(id);
  }
  if (!targets.empty() && level + 1 > forest.max_level())
    throw Error(ErrorCode::max_level_exceeded,
                "refining level " + std::to_string(level) + " would exceed max level " +
                    std::to_string(forest.max_level()));
  for (BlockId id : targets) forest.subdivide(id);
  for (BlockId id : forest.id_set(level)) forest.set_mark(id, RefineMark::none);
  if (!targets.empty()) balance_2to1(forest);
}

}  // namespace octgeom
