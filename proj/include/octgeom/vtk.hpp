#pragma once

#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>

#include "octgeom/forest.hpp"

namespace octgeom {

/// Legacy ASCII VTK unstructured grid of the leaf blocks: quads in 2D,
/// hexahedra in 3D, each with its own corner points (no welding), plus the
/// cell scalars `level` and `marked`.
template <int D>
void write_vtk(const Forest<D>& forest, std::ostream& out) {
  std::vector<BlockId> leaves;
  for (BlockId id = 0; id < BlockId(forest.size()); ++id)
    if (forest.is_leaf(id)) leaves.push_back(id);

  constexpr int corners = 1 << D;
  // VTK corner order: counter-clockwise bottom face, then the top face.
  constexpr std::array<std::array<int, 3>, 8> order{{
      {0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}}};

  out << "# vtk DataFile Version 3.0\n"
      << "octgeom forest leaf blocks\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n"
      << "POINTS " << leaves.size() * corners << " float\n"
      << std::setprecision(9);
  for (BlockId id : leaves) {
    const auto box = forest.bounds(id);
    for (int k = 0; k < corners; ++k) {
      for (int c = 0; c < 3; ++c) {
        const float v = c < D ? (order[std::size_t(k)][std::size_t(c)] ? box.max[c] : box.min[c]) : 0.0f;
        out << v << (c < 2 ? ' ' : '\n');
      }
    }
  }

  out << "CELLS " << leaves.size() << ' ' << leaves.size() * (corners + 1) << '\n';
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    out << corners;
    for (int k = 0; k < corners; ++k) out << ' ' << i * corners + std::size_t(k);
    out << '\n';
  }
  out << "CELL_TYPES " << leaves.size() << '\n';
  for (std::size_t i = 0; i < leaves.size(); ++i) out << (D == 2 ? 9 : 12) << '\n';

  out << "CELL_DATA " << leaves.size() << '\n' << "SCALARS level int 1\nLOOKUP_TABLE default\n";
  for (BlockId id : leaves) out << forest.block(id).level << '\n';
  out << "SCALARS marked int 1\nLOOKUP_TABLE default\n";
  for (BlockId id : leaves) out << int(forest.mark(id) == RefineMark::marked) << '\n';
}

template <int D>
void export_vtk(const Forest<D>& forest, const std::string& path) {
  if (path.empty()) throw Error(ErrorCode::io_error, "empty VTK output path");
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  write_vtk(forest, out);
  if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path + "'");
}

}  // namespace octgeom
