#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "octgeom/geometry.hpp"

namespace octgeom {

namespace detail {

template <typename T>
T parse_number(std::string_view token, const std::string& where) {
  T value{};
  if (token.starts_with('+')) token.remove_prefix(1);
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw Error(ErrorCode::parse_error, where + ": expected a number, got '" + std::string(token) + "'");
  return value;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

}  // namespace detail

/// Reads primitive descriptions, one per line:
///
///   circle cx cy r n_edges              (2D)
///   sphere cx cy cz r n_lat n_lon       (3D)
///
/// Lines starting with '#' and blank lines are skipped. Each primitive is
/// generated and appended with its vertex indices offset past the previous
/// ones. A primitive of the other dimension is a wrong_dimension error.
template <int D>
IndexedGeometry<D> parse_text_primitives(std::istream& in, const std::string& name = "<stream>") {
  IndexedGeometry<D> out;
  std::string line;
  for (int line_no = 1; std::getline(in, line); ++line_no) {
    const auto tokens = detail::split_ws(line);
    if (tokens.empty() || tokens.front().starts_with('#')) continue;
    const std::string where = name + ":" + std::to_string(line_no);
    const auto& kind = tokens.front();

    if (kind == "circle") {
      if (tokens.size() != 5)
        throw Error(ErrorCode::parse_error, where + ": 'circle' takes cx cy r n_edges");
      if constexpr (D != 2) {
        throw Error(ErrorCode::wrong_dimension, where + ": 'circle' is a 2D primitive");
      } else {
        const Point<2> c(detail::parse_number<float>(tokens[1], where),
                         detail::parse_number<float>(tokens[2], where));
        const auto r = detail::parse_number<double>(tokens[3], where);
        const auto n = detail::parse_number<int>(tokens[4], where);
        out.append(generate_circle(c, r, n));
      }
    } else if (kind == "sphere") {
      if (tokens.size() != 7)
        throw Error(ErrorCode::parse_error, where + ": 'sphere' takes cx cy cz r n_lat n_lon");
      if constexpr (D != 3) {
        throw Error(ErrorCode::wrong_dimension, where + ": 'sphere' is a 3D primitive");
      } else {
        const Point<3> c(detail::parse_number<float>(tokens[1], where),
                         detail::parse_number<float>(tokens[2], where),
                         detail::parse_number<float>(tokens[3], where));
        const auto r = detail::parse_number<double>(tokens[4], where);
        const auto n_lat = detail::parse_number<int>(tokens[5], where);
        const auto n_lon = detail::parse_number<int>(tokens[6], where);
        out.append(generate_sphere(c, r, n_lat, n_lon));
      }
    } else {
      throw Error(ErrorCode::parse_error, where + ": unknown primitive '" + kind + "'");
    }
  }
  return out;
}

template <int D>
IndexedGeometry<D> import_text_primitives(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open primitives file '" + path + "'");
  return parse_text_primitives<D>(in, path);
}

}  // namespace octgeom
