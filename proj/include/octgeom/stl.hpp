#pragma once

#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "octgeom/geometry.hpp"
#include "octgeom/primitives.hpp"

namespace octgeom {

namespace detail {

using Triangle = std::array<Point<3>, 3>;

/// Whitespace tokenizer that tracks line numbers for error messages.
class StlTokens {
 public:
  explicit StlTokens(std::string_view text) : text_(text) {}

  std::optional<std::string_view> next() {
    while (pos_ < text_.size() && is_space(text_[pos_])) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
    if (pos_ >= text_.size()) return std::nullopt;
    const auto start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  void skip_line() {
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
  }

  int line() const { return line_; }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_ = 1;
};

inline std::vector<Triangle> parse_ascii_stl(std::string_view text) {
  StlTokens tokens(text);
  auto where = [&] { return "ASCII STL line " + std::to_string(tokens.line()); };
  auto expect = [&](std::string_view keyword) {
    const auto tok = tokens.next();
    if (!tok || *tok != keyword)
      throw Error(ErrorCode::parse_error, where() + ": expected '" + std::string(keyword) + "', got '" +
                                              std::string(tok.value_or("<eof>")) + "'");
  };
  auto number = [&] {
    const auto tok = tokens.next();
    if (!tok) throw Error(ErrorCode::parse_error, where() + ": unexpected end of file");
    const auto v = parse_number<float>(*tok, where());
    if (!std::isfinite(v)) throw Error(ErrorCode::parse_error, where() + ": non-finite coordinate");
    return v;
  };

  expect("solid");
  tokens.skip_line();  // solid name

  std::vector<Triangle> faces;
  for (;;) {
    const auto tok = tokens.next();
    if (!tok) throw Error(ErrorCode::parse_error, where() + ": missing 'endsolid'");
    if (*tok == "endsolid") break;
    if (*tok != "facet")
      throw Error(ErrorCode::parse_error, where() + ": expected 'facet' or 'endsolid', got '" + std::string(*tok) + "'");
    expect("normal");
    for (int c = 0; c < 3; ++c) number();  // normals are recomputed from winding
    expect("outer");
    expect("loop");
    Triangle t;
    for (auto& v : t) {
      expect("vertex");
      for (int c = 0; c < 3; ++c) v[c] = number();
    }
    expect("endloop");
    expect("endfacet");
    faces.push_back(t);
  }
  tokens.skip_line();  // endsolid name
  if (const auto trailing = tokens.next())
    throw Error(ErrorCode::parse_error, where() + ": content after 'endsolid'");
  return faces;
}

inline std::uint32_t read_u32_le(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

inline std::vector<Triangle> parse_binary_stl(std::string_view bytes) {
  constexpr std::size_t header = 80, record = 50;
  if (bytes.size() < header + 4)
    throw Error(ErrorCode::parse_error, "binary STL shorter than its 84-byte header");
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t count = read_u32_le(data + header);
  if (bytes.size() < header + 4 + count * record)
    throw Error(ErrorCode::parse_error, "binary STL declares " + std::to_string(count) +
                                            " facets but is truncated at " + std::to_string(bytes.size()) + " bytes");
  std::vector<Triangle> faces(count);
  for (std::size_t f = 0; f < count; ++f) {
    const auto* rec = data + header + 4 + f * record + 12;  // skip normal
    for (int j = 0; j < 3; ++j)
      for (int c = 0; c < 3; ++c) {
        const float v = std::bit_cast<float>(read_u32_le(rec + 4 * (3 * j + c)));
        if (!std::isfinite(v))
          throw Error(ErrorCode::parse_error, "binary STL facet " + std::to_string(f) + " has a non-finite coordinate");
        faces[f][std::size_t(j)][c] = v;
      }
  }
  return faces;
}

}  // namespace detail

/// Parses STL bytes. Text whose first token is "solid" is tried as ASCII;
/// if that fails the bytes are read as binary, and if both fail the ASCII
/// error is reported.
inline CoordListGeometry<3> parse_stl(std::string_view bytes) {
  std::size_t first = 0;
  while (first < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[first]))) ++first;
  const bool looks_ascii = bytes.substr(first).starts_with("solid");

  std::vector<detail::Triangle> faces;
  if (looks_ascii) {
    try {
      faces = detail::parse_ascii_stl(bytes);
    } catch (const Error& ascii_error) {
      try {
        faces = detail::parse_binary_stl(bytes);
      } catch (const Error&) {
        throw ascii_error;
      }
    }
  } else {
    faces = detail::parse_binary_stl(bytes);
  }
  return CoordListGeometry<3>::from_faces(faces);
}

/// Reads an ASCII or binary STL file into a coordinate list. run_dim is the
/// dimension of the calling run; STL only describes 3D surfaces.
inline CoordListGeometry<3> import_stl(const std::string& path, int run_dim = 3) {
  if (run_dim != 3) throw Error(ErrorCode::wrong_dimension, "STL geometry requires a 3D run");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open STL file '" + path + "'");
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return parse_stl(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.message());
  }
}

}  // namespace octgeom
