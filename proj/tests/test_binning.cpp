#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "octgeom/binning.hpp"

using namespace octgeom;

namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::validation_failure;
}

CoordListGeometry<3> unit_sphere_mesh(int n_lat, int n_lon, float r = 0.25f) {
  return index_to_coords(generate_sphere(Point<3>(0.5f, 0.5f, 0.5f), r, n_lat, n_lon));
}

CoordListGeometry<2> random_edges(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f), len(-0.2f, 0.2f);
  std::vector<std::array<Point<2>, 2>> faces;
  while (faces.size() < n) {
    const Point<2> a(u(rng), u(rng));
    const Point<2> b = (a + Point<2>(len(rng), len(rng))).cwiseMax(0.0f).cwiseMin(1.0f);
    if (!is_degenerate_edge(a, b)) faces.push_back({a, b});
  }
  return CoordListGeometry<2>::from_faces(faces);
}

void expect_invariants(const BinnedFaces& bins, std::size_t n_bins, std::size_t n_faces) {
  ASSERT_EQ(bins.n_bins(), n_bins);
  ASSERT_EQ(bins.offsets.size(), n_bins);
  std::set<FaceId> seen;
  std::size_t expected_offset = 0;
  for (std::size_t b = 0; b < n_bins; ++b) {
    EXPECT_EQ(bins.offsets[b], expected_offset);
    expected_offset += bins.counts[b];
    const auto f = bins.faces_in(b);
    EXPECT_TRUE(std::is_sorted(f.begin(), f.end()));
    EXPECT_EQ(std::adjacent_find(f.begin(), f.end()), f.end());
    seen.insert(f.begin(), f.end());
  }
  EXPECT_EQ(expected_offset, bins.ids.size());
  EXPECT_EQ(seen.size(), n_faces);  // every face lands somewhere
}

// Independent oracle: the set of bins holding a sample of each face.
template <int D>
std::vector<std::set<FaceId>> sample_oracle(const CoordListGeometry<D>& g, const BinGrid<D>& grid, float spacing) {
  std::vector<std::set<FaceId>> out(grid.n_bins());
  for (std::size_t f = 0; f < g.n_faces(); ++f)
    for (const auto& p : discretize_face<D>(g.face(f), spacing)) out[bin_of_point(p, grid).linear].insert(FaceId(f));
  return out;
}

}  // namespace

TEST(BinGrid, Basics) {
  const BinGrid<3> grid(Aabb<3>::unit(), 4);
  EXPECT_EQ(grid.n_bins(), 64u);
  EXPECT_FLOAT_EQ(grid.bin_length()[0], 0.25f);
  for (std::size_t i = 0; i < grid.n_bins(); ++i) EXPECT_EQ(grid.linearize(grid.delinearize(i)), i);
  EXPECT_EQ(grid.linearize({1, 0, 0}), 1u);
  EXPECT_EQ(grid.linearize({0, 1, 0}), 4u);
  EXPECT_EQ(grid.linearize({0, 0, 1}), 16u);
  EXPECT_THROW(BinGrid<2>(Aabb<2>::unit(), 0), Error);
}

TEST(BinOfPoint, Examples) {
  const BinGrid<2> grid(Aabb<2>::unit(), 2);
  const auto b = bin_of_point(Point<2>(0.6f, 0.3f), grid);
  EXPECT_EQ(b.coord, (BinCoord<2>{1, 0}));
  EXPECT_EQ(b.linear, 1u);
  EXPECT_EQ(bin_of_point(Point<2>(1.0f, 1.0f), grid).coord, (BinCoord<2>{1, 1}));
  const BinGrid<3> one(Aabb<3>::unit(), 1);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(bin_of_point(Point<3>(u(rng), u(rng), u(rng)), one).linear, 0u);
}

TEST(BinOfPoint, ToleranceAndOutside) {
  const BinGrid<2> grid(Aabb<2>::unit(), 4);
  EXPECT_EQ(bin_of_point(Point<2>(1.0f + 1e-7f, -1e-7f), grid).coord, (BinCoord<2>{3, 0}));
  EXPECT_EQ(error_of([&] { bin_of_point(Point<2>(1.01f, 0.5f), grid); }), ErrorCode::point_outside_domain);
  EXPECT_EQ(error_of([&] { bin_of_point(Point<2>(0.5f, -1e-3f), grid); }), ErrorCode::point_outside_domain);
}

TEST(Discretize, EdgeCounts) {
  const std::array<Point<2>, 2> e{Point<2>(0, 0), Point<2>(1, 0)};
  const auto pts = discretize_face<2>(e, 0.5f);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0], Point<2>(0, 0));
  EXPECT_EQ(pts[1], Point<2>(0.5f, 0));
  EXPECT_EQ(pts[2], Point<2>(1, 0));
  EXPECT_EQ(discretize_face<2>(e, 0.3f).size(), 5u);   // ceil(3.33) + 1
  EXPECT_EQ(discretize_face<2>(e, 10.0f).size(), 2u);  // endpoints only
}

TEST(Discretize, TinyTriangleIsItsVertices) {
  const std::array<Point<3>, 3> t{Point<3>(0, 0, 0), Point<3>(1e-3f, 0, 0), Point<3>(0, 1e-3f, 0)};
  const auto pts = discretize_face<3>(t, 0.5f);
  ASSERT_EQ(pts.size(), 3u);
  EXPECT_EQ(pts[0], t[0]);
  EXPECT_EQ(pts[1], t[1]);
  EXPECT_EQ(pts[2], t[2]);
}

TEST(Discretize, RightTriangleConstruction) {
  const std::array<Point<3>, 3> t{Point<3>(0, 0, 0), Point<3>(1, 0, 0), Point<3>(0, 1, 0)};
  const auto pts = discretize_face<3>(t, 0.25f);
  // Five points on v1v2, then ceil(|p_i v3| / 0.25) samples per segment
  // (lengths 1, 1.031, 1.118, 1.25, 1.414) and v3 once.
  EXPECT_EQ(pts.size(), 4u + 5u + 5u + 5u + 6u + 1u);
  int on_base = 0;
  for (const auto& p : pts) on_base += p[1] == 0.0f;
  EXPECT_EQ(on_base, 5);
  for (const auto& v : t) EXPECT_NE(std::find(pts.begin(), pts.end(), v), pts.end());
  for (const auto& p : pts) {
    EXPECT_GE(p[0], 0.0f);
    EXPECT_GE(p[1], 0.0f);
    EXPECT_LE(p[0] + p[1], 1.0f + 1e-6f);
  }
}

TEST(Discretize, SampleCountGrowsWithSize) {
  std::size_t last = 0;
  for (float s : {0.1f, 0.2f, 0.4f, 0.8f}) {
    const std::array<Point<3>, 3> t{Point<3>(0, 0, 0), Point<3>(s, 0, 0), Point<3>(0, s, s)};
    const auto n = discretize_face<3>(t, 0.05f).size();
    EXPECT_GT(n, last);
    last = n;
  }
}

TEST(Discretize, Errors) {
  const std::array<Point<2>, 2> e{Point<2>(0, 0), Point<2>(0, 0)};
  EXPECT_EQ(error_of([&] { discretize_face<2>(e, 0.1f); }), ErrorCode::degenerate_face);
  const std::array<Point<2>, 2> ok{Point<2>(0, 0), Point<2>(1, 0)};
  EXPECT_EQ(error_of([&] { discretize_face<2>(ok, 0.0f); }), ErrorCode::invalid_parameter);
}

TEST(Compact, Examples) {
  FaceBinIndicator ind(0, 1, 3);
  ind.at(0, 0) = 2;
  ind.at(0, 2) = 0;
  BinnedFaces out;
  compact_indicators(ind, out, 100);
  EXPECT_EQ(out.counts, std::vector<std::uint32_t>{2});
  EXPECT_EQ(out.ids, (std::vector<FaceId>{0, 2}));

  FaceBinIndicator empty(0, 1, 4);
  BinnedFaces none;
  compact_indicators(empty, none, 100);
  EXPECT_EQ(none.counts, std::vector<std::uint32_t>{0});
  EXPECT_TRUE(none.faces_in(0).empty());

  FaceBinIndicator two(0, 2, 4);
  for (int r : {0, 1, 3}) two.at(0, std::size_t(r)) = FaceId(r);
  for (int r : {1, 2}) two.at(1, std::size_t(r)) = FaceId(r);
  BinnedFaces out2;
  compact_indicators(two, out2, 100);
  EXPECT_EQ(out2.offsets, (std::vector<std::uint32_t>{0, 3}));
  EXPECT_GE(out2.ids.size(), 5u);
}

TEST(Compact, BatchesAppendInOrderAndRespectCapacity) {
  FaceBinIndicator a(0, 1, 2), b(1, 1, 2);
  a.at(0, 1) = 1;
  b.at(0, 0) = 0;
  b.at(0, 1) = 1;
  BinnedFaces out;
  EXPECT_EQ(error_of([&] { compact_indicators(b, out, 10); }), ErrorCode::invalid_parameter);
  compact_indicators(a, out, 10);
  compact_indicators(b, out, 10);
  EXPECT_EQ(out.offsets, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_EQ(out.ids, (std::vector<FaceId>{1, 0, 1}));
  BinnedFaces small;
  compact_indicators(a, small, 1);
  EXPECT_EQ(error_of([&] { compact_indicators(b, small, 2); }), ErrorCode::capacity_exceeded);
}

TEST(BinFractionTest, BatchSizes) {
  EXPECT_EQ(BinFraction{1}.bins_per_batch(64), 64u);
  EXPECT_EQ(BinFraction{4}.bins_per_batch(64), 16u);
  EXPECT_EQ(BinFraction{2}.bins_per_batch(9), 5u);
  EXPECT_EQ(BinFraction{100}.bins_per_batch(9), 1u);
  EXPECT_THROW(BinFraction{0}.bins_per_batch(9), Error);
  EXPECT_EQ(min_bin_fraction(1000, 64, 64000), 1);
  EXPECT_EQ(min_bin_fraction(1000, 64, 32000), 2);
  EXPECT_EQ(min_bin_fraction(1000, 64, 10), 64);
}

TEST(FillBins, SingleBinHoldsEverything) {
  const auto g = unit_sphere_mesh(6, 8);
  const auto bins = fill_bins(g, BinGrid<3>(Aabb<3>::unit(), 1), BinFraction{1});
  ASSERT_EQ(bins.n_bins(), 1u);
  EXPECT_EQ(bins.counts[0], g.n_faces());
  for (std::size_t f = 0; f < g.n_faces(); ++f) EXPECT_EQ(bins.ids[f], FaceId(f));
}

TEST(FillBins, EdgeAcrossTwoBins) {
  const std::array<std::array<Point<2>, 2>, 1> e{{{Point<2>(0.25f, 0.25f), Point<2>(0.75f, 0.25f)}}};
  const auto g = CoordListGeometry<2>::from_faces(e);
  const BinGrid<2> grid(Aabb<2>::unit(), 2);
  for (float spacing : {0.5f, 0.25f, 0.01f}) {
    FillOptions opts;
    opts.spacing = spacing;
    const auto bins = fill_bins(g, grid, BinFraction{1}, opts);
    EXPECT_EQ(bins.counts, (std::vector<std::uint32_t>{1, 1, 0, 0})) << spacing;
  }
  const auto b1 = fill_bins(g, grid, BinFraction{1}), b2 = fill_bins(g, grid, BinFraction{2});
  EXPECT_EQ(b1, b2);
}

TEST(FillBins, MatchesSampleOracle) {
  const auto g2 = random_edges(300, 3);
  const BinGrid<2> grid2(Aabb<2>::unit(), 7);
  const auto bins2 = fill_bins(g2, grid2, BinFraction{3});
  expect_invariants(bins2, grid2.n_bins(), g2.n_faces());
  const auto oracle2 = sample_oracle(g2, grid2, default_sample_spacing(grid2));
  for (std::size_t b = 0; b < grid2.n_bins(); ++b) {
    const auto f = bins2.faces_in(b);
    EXPECT_EQ(std::set<FaceId>(f.begin(), f.end()), oracle2[b]) << b;
  }

  const auto g3 = unit_sphere_mesh(10, 14, 0.4f);
  const BinGrid<3> grid3(Aabb<3>::unit(), 5);
  const auto bins3 = fill_bins(g3, grid3, BinFraction{4});
  expect_invariants(bins3, grid3.n_bins(), g3.n_faces());
  const auto oracle3 = sample_oracle(g3, grid3, default_sample_spacing(grid3));
  for (std::size_t b = 0; b < grid3.n_bins(); ++b) {
    const auto f = bins3.faces_in(b);
    EXPECT_EQ(std::set<FaceId>(f.begin(), f.end()), oracle3[b]) << b;
  }
}

TEST(FillBins, IndependentOfFractionAndBackend) {
  const auto g = unit_sphere_mesh(20, 30);
  const BinGrid<3> grid(Aabb<3>::unit(), 6);
  const auto ref = fill_bins(g, grid, BinFraction{1});
  for (int bf : {2, 3, 5, 7, 216, 1000})
    for (auto backend : {Backend::serial, Backend::parallel})
      EXPECT_EQ(fill_bins(g, grid, BinFraction{bf}, {}, backend), ref) << bf;
}

TEST(FillBins, OverlapBound) {
  const auto g = unit_sphere_mesh(20, 30);
  const auto bins = fill_bins(g, BinGrid<3>(Aabb<3>::unit(), 8), BinFraction{1});
  EXPECT_LE(bins.ids.size(), 10 * g.n_faces());
  EXPECT_GE(bins.ids.size(), g.n_faces());
}

TEST(FillBins, CapacityErrors) {
  const auto g = unit_sphere_mesh(20, 30);
  const BinGrid<3> grid(Aabb<3>::unit(), 8);
  FillOptions tight;
  tight.max_indicator_slots = g.n_faces() * 100;
  try {
    fill_bins(g, grid, BinFraction{1}, tight);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::capacity_exceeded);
    EXPECT_NE(std::string(e.what()).find("bin fraction"), std::string::npos);
  }
  EXPECT_EQ(fill_bins(g, grid, BinFraction{min_bin_fraction(g.n_faces(), grid.n_bins(), tight.max_indicator_slots)},
                      tight),
            fill_bins(g, grid, BinFraction{1}));

  FillOptions no_overlap;
  no_overlap.overlap_factor = 1.0;
  EXPECT_EQ(error_of([&] { fill_bins(g, grid, BinFraction{1}, no_overlap); }), ErrorCode::capacity_exceeded);
}

TEST(FillBins, InputErrors) {
  const std::array<std::array<Point<2>, 2>, 1> outside{{{Point<2>(0.5f, 0.5f), Point<2>(1.5f, 0.5f)}}};
  EXPECT_EQ(error_of([&] {
              fill_bins(CoordListGeometry<2>::from_faces(outside), BinGrid<2>(Aabb<2>::unit(), 2), BinFraction{1});
            }),
            ErrorCode::face_outside_domain);
  const std::array<std::array<Point<2>, 2>, 1> degenerate{{{Point<2>(0.5f, 0.5f), Point<2>(0.5f, 0.5f)}}};
  EXPECT_EQ(error_of([&] {
              fill_bins(CoordListGeometry<2>::from_faces(degenerate), BinGrid<2>(Aabb<2>::unit(), 2), BinFraction{1});
            }),
            ErrorCode::degenerate_face);
}

TEST(FillBins, EmptyGeometry) {
  const auto bins = fill_bins(CoordListGeometry<2>{}, BinGrid<2>(Aabb<2>::unit(), 3), BinFraction{2});
  EXPECT_EQ(bins.n_bins(), 9u);
  EXPECT_TRUE(bins.ids.empty());
}
