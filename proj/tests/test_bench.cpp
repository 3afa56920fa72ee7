#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "octgeom/bench.hpp"

using namespace octgeom;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("octgeom_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

RunConfig small_circle() {
  RunConfig cfg;
  cfg.dim = 2;
  cfg.root_dims = {16, 16};
  cfg.d_spec = 0.05f;
  return cfg;
}

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::validation_failure;
}

}  // namespace

TEST(Vtk, SingleBlock2D) {
  const Forest<2> f(Aabb<2>::unit(), {1, 1});
  std::ostringstream out;
  write_vtk(f, out);
  const auto text = out.str();
  EXPECT_NE(text.find("DATASET UNSTRUCTURED_GRID"), std::string::npos);
  EXPECT_NE(text.find("POINTS 4 float"), std::string::npos);
  EXPECT_NE(text.find("CELLS 1 5\n4 0 1 2 3\n"), std::string::npos);
  EXPECT_NE(text.find("CELL_TYPES 1\n9\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS level int 1\nLOOKUP_TABLE default\n0\n"), std::string::npos);
  EXPECT_NE(text.find("SCALARS marked int 1"), std::string::npos);
  EXPECT_NE(text.find("0 0 0\n1 0 0\n1 1 0\n0 1 0\n"), std::string::npos);
}

TEST(Vtk, RefinedForestPointCount) {
  Forest<3> f(Aabb<3>::unit(), {2, 2, 2});
  f.set_mark(0, RefineMark::marked);
  refine_marked(f, 0);
  std::ostringstream out;
  write_vtk(f, out);
  const std::size_t leaves = 7 + 8;
  EXPECT_NE(out.str().find("POINTS " + std::to_string(leaves * 8) + " float"), std::string::npos);
  EXPECT_NE(out.str().find("CELL_TYPES 15\n12\n"), std::string::npos);
}

TEST(Vtk, EmptyPathIsIoError) {
  const Forest<2> f(Aabb<2>::unit(), {1, 1});
  EXPECT_EQ(error_of([&] { export_vtk(f, ""); }), ErrorCode::io_error);
  EXPECT_EQ(error_of([&] { export_vtk(f, "/nonexistent_dir/x.vtk"); }), ErrorCode::io_error);
  EXPECT_EQ(exit_code(ErrorCode::io_error), 6);
}

TEST(Reports, TimingsCsvSchema) {
  std::ostringstream out;
  write_timings_csv(out, {{"bin_setup", 0, 1.5}, {"face_detection", 1, 2.25}}, Strategy::binned, 8, 2);
  EXPECT_EQ(out.str(), "stage,level,strategy,B,B_f,milliseconds\nbin_setup,0,binned,8,2,1.500\n"
                       "face_detection,1,binned,8,2,2.250\n");
}

TEST(Reports, BinsCsvSchema) {
  BinnedFaces bins;
  bins.counts = {2, 0, 1};
  bins.offsets = {0, 2, 2};
  bins.ids = {0, 1, 1};
  std::ostringstream out;
  write_bins_csv(out, bins);
  EXPECT_EQ(out.str(), "bin_id,count,offset\n0,2,0\n1,0,2\n2,1,2\n");
}

TEST(Run, DefaultCircleSummary) {
  RunConfig cfg;
  cfg.dim = 2;
  const auto r = run(cfg);
  const auto l = lines(r.summary);
  EXPECT_EQ(l[1], "faces 12800");
  EXPECT_EQ(l[4], "levels 3");
  EXPECT_GT(r.total_blocks, 4096u);
}

TEST(Run, BackendsGiveIdenticalSummaries) {
  auto cfg = small_circle();
  cfg.strategy = Strategy::binned;
  cfg.bin_density = 8;
  const auto a = run(cfg);
  cfg.backend = Backend::parallel;
  const auto b = run(cfg);
  EXPECT_EQ(a.summary, b.summary);
  EXPECT_NE(a.summary.find("bins 64"), std::string::npos);
}

TEST(Run, NaiveStrategyIgnoresDensity) {
  auto cfg = small_circle();
  cfg.bin_density = 8;
  const auto r = run(cfg);
  EXPECT_NE(r.summary.find("strategy naive B 1"), std::string::npos) << r.summary;
}

TEST(Run, WritesArtifactsDeterministically) {
  const auto dir = scratch_dir("artifacts");
  auto cfg = small_circle();
  cfg.strategy = Strategy::binned;
  cfg.bin_density = 4;
  cfg.out_vtk = (dir / "a.vtk").string();
  cfg.out_csv = (dir / "a.csv").string();
  cfg.dump_bins = (dir / "bins.csv").string();
  run(cfg);
  const auto vtk1 = slurp(dir / "a.vtk"), bins1 = slurp(dir / "bins.csv");
  run(cfg);
  EXPECT_EQ(vtk1, slurp(dir / "a.vtk"));
  EXPECT_EQ(bins1, slurp(dir / "bins.csv"));
  const auto csv = lines(slurp(dir / "a.csv"));
  EXPECT_EQ(csv[0], "stage,level,strategy,B,B_f,milliseconds");
  EXPECT_EQ(csv.size(), 1u + 1u + 2u * 3u);  // bin setup, then detect/propagate/refine per level
  EXPECT_EQ(lines(bins1).size(), 17u);
}

TEST(Run, FailureLeavesNoArtifacts) {
  const auto dir = scratch_dir("failure");
  RunConfig cfg;
  cfg.dim = 3;
  cfg.stl_path = (dir / "missing.stl").string();
  cfg.out_vtk = (dir / "x.vtk").string();
  cfg.out_csv = (dir / "x.csv").string();
  EXPECT_EQ(error_of([&] { run(cfg); }), ErrorCode::parse_error);
  EXPECT_FALSE(fs::exists(dir / "x.vtk"));
  EXPECT_FALSE(fs::exists(dir / "x.csv"));
}

TEST(Run, ConfigErrors) {
  auto bad = small_circle();
  bad.d_spec = 0.0f;
  EXPECT_EQ(error_of([&] { run(bad); }), ErrorCode::config_error);
  bad = small_circle();
  bad.root_dims = {4, 4, 4};
  EXPECT_EQ(error_of([&] { run(bad); }), ErrorCode::config_error);
  bad = small_circle();
  bad.domain = {1, 0, 0, 1};
  EXPECT_EQ(error_of([&] { run(bad); }), ErrorCode::config_error);
  bad = small_circle();
  bad.stl_path = std::string(OCTGEOM_TEST_DATA) + "/cube_ascii.stl";
  EXPECT_EQ(error_of([&] { run(bad); }), ErrorCode::wrong_dimension);
  bad = small_circle();
  bad.dump_bins = "/tmp/octgeom_unused_bins.csv";
  EXPECT_EQ(error_of([&] { run(bad); }), ErrorCode::config_error);
}

TEST(Run, CapacityError) {
  auto cfg = small_circle();
  cfg.strategy = Strategy::binned;
  cfg.bin_density = 8;
  cfg.bin_fraction = 1;
  cfg.fill.max_indicator_slots = 4 * 12800;  // four bins of the default 12800-edge circle
  EXPECT_EQ(error_of([&] { run(cfg); }), ErrorCode::capacity_exceeded);
  cfg.bin_fraction = 0;  // auto picks a fraction that fits
  EXPECT_NO_THROW(run(cfg));
}

TEST(Run, StlCubeIn3D) {
  RunConfig cfg;
  cfg.dim = 3;
  cfg.stl_path = std::string(OCTGEOM_TEST_DATA) + "/cube_ascii.stl";
  cfg.domain = {-0.5, -0.5, -0.5, 1.5, 1.5, 1.5};
  cfg.root_dims = {8, 8, 8};
  cfg.d_spec = 0.1f;
  const auto r = run(cfg);
  EXPECT_NE(r.summary.find("faces 12"), std::string::npos);
}

TEST(Sweep, SingleNaiveRow) {
  const auto rows = sweep(small_circle(), {1});
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].bin_setup_ms, 0.0);
  EXPECT_FALSE(rows[0].error);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  EXPECT_EQ(lines(out.str())[0], "B,bin_setup_ms,face_detect_ms,total_ms,blocks_marked,blocks_final");
}

TEST(Sweep, OverRefinementAndFailuresRecorded) {
  auto cfg = small_circle();
  cfg.bin_fraction = 1;
  cfg.fill.max_indicator_slots = 12800 * 70;
  const auto rows = sweep(cfg, {1, 4, 16});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[1].error);
  ASSERT_TRUE(rows[2].error);  // 256 bins do not fit in one batch
  EXPECT_EQ(rows[2].error->code(), ErrorCode::capacity_exceeded);
  EXPECT_GE(rows[1].blocks_final, rows[0].blocks_final);
  std::ostringstream out;
  write_sweep_csv(out, rows);
  EXPECT_EQ(lines(out.str())[3], "16,nan,nan,nan,-1,-1");
}

TEST(Validate, DefaultCirclePasses) {
  RunConfig cfg;
  cfg.dim = 2;
  cfg.oracle_samples = 20000;
  const auto rep = validate(cfg);
  ASSERT_EQ(rep.checks.size(), 3u);
  for (const auto& c : rep.checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
  EXPECT_TRUE(rep.passed());
}

TEST(Validate, CorruptedBinnedRunFails) {
  auto cfg = small_circle();
  cfg.oracle_samples = 1000;
  cfg.corrupt_binned_for_testing = true;
  const auto rep = validate(cfg);
  EXPECT_FALSE(rep.passed());
  EXPECT_FALSE(rep.checks[1].passed);
  EXPECT_TRUE(rep.checks[0].passed);
}
