#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "octgeom/binning.hpp"
#include "octgeom/forest.hpp"
#include "octgeom/geometry.hpp"
#include "octgeom/nearwall.hpp"
#include "octgeom/primitives.hpp"
#include "octgeom/report.hpp"
#include "octgeom/stl.hpp"
#include "octgeom/validation.hpp"
#include "octgeom/vtk.hpp"

namespace octgeom {

/// Everything a run needs. Empty `domain` means the unit box; empty
/// `root_dims` means 64 per axis in 2D and 16 in 3D. Without a geometry path
/// a centered circle (12800 edges, radius 0.1 of the extent) or sphere
/// (~1e5 triangles, radius 0.25 of the extent) is generated.
struct RunConfig {
  int dim = 2;
  std::vector<double> domain;
  std::vector<int> root_dims;
  std::string stl_path;
  std::string primitives_path;
  float d_spec = 0.1f;
  int n_levels = 3;
  Strategy strategy = Strategy::naive;
  int bin_density = 1;
  /// 0 selects the smallest fraction whose indicator fits fill.max_indicator_slots.
  int bin_fraction = 0;
  Backend backend = Backend::serial;
  std::uint64_t seed = 1;
  std::string out_vtk;
  std::string out_csv;
  std::string dump_bins;
  int max_level = 10;
  Stencil stencil = Stencil::face;
  FillOptions fill;
  std::size_t oracle_samples = 100000;
  /// Test hook: the binned run in validate() skips refinement entirely.
  bool corrupt_binned_for_testing = false;

  void check() const {
    auto fail = [](const std::string& m) { throw Error(ErrorCode::config_error, m); };
    if (dim != 2 && dim != 3) fail("dimension must be 2 or 3");
    if (!domain.empty() && domain.size() != std::size_t(2 * dim)) fail("domain needs 2*dim values");
    for (std::size_t c = 0; !domain.empty() && c < std::size_t(dim); ++c)
      if (!(domain[c] < domain[c + std::size_t(dim)])) fail("domain min must be below max on every axis");
    if (!root_dims.empty() && root_dims.size() != std::size_t(dim)) fail("root dims need dim values");
    for (int r : root_dims)
      if (r < 1) fail("root dims must be >= 1");
    if (!stl_path.empty() && !primitives_path.empty()) fail("give either an STL or a primitives file, not both");
    if (!stl_path.empty() && dim != 3) throw Error(ErrorCode::wrong_dimension, "STL geometry requires --dim 3");
    if (!(d_spec > 0.0f)) fail("d_spec must be positive");
    if (n_levels < 1) fail("levels must be >= 1");
    if (bin_density < 1) fail("bin density must be >= 1");
    if (bin_fraction < 0) fail("bin fraction must be >= 0");
    if (!dump_bins.empty() && effective_density() < 2) fail("--dump-bins needs the binned strategy with B > 1");
  }

  /// The density actually used: the naive strategy always searches one bin.
  int effective_density() const { return strategy == Strategy::naive ? 1 : bin_density; }
};

template <int D>
Aabb<D> config_domain(const RunConfig& cfg) {
  if (cfg.domain.empty()) return Aabb<D>::unit();
  Aabb<D> box;
  for (int c = 0; c < D; ++c) {
    box.min[c] = float(cfg.domain[std::size_t(c)]);
    box.max[c] = float(cfg.domain[std::size_t(c + D)]);
  }
  return box;
}

template <int D>
std::array<int, D> config_root_dims(const RunConfig& cfg) {
  std::array<int, D> dims;
  for (int c = 0; c < D; ++c) dims[std::size_t(c)] = cfg.root_dims.empty() ? (D == 2 ? 64 : 16) : cfg.root_dims[std::size_t(c)];
  return dims;
}

/// Default benchmark shapes.
inline IndexedGeometry<2> default_circle(const Aabb<2>& domain) {
  const Point<2> mid = 0.5f * (domain.min + domain.max);
  return generate_circle(mid, 0.1 * double(domain.extent().minCoeff()), 12800);
}

inline IndexedGeometry<3> default_sphere(const Aabb<3>& domain) {
  const Point<3> mid = 0.5f * (domain.min + domain.max);
  return generate_sphere(mid, 0.25 * double(domain.extent().minCoeff()), 200, 256);
}

template <int D>
CoordListGeometry<D> load_geometry(const RunConfig& cfg) {
  if (!cfg.stl_path.empty()) {
    if constexpr (D == 3)
      return import_stl(cfg.stl_path, D);
    else
      throw Error(ErrorCode::wrong_dimension, "STL geometry requires a 3D run");
  }
  if (!cfg.primitives_path.empty()) return index_to_coords(import_text_primitives<D>(cfg.primitives_path));
  if constexpr (D == 2)
    return index_to_coords(default_circle(config_domain<2>(cfg)));
  else
    return index_to_coords(default_sphere(config_domain<3>(cfg)));
}

template <int D>
NearWallParams near_wall_params(const RunConfig& cfg, std::size_t n_faces) {
  NearWallParams p;
  p.d_spec = cfg.d_spec;
  p.n_levels = cfg.n_levels;
  p.strategy = cfg.effective_density() > 1 ? Strategy::binned : Strategy::naive;
  p.bin_density = cfg.effective_density();
  p.backend = cfg.backend;
  p.stencil = cfg.stencil;
  p.fill = cfg.fill;
  std::size_t n_bins = 1;
  for (int c = 0; c < D; ++c) n_bins *= std::size_t(p.bin_density);
  p.bin_fraction = cfg.bin_fraction > 0 ? cfg.bin_fraction : min_bin_fraction(n_faces, n_bins, cfg.fill.max_indicator_slots);
  return p;
}

template <int D>
struct Execution {
  Forest<D> forest;
  RefineReport<D> report;
  NearWallParams params;
  std::size_t n_faces = 0;
};

template <int D>
Execution<D> execute(const RunConfig& cfg, const CoordListGeometry<D>& g) {
  Forest<D> forest(config_domain<D>(cfg), config_root_dims<D>(cfg), cfg.max_level);
  const auto params = near_wall_params<D>(cfg, g.n_faces());
  auto report = refine_near_wall(forest, g, params);
  return {std::move(forest), std::move(report), params, g.n_faces()};
}

/// Deterministic text summary: no timings and no backend, so runs that must
/// agree produce identical bytes.
template <int D>
std::string summarize(const Execution<D>& e) {
  std::ostringstream s;
  s << "dimension " << D << '\n'
    << "faces " << e.n_faces << '\n'
    << "strategy " << to_string(e.params.strategy) << " B " << e.params.bin_density << " B_f "
    << e.params.bin_fraction << '\n'
    << "d_spec " << std::setprecision(9) << e.params.d_spec << '\n'
    << "levels " << e.forest.depth() << '\n';
  for (int l = 0; l < e.forest.depth(); ++l) {
    s << "level " << l << " blocks " << e.forest.id_set(l).size() << " leaves " << leaf_blocks_at(e.forest, l).size();
    if (std::size_t(l) < e.report.marked.size())
      s << " detected " << e.report.detected[std::size_t(l)].size() << " marked "
        << e.report.marked[std::size_t(l)].size();
    s << '\n';
  }
  s << "total_blocks " << e.forest.size() << '\n';
  if (e.report.bins) {
    const auto& bins = *e.report.bins;
    std::size_t nonempty = 0, max_count = 0;
    for (auto c : bins.counts) {
      nonempty += c > 0;
      max_count = std::max<std::size_t>(max_count, c);
    }
    s << "bins " << bins.n_bins() << " nonempty " << nonempty << " max_count " << max_count << " entries "
      << bins.ids.size() << '\n';
  }
  return s.str();
}

struct RunResult {
  std::string summary;
  std::vector<StageTiming> timings;
  std::size_t total_blocks = 0;
  std::size_t blocks_marked = 0;
};

namespace detail {

inline void write_text_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  body(out);
  if (!out) throw Error(ErrorCode::io_error, "failed writing '" + path + "'");
}

template <int D>
RunResult run_dim(const RunConfig& cfg) {
  const auto g = load_geometry<D>(cfg);
  const auto e = execute<D>(cfg, g);
  RunResult r;
  r.summary = summarize(e);
  r.timings = e.report.timings;
  r.total_blocks = e.forest.size();
  for (const auto& m : e.report.marked) r.blocks_marked += m.size();

  // Artifacts are written only once the pipeline has succeeded.
  if (!cfg.out_vtk.empty()) export_vtk(e.forest, cfg.out_vtk);
  if (!cfg.out_csv.empty())
    write_text_file(cfg.out_csv, [&](std::ostream& o) {
      write_timings_csv(o, r.timings, e.params.strategy, e.params.bin_density, e.params.bin_fraction);
    });
  if (!cfg.dump_bins.empty())
    write_text_file(cfg.dump_bins, [&](std::ostream& o) { write_bins_csv(o, *e.report.bins); });
  return r;
}

}  // namespace detail

/// Import, bin, refine; then write the requested artifacts.
inline RunResult run(const RunConfig& cfg) {
  cfg.check();
  return cfg.dim == 2 ? detail::run_dim<2>(cfg) : detail::run_dim<3>(cfg);
}

struct SweepRow {
  int bin_density = 1;
  double bin_setup_ms = 0.0;
  double face_detect_ms = 0.0;
  double total_ms = 0.0;
  std::size_t blocks_marked = 0;
  std::size_t blocks_final = 0;
  std::optional<Error> error;
};

namespace detail {

template <int D>
SweepRow sweep_one(const RunConfig& base, const CoordListGeometry<D>& g, int density) {
  RunConfig cfg = base;
  cfg.bin_density = density;
  cfg.strategy = density > 1 ? Strategy::binned : Strategy::naive;
  SweepRow row;
  row.bin_density = density;
  try {
    const auto e = execute<D>(cfg, g);
    row.bin_setup_ms = e.report.total_ms("bin_setup");
    row.face_detect_ms = e.report.total_ms("face_detection");
    for (const auto& t : e.report.timings) row.total_ms += t.milliseconds;
    for (const auto& m : e.report.marked) row.blocks_marked += m.size();
    row.blocks_final = e.forest.size();
  } catch (const Error& err) {
    row.error = err;
  }
  return row;
}

template <int D>
std::vector<SweepRow> sweep_dim(const RunConfig& cfg, const std::vector<int>& densities) {
  const auto g = load_geometry<D>(cfg);
  if (!densities.empty()) sweep_one<D>(cfg, g, densities.front());  // warm-up, discarded
  std::vector<SweepRow> rows;
  for (int b : densities) rows.push_back(sweep_one<D>(cfg, g, b));
  return rows;
}

}  // namespace detail

/// One run per bin density (B = 1 is the naive search). A failing run is
/// recorded in its row and the sweep continues.
inline std::vector<SweepRow> sweep(const RunConfig& cfg, const std::vector<int>& densities) {
  cfg.check();
  for (int b : densities)
    if (b < 1) throw Error(ErrorCode::config_error, "bin densities must be >= 1");
  return cfg.dim == 2 ? detail::sweep_dim<2>(cfg, densities) : detail::sweep_dim<3>(cfg, densities);
}

/// `B,bin_setup_ms,face_detect_ms,total_ms,blocks_marked,blocks_final`;
/// failed runs carry `nan` timings and -1 counts.
inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "B,bin_setup_ms,face_detect_ms,total_ms,blocks_marked,blocks_final\n";
  for (const auto& r : rows) {
    out << r.bin_density << ',';
    if (r.error) {
      out << "nan,nan,nan,-1,-1\n";
      continue;
    }
    out << std::fixed << std::setprecision(3) << r.bin_setup_ms << ',' << r.face_detect_ms << ',' << r.total_ms
        << std::defaultfloat << ',' << r.blocks_marked << ',' << r.blocks_final << '\n';
  }
}

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
  }
};

namespace detail {

template <int D>
ValidationReport validate_dim(const RunConfig& cfg) {
  ValidationReport rep;
  const auto g = load_geometry<D>(cfg);

  RunConfig binned_cfg = cfg;
  binned_cfg.strategy = Strategy::binned;
  if (binned_cfg.bin_density < 2) binned_cfg.bin_density = 8;
  RunConfig naive_cfg = cfg;
  naive_cfg.strategy = Strategy::naive;

  {
    RunConfig s = cfg, p = cfg;
    s.backend = Backend::serial;
    p.backend = Backend::parallel;
    const auto es = execute<D>(s, g);
    const auto ep = execute<D>(p, g);
    const bool same = es.forest == ep.forest && es.report.marked == ep.report.marked &&
                      es.report.detected == ep.report.detected && es.report.bins == ep.report.bins;
    rep.checks.push_back({"backend-equality", same,
                          same ? std::to_string(es.forest.size()) + " blocks on both backends"
                               : "serial and parallel runs differ"});
  }

  {
    const auto naive = execute<D>(naive_cfg, g);
    Forest<D> binned(config_domain<D>(binned_cfg), config_root_dims<D>(binned_cfg), binned_cfg.max_level);
    if (!cfg.corrupt_binned_for_testing)
      refine_near_wall(binned, g, near_wall_params<D>(binned_cfg, g.n_faces()));
    const bool ok = refines_at_least(binned, naive.forest);
    rep.checks.push_back({"binned-superset", ok,
                          "B=" + std::to_string(binned_cfg.bin_density) + ": binned " + std::to_string(binned.size()) +
                              " blocks, naive " + std::to_string(naive.forest.size())});
  }

  {
    const auto agreement = sample_predicate_agreement<D>(cfg.oracle_samples, cfg.seed);
    const bool ok = agreement.disagreements == 0;
    rep.checks.push_back({"predicate-oracle", ok,
                          std::to_string(agreement.samples) + " samples, " + std::to_string(agreement.in_band) +
                              " in band, " + std::to_string(agreement.disagreements) + " disagreements"});
  }
  return rep;
}

}  // namespace detail

/// Cross-checks: serial vs parallel, naive vs binned coverage, and the range
/// predicate against exact distances.
inline ValidationReport validate(const RunConfig& cfg) {
  cfg.check();
  return cfg.dim == 2 ? detail::validate_dim<2>(cfg) : detail::validate_dim<3>(cfg);
}

}  // namespace octgeom
