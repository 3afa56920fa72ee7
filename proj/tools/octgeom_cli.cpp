// octgeom: near-wall refinement of a forest-of-octrees grid.
//
//   octgeom --dim 2 --dspec 0.1 --levels 3 --strategy binned --bin-density 8
//   octgeom --dim 3 --stl bunny.stl --sweep 1,2,4,8,16 --out-csv sweep.csv
//   octgeom --dim 2 --validate
//
// Exit codes: 0 ok, 2 config, 3 parse, 4 capacity, 5 validation failure, 6 io.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "octgeom/octgeom.hpp"

namespace {

constexpr int kConfigExit = 2;

int run_sweep(const octgeom::RunConfig& cfg, const std::vector<int>& densities) {
  const auto rows = octgeom::sweep(cfg, densities);
  for (const auto& r : rows)
    if (r.error) std::cerr << "B=" << r.bin_density << " failed: " << r.error->what() << '\n';
  if (cfg.out_csv.empty()) {
    octgeom::write_sweep_csv(std::cout, rows);
  } else {
    std::ofstream out(cfg.out_csv);
    if (!out) throw octgeom::Error(octgeom::ErrorCode::io_error, "cannot write '" + cfg.out_csv + "'");
    octgeom::write_sweep_csv(out, rows);
    if (!out) throw octgeom::Error(octgeom::ErrorCode::io_error, "failed writing '" + cfg.out_csv + "'");
  }
  return 0;
}

int run_validate(const octgeom::RunConfig& cfg) {
  const auto report = octgeom::validate(cfg);
  for (const auto& c : report.checks)
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  if (!report.passed()) {
    std::cerr << "error: " << octgeom::to_string(octgeom::ErrorCode::validation_failure) << ": "
              << "one or more checks failed\n";
    return octgeom::exit_code(octgeom::ErrorCode::validation_failure);
  }
  return 0;
}

int run_single(const octgeom::RunConfig& cfg) {
  const auto result = octgeom::run(cfg);
  std::cout << result.summary;
  double total = 0.0;
  for (const auto& t : result.timings) total += t.milliseconds;
  std::cerr << "elapsed_ms " << total << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Near-wall refinement of a forest-of-octrees grid around edge or triangle geometry"};
  app.set_config("--config", "", "key=value file with default option values; flags on the command line win");
  app.get_formatter()->column_width(34);

  octgeom::RunConfig cfg;
  std::string strategy = "naive", backend = "serial", stencil = "face";
  bool do_validate = false;
  std::vector<int> sweep_list;

  app.add_option("--dim", cfg.dim, "Dimension")->check(CLI::IsMember({2, 3}))->capture_default_str();
  app.add_option("--domain", cfg.domain, "Domain box: x0 y0 [z0] x1 y1 [z1] (default unit box)")->expected(4, 6);
  app.add_option("--root-dims", cfg.root_dims, "Root blocks per axis (default 64 in 2D, 16 in 3D)")->expected(2, 3);
  auto* stl = app.add_option("--stl", cfg.stl_path, "STL geometry (ASCII or binary, 3D only)");
  auto* prim = app.add_option("--primitives", cfg.primitives_path, "Text file of circle/sphere primitives");
  stl->excludes(prim);
  app.add_option("--dspec", cfg.d_spec, "Near-wall distance")->capture_default_str();
  app.add_option("--levels", cfg.n_levels, "Total grid levels after refinement")->capture_default_str();
  app.add_option("--strategy", strategy, "Face search strategy")
      ->check(CLI::IsMember({"naive", "binned"}))
      ->capture_default_str();
  app.add_option("--bin-density", cfg.bin_density, "Bins per axis (B)")->capture_default_str();
  app.add_option("--bin-fraction", cfg.bin_fraction, "Bin-fill batches (B_f); 0 picks the smallest that fits memory")
      ->capture_default_str();
  app.add_option("--backend", backend, "Executor")->check(CLI::IsMember({"serial", "parallel"}))->capture_default_str();
  app.add_option("--seed", cfg.seed, "Seed for randomized validation")->capture_default_str();
  app.add_option("--out-vtk", cfg.out_vtk, "Write the final forest as legacy VTK");
  app.add_option("--out-csv", cfg.out_csv, "Write stage timings (or the sweep table) as CSV");
  app.add_option("--dump-bins", cfg.dump_bins, "Write per-bin counts and offsets as CSV");
  app.add_flag("--validate", do_validate, "Run the cross-checks and report pass/fail per check");
  app.add_option("--sweep", sweep_list, "Run once per bin density, e.g. 1,2,4,8,16")->delimiter(',');
  app.add_option("--max-level", cfg.max_level, "Deepest allowed block level")->capture_default_str();
  app.add_option("--stencil", stencil, "Propagation neighborhood: face neighbors or all 3^D-1")
      ->check(CLI::IsMember({"face", "full"}))
      ->capture_default_str();
  app.add_option("--overlap-factor", cfg.fill.overlap_factor, "Binned entries allowed per face")
      ->capture_default_str();
  app.add_option("--max-indicator-slots", cfg.fill.max_indicator_slots, "Bin indicator slots per batch")
      ->capture_default_str();
  app.add_option("--oracle-samples", cfg.oracle_samples, "Samples for the predicate check in --validate")
      ->capture_default_str();
  app.add_flag("--corrupt-binned", cfg.corrupt_binned_for_testing, "Negative control for --validate")->group("");
  app.add_option("--spacing", cfg.fill.spacing, "Face sample spacing (0 = half the bin length)")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  cfg.strategy = octgeom::parse_strategy(strategy);
  cfg.backend = octgeom::parse_backend(backend);
  cfg.stencil = stencil == "full" ? octgeom::Stencil::full : octgeom::Stencil::face;

  if (!cfg.domain.empty() && cfg.domain.size() != std::size_t(2 * cfg.dim)) {
    std::cerr << "error: config_error: --domain needs " << 2 * cfg.dim << " values for --dim " << cfg.dim << '\n';
    return kConfigExit;
  }
  if (do_validate && !sweep_list.empty()) {
    std::cerr << "error: config_error: --validate and --sweep are exclusive\n";
    return kConfigExit;
  }

  try {
    if (do_validate) return run_validate(cfg);
    if (!sweep_list.empty()) return run_sweep(cfg, sweep_list);
    return run_single(cfg);
  } catch (const octgeom::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return octgeom::exit_code(e.code());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: capacity_exceeded: out of memory\n";
    return octgeom::exit_code(octgeom::ErrorCode::capacity_exceeded);
  }
}
