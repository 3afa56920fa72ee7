#pragma once

#include <iomanip>
#include <ostream>
#include <vector>

#include "octgeom/binning.hpp"
#include "octgeom/nearwall.hpp"

namespace octgeom {

/// `stage,level,strategy,B,B_f,milliseconds`, one row per timed stage.
inline void write_timings_csv(std::ostream& out, const std::vector<StageTiming>& timings, Strategy strategy,
                              int bin_density, int bin_fraction) {
  out << "stage,level,strategy,B,B_f,milliseconds\n";
  for (const auto& t : timings)
    out << t.stage << ',' << t.level << ',' << to_string(strategy) << ',' << bin_density << ',' << bin_fraction
        << ',' << std::fixed << std::setprecision(3) << t.milliseconds << std::defaultfloat << '\n';
}

/// `bin_id,count,offset`, one row per bin.
inline void write_bins_csv(std::ostream& out, const BinnedFaces& bins) {
  out << "bin_id,count,offset\n";
  for (std::size_t b = 0; b < bins.n_bins(); ++b) out << b << ',' << bins.counts[b] << ',' << bins.offsets[b] << '\n';
}

}  // namespace octgeom
