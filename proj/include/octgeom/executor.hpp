#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "octgeom/error.hpp"

namespace octgeom {

/// Where data-parallel kernels run. The choice never changes results: every
/// kernel writes only to slots owned by its work item.
enum class Backend { serial, parallel };

constexpr std::string_view to_string(Backend b) { return b == Backend::serial ? "serial" : "parallel"; }

inline Backend parse_backend(std::string_view s) {
  if (s == "serial") return Backend::serial;
  if (s == "parallel") return Backend::parallel;
  throw Error(ErrorCode::config_error, "unknown backend '" + std::string(s) + "'");
}

/// Calls fn(i) for every i in [0, n).
template <typename Fn>
void parallel_for(Backend backend, std::size_t n, Fn&& fn) {
  if (backend == Backend::serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  tbb::parallel_for(tbb::blocked_range<std::size_t>(0, n), [&](const tbb::blocked_range<std::size_t>& r) {
    for (std::size_t i = r.begin(); i != r.end(); ++i) fn(i);
  });
}

}  // namespace octgeom
