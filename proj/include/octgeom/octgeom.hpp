#pragma once

#include "octgeom/bench.hpp"
#include "octgeom/binning.hpp"
#include "octgeom/distance.hpp"
#include "octgeom/error.hpp"
#include "octgeom/executor.hpp"
#include "octgeom/forest.hpp"
#include "octgeom/geometry.hpp"
#include "octgeom/nearwall.hpp"
#include "octgeom/point.hpp"
#include "octgeom/primitives.hpp"
#include "octgeom/report.hpp"
#include "octgeom/stl.hpp"
#include "octgeom/validation.hpp"
#include "octgeom/vtk.hpp"
