#pragma once

#include "polyexp/basis.hpp"
#include "polyexp/errors.hpp"
#include "polyexp/experiments.hpp"
#include "polyexp/grid.hpp"
#include "polyexp/io.hpp"
#include "polyexp/moments.hpp"
#include "polyexp/result.hpp"
#include "polyexp/spectral.hpp"
#include "polyexp/spline.hpp"
#include "polyexp/tikhonov.hpp"
#include "polyexp/trig.hpp"
