#pragma once

// Umbrella header: the whole verification laboratory in dependency order.

#include "optrace/errors.hpp"
#include "optrace/numeric.hpp"
#include "optrace/sym_matrix.hpp"
#include "optrace/trig_potential.hpp"
#include "optrace/galerkin.hpp"
#include "optrace/contour.hpp"
#include "optrace/resolvent.hpp"
#include "optrace/trace_formula.hpp"
#include "optrace/run_config.hpp"
#include "optrace/report_io.hpp"
#include "optrace/runner.hpp"
