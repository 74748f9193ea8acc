#pragma once

// Stochastic solvers for 1-D semilinear parabolic equations (branching
// Brownian trees and exit measures) with a deterministic finite-difference /
// heat-kernel oracle to verify them against.

#include "branchmc/brownian.hpp"
#include "branchmc/checks.hpp"
#include "branchmc/csv.hpp"
#include "branchmc/engine.hpp"
#include "branchmc/errors.hpp"
#include "branchmc/expr.hpp"
#include "branchmc/fd.hpp"
#include "branchmc/heat.hpp"
#include "branchmc/mckean.hpp"
#include "branchmc/offspring.hpp"
#include "branchmc/quadrature.hpp"
#include "branchmc/rng.hpp"
#include "branchmc/stats.hpp"
#include "branchmc/superprocess.hpp"
