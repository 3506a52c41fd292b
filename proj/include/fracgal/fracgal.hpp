#pragma once

#include "fracgal/errors.hpp"
#include "fracgal/parallel.hpp"
#include "fracgal/quadrature.hpp"
#include "fracgal/temporal_grid.hpp"
#include "fracgal/mittag_leffler.hpp"
#include "fracgal/frac_weights.hpp"
#include "fracgal/report.hpp"
#include "fracgal/scalar_steppers.hpp"
#include "fracgal/green_functions.hpp"
#include "fracgal/spatial_fem.hpp"
#include "fracgal/history_kernel.hpp"
#include "fracgal/pde_solver.hpp"
#include "fracgal/analysis_oracles.hpp"
#include "fracgal/experiments.hpp"
