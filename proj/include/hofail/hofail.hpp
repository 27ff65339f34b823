#pragma once

#include "analytic.hpp"
#include "geometry.hpp"
#include "histogram.hpp"
#include "monte_carlo.hpp"
#include "quadrature.hpp"
#include "semi_analytic.hpp"
#include "sweep.hpp"
#include "trace_sim.hpp"
#include "travel_kernels.hpp"
