#ifndef NMKDV_NMKDV_HPP
#define NMKDV_NMKDV_HPP

#include "errors.hpp"
#include "core_model.hpp"
#include "direct_scattering.hpp"
#include "scattering_data.hpp"
#include "cauchy_ops.hpp"
#include "rh_solver.hpp"
#include "reconstruction.hpp"
#include "oracles.hpp"
#include "config.hpp"

#endif
