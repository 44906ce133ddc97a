#pragma once

/**
 * @file grelax.hpp
 * @brief Umbrella header.
 */

#include "grelax/error.hpp"
#include "grelax/numeric.hpp"
#include "grelax/time_grid.hpp"
#include "grelax/scenario_family.hpp"
#include "grelax/path_engine.hpp"
#include "grelax/family_estimates.hpp"
#include "grelax/gheat_pde.hpp"
#include "grelax/relaxed_control.hpp"
#include "grelax/gsde.hpp"
#include "grelax/robust_cost.hpp"
#include "grelax/optimizer.hpp"
#include "grelax/registry.hpp"
#include "grelax/config.hpp"
