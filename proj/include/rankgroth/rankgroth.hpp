#pragma once

#include "core.hpp"
#include "special_functions.hpp"
#include "power_series.hpp"
#include "constants.hpp"
#include "graph.hpp"
#include "random.hpp"
#include "sdp_solver.hpp"
#include "theta_sdp.hpp"
#include "krivine_embedding.hpp"
#include "rounding.hpp"
