#pragma once

#include "bck/csv.hpp"
#include "bck/error.hpp"
#include "bck/invariants.hpp"
#include "bck/ode/dopri5.hpp"
#include "bck/ode/systems.hpp"
#include "bck/propagator.hpp"
#include "bck/quantum.hpp"
#include "bck/scenario.hpp"
#include "bck/scenario_io.hpp"
#include "bck/time_function.hpp"
#include "bck/underdamped.hpp"
