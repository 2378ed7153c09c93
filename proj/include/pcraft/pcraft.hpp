#pragma once

#include "pcraft/avail_models.hpp"
#include "pcraft/config.hpp"
#include "pcraft/ctmc.hpp"
#include "pcraft/error.hpp"
#include "pcraft/integrity_models.hpp"
#include "pcraft/perf_ingest.hpp"
#include "pcraft/planner.hpp"
#include "pcraft/poisson.hpp"
#include "pcraft/presets.hpp"
#include "pcraft/sim_oracle.hpp"
#include "pcraft/steady_state.hpp"
#include "pcraft/transient.hpp"
#include "pcraft/types.hpp"
#include "pcraft/units.hpp"
