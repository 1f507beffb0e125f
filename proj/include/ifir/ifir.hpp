#pragma once

#include "ifir/types.hpp"
#include "ifir/linalg.hpp"
#include "ifir/signal_model.hpp"
#include "ifir/interp_core.hpp"
#include "ifir/mmse_design.hpp"
#include "ifir/cmv_design.hpp"
#include "ifir/adaptive.hpp"
#include "ifir/analysis.hpp"
#include "ifir/harness/config.hpp"
#include "ifir/harness/baselines.hpp"
#include "ifir/harness/simulation.hpp"
#include "ifir/harness/export.hpp"
