#pragma once

// Umbrella header: the whole filtering library plus the experiment runner.

#include "fpf/angles.hpp"
#include "fpf/common.hpp"
#include "fpf/experiment.hpp"
#include "fpf/filter.hpp"
#include "fpf/gain.hpp"
#include "fpf/grid.hpp"
#include "fpf/jpda.hpp"
#include "fpf/linear.hpp"
#include "fpf/metrics.hpp"
#include "fpf/model.hpp"
#include "fpf/pda.hpp"
#include "fpf/rng.hpp"
#include "fpf/scenarios.hpp"
#include "fpf/sirpf.hpp"
#include "fpf/verify.hpp"
