#pragma once

#include "ops/simcore/config.hpp"
#include "ops/simcore/trace.hpp"
#include "ops/tasknet/types.hpp"

namespace ops::simcore {

/// Runs one scenario at fixed dt. The onboard planner is invoked at t = 0
/// and again on every detection, fault and overrun. Identical inputs give an
/// identical trace (and trace_hash).
///
/// Throws HorizonError when the horizon is not positive and ConfigError when
/// the sample misses a declared variable or names an unknown parameter.
SimTrace run(const tasknet::TaskNetwork& net, const SimConfig& config, const ScenarioSample& sample);

}  // namespace ops::simcore
