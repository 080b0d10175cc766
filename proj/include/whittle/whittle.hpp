#pragma once

// Umbrella header: Whittle-index learning for restless bandits with
// two-timescale constant-stepsize Q-learning, DQN and state aggregation,
// plus exact known-model solvers and the experiment runner.

#include "whittle/config.hpp"
#include "whittle/envs.hpp"
#include "whittle/explore.hpp"
#include "whittle/linfa.hpp"
#include "whittle/metrics.hpp"
#include "whittle/model.hpp"
#include "whittle/model_io.hpp"
#include "whittle/neural.hpp"
#include "whittle/oracle.hpp"
#include "whittle/rng.hpp"
#include "whittle/runner.hpp"
#include "whittle/tabular.hpp"
#include "whittle/windex.hpp"
