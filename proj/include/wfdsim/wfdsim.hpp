#pragma once

#include "wfdsim/config.hpp"
#include "wfdsim/engine.hpp"
#include "wfdsim/frame.hpp"
#include "wfdsim/medium.hpp"
#include "wfdsim/metrics.hpp"
#include "wfdsim/peer.hpp"
#include "wfdsim/peer_state.hpp"
#include "wfdsim/rng.hpp"
#include "wfdsim/scenario.hpp"
#include "wfdsim/sim_time.hpp"
#include "wfdsim/trace.hpp"
#include "wfdsim/traffic.hpp"
#include "wfdsim/validate.hpp"
