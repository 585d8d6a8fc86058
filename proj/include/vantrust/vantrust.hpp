#pragma once

// Umbrella header: deterministic grid traffic simulation with VANET-based
// signal control, Sybil report injection and trust-based filtering.

#include "vantrust/config.hpp"
#include "vantrust/experiment.hpp"
#include "vantrust/metrics.hpp"
#include "vantrust/replay.hpp"
#include "vantrust/report.hpp"
#include "vantrust/rng.hpp"
#include "vantrust/signal.hpp"
#include "vantrust/simulation.hpp"
#include "vantrust/sybil.hpp"
#include "vantrust/topology.hpp"
#include "vantrust/traffic.hpp"
#include "vantrust/trust.hpp"
