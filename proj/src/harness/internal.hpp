#pragma once

#include "covdetect/harness/config.hpp"

namespace covdetect::harness {

/// cfg.system with K = k and N raised to at least k.
SystemParams system_for(const ExperimentConfig& cfg, int k);

/// DFT pilots for the configured link; uplink runs only need x.
PilotSet pilots_for(const ExperimentConfig& cfg);

}  // namespace covdetect::harness
