#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "flocksim/analysis.hpp"
#include "flocksim/scenario.hpp"

namespace flocksim {

struct CriterionResult {
    std::string id;
    bool pass = false;
    std::string detail; // measured values, human readable
};

struct RunManifest {
    std::string scenario; // serialized snapshot for replay
    std::string version;
    std::uint64_t master_seed = 0;
    int workers = 0;
    double wall_seconds = 0.0; // informational; not part of the reproducible payload
    std::vector<CriterionResult> criteria;
};

// The per-path noise grid: dt_base multiples up to the horizon, extended past
// it at tail_dt spacing when the event integral needs more of W.
std::vector<double> scenario_noise_grid(const Scenario& sc);

// Simulates every path of the scenario. The result vector is indexed by path,
// so its content does not depend on the worker count. Worker errors are
// rethrown with the offending path index prefixed.
std::vector<PathResult> run_paths(const Scenario& sc, int workers);

std::pair<EnsembleStats, RunManifest> run_ensemble(const Scenario& sc, int workers);

} // namespace flocksim
