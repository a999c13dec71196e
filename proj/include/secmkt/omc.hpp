#pragma once

#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

#include "secmkt/market_models.hpp"
#include "secmkt/solver.hpp"

namespace secmkt {

class SensitivityFactors;

/// Outcome of out-of-market corrections applied to a day-ahead schedule.
struct OmcResult {
    Schedule corrected;
    double da_cost = 0.0;     // deterministic cost of the day-ahead schedule
    double final_cost = 0.0;  // deterministic cost of the corrected schedule
    double omc_cost = 0.0;    // final_cost - da_cost
    /// (generator position, period) pairs committed by the correction.
    std::vector<std::pair<std::size_t, int>> newly_committed;
    /// corrected - day-ahead base dispatch, [g][t].
    Grid dispatch_delta;
};

/// Repairs `da` into an N-1 reliable schedule: units committed day-ahead stay committed and move
/// at most their 10-minute ramp from the day-ahead dispatch; extra units may be committed.
/// Minimizes the deterministic operating cost subject to the full scenario constraint set.
/// Throws OmcInfeasible (listing scenarios the day-ahead schedule violates) when no repair exists.
OmcResult run_omc(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios, const Schedule& da,
                  const SolverOptions& options = {});

/// Cost decomposition, newly committed units and nonzero dispatch deltas.
void write_omc_csv(const OmcResult& result, const Network& net, const std::filesystem::path& path);

}  // namespace secmkt
