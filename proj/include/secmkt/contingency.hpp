#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "secmkt/market_models.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/solver.hpp"

namespace secmkt {

class SensitivityFactors;

/// Violation tolerance for N-1 feasibility checks, MW.
inline constexpr double kViolationTolerance = 1e-6;

/// Optimal post-contingency state of one (scenario, period).
struct ContingencyResult {
    std::size_t scenario = 0;
    int period = 0;
    /// Sum of load shed and load surplus, MW.
    double violation = 0.0;
    std::vector<double> dispatch;      // by generator
    std::vector<double> load_shed;     // by bus: unserved load
    std::vector<double> load_surplus;  // by bus: excess generation absorbed
    /// Variable energy cost of `dispatch`, $.
    double energy_cost = 0.0;
};

/// Violation-minimizing dispatch around the day-ahead point at period t. Each unit may move
/// within its scheduled reserve, capacity limits and N-1 status; lines are held to emergency
/// ratings (normal ratings for the base case). Among minimum-violation dispatches the cheapest
/// one is returned.
ContingencyResult analyze(const Network& net, const SensitivityFactors& sens, const Schedule& da,
                          const Scenario& scenario, int t, const SolverOptions& options = {});

struct RealizedCostReport {
    double commitment_cost = 0.0;
    /// pi_BC-weighted base-case energy.
    double base_energy_cost = 0.0;
    /// Sum over contingencies of pi_c times the energy cost of the post-contingency dispatch.
    double scenario_energy_cost = 0.0;
    double realized_total = 0.0;
    /// Unweighted post-contingency energy cost per scenario (entry 0: day-ahead base energy).
    std::vector<double> scenario_energy;
    /// violation[c][t], MW.
    std::vector<std::vector<double>> violation;

    double max_violation() const;
};

/// Runs `analyze` for every scenario and period (in parallel up to `threads`).
RealizedCostReport realized_cost(const Network& net, const SensitivityFactors& sens, const Schedule& da,
                                 const ScenarioSet& scenarios, const SolverOptions& options = {}, int threads = 1);

/// Scenario x period matrix of violations.
void write_violation_csv(const RealizedCostReport& report, const Network& net, const ScenarioSet& scenarios,
                         const std::filesystem::path& path);

}  // namespace secmkt
