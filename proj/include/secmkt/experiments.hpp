#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "secmkt/contingency.hpp"
#include "secmkt/market_models.hpp"
#include "secmkt/omc.hpp"
#include "secmkt/pricing.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/solver.hpp"

namespace secmkt {

class SensitivityFactors;

struct StudyOptions {
    SolverOptions solver;  // rel_gap, seed, tolerances
    double eta = kDefaultEta;
    int threads = 1;
    /// Also run the dual-stability re-solve for every priced model.
    bool check_dual_stability = true;
};

// ---------------------------------------------------------------- pricing study

/// One market model taken through solve, (OMC,) pricing and settlement.
struct ModelOutcome {
    std::string label;
    ModelKind kind = ModelKind::prxy;
    ObjectiveMode objective = ObjectiveMode::base;
    Schedule day_ahead;
    /// Settled schedule: the OMC-corrected one for deterministic models.
    Schedule settled;
    double scuc_cost = 0.0;   // deterministic cost of the day-ahead schedule
    double omc_cost = 0.0;
    double final_cost = 0.0;  // deterministic cost of the settled schedule
    std::optional<OmcResult> omc;
    PriceSurface prices;
    PricingRule rule = PricingRule::da_lmp;
    SettlementReport settlement;
    double slmp_residual = 0.0;
};

struct PricingStudyReport {
    /// scuc-prxy, scuc-lodf, escuc-expected, escuc-base (benchmark), in that order.
    std::vector<ModelOutcome> models;

    const ModelOutcome& find(const std::string& label) const;
};

PricingStudyReport run_pricing_study(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                                     const StudyOptions& options = {});

/// final_costs.csv, prices.csv, settlements.csv, settlement_<model>.csv, price_components.csv.
void write_pricing_study(const PricingStudyReport& report, const Network& net, const ScenarioSet& scenarios,
                         const std::filesystem::path& dir);

// ---------------------------------------------------------------- realized cost study

/// Costs of one fixed day-ahead solution. Pure functions of the primal schedule.
struct SolutionCosts {
    double commitment = 0.0;
    double base_energy = 0.0;
    /// Unweighted day-ahead energy cost per scenario (entry 0: base case).
    std::vector<double> scenario_energy;
    /// Unweighted realized (post-contingency) energy cost per scenario (entry 0: base case).
    std::vector<double> realized_energy;
    double max_violation = 0.0;

    double base_cost() const { return commitment + base_energy; }
    double expected_cost(const ScenarioSet& scenarios) const;
    double scenario_cost(const ScenarioSet& scenarios) const;
    double realized_cost(const ScenarioSet& scenarios) const;
    double realized_scenario_cost(const ScenarioSet& scenarios) const;
};

SolutionCosts evaluate_solution(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                                const Schedule& schedule, const StudyOptions& options = {});

struct RealizedStudyReport {
    SolutionCosts expected_mode;
    SolutionCosts base_mode;
    RealizedCostReport expected_realized;
    RealizedCostReport base_realized;
};

RealizedStudyReport run_realized_cost_study(const Network& net, const SensitivityFactors& sens,
                                            const ScenarioSet& scenarios, const StudyOptions& options = {});

/// realized_costs.csv and violations_<model>.csv.
void write_realized_study(const RealizedStudyReport& report, const Network& net, const ScenarioSet& scenarios,
                          const std::filesystem::path& dir);

// ---------------------------------------------------------------- pools and pairs

struct PoolEvaluation {
    ObjectiveMode mode = ObjectiveMode::base;
    std::vector<SolutionCosts> members;
    std::vector<double> objectives;
    bool shortfall = false;
};

/// Solution pool of the scenario model in `mode` (gap from options.solver.rel_gap), each member
/// evaluated with evaluate_solution.
PoolEvaluation build_pool(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                          ObjectiveMode mode, int pool_size, const StudyOptions& options = {});

/// Relative tolerance under which two costs tie. Ties count as not lower for either side.
inline constexpr double kTieTolerance = 1e-9;

/// True when a is strictly lower than b beyond the tie tolerance.
bool strictly_lower(double a, double b);

/// Number of (a, b) pairs in a x b with strictly_lower(a, b), without materializing pairs.
std::uint64_t count_lower_pairs(std::span<const double> a, std::span<const double> b);

struct Histogram {
    std::vector<double> edges;           // bins [edges[i], edges[i+1]); last bin closed
    std::vector<std::uint64_t> counts;
};

/// Histogram of b - a over all pairs, with `bins` equal-width bins spanning the full range.
Histogram pair_difference_histogram(std::span<const double> a, std::span<const double> b, int bins = 20);

struct PairComparisonReport {
    std::uint64_t n_pairs = 0;
    /// Percentage of pairs where the base-mode solution has the lower cost.
    double pct_lower_base_cost = 0.0;
    double pct_lower_expected_cost = 0.0;
    double pct_lower_realized_cost = 0.0;
    double pct_lower_scenario_cost = 0.0;
    /// Differences expected-mode minus base-mode.
    Histogram hist_base_cost, hist_expected_cost, hist_realized_cost, hist_scenario_cost;
    bool shortfall = false;
};

/// Cross product of two cost tables: first base-mode values, second expected-mode values.
struct CostTable {
    std::vector<double> base, expected, realized, scenario;
};

CostTable cost_table(const PoolEvaluation& pool, const ScenarioSet& scenarios);
PairComparisonReport compare_pairs(const CostTable& base_mode, const CostTable& expected_mode);

PairComparisonReport build_pools_and_pair(const Network& net, const SensitivityFactors& sens,
                                          const ScenarioSet& scenarios, int pool_size,
                                          const StudyOptions& options = {});

// ---------------------------------------------------------------- probability perturbation

struct PerturbationConfig {
    double sigma = 0.2;
    std::size_t n_cases = 2000;
    double window_low = 0.944;
    double window_high = 0.948;
    std::uint64_t seed = 1;
    /// Per-case attempt budget; exhausting it means the acceptance rate is below 1/budget.
    std::size_t max_attempts_per_case = 1000;

    void validate(const ScenarioSet& nominal) const;
};

struct PerturbationResult {
    std::vector<ScenarioSet> cases;
    std::uint64_t attempts = 0;
    std::uint64_t rejected = 0;
};

/// Multiplicative Gaussian error on each contingency probability; the base case takes the
/// remainder. Each case has its own random stream derived from (seed, case index) and is redrawn
/// until every probability is positive and the base probability lies in the window.
PerturbationResult perturb_probabilities(const ScenarioSet& nominal, const PerturbationConfig& config,
                                         int threads = 1);

struct PerturbationStudyReport {
    double sigma = 0.0;
    std::size_t n_cases = 0;
    std::uint64_t rejected = 0;
    PairComparisonReport pairs;  // expected and scenario cost fields filled
};

/// Re-prices every pool member under every perturbed case and pairs all evaluations.
PerturbationStudyReport run_perturbation_study(const PoolEvaluation& base_mode, const PoolEvaluation& expected_mode,
                                               const ScenarioSet& nominal, const PerturbationConfig& config,
                                               int threads = 1);

/// pairs.csv (one row per cost type) plus histogram CSVs under `prefix`.
void write_pair_report(const PairComparisonReport& report, const std::filesystem::path& dir, const std::string& prefix);

/// perturbation.csv: one row per sigma.
void write_perturbation_table(std::span<const PerturbationStudyReport> reports, const std::filesystem::path& path);

}  // namespace secmkt
