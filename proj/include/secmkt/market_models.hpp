#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "secmkt/linear_model.hpp"
#include "secmkt/network.hpp"
#include "secmkt/scenarios.hpp"

namespace secmkt {

class SensitivityFactors;

enum class ModelKind { prxy, lodf, escuc };
enum class ObjectiveMode { expected, base };

const char* to_string(ModelKind kind);
const char* to_string(ObjectiveMode mode);
ModelKind parse_model_kind(const std::string& text);
ObjectiveMode parse_objective_mode(const std::string& text);

/// Default load fraction for the proxy reserve requirement.
inline constexpr double kDefaultEta = 0.06;

/// Equation family names. Variables and rows are tagged `family[i,j,k]`.
namespace family {
inline constexpr const char* u = "u";                    // [g,t]
inline constexpr const char* v = "v";                    // [g,t]
inline constexpr const char* w = "w";                    // [g,t]
inline constexpr const char* r = "r";                    // [g,t]
inline constexpr const char* p = "p";                    // [g,c,t]
inline constexpr const char* pinj = "pinj";              // [n,c,t]
inline constexpr const char* d = "d";                    // [n,t]
inline constexpr const char* fl = "fl";                  // [l,t]
inline constexpr const char* node_balance = "node_balance";  // [n,c,t]
inline constexpr const char* demand_fix = "demand_fix";      // [n,t]
}  // namespace family

/// A built auction model together with the context needed to decode its solutions.
struct MarketModel {
    ModelKind kind = ModelKind::prxy;
    ObjectiveMode objective = ObjectiveMode::base;
    LinearModel lp;
    /// Scenarios represented in the model (base only for prxy/lodf).
    ScenarioSet scenarios;
    int horizon = 0;
    std::size_t num_generators = 0;
    std::size_t num_buses = 0;
    std::size_t num_lines = 0;
    double eta = 0.0;

    std::string label() const;
};

/// Proxy-reserve SCUC: commitment logic, ramps, nodal and system balance, PTDF line limits,
/// capacity/reserve limits and the largest-unit and load-fraction reserve requirements.
MarketModel build_scuc_prxy(const Network& net, const SensitivityFactors& sens, double eta = kDefaultEta);

/// Proxy SCUC plus emergency-rated post-outage flow limits for every monitored line and every
/// non-radial outage, expressed through line outage distribution factors.
MarketModel build_scuc_lodf(const Network& net, const SensitivityFactors& sens, double eta = kDefaultEta);

/// Extensive-form stochastic SCUC with one recourse dispatch per scenario.
MarketModel build_escuc(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                        ObjectiveMode mode);

using Grid = std::vector<std::vector<double>>;

/// Decoded primal solution. Index order: u[g][t], p_scenario[c][g][t], injection[c][n][t], flow[c][k][t].
struct Schedule {
    ModelKind source = ModelKind::prxy;
    int horizon = 0;
    Grid u, v, w;
    Grid p_base;
    Grid reserve;
    /// Per model scenario; entry 0 equals p_base. Single entry for prxy/lodf.
    std::vector<Grid> p_scenario;
    std::vector<Grid> injection;
    /// Filled when sensitivities are supplied to decode (and for lodf's base flows).
    std::vector<Grid> flow;
    /// Nodal demand variable (escuc only).
    Grid demand;

    bool committed(std::size_t g, int t) const { return u[g][static_cast<std::size_t>(t)] > 0.5; }
};

/// Maps every variable back through its tag. Throws Error on an unknown family or a size mismatch.
/// With `sens`, line flows are recomputed for every scenario from the decoded injections.
Schedule decode_schedule(const MarketModel& model, std::span<const double> x, const SensitivityFactors* sens = nullptr);

/// Inverse of decode_schedule.
std::vector<double> encode_schedule(const MarketModel& model, const Schedule& schedule);

/// Largest violation of the commitment logic, output bounds and reserve sign; 0 when consistent.
double schedule_violation(const Network& net, const Schedule& schedule);

/// Cost components of a schedule. Commitment terms are never probability weighted.
struct CostBreakdown {
    double noload = 0.0;
    double startup = 0.0;
    double shutdown = 0.0;
    double base_energy = 0.0;
    /// Energy cost of each model scenario's dispatch (index 0 is the base case); empty when
    /// the schedule carries no recourse dispatch.
    std::vector<double> scenario_energy;

    double commitment() const { return noload + startup + shutdown; }
    /// Deterministic operating cost: base energy plus commitment.
    double base_cost() const { return base_energy + commitment(); }
    /// pi_BC * base energy + commitment + sum over contingencies of pi_c * scenario energy.
    double expected_cost(const ScenarioSet& scenarios) const;
    /// Sum over contingencies of pi_c * scenario energy.
    double scenario_cost(const ScenarioSet& scenarios) const;
};

CostBreakdown evaluate_costs(const Network& net, const Schedule& schedule);

/// Same as evaluate_costs but with externally supplied per-scenario energies (e.g. re-dispatch).
double expected_cost_with(const CostBreakdown& costs, std::span<const double> scenario_energy,
                          const ScenarioSet& scenarios);

}  // namespace secmkt
