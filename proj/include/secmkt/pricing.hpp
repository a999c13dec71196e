#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "secmkt/market_models.hpp"
#include "secmkt/network.hpp"
#include "secmkt/solver.hpp"

namespace secmkt {

/// Nodal prices from a fixed-commitment LP.
struct PriceSurface {
    ModelKind kind = ModelKind::prxy;
    int horizon = 0;
    /// lambda[c][n][t]: dual of the nodal balance row of scenario c.
    std::vector<Grid> lambda;
    /// slmp[n][t]: dual of the demand-fix row; equals lambda[0] for deterministic models.
    Grid slmp;
};

/// Reads nodal balance and demand-fix duals via their tags. Throws DomainError if the LP
/// carries no duals.
PriceSurface extract_prices(const MarketModel& model, const LpSolution& lp);

/// Largest |slmp - sum_c lambda_c| over buses and periods.
double verify_slmp_identity(const PriceSurface& prices);

enum class PricingRule { da_lmp, slmp };
const char* to_string(PricingRule rule);

/// Agreement of settlements computed from two different simplex variants on the same fixed LP.
struct DualStability {
    double max_price_difference = 0.0;           // $/MWh
    double max_relative_revenue_difference = 0.0;
    bool stable = true;                          // relative difference below kDualStabilityThreshold
};

inline constexpr double kDualStabilityThreshold = 1e-3;

struct SettlementReport {
    PricingRule rule = PricingRule::da_lmp;
    std::vector<double> generator_energy;   // MWh
    std::vector<double> generator_revenue;  // $
    std::vector<double> generator_cost;     // variable energy cost, $
    std::vector<double> generator_rent;     // revenue - variable cost
    std::vector<double> bus_load_payment;
    double load_payment = 0.0;
    double generator_revenue_total = 0.0;
    double congestion_rent = 0.0;
    double generation_rent_total = 0.0;
    std::optional<DualStability> stability;

    /// load payment - revenue - congestion rent, relative to the load payment.
    double balance_residual() const;
};

/// Energy-only settlement of `schedule`'s base dispatch. da_lmp uses lambda[0]; slmp uses slmp.
/// Throws DomainError on a horizon mismatch.
SettlementReport settle(const PriceSurface& prices, const Schedule& schedule, const Network& net, PricingRule rule);

/// Re-solves the fixed LP with dual and primal simplex and compares the resulting settlements.
DualStability dual_stability(const MarketModel& model, const MipSolution& incumbent, const Network& net,
                             PricingRule rule, const SolverOptions& options = {});

/// Per-bus hourly prices: columns bus, hour, lmp, slmp.
void write_prices_csv(const PriceSurface& prices, const Network& net, const std::filesystem::path& path);

/// Per-scenario contributions to the securitized price: columns bus, hour, scenario, lambda.
void write_price_components_csv(const PriceSurface& prices, const Network& net, const ScenarioSet& scenarios,
                                const std::filesystem::path& path);

/// Generator rows, bus rows and a system summary row.
void write_settlement_csv(const SettlementReport& report, const Network& net, const std::filesystem::path& path);

}  // namespace secmkt
