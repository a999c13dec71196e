#include <doctest.h>

#include <algorithm>

#include "secmkt/contingency.hpp"
#include "secmkt/market_models.hpp"
#include "secmkt/omc.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/sensitivity.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::line;
using testing::make_network;
using testing::unit;

namespace {

Schedule solved(const MarketModel& model) { return decode_schedule(model, solve_mip(model.lp).x); }

/// Two cheap units at bus 1 feed 80 MW at bus 2 over twin lines (rating 50, emergency 60).
/// Losing a line leaves 60 MW of import, so the idle unit at bus 2 has to be started.
Network import_pocket() {
    auto spare = unit(3, 2, 0, 100, 50, 100);
    spare.cost_noload = 100;
    return make_network(2, {line(1, 1, 2, 0.1, 50, 60), line(2, 1, 2, 0.1, 50, 60)},
                        {unit(1, 1, 0, 100, 10, 100), unit(2, 1, 0, 100, 10, 100), spare}, {{0.0}, {80.0}});
}

void check_corrected(const Network& net, const SensitivityFactors& sens, const ScenarioSet& sc, const Schedule& da,
                     const OmcResult& res) {
    const auto rep = realized_cost(net, sens, res.corrected, sc);
    CHECK(rep.max_violation() <= kViolationTolerance);
    for (std::size_t g = 0; g < net.num_generators(); ++g)
        for (int t = 0; t < da.horizon; ++t) {
            const auto ti = static_cast<std::size_t>(t);
            if (!da.committed(g, t)) continue;
            CHECK(res.corrected.committed(g, t));
            CHECK(std::abs(res.corrected.p_base[g][ti] - da.p_base[g][ti]) <= net.generators[g].ramp_10min + 1e-6);
            CHECK(res.dispatch_delta[g][ti] == doctest::Approx(res.corrected.p_base[g][ti] - da.p_base[g][ti]));
        }
    CHECK(res.omc_cost == doctest::Approx(res.final_cost - res.da_cost));
}

}  // namespace

TEST_CASE("a reliable schedule needs no correction") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const auto da = solved(build_escuc(net, sens, sc, ObjectiveMode::base));
    const auto res = run_omc(net, sens, sc, da);
    CHECK(std::abs(res.omc_cost) <= 1e-4 * res.da_cost);
    CHECK(res.newly_committed.empty());
    check_corrected(net, sens, sc, da, res);
}

TEST_CASE("an uncovered line outage starts the spare unit") {
    const auto net = import_pocket();
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const auto da = solved(build_scuc_prxy(net, sens, 0.0));
    REQUIRE_FALSE(da.committed(2, 0));
    CHECK(realized_cost(net, sens, da, sc).max_violation() > 1.0);
    const auto res = run_omc(net, sens, sc, da);
    REQUIRE(res.newly_committed.size() == 1);
    CHECK(res.newly_committed[0] == std::pair<std::size_t, int>{2, 0});
    CHECK(res.omc_cost > 0.0);
    check_corrected(net, sens, sc, da, res);
}

TEST_CASE("an unrepairable schedule names the violated scenarios") {
    const auto net = make_network(1, {}, {unit(1, 1, 0, 100, 10), unit(2, 1, 0, 100, 20)}, {{150.0}});
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    Schedule da;
    da.horizon = 1;
    da.u = {{1.0}, {1.0}};
    da.v = {{1.0}, {1.0}};
    da.w = {{0.0}, {0.0}};
    da.p_base = {{75.0}, {75.0}};
    da.reserve = {{25.0}, {25.0}};
    da.p_scenario = {da.p_base};
    try {
        run_omc(net, sens, sc, da);
        FAIL("expected OmcInfeasible");
    } catch (const OmcInfeasible& e) {
        const auto& v = e.violating_scenarios();
        CHECK(std::find(v.begin(), v.end(), "gen1") != v.end());
        CHECK(std::find(v.begin(), v.end(), "gen2") != v.end());
    }
}

TEST_CASE("corrected deterministic schedules cost at least the stochastic benchmark") {
    const auto net = load_case(testing::data_file("case6.json")).with_horizon(6);
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const double bench = evaluate_costs(net, solved(build_escuc(net, sens, sc, ObjectiveMode::base))).base_cost();
    for (const auto& model : {build_scuc_prxy(net, sens), build_scuc_lodf(net, sens)}) {
        CAPTURE(model.label());
        const auto da = solved(model);
        const auto res = run_omc(net, sens, sc, da);
        CHECK(res.final_cost >= bench * (1 - 1e-6));
        CHECK(res.final_cost == doctest::Approx(evaluate_costs(net, res.corrected).base_cost()));
        check_corrected(net, sens, sc, da, res);
    }
}
