#include <doctest.h>

#include <random>

#include "secmkt/contingency.hpp"
#include "secmkt/market_models.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/sensitivity.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::line;
using testing::make_network;
using testing::unit;

namespace {

/// One-period schedule with every unit committed.
Schedule flat_schedule(const Network& net, std::vector<double> p, std::vector<double> r) {
    Schedule s;
    s.horizon = 1;
    const auto G = net.num_generators();
    s.u.assign(G, {1.0});
    s.v.assign(G, {1.0});
    s.w.assign(G, {0.0});
    s.p_base.resize(G);
    s.reserve.resize(G);
    for (std::size_t g = 0; g < G; ++g) {
        s.p_base[g] = {p[g]};
        s.reserve[g] = {r[g]};
    }
    s.p_scenario = {s.p_base};
    return s;
}

Scenario outage_of_generator(int g) { return {ScenarioKind::generator_outage, g, 0.01}; }

Schedule solved(const MarketModel& model) { return decode_schedule(model, solve_mip(model.lp).x); }

}  // namespace

TEST_CASE("losing the big unit leaves a 10 MW shortfall") {
    const auto net = make_network(1, {}, {unit(1, 1, 0, 100, 10), unit(2, 1, 0, 100, 20)}, {{100.0}});
    const SensitivityFactors sens(net);
    const auto da = flat_schedule(net, {80.0, 20.0}, {0.0, 70.0});
    const auto res = analyze(net, sens, da, outage_of_generator(0), 0);
    CHECK(res.violation == doctest::Approx(10.0));
    CHECK(res.load_shed[0] == doctest::Approx(10.0));
    CHECK(res.load_surplus[0] == doctest::Approx(0.0));
    CHECK(res.dispatch[0] == 0.0);
    CHECK(res.dispatch[1] == doctest::Approx(90.0));
    CHECK(res.energy_cost == doctest::Approx(1800.0));
}

TEST_CASE("ample reserve covers the outage") {
    const auto net = make_network(2, {line(1, 1, 2, 0.1, 500)}, {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 20)},
                                  {{50.0}, {50.0}});
    const SensitivityFactors sens(net);
    const auto da = flat_schedule(net, {80.0, 20.0}, {20.0, 80.0});
    CHECK(analyze(net, sens, da, outage_of_generator(0), 0).violation < kViolationTolerance);
    CHECK(analyze(net, sens, da, outage_of_generator(1), 0).violation < kViolationTolerance);
}

TEST_CASE("base case of a feasible schedule stays put") {
    const auto net = make_network(2, {line(1, 1, 2, 0.1, 500)}, {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 20)},
                                  {{50.0}, {50.0}});
    const SensitivityFactors sens(net);
    const auto da = flat_schedule(net, {80.0, 20.0}, {5.0, 5.0});
    const auto res = analyze(net, sens, da, Scenario{ScenarioKind::base, -1, 0.9}, 0);
    CHECK(res.violation < kViolationTolerance);
    for (std::size_t g = 0; g < 2; ++g) CHECK(std::abs(res.dispatch[g] - da.p_base[g][0]) <= 5.0 + 1e-9);
    // The cheaper unit takes what the box allows.
    CHECK(res.dispatch[0] == doctest::Approx(85.0));
}

TEST_CASE("contingency-free realized cost is the deterministic cost") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto da = solved(build_scuc_prxy(net, sens));
    const auto rep = realized_cost(net, sens, da, base_only_scenarios());
    const auto costs = evaluate_costs(net, da);
    CHECK(rep.realized_total == doctest::Approx(costs.base_cost()));
    CHECK(rep.scenario_energy_cost == 0.0);
}

TEST_CASE("realized cost report") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    for (auto mode : {ObjectiveMode::expected, ObjectiveMode::base}) {
        const auto da = solved(build_escuc(net, sens, sc, mode));
        const auto a = realized_cost(net, sens, da, sc);
        const auto b = realized_cost(net, sens, da, sc, {}, 4);
        CHECK(a.max_violation() <= kViolationTolerance);
        CHECK(a.realized_total ==
              doctest::Approx(a.commitment_cost + a.base_energy_cost + a.scenario_energy_cost).epsilon(1e-12));
        CHECK(a.realized_total == b.realized_total);
        CHECK(a.scenario_energy == b.scenario_energy);
        CHECK(a.violation == b.violation);
        double weighted = 0.0;
        for (std::size_t c = 1; c < sc.size(); ++c) weighted += sc[c].probability * a.scenario_energy[c];
        CHECK(a.scenario_energy_cost == doctest::Approx(weighted));
    }
}

TEST_CASE("more reserve never increases the minimal violation") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        auto net = testing::random_network(rng, 4, 2);
        net.generators.clear();
        for (int g = 0; g < 3; ++g) net.generators.push_back(unit(g + 1, 1 + g, 0, 100, 10 + 5 * g));
        for (auto& l : net.lines) l.rating_emergency = l.rating_normal = 30 + 60 * frac(rng);
        net.load_profile.horizon = 1;
        net.load_profile.load.assign(4, {0.0});
        net.load_profile.load[3][0] = 120.0;
        net.reindex();
        net.validate();
        const SensitivityFactors sens(net);
        const auto sc = make_scenario_set(net);
        std::vector<double> p{60.0 * frac(rng), 60.0 * frac(rng), 0.0};
        p[2] = 120.0 - p[0] - p[1];
        std::vector<double> r{30 * frac(rng), 30 * frac(rng), 30 * frac(rng)};
        for (const auto& s : sc.all()) {
            double prev = analyze(net, sens, flat_schedule(net, p, r), s, 0).violation;
            for (int step = 0; step < 3; ++step) {
                r[static_cast<std::size_t>(step)] += 15.0 * frac(rng);
                const double next = analyze(net, sens, flat_schedule(net, p, r), s, 0).violation;
                CHECK(next <= prev + 1e-7);
                prev = next;
            }
        }
    }
}

TEST_CASE("stochastic schedules survive every modeled contingency") {
    const auto net = load_case(testing::data_file("case6.json")).with_horizon(6);
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    for (auto mode : {ObjectiveMode::expected, ObjectiveMode::base}) {
        const auto rep = realized_cost(net, sens, solved(build_escuc(net, sens, sc, mode)), sc, {}, 4);
        CHECK(rep.max_violation() <= kViolationTolerance);
    }
}
