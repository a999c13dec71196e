#include <doctest.h>

#include <algorithm>

#include "secmkt/market_models.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/sensitivity.hpp"
#include "secmkt/solver.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::line;
using testing::make_network;
using testing::unit;

namespace {

std::size_t rows_in(const LinearModel& lp, const std::string& name) {
    for (const auto& s : model_statistics(lp))
        if (s.family == name) return s.constraints;
    return 0;
}

Schedule solve_and_decode(const MarketModel& model, const SensitivityFactors* sens = nullptr) {
    const auto sol = solve_mip(model.lp);
    return decode_schedule(model, sol.x, sens);
}

/// Two buses joined by twin lines (rating 50, emergency 60); cheap unit at bus 1, load 100 at bus 2.
Network parallel_pair() {
    return make_network(2, {line(1, 1, 2, 0.1, 50, 60), line(2, 1, 2, 0.1, 50, 60)},
                        {unit(1, 1, 0, 300, 10, 300), unit(2, 2, 0, 300, 40, 300)}, {{0.0}, {100.0}});
}

}  // namespace

TEST_CASE("model and objective names round trip") {
    for (auto k : {ModelKind::prxy, ModelKind::lodf, ModelKind::escuc}) CHECK(parse_model_kind(to_string(k)) == k);
    for (auto m : {ObjectiveMode::expected, ObjectiveMode::base}) CHECK(parse_objective_mode(to_string(m)) == m);
    CHECK_THROWS(parse_model_kind("nope"));
}

TEST_CASE("single bus: the cheap unit runs at its limit") {
    const auto net = make_network(1, {}, {unit(1, 1, 0, 60, 10), unit(2, 1, 0, 100, 30)}, {{50.0}});
    const SensitivityFactors sens(net);
    const auto s = solve_and_decode(build_scuc_prxy(net, sens));
    CHECK(s.p_base[0][0] == doctest::Approx(50.0));
    CHECK(s.p_base[1][0] == doctest::Approx(0.0));
    CHECK(s.reserve[1][0] >= 50.0 - 1e-6);
}

TEST_CASE("a lone unit cannot cover its own loss") {
    const auto net = make_network(1, {}, {unit(1, 1, 0, 100, 10)}, {{50.0}});
    const SensitivityFactors sens(net);
    CHECK_THROWS_AS(solve_mip(build_scuc_prxy(net, sens).lp), SolverError);
    CHECK_THROWS_AS(solve_mip(build_escuc(net, sens, make_scenario_set(net), ObjectiveMode::expected).lp), SolverError);
}

TEST_CASE("zero load and zero reserve fraction cost nothing") {
    auto g = unit(1, 1, 0, 100, 10);
    g.cost_noload = 50;
    const auto net = make_network(2, {line(1, 1, 2, 0.1, 10)}, {g, unit(2, 2, 0, 100, 20)}, {{0.0, 0.0}, {0.0, 0.0}});
    const SensitivityFactors sens(net);
    CHECK(solve_mip(build_scuc_prxy(net, sens, 0.0).lp).objective == doctest::Approx(0.0));
    CHECK_THROWS_AS(build_scuc_prxy(net, sens, -0.1), DomainError);
}

TEST_CASE("twin units with limited fast ramp share the load") {
    const auto net = make_network(1, {}, {unit(1, 1, 0, 100, 10, 50), unit(2, 1, 0, 100, 10, 50)}, {{100.0}});
    const SensitivityFactors sens(net);
    const auto s = solve_and_decode(build_scuc_prxy(net, sens, 0.0));
    CHECK(s.committed(0, 0));
    CHECK(s.committed(1, 0));
    CHECK(s.p_base[0][0] == doctest::Approx(50.0));
    CHECK(s.p_base[1][0] == doctest::Approx(50.0));
}

TEST_CASE("post-outage row counts") {
    SUBCASE("single line has nothing to monitor") {
        const auto net = make_network(2, {line(1, 1, 2, 0.1, 100)}, {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 20)},
                                      {{0.0}, {30.0}});
        const SensitivityFactors sens(net);
        CHECK(rows_in(build_scuc_lodf(net, sens).lp, "post_flow_max") == 0);
    }
    SUBCASE("triangle has twelve rows per period") {
        const auto net = make_network(3, {line(1, 1, 2, 0.1, 100), line(2, 2, 3, 0.1, 100), line(3, 1, 3, 0.1, 100)},
                                      {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 20)}, {{0, 0}, {0, 0}, {30, 40}});
        const SensitivityFactors sens(net);
        const auto& lp = build_scuc_lodf(net, sens).lp;
        CHECK(rows_in(lp, "post_flow_max") + rows_in(lp, "post_flow_min") == 12 * 2);
    }
}

TEST_CASE("outage limits cap the import over twin lines") {
    const auto net = parallel_pair();
    const SensitivityFactors sens(net);
    const auto prxy = solve_and_decode(build_scuc_prxy(net, sens, 0.0));
    const auto lodf = solve_and_decode(build_scuc_lodf(net, sens, 0.0));
    CHECK(prxy.p_base[0][0] == doctest::Approx(100.0));
    CHECK(lodf.p_base[0][0] == doctest::Approx(60.0));
    CHECK(lodf.p_base[1][0] == doctest::Approx(40.0));
}

TEST_CASE("base-only stochastic model matches the deterministic objective") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto base = base_only_scenarios();
    const double e = solve_mip(build_escuc(net, sens, base, ObjectiveMode::expected).lp).objective;
    const double b = solve_mip(build_escuc(net, sens, base, ObjectiveMode::base).lp).objective;
    CHECK(testing::close_rel(e, b, 1e-9));
}

TEST_CASE("scenario sets") {
    SUBCASE("large case") {
        const auto net = load_case(testing::data_file("case118.json"));
        const auto sc = make_scenario_set(net);
        CHECK(sc.size() == 232);
        CHECK(sc.num_generator_outages() == 54);
        CHECK(sc.num_line_outages() == 177);
        CHECK(sc.base_probability() == doctest::Approx(0.946).epsilon(1e-12));
        CHECK_NOTHROW(sc.validate(net));
        const SensitivityFactors sens(net);
        const auto sub = select_line_subset(net, sens, sc, 20);
        CHECK(sub.num_line_outages() == 20);
        CHECK(sub.base_probability() == doctest::Approx(0.946).epsilon(1e-12));
    }
    SUBCASE("radial network has generator outages only") {
        const auto net = make_network(3, {line(1, 1, 2, 0.1, 100), line(2, 1, 3, 0.1, 100)},
                                      {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 20)}, {{0}, {0}, {30}});
        const auto sc = make_scenario_set(net);
        CHECK(sc.num_line_outages() == 0);
        CHECK(sc.num_generator_outages() == 2);
    }
}

TEST_CASE("decoded schedules") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const auto model = build_escuc(net, sens, sc, ObjectiveMode::expected);
    const auto sol = solve_mip(model.lp);
    const auto s = decode_schedule(model, sol.x, &sens);

    SUBCASE("encode inverts decode") {
        const auto x = encode_schedule(model, s);
        REQUIRE(x.size() == sol.x.size());
        for (std::size_t i = 0; i < x.size(); ++i) CHECK(x[i] == doctest::Approx(sol.x[i]));
    }
    SUBCASE("consistency and sign rules") {
        CHECK(schedule_violation(net, s) < 1e-6);
        for (std::size_t g = 0; g < net.num_generators(); ++g)
            for (int t = 0; t < s.horizon; ++t) {
                const auto ti = static_cast<std::size_t>(t);
                if (!s.committed(g, t)) {
                    CHECK(std::abs(s.p_base[g][ti]) < 1e-6);
                    CHECK(std::abs(s.reserve[g][ti]) < 1e-6);
                }
            }
        for (std::size_t c = 0; c < sc.size(); ++c) {
            const auto& scen = sc[c];
            for (int t = 0; t < s.horizon; ++t) {
                const auto ti = static_cast<std::size_t>(t);
                if (scen.kind == ScenarioKind::generator_outage)
                    CHECK(std::abs(s.p_scenario[c][static_cast<std::size_t>(scen.element)][ti]) < 1e-9);
                for (std::size_t g = 0; g < net.num_generators(); ++g) {
                    if (!scen.generator_in_service(g)) continue;
                    const double move = std::abs(s.p_scenario[c][g][ti] - s.p_base[g][ti]);
                    CHECK(move <= std::min(s.reserve[g][ti], net.generators[g].ramp_10min * s.u[g][ti]) + 1e-6);
                }
                for (std::size_t k = 0; k < net.num_lines(); ++k) {
                    const double limit = scen.kind == ScenarioKind::base ? net.lines[k].rating_normal
                                                                          : net.lines[k].rating_emergency;
                    if (!scen.line_in_service(k)) CHECK(std::abs(s.flow[c][k][ti]) < 1e-9);
                    else CHECK(std::abs(s.flow[c][k][ti]) <= limit + 1e-6);
                }
            }
        }
    }
    SUBCASE("scenario 0 is the base dispatch") {
        CHECK(s.p_scenario[0] == s.p_base);
    }
}

TEST_CASE("deterministic models respect normal ratings") {
    const auto net = load_case(testing::data_file("case6.json")).with_horizon(4);
    const SensitivityFactors sens(net);
    for (const auto& model : {build_scuc_prxy(net, sens), build_scuc_lodf(net, sens)}) {
        const auto s = solve_and_decode(model, &sens);
        for (std::size_t g = 0; g < net.num_generators(); ++g)
            for (int t = 0; t < s.horizon; ++t)
                CHECK(s.reserve[g][static_cast<std::size_t>(t)] <=
                      net.generators[g].ramp_10min * s.u[g][static_cast<std::size_t>(t)] + 1e-6);
        for (std::size_t k = 0; k < net.num_lines(); ++k)
            for (int t = 0; t < s.horizon; ++t)
                CHECK(std::abs(s.flow[0][k][static_cast<std::size_t>(t)]) <= net.lines[k].rating_normal + 1e-6);
    }
}

TEST_CASE("objective orderings on the toy case") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const double prxy = solve_mip(build_scuc_prxy(net, sens).lp).objective;
    const double lodf = solve_mip(build_scuc_lodf(net, sens).lp).objective;
    CHECK(prxy <= lodf * (1 + 1e-9));

    const auto exp_model = build_escuc(net, sens, sc, ObjectiveMode::expected);
    const auto base_model = build_escuc(net, sens, sc, ObjectiveMode::base);
    const auto exp_costs = evaluate_costs(net, solve_and_decode(exp_model));
    const auto base_costs = evaluate_costs(net, solve_and_decode(base_model));
    CHECK(exp_costs.expected_cost(sc) <= base_costs.expected_cost(sc) * (1 + 1e-6));
    CHECK(base_costs.base_cost() <= exp_costs.base_cost() * (1 + 1e-6));
    CHECK(testing::close_rel(solve_mip(base_model.lp).objective, base_costs.base_cost(), 1e-6));
    CHECK(testing::close_rel(solve_mip(exp_model.lp).objective, exp_costs.expected_cost(sc), 1e-6));
}
