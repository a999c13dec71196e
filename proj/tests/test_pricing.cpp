#include <doctest.h>

#include "secmkt/market_models.hpp"
#include "secmkt/pricing.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/sensitivity.hpp"
#include "secmkt/solver.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::line;
using testing::make_network;
using testing::unit;

namespace {

struct Priced {
    MarketModel model;
    MipSolution mip;
    LpSolution lp;
    PriceSurface prices;
    Schedule schedule;
};

Priced price(MarketModel model) {
    Priced out;
    out.mip = solve_mip(model.lp);
    out.lp = fix_and_resolve(model.lp, out.mip);
    out.prices = extract_prices(model, out.lp);
    out.schedule = decode_schedule(model, out.lp.x);
    out.model = std::move(model);
    return out;
}

PricingRule rule_for(ModelKind kind) { return kind == ModelKind::escuc ? PricingRule::slmp : PricingRule::da_lmp; }

}  // namespace

TEST_CASE("single bus price equals the marginal energy cost") {
    const auto net = make_network(1, {}, {unit(1, 1, 0, 100, 10), unit(2, 1, 0, 100, 30)}, {{120.0}});
    const SensitivityFactors sens(net);
    const auto p = price(build_escuc(net, sens, base_only_scenarios(), ObjectiveMode::expected));
    CHECK(p.prices.lambda[0][0][0] == doctest::Approx(30.0));
    CHECK(p.prices.slmp[0][0] == doctest::Approx(30.0));
    const auto s = settle(p.prices, p.schedule, net, PricingRule::slmp);
    CHECK(std::abs(s.congestion_rent) < 1e-9);
    CHECK(s.load_payment == doctest::Approx(3600.0));
    CHECK(s.generator_rent[0] == doctest::Approx(2000.0));
    CHECK(s.generator_rent[1] == doctest::Approx(0.0));
}

TEST_CASE("securitized price adds the probability-weighted scenario costs") {
    // Unit 1 carries the load; losing it forces unit 2 (cost 30) to pick up every MW.
    const auto net = make_network(1, {}, {unit(1, 1, 0, 200, 10), unit(2, 1, 0, 200, 30)}, {{120.0}});
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    REQUIRE(sc.size() == 3);
    const auto p = price(build_escuc(net, sens, sc, ObjectiveMode::expected));
    const double pi0 = sc[0].probability, pi1 = sc[1].probability, pi2 = sc[2].probability;
    REQUIRE(sc[1].element == 0);
    CHECK(p.prices.lambda[0][0][0] == doctest::Approx(10.0 * pi0));
    CHECK(p.prices.lambda[1][0][0] == doctest::Approx(30.0 * pi1));
    CHECK(p.prices.lambda[2][0][0] == doctest::Approx(10.0 * pi2));
    CHECK(p.prices.slmp[0][0] == doctest::Approx(10.0 * (pi0 + pi2) + 30.0 * pi1));
    CHECK(verify_slmp_identity(p.prices) < 1e-6);
}

TEST_CASE("contingency-free stochastic model: SLMP equals the base LMP") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    for (auto mode : {ObjectiveMode::expected, ObjectiveMode::base}) {
        const auto p = price(build_escuc(net, sens, base_only_scenarios(), mode));
        for (std::size_t n = 0; n < net.num_buses(); ++n)
            for (int t = 0; t < net.horizon(); ++t)
                CHECK(p.prices.slmp[n][static_cast<std::size_t>(t)] ==
                      doctest::Approx(p.prices.lambda[0][n][static_cast<std::size_t>(t)]));
        CHECK(verify_slmp_identity(p.prices) < 1e-9);
    }
}

TEST_CASE("uncongested network has a uniform price") {
    const auto net = make_network(3, {line(1, 1, 2, 0.1, 1e4), line(2, 2, 3, 0.1, 1e4), line(3, 1, 3, 0.1, 1e4)},
                                  {unit(1, 1, 0, 200, 10), unit(2, 2, 0, 200, 25), unit(3, 3, 0, 200, 40)},
                                  {{20, 30}, {40, 80}, {60, 90}});
    const SensitivityFactors sens(net);
    for (auto model : {build_scuc_prxy(net, sens, 0.0), build_escuc(net, sens, base_only_scenarios(), ObjectiveMode::base)}) {
        const auto p = price(std::move(model));
        for (int t = 0; t < 2; ++t) {
            const auto ti = static_cast<std::size_t>(t);
            for (std::size_t n = 1; n < 3; ++n)
                CHECK(p.prices.lambda[0][n][ti] == doctest::Approx(p.prices.lambda[0][0][ti]));
        }
        const auto s = settle(p.prices, p.schedule, net, rule_for(p.model.kind));
        CHECK(std::abs(s.congestion_rent) < 1e-6 * s.load_payment);
    }
}

TEST_CASE("identity residual detects a perturbed component") {
    PriceSurface p;
    p.kind = ModelKind::escuc;
    p.horizon = 1;
    p.lambda = {{{5.0}, {7.0}}, {{1.0}, {2.0}}};
    p.slmp = {{6.0}, {9.0}};
    CHECK(verify_slmp_identity(p) == 0.0);
    p.lambda[1][1][0] += 1.0;
    CHECK(verify_slmp_identity(p) == doctest::Approx(1.0));
}

TEST_CASE("zero dispatch settles to zero") {
    const auto net = make_network(2, {line(1, 1, 2, 0.1, 50)}, {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 30)},
                                  {{0.0}, {0.0}});
    const SensitivityFactors sens(net);
    const auto p = price(build_escuc(net, sens, base_only_scenarios(), ObjectiveMode::base));
    const auto s = settle(p.prices, p.schedule, net, PricingRule::slmp);
    CHECK(s.load_payment == 0.0);
    CHECK(s.generator_revenue_total == 0.0);
    CHECK(s.congestion_rent == 0.0);
    CHECK(s.generation_rent_total == 0.0);
    CHECK(s.balance_residual() == 0.0);
}

TEST_CASE("congested two-bus line collects the price spread") {
    const auto net = make_network(2, {line(1, 1, 2, 0.1, 10)}, {unit(1, 1, 0, 100, 10), unit(2, 2, 0, 100, 30)},
                                  {{0.0}, {50.0}});
    const SensitivityFactors sens(net);
    const auto p = price(build_escuc(net, sens, base_only_scenarios(), ObjectiveMode::base));
    const double l1 = p.prices.slmp[0][0], l2 = p.prices.slmp[1][0];
    CHECK(l1 == doctest::Approx(10.0));
    CHECK(l2 == doctest::Approx(30.0));
    const auto s = settle(p.prices, p.schedule, net, PricingRule::slmp);
    CHECK(s.congestion_rent == doctest::Approx((l2 - l1) * 10.0));
    CHECK(s.load_payment == doctest::Approx(1500.0));
    CHECK(s.generator_revenue_total == doctest::Approx(1300.0));
}

TEST_CASE("horizon mismatch is rejected") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto p = price(build_scuc_prxy(net, sens));
    auto sched = p.schedule;
    for (auto* g : {&sched.u, &sched.p_base}) for (auto& row : *g) row.push_back(0.0);
    sched.horizon += 1;
    CHECK_THROWS_AS(settle(p.prices, sched, net, PricingRule::da_lmp), DomainError);
}

TEST_CASE("settlement properties on the bundled cases") {
    for (const char* name : {"toy3.json", "case6.json"}) {
        CAPTURE(name);
        auto net = load_case(testing::data_file(name));
        if (net.horizon() > 6) net = net.with_horizon(6);
        const SensitivityFactors sens(net);
        const auto sc = make_scenario_set(net);
        std::vector<MarketModel> models;
        models.push_back(build_scuc_prxy(net, sens));
        models.push_back(build_scuc_lodf(net, sens));
        models.push_back(build_escuc(net, sens, sc, ObjectiveMode::expected));
        models.push_back(build_escuc(net, sens, sc, ObjectiveMode::base));
        for (auto& m : models) {
            const auto p = price(std::move(m));
            CAPTURE(p.model.label());
            if (p.model.kind == ModelKind::escuc) {
                CHECK(verify_slmp_identity(p.prices) <= 1e-6);
            } else {
                CHECK(p.prices.slmp == p.prices.lambda[0]);
            }
            const auto rule = rule_for(p.model.kind);
            const auto s = settle(p.prices, p.schedule, net, rule);
            CHECK(std::abs(s.balance_residual()) <= 1e-9);
            const auto& price_grid = rule == PricingRule::slmp ? p.prices.slmp : p.prices.lambda[0];
            for (std::size_t g = 0; g < net.num_generators(); ++g) {
                CHECK(s.generator_rent[g] == doctest::Approx(s.generator_revenue[g] - s.generator_cost[g]));
                bool covered = true;
                const auto n = net.generator_bus(g);
                for (int t = 0; t < net.horizon(); ++t) {
                    const auto ti = static_cast<std::size_t>(t);
                    if (p.schedule.p_base[g][ti] > 1e-9 && price_grid[n][ti] < net.generators[g].cost_energy) covered = false;
                }
                if (covered) CHECK(s.generator_rent[g] >= -1e-6);
            }
        }
    }
}

TEST_CASE("dual stability on a fixed LP") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto model = build_escuc(net, sens, make_scenario_set(net), ObjectiveMode::expected);
    const auto mip = solve_mip(model.lp);
    const auto d = dual_stability(model, mip, net, PricingRule::slmp);
    CHECK(d.max_price_difference >= 0.0);
    CHECK(d.stable == (d.max_relative_revenue_difference < kDualStabilityThreshold));
}
