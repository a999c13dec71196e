#include <doctest.h>

#include <Highs.h>

#include <filesystem>
#include <set>

#include "secmkt/linear_model.hpp"
#include "secmkt/market_models.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/sensitivity.hpp"
#include "secmkt/solver.hpp"
#include "support.hpp"

using namespace secmkt;

namespace {

LinearModel binary_toy() {
    LinearModel m;
    const int x = m.add_variable("x", 0, 1, 1.0, true);
    const int y = m.add_variable("y", 0, 1, 2.0, true);
    m.add_constraint("cover", {{x, 1.0}, {y, 1.0}}, Sense::greater_equal, 1.0);
    return m;
}

/// min 2a + 3b + c, a + b >= 4, a - c <= 1, 0 <= a, b <= 3, c free.
LinearModel small_lp() {
    LinearModel m;
    const int a = m.add_variable("a", 0, 3, 2.0);
    const int b = m.add_variable("b", 0, 3, 3.0);
    const int c = m.add_variable("c", -kInf, kInf, 1.0);
    m.add_constraint("need", {{a, 1.0}, {b, 1.0}}, Sense::greater_equal, 4.0);
    m.add_constraint("link", {{a, 1.0}, {c, -1.0}}, Sense::less_equal, 1.0);
    return m;
}

std::vector<MarketModel> toy_models(const Network& net, const SensitivityFactors& sens, const ScenarioSet& sc) {
    std::vector<MarketModel> out;
    out.push_back(build_scuc_prxy(net, sens));
    out.push_back(build_scuc_lodf(net, sens));
    out.push_back(build_escuc(net, sens, sc, ObjectiveMode::expected));
    out.push_back(build_escuc(net, sens, sc, ObjectiveMode::base));
    return out;
}

}  // namespace

TEST_CASE("model construction guards") {
    LinearModel m;
    const int x = m.add_variable("x", 0, 1);
    CHECK_THROWS(m.add_constraint("bad", {{x + 5, 1.0}}, Sense::equal, 0.0));
    CHECK_THROWS(m.set_bounds(x, 2.0, 1.0));
    LinearModel dup;
    const auto f = dup.family("v");
    dup.add_variable(Tag{f, 1}, 0, 1);
    dup.add_variable(Tag{f, 1}, 0, 1);
    CHECK_THROWS_AS(dup.validate(), ValidationError);
}

TEST_CASE("fixed variables give the evaluated constant") {
    LinearModel m;
    const int a = m.add_variable("a", 2, 2, 3.0);
    const int b = m.add_variable("b", 1, 1, -4.0, true);
    m.add_constraint("r", {{a, 1.0}, {b, 1.0}}, Sense::less_equal, 10.0);
    CHECK(solve_mip(m).objective == doctest::Approx(2.0));
}

TEST_CASE("binary toy") {
    const auto sol = solve_mip(binary_toy());
    CHECK(sol.objective == doctest::Approx(1.0));
    CHECK(sol.x[0] == doctest::Approx(1.0));
    CHECK(sol.x[1] == doctest::Approx(0.0));
    CHECK(sol.gap <= 1e-9);
}

TEST_CASE("infeasible and unbounded models raise") {
    LinearModel inf;
    const int x = inf.add_variable("x", 0, 1);
    inf.add_constraint("r", {{x, 1.0}}, Sense::greater_equal, 2.0);
    try {
        solve_mip(inf);
        FAIL("expected an exception");
    } catch (const SolverError& e) {
        CHECK(e.status() == SolveStatus::infeasible);
    }
    LinearModel unb;
    const int y = unb.add_variable("y", -kInf, kInf, 1.0);
    unb.add_constraint("r", {{y, 1.0}}, Sense::less_equal, 0.0);
    CHECK_THROWS_AS(solve_mip(unb), SolverError);
}

TEST_CASE("LP duals: weak duality and complementary slackness") {
    const auto m = small_lp();
    const auto mip = solve_mip(m);
    const auto lp = fix_and_resolve(m, mip);
    CHECK(lp.objective == doctest::Approx(mip.objective));
    // a = 3, b = 1, c = 2: objective 6 + 3 + 2 = 11
    CHECK(lp.objective == doctest::Approx(11.0));
    CHECK(m.dual_objective(lp.row_dual, lp.reduced_cost) <= lp.objective + 1e-6);
    CHECK(m.dual_objective(lp.row_dual, lp.reduced_cost) == doctest::Approx(lp.objective));
    CHECK(lp.row_dual[0] == doctest::Approx(3.0));   // one more unit of need is bought with b
    CHECK(lp.row_dual[1] == doctest::Approx(-1.0));  // relaxing link lets c fall by one
    for (std::size_t r = 0; r < m.num_constraints(); ++r) {
        const double slack = m.row_activity(static_cast<int>(r), lp.x) - m.rhs(static_cast<int>(r));
        CHECK(std::abs(slack * lp.row_dual[r]) < 1e-7);
    }
}

TEST_CASE("fix_and_resolve rejects an infeasible rounding") {
    LinearModel m;
    const int x = m.add_variable("x", 0, 1, 1.0, true);
    const int y = m.add_variable("y", 0, 1, 1.0);
    m.add_constraint("r", {{x, 1.0}, {y, 1.0}}, Sense::greater_equal, 1.5);
    MipSolution bad;
    bad.status = SolveStatus::feasible;
    bad.x = {0.0, 1.0};
    bad.objective = 1.0;
    CHECK_THROWS_AS(fix_and_resolve(m, bad), SolverError);
}

TEST_CASE("fix_and_resolve keeps the incumbent objective on market models") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    for (const auto& model : toy_models(net, sens, sc)) {
        const auto mip = solve_mip(model.lp);
        for (auto alg : {LpAlgorithm::automatic, LpAlgorithm::dual_simplex, LpAlgorithm::primal_simplex}) {
            const auto lp = fix_and_resolve(model.lp, mip, {}, alg);
            CHECK(lp.objective_drift() < 1e-6);
            CHECK(model.lp.max_violation(lp.x) < 1e-6);
            CHECK(model.lp.dual_objective(lp.row_dual, lp.reduced_cost) <= lp.objective + 1e-6 * std::abs(lp.objective));
        }
    }
}

TEST_CASE("MIP optimum equals exhaustive commitment enumeration on the toy cases") {
    for (const auto& net : {load_case(testing::data_file("toy3.json")), testing::flexible_toy()}) {
        const SensitivityFactors sens(net);
        const auto sc = make_scenario_set(net);
        for (const auto& model : toy_models(net, sens, sc)) {
            CAPTURE(model.label());
            int feasible = 0;
            const double brute = testing::brute_force_optimum(model.lp, &feasible);
            CHECK(feasible > 0);
            CHECK(testing::close_rel(solve_mip(model.lp).objective, brute, 1e-6));
        }
    }
}

TEST_CASE("solution pool") {
    SUBCASE("count 1 equals solve_mip") {
        const auto m = binary_toy();
        const auto pool = solution_pool(m, 1);
        REQUIRE(pool.solutions.size() == 1);
        CHECK(pool.solutions[0].objective == doctest::Approx(solve_mip(m).objective));
        CHECK_FALSE(pool.shortfall);
    }
    SUBCASE("two patterns within the gap") {
        LinearModel m;
        const int a = m.add_variable("a", 0, 1, 100.0, true);
        const int b = m.add_variable("b", 0, 1, 100.5, true);
        m.add_constraint("one", {{a, 1.0}, {b, 1.0}}, Sense::equal, 1.0);
        SolverOptions opt;
        opt.rel_gap = 0.01;
        const auto pool = solution_pool(m, 30, opt);
        CHECK(pool.solutions.size() == 2);
        CHECK(pool.shortfall);
    }
    SUBCASE("a wide gap enumerates every feasible commitment") {
        const auto net = testing::flexible_toy();
        const SensitivityFactors sens(net);
        for (const auto& model : toy_models(net, sens, make_scenario_set(net))) {
            CAPTURE(model.label());
            int feasible = 0;
            testing::brute_force_optimum(model.lp, &feasible);
            CHECK(feasible > 4);
            SolverOptions opt;
            opt.rel_gap = 100.0;
            const auto pool = solution_pool(model.lp, 64, opt);
            CHECK(static_cast<int>(pool.solutions.size()) == feasible);
            CHECK(pool.shortfall == (feasible < 64));
        }
    }
    SUBCASE("members are distinct and within the gap") {
        const auto net = load_case(testing::data_file("case6.json")).with_horizon(6);
        const SensitivityFactors sens(net);
        const auto model = build_escuc(net, sens, make_scenario_set(net), ObjectiveMode::expected);
        SolverOptions opt;
        opt.rel_gap = 0.05;
        const auto pool = solution_pool(model.lp, 4, opt);
        REQUIRE(pool.solutions.size() >= 2);
        const double best = solve_mip(model.lp).objective;
        std::set<std::vector<int>> patterns;
        for (const auto& s : pool.solutions) {
            std::vector<int> u;
            for (std::size_t v = 0; v < model.lp.num_variables(); ++v)
                if (model.lp.is_integer(static_cast<int>(v))) u.push_back(s.x[v] > 0.5);
            patterns.insert(u);
            CHECK(s.objective <= best * 1.05 + 1e-6);
            CHECK(model.lp.max_violation(s.x) < 1e-6);
        }
        CHECK(patterns.size() == pool.solutions.size());
    }
}

TEST_CASE("same model and seed give the same incumbent") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto model = build_escuc(net, sens, make_scenario_set(net), ObjectiveMode::expected);
    SolverOptions opt;
    opt.seed = 5;
    CHECK(solve_mip(model.lp, opt).x == solve_mip(model.lp, opt).x);
}

TEST_CASE("MPS export reads back into an independent solver") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const auto path = std::filesystem::temp_directory_path() / "secmkt_readback.mps";
    for (const auto& model : toy_models(net, sens, sc)) {
        write_mps(model.lp, path, model.label());
        Highs h;
        h.setOptionValue("output_flag", false);
        REQUIRE(h.readModel(path.string()) == HighsStatus::kOk);
        CHECK(static_cast<std::size_t>(h.getNumCol()) == model.lp.num_variables());
        CHECK(static_cast<std::size_t>(h.getNumRow()) == model.lp.num_constraints());
        h.setOptionValue("mip_rel_gap", 0.0);
        REQUIRE(h.run() == HighsStatus::kOk);
        CHECK(h.getModelStatus() == HighsModelStatus::kOptimal);
        CHECK(testing::close_rel(h.getInfo().objective_function_value, solve_mip(model.lp).objective, 1e-6));
    }
    std::filesystem::remove(path);
}
