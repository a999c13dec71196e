#include <doctest.h>

#include <numeric>
#include <random>

#include "secmkt/experiments.hpp"
#include "secmkt/sensitivity.hpp"
#include "support.hpp"

using namespace secmkt;
using testing::line;
using testing::make_network;
using testing::unit;

namespace {

std::uint64_t brute_lower(const std::vector<double>& a, const std::vector<double>& b) {
    std::uint64_t n = 0;
    for (double x : a)
        for (double y : b)
            if (y - x > kTieTolerance * std::max(std::abs(x), std::abs(y))) ++n;
    return n;
}

/// Bin of each pair found by scanning the edges; outer bins take anything beyond the range.
std::vector<std::uint64_t> brute_histogram(const std::vector<double>& a, const std::vector<double>& b, const Histogram& h) {
    std::vector<std::uint64_t> counts(h.counts.size(), 0);
    for (double x : a)
        for (double y : b) {
            std::size_t bin = 0;
            for (std::size_t i = 1; i + 1 < h.edges.size(); ++i)
                if (y >= x + h.edges[i]) bin = i;
            ++counts[bin];
        }
    return counts;
}

/// Values drawn from a small grid so that ties are common.
std::vector<double> tied_values(std::mt19937_64& rng, std::size_t n) {
    std::uniform_int_distribution<int> level(0, 6);
    std::vector<double> v(n);
    for (auto& x : v) x = 1000.0 + 25.0 * level(rng);
    return v;
}

SolutionCosts random_member(std::mt19937_64& rng, std::size_t n_scenarios) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SolutionCosts m;
    m.commitment = 500 + 100 * u(rng);
    m.base_energy = 5000 + 300 * u(rng);
    m.scenario_energy.resize(n_scenarios);
    m.realized_energy.resize(n_scenarios);
    for (std::size_t c = 0; c < n_scenarios; ++c) {
        m.scenario_energy[c] = c == 0 ? m.base_energy : m.base_energy + 2000 * u(rng);
        m.realized_energy[c] = m.scenario_energy[c];
    }
    return m;
}

PoolEvaluation random_pool(std::mt19937_64& rng, ObjectiveMode mode, std::size_t size, std::size_t n_scenarios) {
    PoolEvaluation p;
    p.mode = mode;
    for (std::size_t i = 0; i < size; ++i) p.members.push_back(random_member(rng, n_scenarios));
    return p;
}

ScenarioSet toy_scenarios() { return make_scenario_set(load_case(testing::data_file("toy3.json"))); }

}  // namespace

TEST_CASE("strict comparison with ties") {
    CHECK(strictly_lower(1.0, 2.0));
    CHECK_FALSE(strictly_lower(2.0, 1.0));
    CHECK_FALSE(strictly_lower(5.0, 5.0));
    CHECK_FALSE(strictly_lower(1e6, 1e6 * (1 + 1e-12)));
    const std::vector<double> one{7.0};
    CHECK(count_lower_pairs(one, one) == 0);
    const std::vector<double> a{1, 2, 3}, b{2, 2, 4};
    CHECK(count_lower_pairs(a, b) == brute_lower(a, b));
    CHECK(count_lower_pairs(a, b) == 5);
}

TEST_CASE("streamed pair counts and histograms match brute force") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> cost(900, 1100);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a, b;
        if (trial % 2) {
            a = tied_values(rng, 1 + trial % 7);
            b = tied_values(rng, 1 + trial % 5);
        } else {
            for (int i = 0; i < 5; ++i) a.push_back(cost(rng)), b.push_back(cost(rng));
        }
        CHECK(count_lower_pairs(a, b) == brute_lower(a, b));
        const auto h = pair_difference_histogram(a, b, 1 + trial % 9);
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == a.size() * b.size());
        CHECK(h.counts == brute_histogram(a, b, h));
    }
}

TEST_CASE("pair report from cost tables") {
    CostTable base{{1, 2, 3}, {10, 20, 30}, {5, 5, 5}, {0, 0, 0}};
    CostTable exp{{2, 2, 2}, {10, 20, 30}, {5, 5, 5}, {1, 1, 1}};
    const auto r = compare_pairs(base, exp);
    CHECK(r.n_pairs == 9);
    CHECK(r.pct_lower_base_cost == doctest::Approx(100.0 * 3 / 9));
    CHECK(r.pct_lower_expected_cost == doctest::Approx(100.0 * 3 / 9));
    CHECK(r.pct_lower_realized_cost == 0.0);
    CHECK(r.pct_lower_scenario_cost == 100.0);
    const auto same = compare_pairs(CostTable{{4}, {4}, {4}, {4}}, CostTable{{4}, {4}, {4}, {4}});
    CHECK(same.n_pairs == 1);
    CHECK(same.pct_lower_expected_cost == 0.0);
}

TEST_CASE("probability perturbation") {
    const auto nominal = toy_scenarios();
    PerturbationConfig cfg;

    SUBCASE("sigma zero reproduces the nominal set") {
        cfg.sigma = 0.0;
        cfg.n_cases = 10;
        const auto r = perturb_probabilities(nominal, cfg);
        REQUIRE(r.cases.size() == 10);
        for (const auto& c : r.cases) CHECK(c == nominal);
        CHECK(r.rejected == 0);
    }
    SUBCASE("accepted sets are valid and inside the window") {
        cfg.sigma = 0.2;
        cfg.n_cases = 2000;
        const auto r = perturb_probabilities(nominal, cfg, 4);
        REQUIRE(r.cases.size() == 2000);
        bool all_ok = true;
        for (const auto& c : r.cases) {
            double sum = 0.0;
            for (const auto& s : c.all()) {
                sum += s.probability;
                all_ok = all_ok && s.probability > 0.0;
            }
            all_ok = all_ok && std::abs(sum - 1.0) <= 1e-12;
            all_ok = all_ok && c.base_probability() >= cfg.window_low && c.base_probability() <= cfg.window_high;
        }
        CHECK(all_ok);
        CHECK(r.attempts == 2000 + r.rejected);
        CHECK(r.cases.front() != nominal);
    }
    SUBCASE("results do not depend on the thread count") {
        cfg.sigma = 0.4;
        cfg.n_cases = 300;
        CHECK(perturb_probabilities(nominal, cfg, 1).cases == perturb_probabilities(nominal, cfg, 4).cases);
        auto other = cfg;
        other.seed = 2;
        CHECK(perturb_probabilities(nominal, cfg).cases != perturb_probabilities(nominal, other).cases);
    }
    SUBCASE("an exhausted attempt budget is an error") {
        cfg.sigma = 50.0;
        cfg.window_low = cfg.window_high = nominal.base_probability();
        cfg.max_attempts_per_case = 10;
        CHECK_THROWS_AS(perturb_probabilities(nominal, cfg), DomainError);
    }
    SUBCASE("invalid configurations") {
        auto bad = cfg;
        bad.sigma = -1;
        CHECK_THROWS_AS(bad.validate(nominal), DomainError);
        bad = cfg;
        bad.n_cases = 0;
        CHECK_THROWS_AS(bad.validate(nominal), DomainError);
        bad = cfg;
        bad.window_low = 0.95;
        CHECK_THROWS_AS(bad.validate(nominal), DomainError);
    }
}

TEST_CASE("perturbation study") {
    const auto nominal = toy_scenarios();
    std::mt19937_64 rng(5);
    const auto base = random_pool(rng, ObjectiveMode::base, 6, nominal.size());
    const auto exp = random_pool(rng, ObjectiveMode::expected, 4, nominal.size());

    SUBCASE("sigma zero equals the unperturbed comparison") {
        PerturbationConfig cfg;
        cfg.sigma = 0.0;
        cfg.n_cases = 7;
        const auto study = run_perturbation_study(base, exp, nominal, cfg);
        const auto plain = compare_pairs(cost_table(base, nominal), cost_table(exp, nominal));
        CHECK(study.pairs.n_pairs == 7u * 6 * 7 * 4);
        CHECK(study.pairs.pct_lower_expected_cost == doctest::Approx(plain.pct_lower_expected_cost));
        CHECK(study.pairs.pct_lower_scenario_cost == doctest::Approx(plain.pct_lower_scenario_cost));
    }
    SUBCASE("full cross product is counted without materializing it") {
        const auto big_base = random_pool(rng, ObjectiveMode::base, 30, nominal.size());
        const auto big_exp = random_pool(rng, ObjectiveMode::expected, 30, nominal.size());
        PerturbationConfig cfg;
        cfg.sigma = 0.2;
        cfg.n_cases = 2000;
        const auto study = run_perturbation_study(big_base, big_exp, nominal, cfg, 4);
        CHECK(study.pairs.n_pairs == 3'600'000'000ull);
        const auto& h = study.pairs.hist_expected_cost;
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) == study.pairs.n_pairs);
        CHECK(study.pairs.pct_lower_expected_cost >= 0.0);
        CHECK(study.pairs.pct_lower_expected_cost <= 100.0);
    }
    SUBCASE("study matches brute force on small pools") {
        PerturbationConfig cfg;
        cfg.sigma = 0.3;
        cfg.n_cases = 5;
        const auto study = run_perturbation_study(base, exp, nominal, cfg, 2);
        const auto cases = perturb_probabilities(nominal, cfg);
        std::vector<double> a, b;
        for (const auto& c : cases.cases) {
            for (const auto& m : base.members) a.push_back(m.expected_cost(c));
            for (const auto& m : exp.members) b.push_back(m.expected_cost(c));
        }
        CHECK(study.pairs.pct_lower_expected_cost ==
              doctest::Approx(100.0 * static_cast<double>(brute_lower(a, b)) / static_cast<double>(a.size() * b.size())));
    }
}

TEST_CASE("solution costs") {
    const auto sc = toy_scenarios();
    std::mt19937_64 rng(9);
    const auto m = random_member(rng, sc.size());
    double scen = 0.0;
    for (std::size_t c = 1; c < sc.size(); ++c) scen += sc[c].probability * m.scenario_energy[c];
    CHECK(m.scenario_cost(sc) == doctest::Approx(scen));
    CHECK(m.expected_cost(sc) == doctest::Approx(m.commitment + sc.base_probability() * m.base_energy + scen));
    CHECK(m.realized_cost(sc) == doctest::Approx(m.expected_cost(sc)));
}

TEST_CASE("models coincide without contingencies and reserve") {
    // Cheap units with no commitment cost and ample headroom make every reserve rule slack.
    const auto net = make_network(3, {line(1, 1, 2, 0.1, 1e4), line(2, 2, 3, 0.1, 1e4), line(3, 1, 3, 0.1, 1e4)},
                                  {unit(1, 1, 0, 1000, 10), unit(2, 2, 0, 1000, 20), unit(3, 3, 0, 1000, 30)},
                                  {{30, 60}, {50, 40}, {20, 10}});
    const SensitivityFactors sens(net);
    StudyOptions opt;
    opt.eta = 0.0;
    const auto rep = run_pricing_study(net, sens, base_only_scenarios(), opt);
    REQUIRE(rep.models.size() == 4);
    const auto& ref = rep.models.back();
    for (const auto& m : rep.models) {
        CAPTURE(m.label);
        CHECK(m.scuc_cost == doctest::Approx(ref.scuc_cost));
        CHECK(m.final_cost == doctest::Approx(ref.final_cost));
        CHECK(m.omc_cost == doctest::Approx(0.0));
        const auto& p = m.rule == PricingRule::slmp ? m.prices.slmp : m.prices.lambda[0];
        for (std::size_t n = 0; n < 3; ++n)
            for (std::size_t t = 0; t < 2; ++t) CHECK(p[n][t] == doctest::Approx(ref.prices.slmp[n][t]));
    }
}

TEST_CASE("securitized price exceeds the proxy price in an import pocket") {
    auto spare = unit(3, 2, 0, 100, 50, 100);
    spare.cost_noload = 100;
    const auto net = make_network(2, {line(1, 1, 2, 0.1, 50, 60), line(2, 1, 2, 0.1, 50, 60)},
                                  {unit(1, 1, 0, 100, 10, 100), unit(2, 1, 0, 100, 10, 100), spare}, {{0.0}, {80.0}});
    const SensitivityFactors sens(net);
    const auto rep = run_pricing_study(net, sens, make_scenario_set(net));
    const auto& prxy = rep.find("scuc-prxy");
    CHECK(prxy.omc.has_value());
    CHECK_FALSE(prxy.omc->newly_committed.empty());
    // Only the expected-cost objective values scenario energy, so only it prices the pocket.
    const auto& e = rep.find("escuc-expected");
    CHECK(e.prices.slmp[1][0] > prxy.prices.lambda[0][1][0] + 1e-6);
    CHECK(e.prices.slmp[1][0] > e.prices.slmp[0][0] + 1e-6);
    for (const auto& m : rep.models)
        if (m.kind == ModelKind::escuc) CHECK(m.slmp_residual <= 1e-6);
    CHECK(rep.find("escuc-base").final_cost <= prxy.final_cost * (1 + 1e-6));
}

TEST_CASE("pricing study on the toy case") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const auto rep = run_pricing_study(net, sens, sc);
    const auto& bench = rep.find("escuc-base");
    for (const auto& m : rep.models) {
        CAPTURE(m.label);
        CHECK(bench.final_cost <= m.final_cost * (1 + 1e-6));
        CHECK(std::abs(m.settlement.balance_residual()) <= 1e-9);
        CHECK(realized_cost(net, sens, m.settled, sc).max_violation() <= kViolationTolerance);
    }
    CHECK(rep.find("scuc-prxy").scuc_cost <= rep.find("scuc-lodf").scuc_cost * (1 + 1e-6));
    CHECK_THROWS(rep.find("nope"));
}

TEST_CASE("realized cost study orderings") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    const auto r = run_realized_cost_study(net, sens, sc);
    CHECK(r.expected_mode.expected_cost(sc) <= r.base_mode.expected_cost(sc) * (1 + 1e-6));
    CHECK(r.base_mode.base_cost() <= r.expected_mode.base_cost() * (1 + 1e-6));
    CHECK(r.expected_mode.max_violation <= kViolationTolerance);
    CHECK(r.base_mode.max_violation <= kViolationTolerance);
    CHECK(r.expected_realized.realized_total == doctest::Approx(r.expected_mode.realized_cost(sc)));
}

TEST_CASE("pools of one") {
    const auto net = load_case(testing::data_file("toy3.json"));
    const SensitivityFactors sens(net);
    const auto rep = build_pools_and_pair(net, sens, make_scenario_set(net), 1);
    CHECK(rep.n_pairs == 1);
    for (double pct : {rep.pct_lower_base_cost, rep.pct_lower_expected_cost, rep.pct_lower_realized_cost,
                       rep.pct_lower_scenario_cost})
        CHECK((pct == 0.0 || pct == 100.0));
}

TEST_CASE("realized totals of the two objectives nearly coincide on the six-bus case") {
    const auto net = load_case(testing::data_file("case6.json"));
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    StudyOptions opt;
    opt.threads = 4;
    const auto r = run_realized_cost_study(net, sens, sc, opt);
    const double e = r.expected_mode.realized_cost(sc), b = r.base_mode.realized_cost(sc);
    CHECK(std::abs(e - b) <= 1e-3 * b);
    CHECK(r.base_mode.scenario_cost(sc) >= r.expected_mode.scenario_cost(sc) * (1 - 1e-6));
}
