// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "secmkt/contingency.hpp"
#include "secmkt/experiments.hpp"
#include "secmkt/market_models.hpp"
#include "secmkt/pricing.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/sensitivity.hpp"
#include "support.hpp"

using namespace secmkt;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kSlmpTol = 1e-6;          // $/MWh
constexpr double kViolationTol = 1e-6;     // MW
constexpr double kOrderTol = 1e-6;         // relative slack on cost orderings
constexpr double kSensitivityTol = 1e-8;   // relative flow agreement
constexpr double kBruteTol = 1e-6;         // relative objective agreement
constexpr double kSumTol = 1e-12;          // probability sum
constexpr double kBalanceTol = 1e-9;       // relative settlement balance

// Trend configuration for the pair statistics on the bundled large case.
constexpr int kTrendHorizon = 1;
constexpr std::size_t kTrendSubsetLines = 20;
constexpr int kTrendPool = 10;
constexpr double kTrendGap = 0.01;
constexpr std::size_t kTrendCases = 2000;
constexpr std::uint64_t kTrendSeed = 1;

int workers() { return static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 4u)); }

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

struct Verdict {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + std::string("failed: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::vector<Verdict> verdicts(11);

void log(const std::string& s) { std::cerr << "[acceptance] " << s << std::endl; }

struct Instance {
    std::string name;
    Network net;
    std::unique_ptr<SensitivityFactors> sens;
    ScenarioSet scenarios;
    PricingStudyReport report;
};

std::unique_ptr<Instance> priced_instance(const std::string& name, Network net, std::size_t subset_lines) {
    auto in = std::make_unique<Instance>();
    in->name = name;
    in->net = std::move(net);
    in->sens = std::make_unique<SensitivityFactors>(in->net);
    in->scenarios = make_scenario_set(in->net);
    if (subset_lines) in->scenarios = select_line_subset(in->net, *in->sens, in->scenarios, subset_lines);
    StudyOptions opt;
    opt.threads = workers();
    opt.check_dual_stability = false;
    log("pricing study on " + name);
    in->report = run_pricing_study(in->net, *in->sens, in->scenarios, opt);
    return in;
}

void check_instance(const Instance& in) {
    const auto& net = in.net;
    const auto& sc = in.scenarios;
    const auto& rep = in.report;

    double worst_residual = 0.0;
    for (const auto& m : rep.models)
        if (m.kind == ModelKind::escuc) worst_residual = std::max(worst_residual, m.slmp_residual);
    verdicts[1].require(worst_residual <= kSlmpTol, in.name + " residual " + fmt(worst_residual));
    verdicts[1].note(in.name + " " + fmt(worst_residual));

    double worst_violation = 0.0;
    for (const auto& m : rep.models) {
        const auto& s = m.kind == ModelKind::escuc ? m.day_ahead : m.settled;
        const auto ca = realized_cost(net, *in.sens, s, sc, {}, workers());
        worst_violation = std::max(worst_violation, ca.max_violation());
        verdicts[2].require(ca.max_violation() <= kViolationTol, in.name + " " + m.label + " " + fmt(ca.max_violation()));
    }
    verdicts[2].note(in.name + " " + fmt(worst_violation));

    const double bench = rep.find("escuc-base").final_cost;
    for (const char* label : {"scuc-prxy", "scuc-lodf"}) {
        const double f = rep.find(label).final_cost;
        verdicts[3].require(bench <= f * (1 + kOrderTol), in.name + " benchmark above " + label);
    }
    verdicts[3].note(in.name + " " + fmt(bench) + " vs " + fmt(rep.find("scuc-prxy").final_cost) + "/" +
                     fmt(rep.find("scuc-lodf").final_cost));

    const auto e = evaluate_costs(net, rep.find("escuc-expected").day_ahead);
    const auto b = evaluate_costs(net, rep.find("escuc-base").day_ahead);
    verdicts[4].note(in.name + " expected " + fmt(e.expected_cost(sc)) + "<=" + fmt(b.expected_cost(sc)) + ", base " +
                     fmt(b.base_cost()) + "<=" + fmt(e.base_cost()) + ", scenario " + fmt(e.scenario_cost(sc)) +
                     "<=" + fmt(b.scenario_cost(sc)));
    verdicts[4].require(e.expected_cost(sc) <= b.expected_cost(sc) * (1 + kOrderTol), in.name + " expected cost");
    verdicts[4].require(b.base_cost() <= e.base_cost() * (1 + kOrderTol), in.name + " base cost");
    verdicts[4].require(e.scenario_cost(sc) <= b.scenario_cost(sc) * (1 + kOrderTol), in.name + " scenario cost");

    for (const auto& m : rep.models) {
        const double r = std::abs(m.settlement.balance_residual());
        verdicts[9].require(r <= kBalanceTol, in.name + " " + m.label + " balance " + fmt(r));
    }
}

double rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0, s = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d = std::max(d, std::abs(a[i] - b[i]));
        s = std::max(s, std::abs(b[i]));
    }
    return d / s;
}

void criterion5() {
    auto check = [](const Network& net, std::mt19937_64& rng, int draws) {
        const SensitivityFactors sens(net);
        double worst = 0.0;
        std::size_t outages = 0;
        for (std::size_t l = 0; l < net.num_lines(); ++l) {
            if (sens.radial()[l]) continue;
            ++outages;
            const auto cut = net.without_line(l);
            const auto rebuilt = compute_ptdf(cut);
            for (int d = 0; d < draws; ++d) {
                const auto inj = testing::balanced_injection(rng, net.num_buses());
                const auto base = line_flows(sens.ptdf_base(), inj);
                const auto post = line_flows(sens.ptdf_post(l), inj);
                const auto ref_cut = line_flows(rebuilt, inj);
                std::vector<double> ref(net.num_lines(), 0.0), lodf(net.num_lines(), 0.0);
                for (std::size_t k = 0, r = 0; k < net.num_lines(); ++k) {
                    if (k == l) continue;
                    ref[k] = ref_cut[r++];
                    lodf[k] = base[k] + sens.lodf()(k, l) * base[l];
                }
                worst = std::max({worst, rel_diff(post, ref), rel_diff(lodf, ref)});
            }
        }
        return std::pair{worst, outages};
    };
    std::mt19937_64 rng(2024);
    const auto big = load_case(testing::data_file("case118.json"));
    const auto [w118, n118] = check(big, rng, 3);
    verdicts[5].require(n118 == 177, "expected 177 non-radial outages, found " + std::to_string(n118));
    verdicts[5].require(w118 <= kSensitivityTol, "case118 " + fmt(w118));
    double wrand = 0.0;
    for (int trial = 0; trial < 100; ++trial)
        wrand = std::max(wrand, check(testing::random_network(rng, 3 + trial % 15, 1 + trial % 8), rng, 2).first);
    verdicts[5].require(wrand <= kSensitivityTol, "random graphs " + fmt(wrand));
    verdicts[5].note(std::to_string(n118) + " outages, worst " + fmt(w118) + "; 100 random graphs, worst " + fmt(wrand));
}

void criterion6() {
    const auto net = testing::flexible_toy();
    verdicts[6].require(net.num_buses() == 3 && net.num_generators() == 3 && net.horizon() == 2, "toy dimensions");
    const SensitivityFactors sens(net);
    const auto sc = make_scenario_set(net);
    std::vector<MarketModel> models;
    models.push_back(build_scuc_prxy(net, sens));
    models.push_back(build_scuc_lodf(net, sens));
    models.push_back(build_escuc(net, sens, sc, ObjectiveMode::expected));
    models.push_back(build_escuc(net, sens, sc, ObjectiveMode::base));
    for (const auto& m : models) {
        int feasible = 0;
        const double brute = testing::brute_force_optimum(m.lp, &feasible);
        const double mip = solve_mip(m.lp).objective;
        verdicts[6].require(feasible > 0 && testing::close_rel(mip, brute, kBruteTol), m.label());
        verdicts[6].note(m.label() + " " + fmt(mip) + "=" + fmt(brute) + " (" + std::to_string(feasible) + " feasible)");
    }
}

void criterion7(const ScenarioSet& nominal) {
    PerturbationConfig cfg;
    cfg.sigma = 0.2;
    cfg.n_cases = 2000;
    const auto r = perturb_probabilities(nominal, cfg, workers());
    verdicts[7].require(r.cases.size() == 2000, "case count");
    double worst_sum = 0.0, lo = 1.0, hi = 0.0;
    for (const auto& c : r.cases) {
        double sum = 0.0;
        for (const auto& s : c.all()) sum += s.probability;
        worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        lo = std::min(lo, c.base_probability());
        hi = std::max(hi, c.base_probability());
    }
    verdicts[7].require(worst_sum <= kSumTol, "sum " + fmt(worst_sum));
    verdicts[7].require(lo >= 0.944 && hi <= 0.948, "window");
    cfg.sigma = 0.0;
    cfg.n_cases = 50;
    const auto z = perturb_probabilities(nominal, cfg);
    verdicts[7].require(std::all_of(z.cases.begin(), z.cases.end(), [&](const auto& c) { return c == nominal; }),
                        "sigma 0 differs from input");
    verdicts[7].note("2000 cases, base probability in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                     "], worst sum error " + fmt(worst_sum) + ", " + std::to_string(r.rejected) + " redraws");
}

std::uint64_t brute_lower(const std::vector<double>& a, const std::vector<double>& b) {
    std::uint64_t n = 0;
    for (double x : a)
        for (double y : b)
            if (y - x > kTieTolerance * std::max(std::abs(x), std::abs(y))) ++n;
    return n;
}

double brute_pct(const std::vector<double>& a, const std::vector<double>& b) {
    return 100.0 * static_cast<double>(brute_lower(a, b)) / static_cast<double>(a.size() * b.size());
}

PoolEvaluation head(const PoolEvaluation& p, std::size_t n) {
    PoolEvaluation out = p;
    out.members.resize(std::min(n, p.members.size()));
    out.objectives.resize(out.members.size());
    return out;
}

std::pair<Network, ScenarioSet> large_subset() {
    auto net = load_case(testing::data_file("case118.json")).with_horizon(kTrendHorizon);
    const SensitivityFactors sens(net);
    auto sc = select_line_subset(net, sens, make_scenario_set(net), kTrendSubsetLines);
    return {std::move(net), std::move(sc)};
}

void criterion8() {
    const auto [net, sc] = large_subset();
    const SensitivityFactors sens(net);

    StudyOptions opt;
    opt.solver.rel_gap = kTrendGap;
    opt.threads = workers();
    log("building solution pools on the large case");
    const auto base = build_pool(net, sens, sc, ObjectiveMode::base, kTrendPool, opt);
    const auto exp = build_pool(net, sens, sc, ObjectiveMode::expected, kTrendPool, opt);

    // Streamed statistics against exhaustive enumeration on 5 x 5 pools.
    const auto b5 = head(base, 5), e5 = head(exp, 5);
    verdicts[8].require(b5.members.size() == 5 && e5.members.size() == 5, "pools smaller than 5");
    const auto tb = cost_table(b5, sc), te = cost_table(e5, sc);
    const auto rep = compare_pairs(tb, te);
    bool exact = rep.n_pairs == 25 && rep.pct_lower_base_cost == brute_pct(tb.base, te.base) &&
                 rep.pct_lower_expected_cost == brute_pct(tb.expected, te.expected) &&
                 rep.pct_lower_realized_cost == brute_pct(tb.realized, te.realized) &&
                 rep.pct_lower_scenario_cost == brute_pct(tb.scenario, te.scenario);
    PerturbationConfig small;
    small.sigma = 0.2;
    small.n_cases = 40;
    small.seed = kTrendSeed;
    const auto study = run_perturbation_study(b5, e5, sc, small, workers());
    const auto cases = perturb_probabilities(sc, small);
    std::vector<double> a, b, as, bs;
    for (const auto& c : cases.cases) {
        for (const auto& m : b5.members) a.push_back(m.expected_cost(c)), as.push_back(m.scenario_cost(c));
        for (const auto& m : e5.members) b.push_back(m.expected_cost(c)), bs.push_back(m.scenario_cost(c));
    }
    exact = exact && study.pairs.pct_lower_expected_cost == brute_pct(a, b) &&
            study.pairs.pct_lower_scenario_cost == brute_pct(as, bs);
    verdicts[8].require(exact, "streamed statistics differ from enumeration");
    verdicts[8].note(std::string("5x5 oracle ") + (exact ? "exact" : "mismatch"));

    // Trend of the base-mode-lower share of expected cost.
    std::vector<double> shares;
    for (double sigma : {0.0, 0.2, 0.4}) {
        PerturbationConfig cfg;
        cfg.sigma = sigma;
        cfg.n_cases = kTrendCases;
        cfg.seed = kTrendSeed;
        const auto r = run_perturbation_study(base, exp, sc, cfg, workers());
        shares.push_back(r.pairs.pct_lower_expected_cost);
    }
    const bool monotone = shares[0] <= shares[1] && shares[1] <= shares[2];
    verdicts[8].require(monotone, "trend not monotone");
    verdicts[8].note("trend over sigma 0/0.2/0.4: " + std::to_string(shares[0]) + " / " + std::to_string(shares[1]) +
                     " / " + std::to_string(shares[2]) + " %");
}

void criterion9_single_bus() {
    using testing::unit;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> cost(5, 60), load(20, 250);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<Generator> gens;
        for (int g = 0; g < 4; ++g) gens.push_back(unit(g + 1, 1, 0, 150, std::round(cost(rng))));
        std::vector<double> profile(3);
        for (auto& x : profile) x = std::round(load(rng));
        auto net = testing::make_network(1, {}, gens, {profile});
        auto in = priced_instance("single-bus-" + std::to_string(trial), std::move(net), 0);
        for (const auto& m : in->report.models) {
            verdicts[9].require(m.settlement.congestion_rent == 0.0,
                                in->name + " " + m.label + " rent " + fmt(m.settlement.congestion_rent));
            verdicts[9].require(std::abs(m.settlement.balance_residual()) <= kBalanceTol, in->name + " balance");
        }
    }
    verdicts[9].note("10 single-bus cases, rent exactly 0");
}

int run_cli(const fs::path& dir, const std::string& args) {
    const std::string cmd = "cd '" + dir.string() + "' && '" + SECMKT_CLI + "' " + args + " >log.txt 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion10() {
    const auto dir = fs::temp_directory_path() / "secmkt_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string args = "study perturb --case '" + testing::data_file("case6.json").string() +
                             "' --pool 3 --gap 0.01 --cases 200 --sigma 0,0.2,0.4 --perturb-seed 7 --threads " +
                             std::to_string(workers());
    log("determinism runs");
    const int r1 = run_cli(dir, args + " --out run1");
    const int r2 = run_cli(dir, args + " --out run2");
    verdicts[10].require(r1 == 0 && r2 == 0, "CLI exit codes " + std::to_string(r1) + "/" + std::to_string(r2));
    std::size_t compared = 0;
    for (const auto& e : fs::directory_iterator(dir / "run1")) {
        if (e.path().extension() != ".csv") continue;
        ++compared;
        const auto other = dir / "run2" / e.path().filename();
        verdicts[10].require(fs::exists(other) && slurp(e.path()) == slurp(other), e.path().filename().string());
    }
    verdicts[10].require(compared >= 3, "too few CSVs");
    verdicts[10].note(std::to_string(compared) + " CSVs byte-identical");
}

}  // namespace

int main() {
    const char* names[] = {"",
                           "SLMP identity",
                           "N-1 feasibility",
                           "benchmark ordering",
                           "objective-mode orderings",
                           "sensitivity oracle",
                           "brute-force MIP oracle",
                           "perturbation construction",
                           "pair statistics",
                           "settlement balance",
                           "determinism"};
    auto guarded = [](std::vector<int> ids, const std::function<void()>& fn) {
        try {
            fn();
        } catch (const std::exception& e) {
            for (int id : ids) verdicts[static_cast<std::size_t>(id)].require(false, std::string("exception: ") + e.what());
        }
    };

    guarded({1, 2, 3, 4, 9}, [] {
        std::vector<std::unique_ptr<Instance>> instances;
        instances.push_back(priced_instance("toy3", load_case(testing::data_file("toy3.json")), 0));
        instances.push_back(priced_instance("flex3", testing::flexible_toy(), 0));
        instances.push_back(priced_instance("case6", load_case(testing::data_file("case6.json")), 0));
        instances.push_back(priced_instance(
            "case118-T1", load_case(testing::data_file("case118.json")).with_horizon(kTrendHorizon), kTrendSubsetLines));
        for (const auto& in : instances) check_instance(*in);
    });
    guarded({5}, criterion5);
    guarded({6}, criterion6);
    guarded({7}, [] { criterion7(large_subset().second); });
    guarded({8}, criterion8);
    guarded({9}, criterion9_single_bus);
    guarded({10}, criterion10);

    int failed = 0;
    for (int id = 1; id <= 10; ++id) {
        const auto& v = verdicts[static_cast<std::size_t>(id)];
        std::cout << "CRITERION " << id << " " << (v.pass ? "PASS" : "FAIL") << "  " << names[id] << ": " << v.detail
                  << "\n";
        failed += !v.pass;
    }
    if (failed)
        std::cout << "ACCEPTANCE FAIL (" << failed << (failed == 1 ? " criterion)" : " criteria)") << std::endl;
    else
        std::cout << "ACCEPTANCE PASS" << std::endl;
    return failed ? 1 : 0;
}
