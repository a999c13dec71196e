#include "secmkt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"
#include "secmkt/parallel.hpp"
#include "secmkt/sensitivity.hpp"

namespace secmkt {

namespace {

struct Solved {
    MarketModel model;
    MipSolution mip;
    LpSolution lp;
    Schedule schedule;  // LP primal, consistent with the duals
};

Solved solve_and_price(MarketModel model, const StudyOptions& options) {
    Solved s{std::move(model), {}, {}, {}};
    s.mip = solve_mip(s.model.lp, options.solver);
    s.lp = fix_and_resolve(s.model.lp, s.mip, options.solver);
    s.schedule = decode_schedule(s.model, s.lp.x);
    return s;
}

}  // namespace

const ModelOutcome& PricingStudyReport::find(const std::string& label) const {
    for (const auto& m : models)
        if (m.label == label) return m;
    throw DomainError("no model '" + label + "' in the pricing study");
}

PricingStudyReport run_pricing_study(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                                     const StudyOptions& options) {
    PricingStudyReport report;
    auto finish = [&](Solved s, PricingRule rule, bool with_omc) {
        ModelOutcome out;
        out.label = s.model.label();
        out.kind = s.model.kind;
        out.objective = s.model.objective;
        out.day_ahead = s.schedule;
        out.scuc_cost = evaluate_costs(net, s.schedule).base_cost();
        out.prices = extract_prices(s.model, s.lp);
        out.slmp_residual = verify_slmp_identity(out.prices);
        out.rule = rule;
        if (with_omc) {
            out.omc = run_omc(net, sens, scenarios, s.schedule, options.solver);
            out.settled = out.omc->corrected;
            out.omc_cost = out.omc->omc_cost;
            out.final_cost = out.omc->final_cost;
        } else {
            out.settled = s.schedule;
            out.final_cost = out.scuc_cost;
        }
        out.settlement = settle(out.prices, out.settled, net, rule);
        if (options.check_dual_stability)
            out.settlement.stability = dual_stability(s.model, s.mip, net, rule, options.solver);
        report.models.push_back(std::move(out));
    };
    finish(solve_and_price(build_scuc_prxy(net, sens, options.eta), options), PricingRule::da_lmp, true);
    finish(solve_and_price(build_scuc_lodf(net, sens, options.eta), options), PricingRule::da_lmp, true);
    finish(solve_and_price(build_escuc(net, sens, scenarios, ObjectiveMode::expected), options), PricingRule::slmp,
           false);
    finish(solve_and_price(build_escuc(net, sens, scenarios, ObjectiveMode::base), options), PricingRule::slmp, false);
    return report;
}

void write_pricing_study(const PricingStudyReport& report, const Network& net, const ScenarioSet& scenarios,
                         const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        CsvWriter w(dir / "final_costs.csv");
        w.header({"model", "scuc_cost", "omc_cost", "final_cost", "newly_committed"});
        for (const auto& m : report.models)
            w.cell(m.label)
                .cell(m.scuc_cost)
                .cell(m.omc_cost)
                .cell(m.final_cost)
                .cell(m.omc ? m.omc->newly_committed.size() : std::size_t{0})
                .end_row();
    }
    {
        CsvWriter w(dir / "prices.csv");
        w.header({"model", "bus", "hour", "price"});
        for (const auto& m : report.models) {
            const Grid& price = m.rule == PricingRule::slmp ? m.prices.slmp : m.prices.lambda[0];
            for (std::size_t n = 0; n < net.num_buses(); ++n)
                for (int t = 0; t < m.prices.horizon; ++t)
                    w.cell(m.label).cell(net.buses[n].id).cell(t + 1).cell(price[n][static_cast<std::size_t>(t)]).end_row();
        }
    }
    {
        CsvWriter w(dir / "settlements.csv");
        w.header({"model", "rule", "load_payment", "generator_revenue", "congestion_rent", "generation_rent",
                  "slmp_residual", "dual_stable"});
        for (const auto& m : report.models) {
            const auto& s = m.settlement;
            w.cell(m.label)
                .cell(to_string(m.rule))
                .cell(s.load_payment)
                .cell(s.generator_revenue_total)
                .cell(s.congestion_rent)
                .cell(s.generation_rent_total)
                .cell(m.slmp_residual)
                .cell(s.stability ? (s.stability->stable ? "yes" : "no") : "n/a")
                .end_row();
        }
    }
    for (const auto& m : report.models) {
        write_settlement_csv(m.settlement, net, dir / ("settlement_" + m.label + ".csv"));
        if (m.omc) write_omc_csv(*m.omc, net, dir / ("omc_" + m.label + ".csv"));
        if (m.kind == ModelKind::escuc && m.objective == ObjectiveMode::expected)
            write_price_components_csv(m.prices, net, scenarios, dir / "price_components.csv");
    }
}

double SolutionCosts::expected_cost(const ScenarioSet& scenarios) const {
    return commitment + scenarios.base_probability() * base_energy + scenario_cost(scenarios);
}

double SolutionCosts::scenario_cost(const ScenarioSet& scenarios) const {
    double total = 0.0;
    for (std::size_t c = 1; c < scenarios.size(); ++c) total += scenarios[c].probability * scenario_energy.at(c);
    return total;
}

double SolutionCosts::realized_cost(const ScenarioSet& scenarios) const {
    return commitment + scenarios.base_probability() * base_energy + realized_scenario_cost(scenarios);
}

double SolutionCosts::realized_scenario_cost(const ScenarioSet& scenarios) const {
    double total = 0.0;
    for (std::size_t c = 1; c < scenarios.size(); ++c) total += scenarios[c].probability * realized_energy.at(c);
    return total;
}

namespace {

SolutionCosts costs_from(const Network& net, const ScenarioSet& scenarios, const Schedule& schedule,
                         const RealizedCostReport& realized) {
    const auto costs = evaluate_costs(net, schedule);
    SolutionCosts out;
    out.commitment = costs.commitment();
    out.base_energy = costs.base_energy;
    out.scenario_energy = costs.scenario_energy;
    if (out.scenario_energy.size() != scenarios.size()) {
        if (scenarios.size() > 1 && !out.scenario_energy.empty())
            throw DomainError("schedule scenarios do not match the evaluation scenario set");
        out.scenario_energy.assign(scenarios.size(), 0.0);
        out.scenario_energy[0] = costs.base_energy;
    }
    out.realized_energy = realized.scenario_energy;
    out.max_violation = realized.max_violation();
    return out;
}

}  // namespace

SolutionCosts evaluate_solution(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                                const Schedule& schedule, const StudyOptions& options) {
    const auto realized = realized_cost(net, sens, schedule, scenarios, options.solver, options.threads);
    return costs_from(net, scenarios, schedule, realized);
}

RealizedStudyReport run_realized_cost_study(const Network& net, const SensitivityFactors& sens,
                                            const ScenarioSet& scenarios, const StudyOptions& options) {
    RealizedStudyReport rep;
    for (auto mode : {ObjectiveMode::expected, ObjectiveMode::base}) {
        auto model = build_escuc(net, sens, scenarios, mode);
        const auto mip = solve_mip(model.lp, options.solver);
        const auto schedule = decode_schedule(model, mip.x);
        auto realized = realized_cost(net, sens, schedule, scenarios, options.solver, options.threads);
        auto costs = costs_from(net, scenarios, schedule, realized);
        if (mode == ObjectiveMode::expected) {
            rep.expected_mode = std::move(costs);
            rep.expected_realized = std::move(realized);
        } else {
            rep.base_mode = std::move(costs);
            rep.base_realized = std::move(realized);
        }
    }
    return rep;
}

void write_realized_study(const RealizedStudyReport& rep, const Network& net, const ScenarioSet& scenarios,
                          const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    CsvWriter w(dir / "realized_costs.csv");
    w.header({"model", "da_base_cost", "da_expected_cost", "da_scenario_cost", "realized_cost",
              "realized_scenario_cost", "commitment_cost", "max_violation"});
    auto row = [&](const char* label, const SolutionCosts& c) {
        w.cell(label)
            .cell(c.base_cost())
            .cell(c.expected_cost(scenarios))
            .cell(c.scenario_cost(scenarios))
            .cell(c.realized_cost(scenarios))
            .cell(c.realized_scenario_cost(scenarios))
            .cell(c.commitment)
            .cell(c.max_violation)
            .end_row();
    };
    row("escuc-expected", rep.expected_mode);
    row("escuc-base", rep.base_mode);
    write_violation_csv(rep.expected_realized, net, scenarios, dir / "violations_escuc-expected.csv");
    write_violation_csv(rep.base_realized, net, scenarios, dir / "violations_escuc-base.csv");
}

PoolEvaluation build_pool(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                          ObjectiveMode mode, int pool_size, const StudyOptions& options) {
    if (pool_size < 1) throw DomainError("pool size must be >= 1");
    const auto model = build_escuc(net, sens, scenarios, mode);
    const auto pool = solution_pool(model.lp, pool_size, options.solver);
    PoolEvaluation out;
    out.mode = mode;
    out.shortfall = pool.shortfall;
    out.members.resize(pool.solutions.size());
    for (const auto& s : pool.solutions) out.objectives.push_back(s.objective);
    auto inner = options;
    inner.threads = 1;
    parallel_for(pool.solutions.size(), options.threads, [&](std::size_t i) {
        out.members[i] = evaluate_solution(net, sens, scenarios, decode_schedule(model, pool.solutions[i].x), inner);
    });
    return out;
}

bool strictly_lower(double a, double b) {
    return b - a > kTieTolerance * std::max(std::abs(a), std::abs(b));
}

std::uint64_t count_lower_pairs(std::span<const double> a, std::span<const double> b) {
    std::vector<double> sorted(b.begin(), b.end());
    std::sort(sorted.begin(), sorted.end());
    std::uint64_t count = 0;
    // strictly_lower(x, y) is monotone increasing in y, so the qualifying y form a suffix.
    for (double x : a) {
        auto it = std::partition_point(sorted.begin(), sorted.end(), [x](double y) { return !strictly_lower(x, y); });
        count += static_cast<std::uint64_t>(sorted.end() - it);
    }
    return count;
}

Histogram pair_difference_histogram(std::span<const double> a, std::span<const double> b, int bins) {
    Histogram h;
    if (a.empty() || b.empty()) return h;
    bins = std::max(1, bins);
    std::vector<double> sorted(b.begin(), b.end());
    std::sort(sorted.begin(), sorted.end());
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const double lo = sorted.front() - *amax;
    const double hi = sorted.back() - *amin;
    const double width = hi > lo ? (hi - lo) / bins : 0.0;
    if (width == 0.0) bins = 1;
    h.edges.resize(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + width * i;
    h.edges.back() = std::max(hi, lo);
    h.counts.assign(static_cast<std::size_t>(bins), 0);
    // Inner edges split by lower_bound; the outer bins absorb everything beyond them.
    std::vector<std::size_t> cut(static_cast<std::size_t>(bins) + 1);
    for (double x : a) {
        cut.front() = 0;
        cut.back() = sorted.size();
        for (std::size_t i = 1; i < cut.size() - 1; ++i)
            cut[i] = static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x + h.edges[i]) - sorted.begin());
        for (std::size_t i = 0; i + 1 < cut.size(); ++i) h.counts[i] += cut[i + 1] - cut[i];
    }
    return h;
}

CostTable cost_table(const PoolEvaluation& pool, const ScenarioSet& scenarios) {
    CostTable t;
    for (const auto& m : pool.members) {
        t.base.push_back(m.base_cost());
        t.expected.push_back(m.expected_cost(scenarios));
        t.realized.push_back(m.realized_cost(scenarios));
        t.scenario.push_back(m.scenario_cost(scenarios));
    }
    return t;
}

namespace {

double pct(std::uint64_t count, std::uint64_t total) {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

}  // namespace

PairComparisonReport compare_pairs(const CostTable& base_mode, const CostTable& expected_mode) {
    PairComparisonReport r;
    r.n_pairs = static_cast<std::uint64_t>(base_mode.base.size()) * expected_mode.base.size();
    r.pct_lower_base_cost = pct(count_lower_pairs(base_mode.base, expected_mode.base), r.n_pairs);
    r.pct_lower_expected_cost = pct(count_lower_pairs(base_mode.expected, expected_mode.expected), r.n_pairs);
    r.pct_lower_realized_cost = pct(count_lower_pairs(base_mode.realized, expected_mode.realized), r.n_pairs);
    r.pct_lower_scenario_cost = pct(count_lower_pairs(base_mode.scenario, expected_mode.scenario), r.n_pairs);
    r.hist_base_cost = pair_difference_histogram(base_mode.base, expected_mode.base);
    r.hist_expected_cost = pair_difference_histogram(base_mode.expected, expected_mode.expected);
    r.hist_realized_cost = pair_difference_histogram(base_mode.realized, expected_mode.realized);
    r.hist_scenario_cost = pair_difference_histogram(base_mode.scenario, expected_mode.scenario);
    return r;
}

PairComparisonReport build_pools_and_pair(const Network& net, const SensitivityFactors& sens,
                                          const ScenarioSet& scenarios, int pool_size, const StudyOptions& options) {
    const auto base = build_pool(net, sens, scenarios, ObjectiveMode::base, pool_size, options);
    const auto expected = build_pool(net, sens, scenarios, ObjectiveMode::expected, pool_size, options);
    auto report = compare_pairs(cost_table(base, scenarios), cost_table(expected, scenarios));
    report.shortfall = base.shortfall || expected.shortfall;
    return report;
}

void PerturbationConfig::validate(const ScenarioSet& nominal) const {
    if (!(sigma >= 0.0)) throw DomainError("sigma must be >= 0");
    if (n_cases == 0) throw DomainError("number of cases must be >= 1");
    if (!(window_low <= window_high)) throw DomainError("empty acceptance window");
    const double base = nominal.base_probability();
    if (base < window_low || base > window_high)
        throw DomainError("acceptance window does not contain the nominal base-case probability");
    if (max_attempts_per_case == 0) throw DomainError("attempt budget must be >= 1");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

}  // namespace

PerturbationResult perturb_probabilities(const ScenarioSet& nominal, const PerturbationConfig& config, int threads) {
    config.validate(nominal);
    PerturbationResult out;
    if (config.sigma == 0.0) {
        out.cases.assign(config.n_cases, nominal);
        out.attempts = config.n_cases;
        return out;
    }
    const auto C = nominal.size() - 1;
    std::vector<double> nominal_probs(C);
    for (std::size_t c = 0; c < C; ++c) nominal_probs[c] = nominal[c + 1].probability;

    out.cases.resize(config.n_cases);
    std::vector<std::uint64_t> attempts(config.n_cases, 0);
    parallel_for(config.n_cases, threads, [&](std::size_t s) {
        std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(s)));
        std::normal_distribution<double> error(0.0, config.sigma);
        std::vector<double> probs(C);
        for (std::size_t attempt = 1; attempt <= config.max_attempts_per_case; ++attempt) {
            bool positive = true;
            double mass = 0.0;
            for (std::size_t c = 0; c < C; ++c) {
                probs[c] = nominal_probs[c] * (1.0 + error(rng));
                positive = positive && probs[c] > 0.0;
                mass += probs[c];
            }
            const double base = 1.0 - mass;
            if (positive && base >= config.window_low && base <= config.window_high) {
                out.cases[s] = nominal.with_contingency_probabilities(probs);
                attempts[s] = attempt;
                return;
            }
        }
        throw DomainError("probability perturbation: no accepted draw for case " + std::to_string(s) + " within " +
                          std::to_string(config.max_attempts_per_case) + " attempts (acceptance rate below " +
                          std::to_string(100.0 / static_cast<double>(config.max_attempts_per_case)) + "%)");
    });
    for (auto a : attempts) out.attempts += a;
    out.rejected = out.attempts - config.n_cases;
    return out;
}

PerturbationStudyReport run_perturbation_study(const PoolEvaluation& base_mode, const PoolEvaluation& expected_mode,
                                               const ScenarioSet& nominal, const PerturbationConfig& config,
                                               int threads) {
    const auto cases = perturb_probabilities(nominal, config, threads);
    const auto S = cases.cases.size();
    auto evaluate = [&](const PoolEvaluation& pool, std::vector<double>& expected, std::vector<double>& scenario) {
        const auto M = pool.members.size();
        expected.assign(S * M, 0.0);
        scenario.assign(S * M, 0.0);
        parallel_for(S, threads, [&](std::size_t s) {
            for (std::size_t i = 0; i < M; ++i) {
                expected[s * M + i] = pool.members[i].expected_cost(cases.cases[s]);
                scenario[s * M + i] = pool.members[i].scenario_cost(cases.cases[s]);
            }
        });
    };
    std::vector<double> base_exp, base_scen, exp_exp, exp_scen;
    evaluate(base_mode, base_exp, base_scen);
    evaluate(expected_mode, exp_exp, exp_scen);

    PerturbationStudyReport rep;
    rep.sigma = config.sigma;
    rep.n_cases = S;
    rep.rejected = cases.rejected;
    rep.pairs.n_pairs = static_cast<std::uint64_t>(base_exp.size()) * exp_exp.size();
    rep.pairs.pct_lower_expected_cost = pct(count_lower_pairs(base_exp, exp_exp), rep.pairs.n_pairs);
    rep.pairs.pct_lower_scenario_cost = pct(count_lower_pairs(base_scen, exp_scen), rep.pairs.n_pairs);
    rep.pairs.hist_expected_cost = pair_difference_histogram(base_exp, exp_exp);
    rep.pairs.hist_scenario_cost = pair_difference_histogram(base_scen, exp_scen);
    rep.pairs.shortfall = base_mode.shortfall || expected_mode.shortfall;
    return rep;
}

void write_pair_report(const PairComparisonReport& report, const std::filesystem::path& dir, const std::string& prefix) {
    std::filesystem::create_directories(dir);
    {
        CsvWriter w(dir / (prefix + "pairs.csv"));
        w.header({"cost_type", "n_pairs", "pct_pairs_base_mode_lower"});
        w.cell("base").cell(static_cast<long long>(report.n_pairs)).cell(report.pct_lower_base_cost).end_row();
        w.cell("expected").cell(static_cast<long long>(report.n_pairs)).cell(report.pct_lower_expected_cost).end_row();
        w.cell("realized").cell(static_cast<long long>(report.n_pairs)).cell(report.pct_lower_realized_cost).end_row();
        w.cell("scenario").cell(static_cast<long long>(report.n_pairs)).cell(report.pct_lower_scenario_cost).end_row();
    }
    auto hist = [&](const Histogram& h, const std::string& name) {
        if (h.counts.empty()) return;
        CsvWriter w(dir / (prefix + "hist_" + name + ".csv"));
        w.header({"diff_low", "diff_high", "count"});
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            w.cell(h.edges[i]).cell(h.edges[i + 1]).cell(static_cast<long long>(h.counts[i])).end_row();
    };
    hist(report.hist_base_cost, "base");
    hist(report.hist_expected_cost, "expected");
    hist(report.hist_realized_cost, "realized");
    hist(report.hist_scenario_cost, "scenario");
}

void write_perturbation_table(std::span<const PerturbationStudyReport> reports, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"sigma", "n_cases", "rejected_draws", "n_pairs", "pct_lower_expected_cost", "pct_lower_scenario_cost"});
    for (const auto& r : reports)
        w.cell(r.sigma)
            .cell(r.n_cases)
            .cell(static_cast<long long>(r.rejected))
            .cell(static_cast<long long>(r.pairs.n_pairs))
            .cell(r.pairs.pct_lower_expected_cost)
            .cell(r.pairs.pct_lower_scenario_cost)
            .end_row();
}

}  // namespace secmkt
