#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "secmkt/contingency.hpp"
#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"
#include "secmkt/experiments.hpp"
#include "secmkt/linear_model.hpp"
#include "secmkt/market_models.hpp"
#include "secmkt/network.hpp"
#include "secmkt/omc.hpp"
#include "secmkt/pricing.hpp"
#include "secmkt/scenarios.hpp"
#include "secmkt/schedule_io.hpp"
#include "secmkt/sensitivity.hpp"

#ifndef SECMKT_VERSION
#define SECMKT_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace secmkt;

namespace {

struct RunConfig {
    std::string case_path;
    std::string model = "escuc";
    std::string objective = "expected";
    int horizon = 0;  // 0: case horizon
    double eta = kDefaultEta;
    double gap = 0.0;
    int seed = 0;
    int threads = 1;
    std::string scenarios = "subset";
    int subset_lines = 20;
    std::string out = "out";
    double time_limit = 0.0;  // 0: none
    double feasibility_tol = 1e-6;
    std::string schedule;     // optional input schedule
    std::string rule;         // settle: da_lmp | slmp, default per model
    bool settle_corrected = false;
    bool dual_check = true;
    std::vector<double> sigmas{0.2};
    std::size_t cases = 2000;
    int pool = 10;
    double window_low = 0.944;
    double window_high = 0.948;
    std::uint64_t perturb_seed = 1;
};

ScenarioSet scenario_policy(const Network& net, const SensitivityFactors& sens, const RunConfig& cfg) {
    ScenarioSet full = make_scenario_set(net);
    if (cfg.scenarios == "full") return full;
    return select_line_subset(net, sens, full, static_cast<std::size_t>(cfg.subset_lines));
}

Network load_network(const RunConfig& cfg) {
    Network net = load_case(cfg.case_path);
    return cfg.horizon > 0 ? net.with_horizon(cfg.horizon) : net;
}

struct Context {
    explicit Context(const RunConfig& cfg)
        : net(load_network(cfg)), sens(net), scenarios(scenario_policy(net, sens, cfg)) {
        scenarios.validate(net);
    }

    Network net;
    SensitivityFactors sens;
    ScenarioSet scenarios;
};

SolverOptions solver_options(const RunConfig& cfg) {
    SolverOptions o;
    o.rel_gap = cfg.gap;
    o.seed = cfg.seed;
    o.feasibility_tol = cfg.feasibility_tol;
    if (cfg.time_limit > 0.0) o.time_limit = cfg.time_limit;
    return o;
}

StudyOptions study_options(const RunConfig& cfg) {
    StudyOptions o;
    o.solver = solver_options(cfg);
    o.eta = cfg.eta;
    o.threads = cfg.threads;
    o.check_dual_stability = cfg.dual_check;
    return o;
}

MarketModel build_model(const Context& ctx, const RunConfig& cfg) {
    switch (parse_model_kind(cfg.model)) {
        case ModelKind::prxy: return build_scuc_prxy(ctx.net, ctx.sens, cfg.eta);
        case ModelKind::lodf: return build_scuc_lodf(ctx.net, ctx.sens, cfg.eta);
        case ModelKind::escuc: return build_escuc(ctx.net, ctx.sens, ctx.scenarios, parse_objective_mode(cfg.objective));
    }
    throw DomainError("unknown model");
}

struct Solved {
    MarketModel model;
    MipSolution mip;
    Schedule schedule;
};

Solved solve(const Context& ctx, const RunConfig& cfg) {
    auto model = build_model(ctx, cfg);
    auto mip = solve_mip(model.lp, solver_options(cfg));
    auto schedule = decode_schedule(model, mip.x, &ctx.sens);
    return {std::move(model), std::move(mip), std::move(schedule)};
}

Schedule input_schedule(const Context& ctx, const RunConfig& cfg) {
    if (!cfg.schedule.empty()) return read_schedule_csv(ctx.net, cfg.schedule);
    return solve(ctx, cfg).schedule;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Run {
public:
    Run(std::string command, const RunConfig& cfg, const CLI::App& app, std::vector<std::string> argv)
        : command_(std::move(command)), argv_(std::move(argv)), cfg_(cfg), config_text_(app.config_to_str(false, false)) {
        fs::create_directories(cfg.out);
    }

    fs::path path(const std::string& name) {
        outputs_.push_back(name);
        return fs::path(cfg_.out) / name;
    }

    void note(const std::string& key, nlohmann::json value) { notes_[key] = std::move(value); }

    void write_manifest() const {
        nlohmann::json m;
        m["command"] = command_;
        m["argv"] = argv_;
        m["version"] = SECMKT_VERSION;
        m["timestamp_utc"] = utc_timestamp();
        m["case"] = cfg_.case_path;
        m["config"] = {{"model", cfg_.model},
                       {"objective", cfg_.objective},
                       {"horizon", cfg_.horizon},
                       {"eta", cfg_.eta},
                       {"gap", cfg_.gap},
                       {"seed", cfg_.seed},
                       {"threads", cfg_.threads},
                       {"scenarios", cfg_.scenarios},
                       {"subset_lines", cfg_.subset_lines},
                       {"time_limit", cfg_.time_limit},
                       {"schedule", cfg_.schedule}};
        m["tolerances"] = {{"feasibility", cfg_.feasibility_tol},
                           {"violation", kViolationTolerance},
                           {"tie", kTieTolerance},
                           {"dual_stability", kDualStabilityThreshold}};
        const char* backend = std::getenv("SECMKT_SOLVER");
        m["solver"] = backend ? backend : "highs";
        m["rerun_config"] = config_text_;
        m["outputs"] = outputs_;
        if (!notes_.empty()) m["results"] = notes_;
        std::ofstream f(fs::path(cfg_.out) / "manifest.json");
        if (!f) throw Error("cannot write manifest to " + cfg_.out);
        f << m.dump(2) << '\n';
    }

private:
    std::string command_;
    std::vector<std::string> argv_;
    const RunConfig& cfg_;
    std::string config_text_;
    std::vector<std::string> outputs_;
    nlohmann::json notes_ = nlohmann::json::object();
};

std::string sigma_tag(double sigma) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "sigma%.2f_", sigma);
    return buf;
}

void cmd_solve(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto s = solve(ctx, cfg);
    write_schedule_csv(s.schedule, ctx.net, run.path("schedule.csv"));
    write_costs_csv(evaluate_costs(ctx.net, s.schedule), ctx.scenarios, run.path("costs.csv"));
    write_model_statistics(s.model.lp, run.path("model_stats.csv"));
    run.note("objective", s.mip.objective);
    run.note("mip_gap", s.mip.gap);
    std::cout << s.model.label() << ": objective " << fmt_num(s.mip.objective) << ", gap " << fmt_num(s.mip.gap) << '\n';
}

void cmd_omc(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto da = input_schedule(ctx, cfg);
    try {
        const auto r = run_omc(ctx.net, ctx.sens, ctx.scenarios, da, solver_options(cfg));
        write_omc_csv(r, ctx.net, run.path("omc.csv"));
        write_schedule_csv(r.corrected, ctx.net, run.path("schedule_corrected.csv"));
        run.note("final_cost", r.final_cost);
        run.note("omc_cost", r.omc_cost);
        std::cout << "omc cost " << fmt_num(r.omc_cost) << ", final cost " << fmt_num(r.final_cost) << ", "
                  << r.newly_committed.size() << " unit-hours committed\n";
    } catch (const OmcInfeasible& e) {
        for (const auto& label : e.violating_scenarios()) std::cerr << "  violated: " << label << '\n';
        throw;
    }
}

struct Priced {
    Solved solved;
    LpSolution lp;
    PriceSurface prices;
};

Priced price(const Context& ctx, const RunConfig& cfg) {
    auto s = solve(ctx, cfg);
    auto lp = fix_and_resolve(s.model.lp, s.mip, solver_options(cfg));
    auto prices = extract_prices(s.model, lp);
    s.schedule = decode_schedule(s.model, lp.x, &ctx.sens);
    return {std::move(s), std::move(lp), std::move(prices)};
}

void cmd_price(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto p = price(ctx, cfg);
    write_prices_csv(p.prices, ctx.net, run.path("prices.csv"));
    if (p.solved.model.kind == ModelKind::escuc) {
        write_price_components_csv(p.prices, ctx.net, ctx.scenarios, run.path("price_components.csv"));
        const double residual = verify_slmp_identity(p.prices);
        run.note("slmp_residual", residual);
        std::cout << "slmp identity residual " << residual << '\n';
    }
    run.note("objective_drift", p.lp.objective_drift());
}

void cmd_settle(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto p = price(ctx, cfg);
    const bool escuc = p.solved.model.kind == ModelKind::escuc;
    PricingRule rule = escuc ? PricingRule::slmp : PricingRule::da_lmp;
    if (cfg.rule == "slmp") rule = PricingRule::slmp;
    if (cfg.rule == "da_lmp") rule = PricingRule::da_lmp;
    if (rule == PricingRule::slmp && !escuc) throw DomainError("slmp settlement needs the escuc model");
    Schedule settled = p.solved.schedule;
    if (cfg.settle_corrected && !escuc)
        settled = run_omc(ctx.net, ctx.sens, ctx.scenarios, p.solved.schedule, solver_options(cfg)).corrected;
    auto report = settle(p.prices, settled, ctx.net, rule);
    if (cfg.dual_check) report.stability = dual_stability(p.solved.model, p.solved.mip, ctx.net, rule, solver_options(cfg));
    write_settlement_csv(report, ctx.net, run.path("settlement.csv"));
    run.note("load_payment", report.load_payment);
    run.note("congestion_rent", report.congestion_rent);
    run.note("balance_residual", report.balance_residual());
    if (report.stability) {
        run.note("dual_stable", report.stability->stable);
        if (!report.stability->stable)
            std::cerr << "warning: settlement differs by "
                      << 100.0 * report.stability->max_relative_revenue_difference
                      << "% between simplex variants; prices are degenerate\n";
    }
    std::cout << "load payment " << fmt_num(report.load_payment) << ", generator revenue "
              << fmt_num(report.generator_revenue_total) << ", congestion rent " << fmt_num(report.congestion_rent) << '\n';
}

void cmd_ca(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto da = input_schedule(ctx, cfg);
    const auto r = realized_cost(ctx.net, ctx.sens, da, ctx.scenarios, solver_options(cfg), cfg.threads);
    write_violation_csv(r, ctx.net, ctx.scenarios, run.path("violations.csv"));
    {
        CsvWriter w(run.path("realized.csv"));
        w.header({"scenario", "probability", "energy_cost"});
        for (std::size_t c = 0; c < ctx.scenarios.size(); ++c)
            w.cell(ctx.scenarios[c].label(ctx.net)).cell(ctx.scenarios[c].probability).cell(r.scenario_energy[c]).end_row();
        w.cell("realized_total").cell("").cell(r.realized_total).end_row();
    }
    run.note("max_violation", r.max_violation());
    run.note("realized_total", r.realized_total);
    std::cout << "max violation " << fmt_num(r.max_violation()) << " MW, realized cost " << fmt_num(r.realized_total) << '\n';
}

void cmd_export_mps(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto model = build_model(ctx, cfg);
    write_mps(model.lp, run.path("model.mps"), model.label());
    write_model_statistics(model.lp, run.path("model_stats.csv"));
}

void cmd_study_pricing(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto report = run_pricing_study(ctx.net, ctx.sens, ctx.scenarios, study_options(cfg));
    for (const char* name : {"final_costs.csv", "prices.csv", "settlements.csv", "price_components.csv"}) run.path(name);
    for (const auto& m : report.models) {
        run.path("settlement_" + m.label + ".csv");
        if (m.omc) run.path("omc_" + m.label + ".csv");
        run.note(m.label + "_final_cost", m.final_cost);
        std::cout << m.label << ": final cost " << fmt_num(m.final_cost) << '\n';
    }
    write_pricing_study(report, ctx.net, ctx.scenarios, cfg.out);
}

void cmd_study_realized(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto report = run_realized_cost_study(ctx.net, ctx.sens, ctx.scenarios, study_options(cfg));
    for (const char* name : {"realized_costs.csv", "violations_escuc-expected.csv", "violations_escuc-base.csv"})
        run.path(name);
    write_realized_study(report, ctx.net, ctx.scenarios, cfg.out);
    run.note("expected_mode_realized", report.expected_mode.realized_cost(ctx.scenarios));
    run.note("base_mode_realized", report.base_mode.realized_cost(ctx.scenarios));
}

void write_pool_members(const PoolEvaluation& pool, const ScenarioSet& sc, CsvWriter& w, const char* mode) {
    for (std::size_t i = 0; i < pool.members.size(); ++i) {
        const auto& m = pool.members[i];
        w.cell(mode)
            .cell(i + 1)
            .cell(pool.objectives[i])
            .cell(m.base_cost())
            .cell(m.expected_cost(sc))
            .cell(m.scenario_cost(sc))
            .cell(m.realized_cost(sc))
            .cell(m.max_violation)
            .end_row();
    }
}

void cmd_study_perturb(const RunConfig& cfg, Run& run) {
    const Context ctx(cfg);
    const auto opts = study_options(cfg);
    const auto base = build_pool(ctx.net, ctx.sens, ctx.scenarios, ObjectiveMode::base, cfg.pool, opts);
    const auto expected = build_pool(ctx.net, ctx.sens, ctx.scenarios, ObjectiveMode::expected, cfg.pool, opts);
    if (base.shortfall || expected.shortfall)
        std::cerr << "warning: solution pool shortfall (base " << base.members.size() << ", expected "
                  << expected.members.size() << " of " << cfg.pool << ")\n";
    {
        CsvWriter w(run.path("pool_members.csv"));
        w.header({"mode", "member", "objective", "base_cost", "expected_cost", "scenario_cost", "realized_cost",
                  "max_violation"});
        write_pool_members(base, ctx.scenarios, w, "base");
        write_pool_members(expected, ctx.scenarios, w, "expected");
    }
    const auto nominal = compare_pairs(cost_table(base, ctx.scenarios), cost_table(expected, ctx.scenarios));
    write_pair_report(nominal, cfg.out, "");
    run.path("pairs.csv");

    std::vector<PerturbationStudyReport> table;
    for (double sigma : cfg.sigmas) {
        PerturbationConfig pc;
        pc.sigma = sigma;
        pc.n_cases = cfg.cases;
        pc.window_low = cfg.window_low;
        pc.window_high = cfg.window_high;
        pc.seed = cfg.perturb_seed;
        auto rep = run_perturbation_study(base, expected, ctx.scenarios, pc, cfg.threads);
        std::cerr << "sigma " << sigma << ": " << rep.rejected << " draws rejected\n";
        write_pair_report(rep.pairs, cfg.out, sigma_tag(sigma));
        run.path(sigma_tag(sigma) + "pairs.csv");
        std::cout << "sigma " << fmt_num(sigma) << ": base-mode lower expected cost in "
                  << fmt_num(rep.pairs.pct_lower_expected_cost) << "% of " << rep.pairs.n_pairs << " pairs\n";
        table.push_back(std::move(rep));
    }
    write_perturbation_table(table, run.path("perturbation.csv"));
}

void add_common(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--case", cfg.case_path, "Case file (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--horizon", cfg.horizon, "Keep only the first N periods (0: all)")->check(CLI::NonNegativeNumber);
    sub->add_option("--eta", cfg.eta, "Proxy reserve fraction of load")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--gap", cfg.gap, "Relative MIP gap")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", cfg.seed, "Solver random seed");
    sub->add_option("--threads", cfg.threads, "Worker threads for independent solves")->check(CLI::PositiveNumber);
    sub->add_option("--scenarios", cfg.scenarios, "Contingency set")->check(CLI::IsMember({"full", "subset"}));
    sub->add_option("--subset-lines", cfg.subset_lines, "Line outages kept by the subset policy")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--time-limit", cfg.time_limit, "Solver time limit in seconds (0: none)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--feasibility-tol", cfg.feasibility_tol, "Primal feasibility tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out, "Output directory");
}

void add_model(CLI::App* sub, RunConfig& cfg) {
    sub->add_option("--model", cfg.model, "Market model")->check(CLI::IsMember({"prxy", "lodf", "escuc"}));
    sub->add_option("--objective", cfg.objective, "Scenario model objective")
        ->check(CLI::IsMember({"expected", "base"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Security-constrained market clearing, pricing and contingency studies"};
    app.set_config("--config", "", "TOML/INI file with option values");
    app.set_version_flag("--version", SECMKT_VERSION);
    app.require_subcommand(1);

    RunConfig cfg;
    std::string command;
    std::function<void(const RunConfig&, Run&)> action;
    auto bind = [&](CLI::App* sub, std::string name, void (*fn)(const RunConfig&, Run&)) {
        sub->callback([&, name, fn] {
            command = name;
            action = fn;
        });
    };

    auto* solve_cmd = app.add_subcommand("solve", "Solve a market model and write its schedule and costs");
    add_common(solve_cmd, cfg);
    add_model(solve_cmd, cfg);
    bind(solve_cmd, "solve", cmd_solve);

    auto* omc_cmd = app.add_subcommand("omc", "Apply out-of-market corrections to a day-ahead schedule");
    add_common(omc_cmd, cfg);
    add_model(omc_cmd, cfg);
    omc_cmd->add_option("--schedule", cfg.schedule, "Schedule CSV to correct instead of solving --model")
        ->check(CLI::ExistingFile);
    bind(omc_cmd, "omc", cmd_omc);

    auto* price_cmd = app.add_subcommand("price", "Solve, fix commitments and extract nodal prices");
    add_common(price_cmd, cfg);
    add_model(price_cmd, cfg);
    bind(price_cmd, "price", cmd_price);

    auto* settle_cmd = app.add_subcommand("settle", "Price a model and settle its energy schedule");
    add_common(settle_cmd, cfg);
    add_model(settle_cmd, cfg);
    settle_cmd->add_option("--rule", cfg.rule, "Pricing rule (default: slmp for escuc, da_lmp otherwise)")
        ->check(CLI::IsMember({"da_lmp", "slmp"}));
    settle_cmd->add_flag("--corrected", cfg.settle_corrected, "Settle the OMC-corrected schedule");
    settle_cmd->add_flag("!--no-dual-check", cfg.dual_check, "Skip the dual-stability re-solve");
    bind(settle_cmd, "settle", cmd_settle);

    auto* ca_cmd = app.add_subcommand("ca", "Contingency analysis of a schedule for every scenario and hour");
    add_common(ca_cmd, cfg);
    add_model(ca_cmd, cfg);
    ca_cmd->add_option("--schedule", cfg.schedule, "Schedule CSV to analyze instead of solving --model")
        ->check(CLI::ExistingFile);
    bind(ca_cmd, "ca", cmd_ca);

    auto* mps_cmd = app.add_subcommand("export-mps", "Write the model in MPS format");
    add_common(mps_cmd, cfg);
    add_model(mps_cmd, cfg);
    bind(mps_cmd, "export-mps", cmd_export_mps);

    auto* study = app.add_subcommand("study", "Run a comparative study");
    study->require_subcommand(1);
    auto* pricing = study->add_subcommand("pricing", "Price and settle all market models");
    add_common(pricing, cfg);
    pricing->add_flag("!--no-dual-check", cfg.dual_check, "Skip the dual-stability re-solves");
    bind(pricing, "study pricing", cmd_study_pricing);

    auto* realized = study->add_subcommand("realized", "Realized N-1 cost of both scenario-model objectives");
    add_common(realized, cfg);
    bind(realized, "study realized", cmd_study_realized);

    auto* perturb = study->add_subcommand("perturb", "Solution pools re-priced under perturbed probabilities");
    add_common(perturb, cfg);
    perturb->add_option("--sigma", cfg.sigmas, "Relative standard deviations")
        ->check(CLI::NonNegativeNumber)
        ->delimiter(',');
    perturb->add_option("--cases", cfg.cases, "Accepted cases per sigma")->check(CLI::PositiveNumber);
    perturb->add_option("--pool", cfg.pool, "Solutions per pool")->check(CLI::PositiveNumber);
    perturb->add_option("--window-low", cfg.window_low, "Lower bound on the base-case probability");
    perturb->add_option("--window-high", cfg.window_high, "Upper bound on the base-case probability");
    perturb->add_option("--perturb-seed", cfg.perturb_seed, "Seed of the probability draws");
    bind(perturb, "study perturb", cmd_study_perturb);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (!action) return 2;

    try {
        Run run(command, cfg, app, std::vector<std::string>(argv, argv + argc));
        action(cfg, run);
        run.write_manifest();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
