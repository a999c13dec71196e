#include "secmkt/contingency.hpp"

#include <algorithm>
#include <cmath>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"
#include "secmkt/parallel.hpp"
#include "secmkt/sensitivity.hpp"

namespace secmkt {

namespace {

using I = std::int32_t;

}  // namespace

ContingencyResult analyze(const Network& net, const SensitivityFactors& sens, const Schedule& da,
                          const Scenario& scenario, int t, const SolverOptions& options) {
    if (t < 0 || t >= da.horizon) throw DomainError("period outside the schedule horizon");
    const auto tt = static_cast<std::size_t>(t);
    const auto G = net.num_generators(), N = net.num_buses(), L = net.num_lines();

    LinearModel lp;
    const auto fp = lp.family("p"), fsh = lp.family("shed"), fsu = lp.family("surplus"), fi = lp.family("pinj");
    std::vector<int> p(G), shed(N), surplus(N), inj(N);
    for (std::size_t g = 0; g < G; ++g) {
        const auto& gen = net.generators[g];
        const double on = (da.committed(g, t) && scenario.generator_in_service(g)) ? 1.0 : 0.0;
        const double p0 = da.p_base[g][tt], r0 = da.reserve[g][tt];
        const double hi = on * std::min(p0 + r0, gen.p_max);
        const double lo = std::min(on * std::max(p0 - r0, gen.p_min), hi);
        p[g] = lp.add_variable(Tag{fp, static_cast<I>(g)}, lo, hi);
    }
    for (std::size_t n = 0; n < N; ++n) {
        shed[n] = lp.add_variable(Tag{fsh, static_cast<I>(n)}, 0.0, kInf, 1.0);
        surplus[n] = lp.add_variable(Tag{fsu, static_cast<I>(n)}, 0.0, kInf, 1.0);
        inj[n] = lp.add_variable(Tag{fi, static_cast<I>(n)}, -kInf, kInf);
    }

    // Nodal balance with violation slacks; `shed` adds injection to cover unserved load.
    const auto fb = lp.family("node_balance");
    std::vector<Term> terms;
    for (std::size_t n = 0; n < N; ++n) {
        terms.clear();
        for (std::size_t g = 0; g < G; ++g)
            if (net.generator_bus(g) == n) terms.push_back({p[g], 1.0});
        terms.push_back({inj[n], -1.0});
        terms.push_back({shed[n], 1.0});
        terms.push_back({surplus[n], -1.0});
        lp.add_constraint(Tag{fb, static_cast<I>(n)}, terms, Sense::equal, net.load_profile.at(n, t));
    }
    terms.clear();
    for (std::size_t n = 0; n < N; ++n) terms.push_back({inj[n], 1.0});
    lp.add_constraint(Tag{lp.family("system_balance")}, terms, Sense::equal, 0.0);

    const bool line_out = scenario.kind == ScenarioKind::line_outage;
    const bool contingency = scenario.kind != ScenarioKind::base;
    const auto& ptdf = line_out ? sens.ptdf_post(static_cast<std::size_t>(scenario.element)) : sens.ptdf_base();
    const auto fmax = lp.family("line_max"), fmin = lp.family("line_min");
    for (std::size_t k = 0; k < L; ++k) {
        if (!scenario.line_in_service(k)) continue;
        const double limit = contingency ? net.lines[k].rating_emergency : net.lines[k].rating_normal;
        terms.clear();
        for (std::size_t n = 0; n < N; ++n) {
            const double f = ptdf(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
            if (std::abs(f) > kSensitivityZero) terms.push_back({inj[n], f});
        }
        lp.add_constraint(Tag{fmax, static_cast<I>(k)}, terms, Sense::less_equal, limit);
        lp.add_constraint(Tag{fmin, static_cast<I>(k)}, terms, Sense::greater_equal, -limit);
    }

    const auto first = solve_mip(lp, options);
    const double best = std::max(0.0, first.objective);

    // Cheapest dispatch among the minimum-violation ones.
    terms.clear();
    for (std::size_t n = 0; n < N; ++n) {
        terms.push_back({shed[n], 1.0});
        terms.push_back({surplus[n], 1.0});
        lp.set_cost(shed[n], 0.0);
        lp.set_cost(surplus[n], 0.0);
    }
    lp.add_constraint(Tag{lp.family("violation_cap")}, terms, Sense::less_equal, best + 1e-7 * std::max(1.0, best));
    for (std::size_t g = 0; g < G; ++g) lp.set_cost(p[g], net.generators[g].cost_energy);
    const auto second = solve_mip(lp, options);

    ContingencyResult out;
    out.period = t;
    out.violation = best;
    out.dispatch.resize(G);
    out.load_shed.resize(N);
    out.load_surplus.resize(N);
    for (std::size_t g = 0; g < G; ++g) {
        out.dispatch[g] = second.x[static_cast<std::size_t>(p[g])];
        out.energy_cost += net.generators[g].cost_energy * out.dispatch[g];
    }
    for (std::size_t n = 0; n < N; ++n) {
        out.load_shed[n] = std::max(0.0, second.x[static_cast<std::size_t>(shed[n])]);
        out.load_surplus[n] = std::max(0.0, second.x[static_cast<std::size_t>(surplus[n])]);
    }
    return out;
}

double RealizedCostReport::max_violation() const {
    double worst = 0.0;
    for (const auto& row : violation)
        for (double v : row) worst = std::max(worst, v);
    return worst;
}

RealizedCostReport realized_cost(const Network& net, const SensitivityFactors& sens, const Schedule& da,
                                 const ScenarioSet& scenarios, const SolverOptions& options, int threads) {
    const auto C = scenarios.size();
    const auto T = static_cast<std::size_t>(da.horizon);
    std::vector<ContingencyResult> grid(C * T);
    parallel_for(C * T, threads, [&](std::size_t i) {
        const auto c = i / T;
        grid[i] = analyze(net, sens, da, scenarios[c], static_cast<int>(i % T), options);
        grid[i].scenario = c;
    });

    const auto costs = evaluate_costs(net, da);
    RealizedCostReport rep;
    rep.commitment_cost = costs.commitment();
    rep.base_energy_cost = scenarios.base_probability() * costs.base_energy;
    rep.scenario_energy.assign(C, 0.0);
    rep.scenario_energy[0] = costs.base_energy;
    rep.violation.assign(C, std::vector<double>(T, 0.0));
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t t = 0; t < T; ++t) {
            const auto& r = grid[c * T + t];
            rep.violation[c][t] = r.violation;
            if (c > 0) rep.scenario_energy[c] += r.energy_cost;
        }
    for (std::size_t c = 1; c < C; ++c) rep.scenario_energy_cost += scenarios[c].probability * rep.scenario_energy[c];
    rep.realized_total = rep.commitment_cost + rep.base_energy_cost + rep.scenario_energy_cost;
    return rep;
}

void write_violation_csv(const RealizedCostReport& report, const Network& net, const ScenarioSet& scenarios,
                         const std::filesystem::path& path) {
    CsvWriter w(path);
    std::vector<std::string> header{"scenario"};
    const auto T = report.violation.empty() ? 0 : report.violation.front().size();
    for (std::size_t t = 0; t < T; ++t) header.push_back("h" + std::to_string(t + 1));
    w.header(header);
    for (std::size_t c = 0; c < report.violation.size(); ++c) {
        w.cell(scenarios[c].label(net));
        for (double v : report.violation[c]) w.cell(v);
        w.end_row();
    }
}

}  // namespace secmkt
