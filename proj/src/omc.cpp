#include "secmkt/omc.hpp"

#include <algorithm>
#include <cmath>

#include "secmkt/contingency.hpp"
#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"

namespace secmkt {

OmcResult run_omc(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios, const Schedule& da,
                  const SolverOptions& options) {
    if (da.horizon != net.horizon()) throw DomainError("schedule horizon differs from the network horizon");
    auto model = build_escuc(net, sens, scenarios, ObjectiveMode::base);
    auto& lp = model.lp;
    const auto fu = *lp.find_family(family::u);
    const auto fp = *lp.find_family(family::p);
    for (std::size_t var = 0; var < lp.num_variables(); ++var) {
        const int v = static_cast<int>(var);
        const auto& tag = lp.variable_tag(v);
        if (tag.family == fu) {
            const auto g = static_cast<std::size_t>(tag.i);
            if (da.committed(g, tag.j)) lp.set_bounds(v, 1.0, 1.0);
        } else if (tag.family == fp && tag.j == 0) {
            const auto g = static_cast<std::size_t>(tag.i);
            const auto t = static_cast<std::size_t>(tag.k);
            if (!da.committed(g, tag.k)) continue;
            const double p0 = da.p_base[g][t];
            const double r10 = net.generators[g].ramp_10min;
            const double lo = std::max(lp.lower(v), p0 - r10);
            const double hi = std::min(lp.upper(v), p0 + r10);
            lp.set_bounds(v, std::min(lo, hi), hi);
        }
    }

    MipSolution sol;
    try {
        sol = solve_mip(lp, options);
    } catch (const SolverError& e) {
        if (e.status() != SolveStatus::infeasible) throw;
        std::vector<std::string> violating;
        for (std::size_t c = 0; c < scenarios.size(); ++c) {
            for (int t = 0; t < da.horizon; ++t) {
                if (analyze(net, sens, da, scenarios[c], t, options).violation > kViolationTolerance) {
                    violating.push_back(scenarios[c].label(net));
                    break;
                }
            }
        }
        throw OmcInfeasible("out-of-market correction infeasible under the commitment and ramp restrictions",
                            std::move(violating));
    }

    OmcResult out;
    out.corrected = decode_schedule(model, sol.x);
    out.da_cost = evaluate_costs(net, da).base_cost();
    out.final_cost = evaluate_costs(net, out.corrected).base_cost();
    out.omc_cost = out.final_cost - out.da_cost;
    for (std::size_t g = 0; g < net.num_generators(); ++g)
        for (int t = 0; t < da.horizon; ++t)
            if (out.corrected.committed(g, t) && !da.committed(g, t)) out.newly_committed.emplace_back(g, t);
    out.dispatch_delta = out.corrected.p_base;
    for (std::size_t g = 0; g < net.num_generators(); ++g)
        for (std::size_t t = 0; t < static_cast<std::size_t>(da.horizon); ++t) out.dispatch_delta[g][t] -= da.p_base[g][t];
    return out;
}

void write_omc_csv(const OmcResult& result, const Network& net, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"item", "generator", "hour", "value"});
    w.cell("da_cost").cell("").cell("").cell(result.da_cost).end_row();
    w.cell("omc_cost").cell("").cell("").cell(result.omc_cost).end_row();
    w.cell("final_cost").cell("").cell("").cell(result.final_cost).end_row();
    for (const auto& [g, t] : result.newly_committed)
        w.cell("newly_committed").cell(net.generators[g].id).cell(t + 1).cell(1.0).end_row();
    for (std::size_t g = 0; g < result.dispatch_delta.size(); ++g)
        for (std::size_t t = 0; t < result.dispatch_delta[g].size(); ++t)
            if (std::abs(result.dispatch_delta[g][t]) > 5e-7)
                w.cell("dispatch_delta").cell(net.generators[g].id).cell(t + 1).cell(result.dispatch_delta[g][t]).end_row();
}

}  // namespace secmkt
