#include "secmkt/pricing.hpp"

#include <algorithm>
#include <cmath>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"

namespace secmkt {

PriceSurface extract_prices(const MarketModel& model, const LpSolution& lp) {
    const auto& m = model.lp;
    if (lp.row_dual.size() != m.num_constraints()) throw DomainError("LP solution carries no duals for this model");
    const auto N = model.num_buses;
    const auto T = static_cast<std::size_t>(model.horizon);

    PriceSurface out;
    out.kind = model.kind;
    out.horizon = model.horizon;
    out.lambda.assign(model.scenarios.size(), Grid(N, std::vector<double>(T, 0.0)));
    out.slmp.assign(N, std::vector<double>(T, 0.0));

    const auto balance = m.find_family(family::node_balance);
    const auto fix = m.find_family(family::demand_fix);
    if (!balance) throw DomainError("model has no nodal balance rows");
    for (std::size_t r = 0; r < m.num_constraints(); ++r) {
        const auto& tag = m.constraint_tag(static_cast<int>(r));
        if (tag.family == *balance) {
            out.lambda[static_cast<std::size_t>(tag.j)][static_cast<std::size_t>(tag.i)][static_cast<std::size_t>(tag.k)] =
                lp.row_dual[r];
        } else if (fix && tag.family == *fix) {
            out.slmp[static_cast<std::size_t>(tag.i)][static_cast<std::size_t>(tag.j)] = lp.row_dual[r];
        }
    }
    if (!fix) out.slmp = out.lambda[0];
    return out;
}

double verify_slmp_identity(const PriceSurface& prices) {
    double worst = 0.0;
    for (std::size_t n = 0; n < prices.slmp.size(); ++n)
        for (std::size_t t = 0; t < prices.slmp[n].size(); ++t) {
            double sum = 0.0;
            for (const auto& scenario : prices.lambda) sum += scenario[n][t];
            worst = std::max(worst, std::abs(prices.slmp[n][t] - sum));
        }
    return worst;
}

const char* to_string(PricingRule rule) { return rule == PricingRule::slmp ? "slmp" : "da-lmp"; }

double SettlementReport::balance_residual() const {
    return std::abs(load_payment - generator_revenue_total - congestion_rent) / std::max(1.0, std::abs(load_payment));
}

SettlementReport settle(const PriceSurface& prices, const Schedule& schedule, const Network& net, PricingRule rule) {
    if (prices.horizon != schedule.horizon || prices.horizon != net.horizon())
        throw DomainError("prices, schedule and network cover different horizons");
    const Grid& price = rule == PricingRule::slmp ? prices.slmp : prices.lambda.at(0);
    const auto T = static_cast<std::size_t>(schedule.horizon);

    SettlementReport rep;
    rep.rule = rule;
    const auto G = net.num_generators();
    rep.generator_energy.assign(G, 0.0);
    rep.generator_revenue.assign(G, 0.0);
    rep.generator_cost.assign(G, 0.0);
    rep.generator_rent.assign(G, 0.0);
    for (std::size_t g = 0; g < G; ++g) {
        const auto n = net.generator_bus(g);
        for (std::size_t t = 0; t < T; ++t) {
            const double p = schedule.p_base[g][t];
            rep.generator_energy[g] += p;
            rep.generator_revenue[g] += price[n][t] * p;
            rep.generator_cost[g] += net.generators[g].cost_energy * p;
        }
        rep.generator_rent[g] = rep.generator_revenue[g] - rep.generator_cost[g];
        rep.generator_revenue_total += rep.generator_revenue[g];
        rep.generation_rent_total += rep.generator_rent[g];
    }
    rep.bus_load_payment.assign(net.num_buses(), 0.0);
    // Rent is summed per bus and period over net withdrawal, so a uniform price cancels exactly.
    std::vector<std::vector<double>> withdrawal(net.num_buses(), std::vector<double>(T, 0.0));
    for (std::size_t n = 0; n < net.num_buses(); ++n)
        for (std::size_t t = 0; t < T; ++t) withdrawal[n][t] = net.load_profile.at(n, static_cast<int>(t));
    for (std::size_t g = 0; g < G; ++g)
        for (std::size_t t = 0; t < T; ++t) withdrawal[net.generator_bus(g)][t] -= schedule.p_base[g][t];
    for (std::size_t t = 0; t < T; ++t) {
        double system_withdrawal = 0.0;
        bool uniform = true;
        for (std::size_t n = 0; n < net.num_buses(); ++n) {
            system_withdrawal += withdrawal[n][t];
            uniform = uniform && price[n][t] == price[0][t];
        }
        if (uniform) {
            rep.congestion_rent += price[0][t] * system_withdrawal;
        } else {
            for (std::size_t n = 0; n < net.num_buses(); ++n) rep.congestion_rent += price[n][t] * withdrawal[n][t];
        }
    }
    for (std::size_t n = 0; n < net.num_buses(); ++n) {
        for (std::size_t t = 0; t < T; ++t)
            rep.bus_load_payment[n] += price[n][t] * net.load_profile.at(n, static_cast<int>(t));
        rep.load_payment += rep.bus_load_payment[n];
    }
    return rep;
}

DualStability dual_stability(const MarketModel& model, const MipSolution& incumbent, const Network& net,
                             PricingRule rule, const SolverOptions& options) {
    const auto a = fix_and_resolve(model.lp, incumbent, options, LpAlgorithm::dual_simplex);
    const auto b = fix_and_resolve(model.lp, incumbent, options, LpAlgorithm::primal_simplex);
    const auto pa = extract_prices(model, a), pb = extract_prices(model, b);
    const auto sa = settle(pa, decode_schedule(model, a.x), net, rule);
    const auto sb = settle(pb, decode_schedule(model, b.x), net, rule);

    DualStability out;
    const Grid& ga = rule == PricingRule::slmp ? pa.slmp : pa.lambda[0];
    const Grid& gb = rule == PricingRule::slmp ? pb.slmp : pb.lambda[0];
    for (std::size_t n = 0; n < ga.size(); ++n)
        for (std::size_t t = 0; t < ga[n].size(); ++t)
            out.max_price_difference = std::max(out.max_price_difference, std::abs(ga[n][t] - gb[n][t]));
    const double scale = std::max(1.0, std::abs(sa.load_payment));
    auto rel = [scale](double x, double y) { return std::abs(x - y) / scale; };
    out.max_relative_revenue_difference = rel(sa.load_payment, sb.load_payment);
    for (std::size_t g = 0; g < sa.generator_revenue.size(); ++g)
        out.max_relative_revenue_difference =
            std::max(out.max_relative_revenue_difference, rel(sa.generator_revenue[g], sb.generator_revenue[g]));
    out.stable = out.max_relative_revenue_difference <= kDualStabilityThreshold;
    return out;
}

void write_prices_csv(const PriceSurface& prices, const Network& net, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"bus", "hour", "lmp", "slmp"});
    for (std::size_t n = 0; n < net.num_buses(); ++n)
        for (int t = 0; t < prices.horizon; ++t) {
            const auto tt = static_cast<std::size_t>(t);
            w.cell(net.buses[n].id).cell(t + 1).cell(prices.lambda[0][n][tt]).cell(prices.slmp[n][tt]).end_row();
        }
}

void write_price_components_csv(const PriceSurface& prices, const Network& net, const ScenarioSet& scenarios,
                                const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"bus", "hour", "scenario", "lambda"});
    for (std::size_t n = 0; n < net.num_buses(); ++n)
        for (int t = 0; t < prices.horizon; ++t)
            for (std::size_t c = 0; c < prices.lambda.size(); ++c)
                w.cell(net.buses[n].id)
                    .cell(t + 1)
                    .cell(scenarios[c].label(net))
                    .cell(prices.lambda[c][n][static_cast<std::size_t>(t)])
                    .end_row();
}

void write_settlement_csv(const SettlementReport& rep, const Network& net, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"kind", "id", "energy_mwh", "revenue", "variable_cost", "rent", "load_payment", "congestion_rent"});
    double energy = 0.0, cost = 0.0;
    for (std::size_t g = 0; g < net.num_generators(); ++g) {
        w.cell("generator").cell(net.generators[g].id).cell(rep.generator_energy[g]).cell(rep.generator_revenue[g]);
        w.cell(rep.generator_cost[g]).cell(rep.generator_rent[g]).cell(0.0).cell(0.0).end_row();
        energy += rep.generator_energy[g];
        cost += rep.generator_cost[g];
    }
    for (std::size_t n = 0; n < net.num_buses(); ++n) {
        w.cell("bus").cell(net.buses[n].id).cell(0.0).cell(0.0).cell(0.0).cell(0.0);
        w.cell(rep.bus_load_payment[n]).cell(0.0).end_row();
    }
    w.cell("system").cell("total").cell(energy).cell(rep.generator_revenue_total).cell(cost);
    w.cell(rep.generation_rent_total).cell(rep.load_payment).cell(rep.congestion_rent).end_row();
}

}  // namespace secmkt
