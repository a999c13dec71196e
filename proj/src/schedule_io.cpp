#include "secmkt/schedule_io.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"

namespace secmkt {

void write_schedule_csv(const Schedule& s, const Network& net, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"generator", "hour", "u", "v", "w", "p", "reserve"});
    for (std::size_t g = 0; g < net.num_generators(); ++g)
        for (std::size_t t = 0; t < static_cast<std::size_t>(s.horizon); ++t)
            w.cell(net.generators[g].id)
                .cell(static_cast<int>(t) + 1)
                .cell(s.u[g][t])
                .cell(s.v[g][t])
                .cell(s.w[g][t])
                .cell(s.p_base[g][t])
                .cell(s.reserve[g][t])
                .end_row();
}

Schedule read_schedule_csv(const Network& net, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open schedule " + path.string());
    const auto G = net.num_generators();
    const auto T = static_cast<std::size_t>(net.horizon());
    std::map<int, std::size_t> position;
    for (std::size_t g = 0; g < G; ++g) position[net.generators[g].id] = g;

    Schedule s;
    s.horizon = net.horizon();
    const Grid zero(G, std::vector<double>(T, 0.0));
    s.u = s.v = s.w = s.p_base = s.reserve = zero;
    std::vector<std::vector<bool>> seen(G, std::vector<bool>(T, false));

    std::string line;
    if (!std::getline(in, line) || line.rfind("generator,hour,u,v,w,p,reserve", 0) != 0)
        throw ParseError(path.string() + ": unexpected schedule header");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::vector<double> values;
        while (std::getline(ss, field, ',')) {
            try {
                values.push_back(std::stod(field));
            } catch (const std::exception&) {
                throw ParseError(path.string() + ":" + std::to_string(row) + ": bad number '" + field + "'");
            }
        }
        if (values.size() != 7) throw ParseError(path.string() + ":" + std::to_string(row) + ": expected 7 fields");
        const auto it = position.find(static_cast<int>(values[0]));
        if (it == position.end())
            throw ValidationError(path.string() + ":" + std::to_string(row) + ": unknown generator");
        const auto hour = static_cast<long>(values[1]);
        if (hour < 1 || hour > static_cast<long>(T))
            throw ValidationError(path.string() + ":" + std::to_string(row) + ": hour out of range");
        const auto g = it->second;
        const auto t = static_cast<std::size_t>(hour - 1);
        if (seen[g][t]) throw ValidationError(path.string() + ":" + std::to_string(row) + ": duplicate entry");
        seen[g][t] = true;
        s.u[g][t] = values[2];
        s.v[g][t] = values[3];
        s.w[g][t] = values[4];
        s.p_base[g][t] = values[5];
        s.reserve[g][t] = values[6];
    }
    for (std::size_t g = 0; g < G; ++g)
        for (std::size_t t = 0; t < T; ++t)
            if (!seen[g][t])
                throw ValidationError(path.string() + ": missing generator " + std::to_string(net.generators[g].id) +
                                      " hour " + std::to_string(t + 1));
    s.p_scenario = {s.p_base};
    return s;
}

void write_costs_csv(const CostBreakdown& costs, const ScenarioSet& scenarios, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"metric", "value"});
    w.cell("noload").cell(costs.noload).end_row();
    w.cell("startup").cell(costs.startup).end_row();
    w.cell("shutdown").cell(costs.shutdown).end_row();
    w.cell("commitment").cell(costs.commitment()).end_row();
    w.cell("base_energy").cell(costs.base_energy).end_row();
    w.cell("base_cost").cell(costs.base_cost()).end_row();
    if (!costs.scenario_energy.empty()) {
        w.cell("scenario_cost").cell(costs.scenario_cost(scenarios)).end_row();
        w.cell("expected_cost").cell(costs.expected_cost(scenarios)).end_row();
    }
}

}  // namespace secmkt
