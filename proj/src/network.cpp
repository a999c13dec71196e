#include "secmkt/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"

namespace secmkt {

using nlohmann::json;

double LoadProfile::system_load(int t) const {
    double total = 0.0;
    for (const auto& row : load) total += row[static_cast<std::size_t>(t)];
    return total;
}

void Network::reindex() {
    bus_lookup_.clear();
    bus_lookup_.reserve(buses.size());
    for (std::size_t i = 0; i < buses.size(); ++i) bus_lookup_.emplace_back(buses[i].id, i);
    std::sort(bus_lookup_.begin(), bus_lookup_.end());
}

std::size_t Network::bus_index(int bus_id) const {
    if (bus_lookup_.size() == buses.size()) {
        auto it = std::lower_bound(bus_lookup_.begin(), bus_lookup_.end(),
                                   std::pair<int, std::size_t>{bus_id, 0});
        if (it != bus_lookup_.end() && it->first == bus_id) return it->second;
    } else {
        for (std::size_t i = 0; i < buses.size(); ++i)
            if (buses[i].id == bus_id) return i;
    }
    throw DomainError("unknown bus id " + std::to_string(bus_id));
}

bool Network::operator==(const Network& other) const {
    return name == other.name && base_mva == other.base_mva &&
           reference_bus == other.reference_bus && buses == other.buses &&
           lines == other.lines && generators == other.generators &&
           load_profile == other.load_profile;
}

std::size_t Network::num_loaded_buses() const {
    std::size_t count = 0;
    for (const auto& row : load_profile.load)
        if (std::any_of(row.begin(), row.end(), [](double v) { return v > 0.0; })) ++count;
    return count;
}

Network Network::with_horizon(int periods) const {
    if (periods < 1 || periods > horizon())
        throw DomainError("horizon " + std::to_string(periods) + " outside [1, " +
                          std::to_string(horizon()) + "]");
    Network out = *this;
    out.load_profile.horizon = periods;
    for (auto& row : out.load_profile.load) row.resize(static_cast<std::size_t>(periods));
    return out;
}

Network Network::without_line(std::size_t k) const {
    Network out = *this;
    out.lines.erase(out.lines.begin() + static_cast<std::ptrdiff_t>(k));
    return out;
}

bool is_connected(const Network& net, std::ptrdiff_t skip_line) {
    const std::size_t n = net.num_buses();
    if (n == 0) return false;
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    std::size_t components = n;
    for (std::size_t k = 0; k < net.num_lines(); ++k) {
        if (static_cast<std::ptrdiff_t>(k) == skip_line) continue;
        auto a = find(net.line_from(k));
        auto b = find(net.line_to(k));
        if (a != b) {
            parent[a] = b;
            --components;
        }
    }
    return components == 1;
}

std::vector<bool> classify_lines(const Network& net) {
    // Bridge search on the multigraph: the DFS skips only the tree edge it arrived by, so a
    // parallel twin still counts as a back edge.
    const std::size_t n = net.num_buses();
    const std::size_t m = net.num_lines();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(n);  // (neighbour, line)
    for (std::size_t k = 0; k < m; ++k) {
        adj[net.line_from(k)].emplace_back(net.line_to(k), k);
        adj[net.line_to(k)].emplace_back(net.line_from(k), k);
    }
    constexpr std::size_t unvisited = static_cast<std::size_t>(-1);
    std::vector<std::size_t> disc(n, unvisited), low(n, 0);
    std::vector<bool> radial(m, false);
    std::size_t timer = 0;

    struct Frame {
        std::size_t node;
        std::size_t via_line;
        std::size_t next = 0;
    };
    for (std::size_t root = 0; root < n; ++root) {
        if (disc[root] != unvisited) continue;
        std::vector<Frame> stack{{root, unvisited}};
        disc[root] = low[root] = timer++;
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next < adj[f.node].size()) {
                auto [nb, line] = adj[f.node][f.next++];
                if (line == f.via_line) continue;
                if (disc[nb] == unvisited) {
                    disc[nb] = low[nb] = timer++;
                    stack.push_back({nb, line});
                } else {
                    low[f.node] = std::min(low[f.node], disc[nb]);
                }
            } else {
                Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    auto& up = stack.back();
                    low[up.node] = std::min(low[up.node], low[done.node]);
                    if (low[done.node] > disc[up.node]) radial[done.via_line] = true;
                }
            }
        }
    }
    return radial;
}

void Network::validate() const {
    auto fail = [](const std::string& msg) { throw ValidationError(msg); };
    if (buses.empty()) fail("network has no buses");
    std::set<int> ids;
    for (const auto& b : buses)
        if (!ids.insert(b.id).second) fail("duplicate bus id " + std::to_string(b.id));
    if (!ids.count(reference_bus)) fail("reference bus " + std::to_string(reference_bus) + " does not exist");
    if (!(base_mva > 0.0)) fail("base MVA must be positive");

    std::set<int> line_ids;
    for (const auto& l : lines) {
        const std::string tag = "line " + std::to_string(l.id) + ": ";
        if (!line_ids.insert(l.id).second) fail(tag + "duplicate id");
        if (!ids.count(l.from_bus) || !ids.count(l.to_bus)) fail(tag + "unknown terminal bus");
        if (l.from_bus == l.to_bus) fail(tag + "from_bus equals to_bus");
        if (!(l.reactance > 0.0)) fail(tag + "reactance must be positive");
        if (!(l.rating_normal > 0.0)) fail(tag + "normal rating must be positive");
        if (!(l.rating_emergency >= l.rating_normal)) fail(tag + "emergency rating below normal rating");
    }

    std::set<int> gen_ids;
    for (const auto& g : generators) {
        const std::string tag = "generator " + std::to_string(g.id) + ": ";
        if (!gen_ids.insert(g.id).second) fail(tag + "duplicate id");
        if (!ids.count(g.bus)) fail(tag + "unknown bus");
        if (!(g.p_min >= 0.0 && g.p_min <= g.p_max)) fail(tag + "requires 0 <= p_min <= p_max");
        if (g.ramp_hourly < 0 || g.ramp_10min < 0 || g.ramp_startup < 0 || g.ramp_shutdown < 0)
            fail(tag + "negative ramp rate");
        if (g.min_up < 1 || g.min_down < 1) fail(tag + "min up/down must be >= 1");
        if (g.cost_energy < 0 || g.cost_noload < 0 || g.cost_startup < 0 || g.cost_shutdown < 0)
            fail(tag + "negative cost");
    }

    if (load_profile.horizon < 1) fail("horizon must be >= 1");
    if (load_profile.load.size() != buses.size()) fail("load profile does not cover every bus");
    for (const auto& row : load_profile.load) {
        if (row.size() != static_cast<std::size_t>(load_profile.horizon))
            fail("load profile row length differs from horizon");
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v)) fail("load values must be finite and nonnegative");
    }
    if (!is_connected(*this)) fail("network graph is not connected");
}

namespace {

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(where + ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ParseError(where + ": field '" + key + "': " + e.what());
    }
}

const json& section(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw ParseError(std::string("missing section '") + key + "'");
    return *it;
}

}  // namespace

Network parse_case(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("case file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("case document must be an object");

    Network net;
    const json& meta = section(doc, "meta");
    net.name = meta.value("name", std::string{});
    net.base_mva = meta.value("base_mva", 100.0);
    net.reference_bus = require<int>(meta, "reference_bus", "meta");

    for (const auto& b : section(doc, "buses")) {
        net.buses.push_back({require<int>(b, "id", "bus"), b.value("name", std::string{})});
    }
    net.reindex();

    for (const auto& l : section(doc, "lines")) {
        TransmissionLine line;
        line.id = require<int>(l, "id", "line");
        const std::string where = "line " + std::to_string(line.id);
        line.from_bus = require<int>(l, "from", where);
        line.to_bus = require<int>(l, "to", where);
        line.reactance = require<double>(l, "reactance_pu", where);
        line.rating_normal = require<double>(l, "rating_mw", where);
        if (l.contains("emergency_rating_mw")) {
            line.rating_emergency = require<double>(l, "emergency_rating_mw", where);
        } else {
            line.rating_emergency = kDefaultEmergencyFactor * line.rating_normal;
            line.emergency_defaulted = true;
        }
        net.lines.push_back(line);
    }

    for (const auto& g : section(doc, "generators")) {
        Generator gen;
        gen.id = require<int>(g, "id", "generator");
        const std::string where = "generator " + std::to_string(gen.id);
        gen.bus = require<int>(g, "bus", where);
        gen.p_min = require<double>(g, "p_min", where);
        gen.p_max = require<double>(g, "p_max", where);
        gen.cost_energy = require<double>(g, "cost_energy", where);
        gen.cost_noload = require<double>(g, "cost_noload", where);
        gen.cost_startup = require<double>(g, "cost_startup", where);
        gen.cost_shutdown = require<double>(g, "cost_shutdown", where);
        gen.ramp_hourly = require<double>(g, "ramp_hourly", where);
        gen.ramp_10min = require<double>(g, "ramp_10min", where);
        gen.ramp_startup = require<double>(g, "ramp_startup", where);
        gen.ramp_shutdown = require<double>(g, "ramp_shutdown", where);
        gen.min_up = require<int>(g, "min_up", where);
        gen.min_down = require<int>(g, "min_down", where);
        net.generators.push_back(gen);
    }

    const json& loads = section(doc, "loads");
    int horizon = meta.value("horizon", 0);
    if (horizon == 0) {
        if (loads.empty()) throw ParseError("no loads and no meta.horizon");
        horizon = static_cast<int>(require<std::vector<double>>(loads.front(), "mw", "load").size());
    }
    net.load_profile.horizon = horizon;
    net.load_profile.load.assign(net.buses.size(), std::vector<double>(static_cast<std::size_t>(horizon), 0.0));
    std::set<int> seen;
    for (const auto& l : loads) {
        int bus = require<int>(l, "bus", "load");
        const std::string where = "load at bus " + std::to_string(bus);
        auto values = require<std::vector<double>>(l, "mw", where);
        if (static_cast<int>(values.size()) != horizon)
            throw ParseError(where + ": expected " + std::to_string(horizon) + " values");
        if (!seen.insert(bus).second) throw ParseError(where + ": duplicate entry");
        std::size_t idx;
        try {
            idx = net.bus_index(bus);
        } catch (const DomainError&) {
            throw ValidationError(where + ": unknown bus");
        }
        net.load_profile.load[idx] = std::move(values);
    }

    net.validate();
    return net;
}

Network load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open case file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_case(ss.str());
}

std::string serialize_case(const Network& net) {
    json doc;
    doc["meta"] = {{"name", net.name},
                   {"base_mva", net.base_mva},
                   {"reference_bus", net.reference_bus},
                   {"horizon", net.horizon()}};
    json buses = json::array();
    for (const auto& b : net.buses) buses.push_back({{"id", b.id}, {"name", b.name}});
    doc["buses"] = std::move(buses);

    json lines = json::array();
    for (const auto& l : net.lines) {
        json row = {{"id", l.id},
                    {"from", l.from_bus},
                    {"to", l.to_bus},
                    {"reactance_pu", l.reactance},
                    {"rating_mw", l.rating_normal}};
        if (!l.emergency_defaulted) row["emergency_rating_mw"] = l.rating_emergency;
        lines.push_back(std::move(row));
    }
    doc["lines"] = std::move(lines);

    json gens = json::array();
    for (const auto& g : net.generators) {
        gens.push_back({{"id", g.id},
                        {"bus", g.bus},
                        {"p_min", g.p_min},
                        {"p_max", g.p_max},
                        {"cost_energy", g.cost_energy},
                        {"cost_noload", g.cost_noload},
                        {"cost_startup", g.cost_startup},
                        {"cost_shutdown", g.cost_shutdown},
                        {"ramp_hourly", g.ramp_hourly},
                        {"ramp_10min", g.ramp_10min},
                        {"ramp_startup", g.ramp_startup},
                        {"ramp_shutdown", g.ramp_shutdown},
                        {"min_up", g.min_up},
                        {"min_down", g.min_down}});
    }
    doc["generators"] = std::move(gens);

    json loads = json::array();
    for (std::size_t n = 0; n < net.num_buses(); ++n) {
        const auto& row = net.load_profile.load[n];
        if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) continue;
        loads.push_back({{"bus", net.buses[n].id}, {"mw", row}});
    }
    doc["loads"] = std::move(loads);
    return doc.dump(1);
}

void save_case(const Network& net, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << serialize_case(net) << '\n';
}

void export_case_csv(const Network& net, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        CsvWriter w(dir / "buses.csv");
        w.header({"id", "name", "reference"});
        for (const auto& b : net.buses) w.cell(b.id).cell(b.name).cell(b.id == net.reference_bus ? 1 : 0).end_row();
    }
    {
        const auto radial = classify_lines(net);
        CsvWriter w(dir / "lines.csv");
        w.header({"id", "from", "to", "reactance_pu", "rating_mw", "emergency_rating_mw",
                  "emergency_defaulted", "radial"});
        for (std::size_t k = 0; k < net.num_lines(); ++k) {
            const auto& l = net.lines[k];
            w.cell(l.id).cell(l.from_bus).cell(l.to_bus).cell(l.reactance).cell(l.rating_normal)
                .cell(l.rating_emergency).cell(l.emergency_defaulted ? 1 : 0).cell(radial[k] ? 1 : 0)
                .end_row();
        }
    }
    {
        CsvWriter w(dir / "generators.csv");
        w.header({"id", "bus", "p_min", "p_max", "cost_energy", "cost_noload", "cost_startup",
                  "cost_shutdown", "ramp_hourly", "ramp_10min", "ramp_startup", "ramp_shutdown",
                  "min_up", "min_down"});
        for (const auto& g : net.generators) {
            w.cell(g.id).cell(g.bus).cell(g.p_min).cell(g.p_max).cell(g.cost_energy).cell(g.cost_noload)
                .cell(g.cost_startup).cell(g.cost_shutdown).cell(g.ramp_hourly).cell(g.ramp_10min)
                .cell(g.ramp_startup).cell(g.ramp_shutdown).cell(g.min_up).cell(g.min_down).end_row();
        }
    }
    {
        CsvWriter w(dir / "loads.csv");
        w.cell("bus");
        for (int t = 0; t < net.horizon(); ++t) w.cell("t" + std::to_string(t + 1));
        w.end_row();
        for (std::size_t n = 0; n < net.num_buses(); ++n) {
            w.cell(net.buses[n].id);
            for (int t = 0; t < net.horizon(); ++t) w.cell(net.load_profile.at(n, t));
            w.end_row();
        }
    }
}

}  // namespace secmkt
