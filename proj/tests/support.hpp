#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "secmkt/error.hpp"
#include "secmkt/linear_model.hpp"
#include "secmkt/network.hpp"
#include "secmkt/solver.hpp"

namespace testing {

using namespace secmkt;

inline std::filesystem::path data_file(std::string_view name) { return std::filesystem::path(SECMKT_DATA_DIR) / name; }

inline Generator unit(int id, int bus, double p_min, double p_max, double cost, double r10 = 1e4) {
    Generator g;
    g.id = id;
    g.bus = bus;
    g.p_min = p_min;
    g.p_max = p_max;
    g.cost_energy = cost;
    g.ramp_hourly = g.ramp_startup = g.ramp_shutdown = p_max;
    g.ramp_10min = r10;
    return g;
}

inline TransmissionLine line(int id, int from, int to, double reactance, double rating, double emergency = 0.0) {
    TransmissionLine l;
    l.id = id;
    l.from_bus = from;
    l.to_bus = to;
    l.reactance = reactance;
    l.rating_normal = rating;
    l.emergency_defaulted = emergency <= 0.0;
    l.rating_emergency = l.emergency_defaulted ? kDefaultEmergencyFactor * rating : emergency;
    return l;
}

/// Buses are numbered 1..n_buses; load[n] is the per-period profile of bus n+1.
inline Network make_network(int n_buses, std::vector<TransmissionLine> lines, std::vector<Generator> gens,
                            std::vector<std::vector<double>> load, int reference = 1) {
    Network net;
    net.name = "test";
    net.reference_bus = reference;
    for (int b = 1; b <= n_buses; ++b) net.buses.push_back({b, "b" + std::to_string(b)});
    net.lines = std::move(lines);
    net.generators = std::move(gens);
    const int T = load.empty() ? 1 : static_cast<int>(load.front().size());
    load.resize(static_cast<std::size_t>(n_buses), std::vector<double>(static_cast<std::size_t>(T), 0.0));
    net.load_profile.horizon = T;
    net.load_profile.load = std::move(load);
    net.reindex();
    net.validate();
    return net;
}

/// Three buses, three units, two periods, with enough spare capacity that most commitment
/// patterns with two or more units online are feasible in every model.
inline Network flexible_toy() {
    auto g1 = unit(1, 1, 10, 150, 15, 80);
    g1.cost_noload = 50;
    g1.cost_startup = 100;
    auto g2 = unit(2, 2, 5, 150, 25, 80);
    g2.cost_noload = 30;
    g2.cost_startup = 60;
    g2.cost_shutdown = 5;
    auto g3 = unit(3, 3, 0, 120, 40, 80);
    g3.cost_noload = 20;
    g3.cost_startup = 20;
    return make_network(3, {line(1, 1, 2, 0.1, 200, 250), line(2, 2, 3, 0.1, 200, 250), line(3, 1, 3, 0.1, 200, 250)},
                        {g1, g2, g3}, {{0, 0}, {20, 30}, {60, 90}});
}

/// Random spanning tree plus `extra` chords (parallel lines allowed), random reactances.
inline Network random_network(std::mt19937_64& rng, int n_buses, int extra) {
    std::uniform_real_distribution<double> x(0.02, 0.5);
    std::vector<TransmissionLine> lines;
    int id = 1;
    for (int b = 2; b <= n_buses; ++b) {
        std::uniform_int_distribution<int> pick(1, b - 1);
        lines.push_back(line(id++, pick(rng), b, x(rng), 100.0));
    }
    std::uniform_int_distribution<int> any(1, n_buses);
    for (int e = 0; e < extra; ++e) {
        int a = any(rng), b = any(rng);
        while (b == a) b = any(rng);
        lines.push_back(line(id++, a, b, x(rng), 100.0));
    }
    std::uniform_int_distribution<int> ref(1, n_buses);
    return make_network(n_buses, std::move(lines), {unit(1, 1, 0.0, 100.0, 10.0)}, {}, ref(rng));
}

inline std::vector<double> balanced_injection(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> mw(0.0, 50.0);
    std::vector<double> p(n);
    double sum = 0.0;
    for (auto& v : p) sum += (v = mw(rng));
    for (auto& v : p) v -= sum / static_cast<double>(n);
    return p;
}

/// DC power flow on the topology without line position `skip` (none when negative), solved by
/// Gaussian elimination with partial pivoting on the reduced susceptance matrix.
inline std::vector<double> dc_flows(const Network& net, std::span<const double> injection, long skip = -1) {
    const std::size_t n = net.num_buses();
    const std::size_t ref = net.reference_index();
    std::vector<std::vector<double>> B(n, std::vector<double>(n, 0.0));
    for (std::size_t k = 0; k < net.num_lines(); ++k) {
        if (static_cast<long>(k) == skip) continue;
        const double b = 1.0 / net.lines[k].reactance;
        const auto f = net.line_from(k), t = net.line_to(k);
        B[f][f] += b;
        B[t][t] += b;
        B[f][t] -= b;
        B[t][f] -= b;
    }
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i)
        if (i != ref) keep.push_back(i);
    const std::size_t m = keep.size();
    std::vector<std::vector<double>> A(m, std::vector<double>(m + 1));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) A[r][c] = B[keep[r]][keep[c]];
        A[r][m] = injection[keep[r]];
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        std::swap(A[col], A[piv]);
        if (std::abs(A[col][col]) < 1e-12) throw DomainError("singular susceptance matrix");
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = A[r][col] / A[col][col];
            for (std::size_t c = col; c <= m; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::vector<double> theta_red(m);
    for (std::size_t r = m; r-- > 0;) {
        double s = A[r][m];
        for (std::size_t c = r + 1; c < m; ++c) s -= A[r][c] * theta_red[c];
        theta_red[r] = s / A[r][r];
    }
    std::vector<double> theta(n, 0.0);
    for (std::size_t r = 0; r < m; ++r) theta[keep[r]] = theta_red[r];
    std::vector<double> flow(net.num_lines(), 0.0);
    for (std::size_t k = 0; k < net.num_lines(); ++k) {
        if (static_cast<long>(k) == skip) continue;
        flow[k] = (theta[net.line_from(k)] - theta[net.line_to(k)]) / net.lines[k].reactance;
    }
    return flow;
}

/// Radial flags by deleting each line and searching for connectivity.
inline std::vector<bool> radial_by_search(const Network& net) {
    std::vector<bool> out(net.num_lines());
    for (std::size_t skip = 0; skip < net.num_lines(); ++skip) {
        std::vector<bool> seen(net.num_buses(), false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        while (!stack.empty()) {
            const auto b = stack.back();
            stack.pop_back();
            for (std::size_t k = 0; k < net.num_lines(); ++k) {
                if (k == skip) continue;
                std::size_t other;
                if (net.line_from(k) == b) other = net.line_to(k);
                else if (net.line_to(k) == b) other = net.line_from(k);
                else continue;
                if (!seen[other]) {
                    seen[other] = true;
                    stack.push_back(other);
                }
            }
        }
        out[skip] = std::find(seen.begin(), seen.end(), false) != seen.end();
    }
    return out;
}

/// Minimum over every assignment of the integer variables of the remaining LP; +inf if none is
/// feasible. Each assignment is solved as a pure LP with the integers fixed by bounds.
inline double brute_force_optimum(const LinearModel& model, int* feasible_count = nullptr) {
    std::vector<int> ints;
    for (std::size_t v = 0; v < model.num_variables(); ++v)
        if (model.is_integer(static_cast<int>(v))) ints.push_back(static_cast<int>(v));
    if (ints.size() > 20) throw DomainError("too many integer variables to enumerate");
    double best = std::numeric_limits<double>::infinity();
    int feasible = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << ints.size()); ++mask) {
        LinearModel lp = model;
        bool in_bounds = true;
        for (std::size_t i = 0; i < ints.size(); ++i) {
            const double value = (mask >> i) & 1u ? 1.0 : 0.0;
            if (value < model.lower(ints[i]) || value > model.upper(ints[i])) in_bounds = false;
            lp.set_integer(ints[i], false);
            lp.set_bounds(ints[i], value, value);
        }
        if (!in_bounds) continue;
        try {
            best = std::min(best, solve_mip(lp).objective);
            ++feasible;
        } catch (const SolverError& e) {
            if (e.status() != SolveStatus::infeasible) throw;
        }
    }
    if (feasible_count) *feasible_count = feasible;
    return best;
}

inline bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace testing
