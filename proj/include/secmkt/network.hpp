#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace secmkt {

struct Bus {
    int id = 0;
    std::string name;

    bool operator==(const Bus&) const = default;
};

struct TransmissionLine {
    int id = 0;
    int from_bus = 0;  // bus id
    int to_bus = 0;    // bus id
    double reactance = 0.0;         // per unit
    double rating_normal = 0.0;     // MW
    double rating_emergency = 0.0;  // MW
    bool emergency_defaulted = false;

    bool operator==(const TransmissionLine&) const = default;
};

struct Generator {
    int id = 0;
    int bus = 0;  // bus id
    double p_min = 0.0;
    double p_max = 0.0;
    double cost_energy = 0.0;    // $/MWh
    double cost_noload = 0.0;    // $/h committed
    double cost_startup = 0.0;   // $ per start
    double cost_shutdown = 0.0;  // $ per stop
    double ramp_hourly = 0.0;
    double ramp_10min = 0.0;
    double ramp_startup = 0.0;
    double ramp_shutdown = 0.0;
    int min_up = 1;
    int min_down = 1;

    bool operator==(const Generator&) const = default;
};

/// Nodal demand; load[n][t] is indexed by bus position, not bus id.
struct LoadProfile {
    int horizon = 0;
    std::vector<std::vector<double>> load;

    double at(std::size_t bus, int t) const { return load[bus][static_cast<std::size_t>(t)]; }
    double system_load(int t) const;

    bool operator==(const LoadProfile&) const = default;
};

/// Emergency ratings missing from the case file default to this multiple of the normal rating.
inline constexpr double kDefaultEmergencyFactor = 1.1;

/// Static grid description. Immutable after construction and validation.
class Network {
public:
    std::string name;
    double base_mva = 100.0;
    int reference_bus = 0;  // bus id
    std::vector<Bus> buses;
    std::vector<TransmissionLine> lines;
    std::vector<Generator> generators;
    LoadProfile load_profile;

    std::size_t num_buses() const { return buses.size(); }
    std::size_t num_lines() const { return lines.size(); }
    std::size_t num_generators() const { return generators.size(); }
    int horizon() const { return load_profile.horizon; }

    /// Position of a bus id in `buses`; throws DomainError for unknown ids.
    std::size_t bus_index(int bus_id) const;
    std::size_t reference_index() const { return bus_index(reference_bus); }
    std::size_t line_from(std::size_t k) const { return bus_index(lines[k].from_bus); }
    std::size_t line_to(std::size_t k) const { return bus_index(lines[k].to_bus); }
    std::size_t generator_bus(std::size_t g) const { return bus_index(generators[g].bus); }

    /// Number of buses with positive load in at least one period.
    std::size_t num_loaded_buses() const;

    /// Copy restricted to the first `periods` periods of the load profile.
    Network with_horizon(int periods) const;
    /// Copy with line position `k` removed.
    Network without_line(std::size_t k) const;

    /// Rebuilds the id lookup; call after editing `buses` directly.
    void reindex();

    /// Throws ValidationError on any invariant violation (including a disconnected graph).
    void validate() const;

    bool operator==(const Network& other) const;

private:
    std::vector<std::pair<int, std::size_t>> bus_lookup_;  // sorted by id
};

/// Reads a JSON case file and validates it.
Network load_case(const std::filesystem::path& path);
Network parse_case(const std::string& text);
/// Serializes in the same schema `load_case` reads; defaulted emergency ratings are omitted.
std::string serialize_case(const Network& net);
void save_case(const Network& net, const std::filesystem::path& path);

/// Writes buses.csv, lines.csv, generators.csv, loads.csv into `dir`.
void export_case_csv(const Network& net, const std::filesystem::path& dir);

/// True for a line that is a bridge of the bus multigraph (its outage islands the network).
std::vector<bool> classify_lines(const Network& net);

/// Whether the multigraph over all buses, minus `skip_line` if given, is connected.
bool is_connected(const Network& net, std::ptrdiff_t skip_line = -1);

}  // namespace secmkt
