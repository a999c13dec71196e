#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "secmkt/network.hpp"

namespace secmkt {

class SensitivityFactors;

enum class ScenarioKind { base, generator_outage, line_outage };

/// One operating state. `element` is the outaged generator or line position (-1 for base).
struct Scenario {
    ScenarioKind kind = ScenarioKind::base;
    int element = -1;
    double probability = 0.0;

    /// N1_g: 0 only for the generator outaged in this scenario.
    bool generator_in_service(std::size_t g) const {
        return !(kind == ScenarioKind::generator_outage && element == static_cast<int>(g));
    }
    /// N1_k: 0 only for the line outaged in this scenario.
    bool line_in_service(std::size_t k) const {
        return !(kind == ScenarioKind::line_outage && element == static_cast<int>(k));
    }
    std::string label(const Network& net) const;

    bool operator==(const Scenario&) const = default;
};

/// Base case (always at position 0) followed by contingencies.
class ScenarioSet {
public:
    ScenarioSet() = default;
    explicit ScenarioSet(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {}

    const Scenario& base() const { return scenarios_.front(); }
    const Scenario& operator[](std::size_t c) const { return scenarios_[c]; }
    std::span<const Scenario> all() const { return scenarios_; }
    std::span<const Scenario> contingencies() const { return std::span(scenarios_).subspan(1); }
    std::size_t size() const { return scenarios_.size(); }
    std::size_t num_generator_outages() const;
    std::size_t num_line_outages() const;

    double base_probability() const { return base().probability; }
    double contingency_mass() const;

    /// Replaces contingency probabilities (in order) and sets the base to 1 minus their sum.
    ScenarioSet with_contingency_probabilities(std::span<const double> probs) const;

    /// Throws ValidationError unless probabilities are positive and sum to 1, indicators are
    /// consistent, and line outages are non-radial.
    void validate(const Network& net) const;

    bool operator==(const ScenarioSet&) const = default;

private:
    std::vector<Scenario> scenarios_;
};

/// Per-element outage probabilities over one operating day.
struct FailureRates {
    std::vector<double> generator;  // by generator position
    std::vector<double> line;       // by line position; ignored for radial lines
};

/// Total contingency probability of the default profile (base case 0.946).
inline constexpr double kDefaultContingencyMass = 0.054;

/// Default profile: a generator outage is twice as likely as a line outage; scaled so the
/// contingencies of `net` (all generators, non-radial lines) total kDefaultContingencyMass.
FailureRates default_failure_rates(const Network& net);

/// Base case plus one scenario per generator and per non-radial line. Throws DomainError if
/// a rate is non-positive or the rates sum to 1 or more.
ScenarioSet make_scenario_set(const Network& net, const FailureRates& rates);
ScenarioSet make_scenario_set(const Network& net);

/// Base case only, probability 1.
ScenarioSet base_only_scenarios();

/// All generator outages plus the `max_lines` line outages with the highest screened
/// post-contingency loading. Retained line probabilities are rescaled so the contingency mass
/// (and therefore the base probability) is unchanged.
ScenarioSet select_line_subset(const Network& net, const SensitivityFactors& sens, const ScenarioSet& full,
                               std::size_t max_lines);

/// Screening score per line position: worst post-outage loading over monitored lines and
/// periods, relative to emergency ratings, under a capacity-proportional reference dispatch.
std::vector<double> line_outage_impact(const Network& net, const SensitivityFactors& sens);

}  // namespace secmkt
