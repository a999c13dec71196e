#include "secmkt/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "secmkt/error.hpp"
#include "secmkt/sensitivity.hpp"

namespace secmkt {

std::string Scenario::label(const Network& net) const {
    switch (kind) {
        case ScenarioKind::base: return "base";
        case ScenarioKind::generator_outage:
            return "gen" + std::to_string(net.generators[static_cast<std::size_t>(element)].id);
        case ScenarioKind::line_outage:
            return "line" + std::to_string(net.lines[static_cast<std::size_t>(element)].id);
    }
    return "?";
}

std::size_t ScenarioSet::num_generator_outages() const {
    return static_cast<std::size_t>(std::count_if(scenarios_.begin(), scenarios_.end(), [](const Scenario& s) {
        return s.kind == ScenarioKind::generator_outage;
    }));
}

std::size_t ScenarioSet::num_line_outages() const {
    return static_cast<std::size_t>(std::count_if(scenarios_.begin(), scenarios_.end(), [](const Scenario& s) {
        return s.kind == ScenarioKind::line_outage;
    }));
}

double ScenarioSet::contingency_mass() const {
    double mass = 0.0;
    for (const auto& s : contingencies()) mass += s.probability;
    return mass;
}

ScenarioSet ScenarioSet::with_contingency_probabilities(std::span<const double> probs) const {
    if (probs.size() + 1 != scenarios_.size()) throw DomainError("probability vector size mismatch");
    auto copy = scenarios_;
    double mass = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        copy[c + 1].probability = probs[c];
        mass += probs[c];
    }
    copy[0].probability = 1.0 - mass;
    return ScenarioSet(std::move(copy));
}

void ScenarioSet::validate(const Network& net) const {
    if (scenarios_.empty() || scenarios_.front().kind != ScenarioKind::base)
        throw ValidationError("scenario set must start with the base case");
    const auto radial = classify_lines(net);
    double total = 0.0;
    for (std::size_t c = 0; c < scenarios_.size(); ++c) {
        const auto& s = scenarios_[c];
        if (!(s.probability > 0.0 && s.probability <= 1.0))
            throw ValidationError("scenario probability must lie in (0, 1]");
        total += s.probability;
        switch (s.kind) {
            case ScenarioKind::base:
                if (c != 0) throw ValidationError("only one base case allowed");
                break;
            case ScenarioKind::generator_outage:
                if (s.element < 0 || static_cast<std::size_t>(s.element) >= net.num_generators())
                    throw ValidationError("generator outage references an unknown generator");
                break;
            case ScenarioKind::line_outage:
                if (s.element < 0 || static_cast<std::size_t>(s.element) >= net.num_lines())
                    throw ValidationError("line outage references an unknown line");
                if (radial[static_cast<std::size_t>(s.element)])
                    throw ValidationError("line outage of radial line " + s.label(net));
                break;
        }
    }
    if (std::abs(total - 1.0) > 1e-9) throw ValidationError("scenario probabilities do not sum to 1");
}

FailureRates default_failure_rates(const Network& net) {
    const auto radial = classify_lines(net);
    const double gen_weight = 2.0;
    const double line_weight = 1.0;
    const auto non_radial = static_cast<double>(std::count(radial.begin(), radial.end(), false));
    const double total_weight = gen_weight * static_cast<double>(net.num_generators()) + line_weight * non_radial;
    FailureRates rates;
    if (total_weight == 0.0) return rates;
    const double scale = kDefaultContingencyMass / total_weight;
    rates.generator.assign(net.num_generators(), gen_weight * scale);
    rates.line.resize(net.num_lines());
    for (std::size_t k = 0; k < net.num_lines(); ++k) rates.line[k] = radial[k] ? 0.0 : line_weight * scale;
    return rates;
}

ScenarioSet make_scenario_set(const Network& net, const FailureRates& rates) {
    if (rates.generator.size() != net.num_generators() || rates.line.size() != net.num_lines())
        throw DomainError("failure rate vectors must cover every generator and line");
    const auto radial = classify_lines(net);
    std::vector<Scenario> list{{ScenarioKind::base, -1, 0.0}};
    double mass = 0.0;
    for (std::size_t g = 0; g < net.num_generators(); ++g) {
        if (!(rates.generator[g] > 0.0)) throw DomainError("generator failure rates must be positive");
        list.push_back({ScenarioKind::generator_outage, static_cast<int>(g), rates.generator[g]});
        mass += rates.generator[g];
    }
    for (std::size_t k = 0; k < net.num_lines(); ++k) {
        if (radial[k]) continue;
        if (!(rates.line[k] > 0.0)) throw DomainError("line failure rates must be positive");
        list.push_back({ScenarioKind::line_outage, static_cast<int>(k), rates.line[k]});
        mass += rates.line[k];
    }
    if (!(mass < 1.0)) throw DomainError("contingency probabilities sum to 1 or more");
    list[0].probability = 1.0 - mass;
    return ScenarioSet(std::move(list));
}

ScenarioSet make_scenario_set(const Network& net) { return make_scenario_set(net, default_failure_rates(net)); }

ScenarioSet base_only_scenarios() { return ScenarioSet({{ScenarioKind::base, -1, 1.0}}); }

std::vector<double> line_outage_impact(const Network& net, const SensitivityFactors& sens) {
    const auto& ptdf = sens.ptdf_base();
    const auto& lodf = sens.lodf();
    double capacity = 0.0;
    for (const auto& g : net.generators) capacity += g.p_max;

    std::vector<double> score(net.num_lines(), 0.0);
    std::vector<double> injection(net.num_buses());
    for (int t = 0; t < net.horizon(); ++t) {
        const double share = capacity > 0.0 ? net.load_profile.system_load(t) / capacity : 0.0;
        for (std::size_t n = 0; n < net.num_buses(); ++n) injection[n] = -net.load_profile.at(n, t);
        for (std::size_t g = 0; g < net.num_generators(); ++g)
            injection[net.generator_bus(g)] += share * net.generators[g].p_max;
        const auto flows = line_flows(ptdf, injection);
        for (std::size_t l = 0; l < net.num_lines(); ++l) {
            if (sens.radial()[l]) continue;
            for (std::size_t k = 0; k < net.num_lines(); ++k) {
                if (k == l) continue;
                const double post = flows[k] + lodf(k, l) * flows[l];
                score[l] = std::max(score[l], std::abs(post) / net.lines[k].rating_emergency);
            }
        }
    }
    return score;
}

ScenarioSet select_line_subset(const Network& net, const SensitivityFactors& sens, const ScenarioSet& full,
                               std::size_t max_lines) {
    if (full.num_line_outages() <= max_lines) return full;
    const auto score = line_outage_impact(net, sens);

    std::vector<std::size_t> line_positions;  // positions within `full`
    for (std::size_t c = 1; c < full.size(); ++c)
        if (full[c].kind == ScenarioKind::line_outage) line_positions.push_back(c);
    std::stable_sort(line_positions.begin(), line_positions.end(), [&](std::size_t a, std::size_t b) {
        return score[static_cast<std::size_t>(full[a].element)] > score[static_cast<std::size_t>(full[b].element)];
    });
    line_positions.resize(max_lines);
    std::sort(line_positions.begin(), line_positions.end());

    double dropped = 0.0, kept = 0.0;
    std::vector<bool> keep(full.size(), false);
    for (auto c : line_positions) keep[c] = true;
    for (std::size_t c = 1; c < full.size(); ++c) {
        if (full[c].kind != ScenarioKind::line_outage) continue;
        (keep[c] ? kept : dropped) += full[c].probability;
    }
    const double scale = kept > 0.0 ? (kept + dropped) / kept : 1.0;

    std::vector<Scenario> list{full.base()};
    for (std::size_t c = 1; c < full.size(); ++c) {
        if (full[c].kind == ScenarioKind::generator_outage) {
            list.push_back(full[c]);
        } else if (keep[c]) {
            auto s = full[c];
            s.probability *= scale;
            list.push_back(s);
        }
    }
    return ScenarioSet(std::move(list));
}

}  // namespace secmkt
