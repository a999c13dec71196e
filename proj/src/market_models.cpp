#include "secmkt/market_models.hpp"

#include <algorithm>
#include <cmath>

#include "secmkt/error.hpp"
#include "secmkt/sensitivity.hpp"

namespace secmkt {

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::prxy: return "prxy";
        case ModelKind::lodf: return "lodf";
        case ModelKind::escuc: return "escuc";
    }
    return "?";
}

const char* to_string(ObjectiveMode mode) { return mode == ObjectiveMode::expected ? "expected" : "base"; }

ModelKind parse_model_kind(const std::string& text) {
    if (text == "prxy") return ModelKind::prxy;
    if (text == "lodf") return ModelKind::lodf;
    if (text == "escuc") return ModelKind::escuc;
    throw DomainError("unknown model kind '" + text + "'");
}

ObjectiveMode parse_objective_mode(const std::string& text) {
    if (text == "expected") return ObjectiveMode::expected;
    if (text == "base") return ObjectiveMode::base;
    throw DomainError("unknown objective mode '" + text + "'");
}

std::string MarketModel::label() const {
    if (kind == ModelKind::escuc) return std::string("escuc-") + to_string(objective);
    return std::string("scuc-") + to_string(kind);
}

namespace {

using I = std::int32_t;

I idx(std::size_t v) { return static_cast<I>(v); }

class Builder {
public:
    Builder(const Network& net, MarketModel& model)
        : net_(net), m_(model), lp_(model.lp), T_(net.horizon()), G_(net.num_generators()), N_(net.num_buses()),
          L_(net.num_lines()) {
        m_.horizon = T_;
        m_.num_generators = G_;
        m_.num_buses = N_;
        m_.num_lines = L_;
        gens_at_bus_.resize(N_);
        for (std::size_t g = 0; g < G_; ++g) gens_at_bus_[net.generator_bus(g)].push_back(g);
    }

    // Commitment variables with logic, startup/shutdown and minimum up/down rows.
    void add_commitment(bool with_costs) {
        const auto fu = lp_.family(family::u), fv = lp_.family(family::v), fw = lp_.family(family::w);
        u_.resize(G_ * T()); v_.resize(G_ * T()); w_.resize(G_ * T());
        for (std::size_t g = 0; g < G_; ++g) {
            const auto& gen = net_.generators[g];
            for (std::size_t t = 0; t < T(); ++t) {
                u_[gt(g, t)] = lp_.add_variable(Tag{fu, idx(g), idx(t)}, 0.0, 1.0, with_costs ? gen.cost_noload : 0.0, true);
            }
            for (std::size_t t = 0; t < T(); ++t)
                v_[gt(g, t)] = lp_.add_variable(Tag{fv, idx(g), idx(t)}, 0.0, 1.0, with_costs ? gen.cost_startup : 0.0);
            for (std::size_t t = 0; t < T(); ++t)
                w_[gt(g, t)] = lp_.add_variable(Tag{fw, idx(g), idx(t)}, 0.0, t == 0 ? 0.0 : 1.0,
                                                with_costs ? gen.cost_shutdown : 0.0);
        }
        const auto fsu = lp_.family("startup_logic"), fsd = lp_.family("shutdown_logic");
        const auto fup = lp_.family("min_up"), fdn = lp_.family("min_down");
        for (std::size_t g = 0; g < G_; ++g) {
            const auto& gen = net_.generators[g];
            for (std::size_t t = 0; t < T(); ++t) {
                const Tag tag{fsu, idx(g), idx(t)};
                if (t == 0)
                    lp_.add_constraint(tag, {{v_[gt(g, 0)], 1.0}, {u_[gt(g, 0)], -1.0}}, Sense::greater_equal, 0.0);
                else
                    lp_.add_constraint(tag, {{v_[gt(g, t)], 1.0}, {u_[gt(g, t)], -1.0}, {u_[gt(g, t - 1)], 1.0}},
                                       Sense::greater_equal, 0.0);
            }
            for (std::size_t t = 1; t < T(); ++t)
                lp_.add_constraint(Tag{fsd, idx(g), idx(t)},
                                   {{w_[gt(g, t)], 1.0}, {u_[gt(g, t - 1)], -1.0}, {u_[gt(g, t)], 1.0}},
                                   Sense::greater_equal, 0.0);
            // Windows before the first full one are truncated at t=0 (units start offline).
            std::vector<Term> terms;
            for (std::size_t t = 0; t < T(); ++t) {
                terms.clear();
                const std::size_t from = t + 1 >= static_cast<std::size_t>(std::max(gen.min_up, 1))
                                             ? t + 1 - static_cast<std::size_t>(std::max(gen.min_up, 1))
                                             : 0;
                for (std::size_t s = from; s <= t; ++s) terms.push_back({v_[gt(g, s)], 1.0});
                terms.push_back({u_[gt(g, t)], -1.0});
                lp_.add_constraint(Tag{fup, idx(g), idx(t)}, terms, Sense::less_equal, 0.0);
            }
            for (std::size_t t = 0; t < T(); ++t) {
                terms.clear();
                const std::size_t from = t + 1 >= static_cast<std::size_t>(std::max(gen.min_down, 1))
                                             ? t + 1 - static_cast<std::size_t>(std::max(gen.min_down, 1))
                                             : 0;
                for (std::size_t s = from; s <= t; ++s) terms.push_back({w_[gt(g, s)], 1.0});
                terms.push_back({u_[gt(g, t)], 1.0});
                lp_.add_constraint(Tag{fdn, idx(g), idx(t)}, terms, Sense::less_equal, 1.0);
            }
        }
    }

    void add_reserve_variables(double upper) {
        const auto fr = lp_.family(family::r);
        r_.resize(G_ * T());
        for (std::size_t g = 0; g < G_; ++g)
            for (std::size_t t = 0; t < T(); ++t)
                r_[gt(g, t)] = lp_.add_variable(Tag{fr, idx(g), idx(t)}, 0.0, upper);
    }

    // Dispatch P_gct for every model scenario; base-case weights per objective.
    void add_dispatch(const ScenarioSet& scenarios, double base_weight, bool weight_scenarios) {
        const auto fp = lp_.family(family::p);
        C_ = scenarios.size();
        p_.resize(C_ * G_ * T());
        for (std::size_t g = 0; g < G_; ++g) {
            const auto& gen = net_.generators[g];
            for (std::size_t c = 0; c < C_; ++c) {
                const bool out = !scenarios[c].generator_in_service(g);
                const double weight = c == 0 ? base_weight : (weight_scenarios ? scenarios[c].probability : 0.0);
                for (std::size_t t = 0; t < T(); ++t)
                    p_[gct(g, c, t)] = lp_.add_variable(Tag{fp, idx(g), idx(c), idx(t)}, 0.0, out ? 0.0 : gen.p_max,
                                                        weight * gen.cost_energy);
            }
        }
    }

    void add_injections() {
        const auto fi = lp_.family(family::pinj);
        pinj_.resize(C_ * N_ * T());
        for (std::size_t n = 0; n < N_; ++n)
            for (std::size_t c = 0; c < C_; ++c)
                for (std::size_t t = 0; t < T(); ++t)
                    pinj_[nct(n, c, t)] = lp_.add_variable(Tag{fi, idx(n), idx(c), idx(t)}, -kInf, kInf);
    }

    void add_ramps() {
        const auto fu = lp_.family("ramp_up"), fd = lp_.family("ramp_down");
        for (std::size_t g = 0; g < G_; ++g) {
            const auto& gen = net_.generators[g];
            for (std::size_t t = 0; t < T(); ++t) {
                const int pt = p_[gct(g, 0, t)];
                if (t == 0) {
                    lp_.add_constraint(Tag{fu, idx(g), 0}, {{pt, 1.0}, {v_[gt(g, 0)], -gen.ramp_startup}},
                                       Sense::less_equal, 0.0);
                    lp_.add_constraint(Tag{fd, idx(g), 0},
                                       {{pt, -1.0}, {u_[gt(g, 0)], -gen.ramp_hourly}, {w_[gt(g, 0)], -gen.ramp_shutdown}},
                                       Sense::less_equal, 0.0);
                    continue;
                }
                const int prev = p_[gct(g, 0, t - 1)];
                lp_.add_constraint(Tag{fu, idx(g), idx(t)},
                                   {{pt, 1.0}, {prev, -1.0}, {u_[gt(g, t - 1)], -gen.ramp_hourly},
                                    {v_[gt(g, t)], -gen.ramp_startup}},
                                   Sense::less_equal, 0.0);
                lp_.add_constraint(Tag{fd, idx(g), idx(t)},
                                   {{prev, 1.0}, {pt, -1.0}, {u_[gt(g, t)], -gen.ramp_hourly},
                                    {w_[gt(g, t)], -gen.ramp_shutdown}},
                                   Sense::less_equal, 0.0);
            }
        }
    }

    // Sum of scenario dispatch at n, minus injection, equals load (or the demand variable).
    void add_node_balance(bool demand_variable) {
        const auto fb = lp_.family(family::node_balance);
        std::vector<Term> terms;
        for (std::size_t n = 0; n < N_; ++n)
            for (std::size_t c = 0; c < C_; ++c)
                for (std::size_t t = 0; t < T(); ++t) {
                    terms.clear();
                    for (auto g : gens_at_bus_[n]) terms.push_back({p_[gct(g, c, t)], 1.0});
                    terms.push_back({pinj_[nct(n, c, t)], -1.0});
                    double rhs = net_.load_profile.at(n, static_cast<int>(t));
                    if (demand_variable) {
                        terms.push_back({d_[nt(n, t)], -1.0});
                        rhs = 0.0;
                    }
                    lp_.add_constraint(Tag{fb, idx(n), idx(c), idx(t)}, terms, Sense::equal, rhs);
                }
    }

    void add_demand() {
        const auto fd = lp_.family(family::d);
        const auto ff = lp_.family(family::demand_fix);
        d_.resize(N_ * T());
        for (std::size_t n = 0; n < N_; ++n)
            for (std::size_t t = 0; t < T(); ++t) d_[nt(n, t)] = lp_.add_variable(Tag{fd, idx(n), idx(t)}, -kInf, kInf);
        for (std::size_t n = 0; n < N_; ++n)
            for (std::size_t t = 0; t < T(); ++t)
                lp_.add_constraint(Tag{ff, idx(n), idx(t)}, {{d_[nt(n, t)], 1.0}}, Sense::equal,
                                   net_.load_profile.at(n, static_cast<int>(t)));
    }

    void add_system_balance() {
        const auto fs = lp_.family("system_balance");
        std::vector<Term> terms;
        for (std::size_t c = 0; c < C_; ++c)
            for (std::size_t t = 0; t < T(); ++t) {
                terms.clear();
                for (std::size_t n = 0; n < N_; ++n) terms.push_back({pinj_[nct(n, c, t)], 1.0});
                lp_.add_constraint(Tag{fs, idx(c), idx(t)}, terms, Sense::equal, 0.0);
            }
    }

    // Two single-sided rows per monitored line for scenario c using the given PTDF.
    void add_line_limits(std::size_t c, const PtdfMatrix& ptdf, bool emergency, int skip_line) {
        const auto fmax = lp_.family("line_max"), fmin = lp_.family("line_min");
        std::vector<Term> terms;
        for (std::size_t k = 0; k < L_; ++k) {
            if (static_cast<int>(k) == skip_line) continue;
            const double limit = emergency ? net_.lines[k].rating_emergency : net_.lines[k].rating_normal;
            for (std::size_t t = 0; t < T(); ++t) {
                terms.clear();
                for (std::size_t n = 0; n < N_; ++n) {
                    const double f = ptdf(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
                    if (std::abs(f) > kSensitivityZero) terms.push_back({pinj_[nct(n, c, t)], f});
                }
                lp_.add_constraint(Tag{fmax, idx(k), idx(c), idx(t)}, terms, Sense::less_equal, limit);
                lp_.add_constraint(Tag{fmin, idx(k), idx(c), idx(t)}, terms, Sense::greater_equal, -limit);
            }
        }
    }

    // P_g0t + r_gt <= Pmax u_gt.
    void add_capacity_reserve() {
        const auto f = lp_.family("cap_reserve");
        for (std::size_t g = 0; g < G_; ++g)
            for (std::size_t t = 0; t < T(); ++t)
                lp_.add_constraint(Tag{f, idx(g), idx(t)},
                                   {{p_[gct(g, 0, t)], 1.0}, {r_[gt(g, t)], 1.0}, {u_[gt(g, t)], -net_.generators[g].p_max}},
                                   Sense::less_equal, 0.0);
    }

    void add_proxy_limits(double eta) {
        const auto fmin = lp_.family("min_output"), framp = lp_.family("reserve_ramp");
        const auto flu = lp_.family("largest_unit"), fload = lp_.family("reserve_load");
        for (std::size_t g = 0; g < G_; ++g) {
            const auto& gen = net_.generators[g];
            for (std::size_t t = 0; t < T(); ++t) {
                lp_.add_constraint(Tag{fmin, idx(g), idx(t)}, {{p_[gct(g, 0, t)], 1.0}, {u_[gt(g, t)], -gen.p_min}},
                                   Sense::greater_equal, 0.0);
                lp_.add_constraint(Tag{framp, idx(g), idx(t)}, {{r_[gt(g, t)], 1.0}, {u_[gt(g, t)], -gen.ramp_10min}},
                                   Sense::less_equal, 0.0);
            }
        }
        // Largest-unit rule as written: sum_j r_jt >= P_g0t + r_gt (r_gt cancels on merge).
        std::vector<Term> terms;
        for (std::size_t g = 0; g < G_; ++g)
            for (std::size_t t = 0; t < T(); ++t) {
                terms.clear();
                for (std::size_t j = 0; j < G_; ++j) terms.push_back({r_[gt(j, t)], 1.0});
                terms.push_back({p_[gct(g, 0, t)], -1.0});
                terms.push_back({r_[gt(g, t)], -1.0});
                lp_.add_constraint(Tag{flu, idx(g), idx(t)}, terms, Sense::greater_equal, 0.0);
            }
        for (std::size_t t = 0; t < T(); ++t) {
            terms.clear();
            for (std::size_t g = 0; g < G_; ++g) terms.push_back({r_[gt(g, t)], 1.0});
            lp_.add_constraint(Tag{fload, idx(t)}, terms, Sense::greater_equal,
                               eta * net_.load_profile.system_load(static_cast<int>(t)));
        }
    }

    void add_lodf_limits(const SensitivityFactors& sens) {
        const auto ffl = lp_.family(family::fl), fdef = lp_.family("flow_def");
        const auto fmax = lp_.family("post_flow_max"), fmin = lp_.family("post_flow_min");
        const auto& ptdf = sens.ptdf_base();
        const auto& lodf = sens.lodf();
        fl_.resize(L_ * T());
        for (std::size_t l = 0; l < L_; ++l)
            for (std::size_t t = 0; t < T(); ++t) fl_[l * T() + t] = lp_.add_variable(Tag{ffl, idx(l), idx(t)}, -kInf, kInf);
        std::vector<Term> terms;
        for (std::size_t l = 0; l < L_; ++l)
            for (std::size_t t = 0; t < T(); ++t) {
                terms.clear();
                terms.push_back({fl_[l * T() + t], 1.0});
                for (std::size_t n = 0; n < N_; ++n) {
                    const double f = ptdf(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(n));
                    if (std::abs(f) > kSensitivityZero) terms.push_back({pinj_[nct(n, 0, t)], -f});
                }
                lp_.add_constraint(Tag{fdef, idx(l), idx(t)}, terms, Sense::equal, 0.0);
            }
        // The pre-outage PTDF flow of monitored line k is fl_k by flow_def, so each post-outage
        // row needs only two entries.
        for (std::size_t k = 0; k < L_; ++k) {
            const double limit = net_.lines[k].rating_emergency;
            for (std::size_t l = 0; l < L_; ++l) {
                if (!lodf.defined(k, l)) continue;
                const double factor = lodf(k, l);
                for (std::size_t t = 0; t < T(); ++t) {
                    const std::initializer_list<Term> row{{fl_[k * T() + t], 1.0}, {fl_[l * T() + t], factor}};
                    lp_.add_constraint(Tag{fmax, idx(k), idx(l), idx(t)}, row, Sense::less_equal, limit);
                    lp_.add_constraint(Tag{fmin, idx(k), idx(l), idx(t)}, row, Sense::greater_equal, -limit);
                }
            }
        }
    }

    void add_scenario_generation(const ScenarioSet& scenarios) {
        const auto fmax = lp_.family("gen_max"), fmin = lp_.family("gen_min");
        const auto fru = lp_.family("redispatch_up_ramp"), frd = lp_.family("redispatch_down_ramp");
        const auto fsu = lp_.family("redispatch_up_reserve"), fsd = lp_.family("redispatch_down_reserve");
        for (std::size_t g = 0; g < G_; ++g) {
            const auto& gen = net_.generators[g];
            for (std::size_t c = 0; c < C_; ++c) {
                // An outaged unit is pinned to zero through its variable bounds.
                if (!scenarios[c].generator_in_service(g)) continue;
                for (std::size_t t = 0; t < T(); ++t) {
                    const int pc = p_[gct(g, c, t)], p0 = p_[gct(g, 0, t)], u = u_[gt(g, t)], r = r_[gt(g, t)];
                    const Tag tag{0, idx(g), idx(c), idx(t)};
                    auto tagged = [&](std::uint16_t f) { Tag x = tag; x.family = f; return x; };
                    lp_.add_constraint(tagged(fmax), {{pc, 1.0}, {u, -gen.p_max}}, Sense::less_equal, 0.0);
                    lp_.add_constraint(tagged(fmin), {{pc, 1.0}, {u, -gen.p_min}}, Sense::greater_equal, 0.0);
                    if (c == 0) continue;
                    lp_.add_constraint(tagged(fru), {{pc, 1.0}, {p0, -1.0}, {u, -gen.ramp_10min}}, Sense::less_equal, 0.0);
                    lp_.add_constraint(tagged(frd), {{p0, 1.0}, {pc, -1.0}, {u, -gen.ramp_10min}}, Sense::less_equal, 0.0);
                    lp_.add_constraint(tagged(fsu), {{pc, 1.0}, {p0, -1.0}, {r, -1.0}}, Sense::less_equal, 0.0);
                    lp_.add_constraint(tagged(fsd), {{p0, 1.0}, {pc, -1.0}, {r, -1.0}}, Sense::less_equal, 0.0);
                }
            }
        }
    }

private:
    std::size_t T() const { return static_cast<std::size_t>(T_); }
    std::size_t gt(std::size_t g, std::size_t t) const { return g * T() + t; }
    std::size_t gct(std::size_t g, std::size_t c, std::size_t t) const { return (g * C_ + c) * T() + t; }
    std::size_t nct(std::size_t n, std::size_t c, std::size_t t) const { return (n * C_ + c) * T() + t; }
    std::size_t nt(std::size_t n, std::size_t t) const { return n * T() + t; }

    const Network& net_;
    MarketModel& m_;
    LinearModel& lp_;
    int T_;
    std::size_t G_, N_, L_, C_ = 1;
    std::vector<std::vector<std::size_t>> gens_at_bus_;
    std::vector<int> u_, v_, w_, r_, p_, pinj_, d_, fl_;
};

MarketModel build_deterministic(const Network& net, const SensitivityFactors& sens, double eta, ModelKind kind) {
    if (!(eta >= 0.0)) throw DomainError("reserve fraction eta must be >= 0");
    MarketModel model;
    model.kind = kind;
    model.objective = ObjectiveMode::base;
    model.scenarios = base_only_scenarios();
    model.eta = eta;
    Builder b(net, model);
    b.add_commitment(true);
    b.add_reserve_variables(kInf);
    b.add_dispatch(model.scenarios, 1.0, false);
    b.add_injections();
    b.add_ramps();
    b.add_node_balance(false);
    b.add_system_balance();
    b.add_line_limits(0, sens.ptdf_base(), false, -1);
    b.add_capacity_reserve();
    b.add_proxy_limits(eta);
    if (kind == ModelKind::lodf) b.add_lodf_limits(sens);
    return model;
}

}  // namespace

MarketModel build_scuc_prxy(const Network& net, const SensitivityFactors& sens, double eta) {
    return build_deterministic(net, sens, eta, ModelKind::prxy);
}

MarketModel build_scuc_lodf(const Network& net, const SensitivityFactors& sens, double eta) {
    return build_deterministic(net, sens, eta, ModelKind::lodf);
}

MarketModel build_escuc(const Network& net, const SensitivityFactors& sens, const ScenarioSet& scenarios,
                        ObjectiveMode mode) {
    scenarios.validate(net);
    MarketModel model;
    model.kind = ModelKind::escuc;
    model.objective = mode;
    model.scenarios = scenarios;
    const bool expected = mode == ObjectiveMode::expected;
    Builder b(net, model);
    b.add_commitment(true);
    b.add_reserve_variables(kInf);
    b.add_dispatch(scenarios, expected ? scenarios.base_probability() : 1.0, expected);
    b.add_injections();
    b.add_demand();
    b.add_ramps();
    b.add_capacity_reserve();
    b.add_node_balance(true);
    b.add_system_balance();
    for (std::size_t c = 0; c < scenarios.size(); ++c) {
        const auto& s = scenarios[c];
        if (s.kind == ScenarioKind::line_outage) {
            const auto l = static_cast<std::size_t>(s.element);
            b.add_line_limits(c, sens.ptdf_post(l), true, s.element);
        } else {
            b.add_line_limits(c, sens.ptdf_base(), false, -1);
        }
    }
    b.add_scenario_generation(scenarios);
    return model;
}

namespace {

Grid make_grid(std::size_t rows, int horizon) {
    return Grid(rows, std::vector<double>(static_cast<std::size_t>(horizon), 0.0));
}

enum class Slot { u, v, w, r, p, pinj, d, fl, none };

std::vector<Slot> slot_table(const LinearModel& lp) {
    std::vector<Slot> table(lp.num_families(), Slot::none);
    const std::pair<const char*, Slot> known[] = {
        {family::u, Slot::u},       {family::v, Slot::v}, {family::w, Slot::w},   {family::r, Slot::r},
        {family::p, Slot::p},       {family::pinj, Slot::pinj}, {family::d, Slot::d}, {family::fl, Slot::fl},
    };
    for (const auto& [name, slot] : known)
        if (auto id = lp.find_family(name)) table[*id] = slot;
    return table;
}

}  // namespace

Schedule decode_schedule(const MarketModel& model, std::span<const double> x, const SensitivityFactors* sens) {
    const auto& lp = model.lp;
    if (x.size() != lp.num_variables()) throw Error("solution vector does not match the model");
    const auto G = model.num_generators, N = model.num_buses, C = model.scenarios.size();
    const int T = model.horizon;

    Schedule s;
    s.source = model.kind;
    s.horizon = T;
    s.u = s.v = s.w = s.p_base = s.reserve = make_grid(G, T);
    s.p_scenario.assign(C, make_grid(G, T));
    s.injection.assign(C, make_grid(N, T));
    if (model.kind == ModelKind::escuc) s.demand = make_grid(N, T);
    if (model.kind == ModelKind::lodf) s.flow.assign(1, make_grid(model.num_lines, T));

    const auto slots = slot_table(lp);
    for (std::size_t var = 0; var < x.size(); ++var) {
        const auto& tag = lp.variable_tag(static_cast<int>(var));
        const auto i = static_cast<std::size_t>(tag.i), j = static_cast<std::size_t>(tag.j);
        const auto k = static_cast<std::size_t>(tag.k);
        const double value = x[var];
        switch (slots[tag.family]) {
            case Slot::u: s.u[i][j] = value; break;
            case Slot::v: s.v[i][j] = value; break;
            case Slot::w: s.w[i][j] = value; break;
            case Slot::r: s.reserve[i][j] = value; break;
            case Slot::p:
                s.p_scenario[j][i][k] = value;
                if (j == 0) s.p_base[i][k] = value;
                break;
            case Slot::pinj: s.injection[j][i][k] = value; break;
            case Slot::d: s.demand[i][j] = value; break;
            case Slot::fl: s.flow[0][i][j] = value; break;
            case Slot::none:
                throw Error("internal: variable " + lp.variable_name(static_cast<int>(var)) + " has no schedule slot");
        }
    }

    if (sens) {
        s.flow.assign(C, make_grid(model.num_lines, T));
        std::vector<double> inj(N);
        for (std::size_t c = 0; c < C; ++c) {
            const auto& sc = model.scenarios[c];
            const auto& ptdf = sc.kind == ScenarioKind::line_outage
                                   ? sens->ptdf_post(static_cast<std::size_t>(sc.element))
                                   : sens->ptdf_base();
            for (int t = 0; t < T; ++t) {
                for (std::size_t n = 0; n < N; ++n) inj[n] = s.injection[c][n][static_cast<std::size_t>(t)];
                const auto f = line_flows(ptdf, inj);
                for (std::size_t k = 0; k < f.size(); ++k) s.flow[c][k][static_cast<std::size_t>(t)] = f[k];
            }
        }
    }
    return s;
}

std::vector<double> encode_schedule(const MarketModel& model, const Schedule& s) {
    const auto& lp = model.lp;
    std::vector<double> x(lp.num_variables(), 0.0);
    const auto slots = slot_table(lp);
    for (std::size_t var = 0; var < x.size(); ++var) {
        const auto& tag = lp.variable_tag(static_cast<int>(var));
        const auto i = static_cast<std::size_t>(tag.i), j = static_cast<std::size_t>(tag.j);
        const auto k = static_cast<std::size_t>(tag.k);
        switch (slots[tag.family]) {
            case Slot::u: x[var] = s.u[i][j]; break;
            case Slot::v: x[var] = s.v[i][j]; break;
            case Slot::w: x[var] = s.w[i][j]; break;
            case Slot::r: x[var] = s.reserve[i][j]; break;
            case Slot::p: x[var] = s.p_scenario[j][i][k]; break;
            case Slot::pinj: x[var] = s.injection[j][i][k]; break;
            case Slot::d: x[var] = s.demand[i][j]; break;
            case Slot::fl: x[var] = s.flow[0][i][j]; break;
            case Slot::none:
                throw Error("internal: variable " + lp.variable_name(static_cast<int>(var)) + " has no schedule slot");
        }
    }
    return x;
}

double schedule_violation(const Network& net, const Schedule& s) {
    double worst = 0.0;
    for (std::size_t g = 0; g < net.num_generators(); ++g) {
        const auto& gen = net.generators[g];
        for (std::size_t t = 0; t < static_cast<std::size_t>(s.horizon); ++t) {
            const double u = s.u[g][t];
            const double prev = t == 0 ? 0.0 : s.u[g][t - 1];
            worst = std::max(worst, std::abs(u - std::round(u)));
            worst = std::max(worst, (u - prev) - s.v[g][t]);
            worst = std::max(worst, (prev - u) - s.w[g][t]);
            worst = std::max(worst, gen.p_min * u - s.p_base[g][t]);
            worst = std::max(worst, s.p_base[g][t] - gen.p_max * u);
            worst = std::max(worst, -s.reserve[g][t]);
        }
    }
    return worst;
}

double CostBreakdown::expected_cost(const ScenarioSet& scenarios) const {
    if (scenario_energy.empty()) {
        if (scenarios.size() > 1) throw DomainError("schedule has no recourse dispatch for the contingencies");
        return scenarios.base_probability() * base_energy + commitment();
    }
    return expected_cost_with(*this, scenario_energy, scenarios);
}

double CostBreakdown::scenario_cost(const ScenarioSet& scenarios) const {
    if (scenario_energy.empty()) return 0.0;
    if (scenario_energy.size() != scenarios.size()) throw DomainError("scenario energy does not match the scenario set");
    double total = 0.0;
    for (std::size_t c = 1; c < scenarios.size(); ++c) total += scenarios[c].probability * scenario_energy[c];
    return total;
}

double expected_cost_with(const CostBreakdown& costs, std::span<const double> scenario_energy,
                          const ScenarioSet& scenarios) {
    if (scenario_energy.size() != scenarios.size()) throw DomainError("scenario energy does not match the scenario set");
    double total = scenarios.base_probability() * costs.base_energy + costs.commitment();
    for (std::size_t c = 1; c < scenarios.size(); ++c) total += scenarios[c].probability * scenario_energy[c];
    return total;
}

CostBreakdown evaluate_costs(const Network& net, const Schedule& s) {
    CostBreakdown out;
    for (std::size_t g = 0; g < net.num_generators(); ++g) {
        const auto& gen = net.generators[g];
        for (std::size_t t = 0; t < static_cast<std::size_t>(s.horizon); ++t) {
            out.noload += gen.cost_noload * s.u[g][t];
            out.startup += gen.cost_startup * s.v[g][t];
            out.shutdown += gen.cost_shutdown * s.w[g][t];
            out.base_energy += gen.cost_energy * s.p_base[g][t];
        }
    }
    if (s.p_scenario.size() > 1) {
        out.scenario_energy.assign(s.p_scenario.size(), 0.0);
        for (std::size_t c = 0; c < s.p_scenario.size(); ++c)
            for (std::size_t g = 0; g < net.num_generators(); ++g)
                for (std::size_t t = 0; t < static_cast<std::size_t>(s.horizon); ++t)
                    out.scenario_energy[c] += net.generators[g].cost_energy * s.p_scenario[c][g][t];
    }
    return out;
}

}  // namespace secmkt
