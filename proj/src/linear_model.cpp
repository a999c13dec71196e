#include "secmkt/linear_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"

namespace secmkt {

std::uint16_t LinearModel::family(std::string_view name) {
    auto it = family_ids_.find(std::string(name));
    if (it != family_ids_.end()) return it->second;
    if (families_.size() >= 0xffff) throw DomainError("too many equation families");
    auto id = static_cast<std::uint16_t>(families_.size());
    families_.emplace_back(name);
    family_ids_.emplace(std::string(name), id);
    return id;
}

std::optional<std::uint16_t> LinearModel::find_family(std::string_view name) const {
    auto it = family_ids_.find(std::string(name));
    if (it == family_ids_.end()) return std::nullopt;
    return it->second;
}

int LinearModel::add_variable(Tag tag, double lb, double ub, double cost, bool integer) {
    if (tag.family >= families_.size()) throw DomainError("variable tag uses an unregistered family");
    if (lb > ub) throw DomainError("variable " + render(tag) + ": lower bound exceeds upper bound");
    lb_.push_back(lb);
    ub_.push_back(ub);
    cost_.push_back(cost);
    integer_.push_back(integer);
    var_tags_.push_back(tag);
    return static_cast<int>(lb_.size() - 1);
}

int LinearModel::add_constraint(Tag tag, std::span<const Term> terms, Sense sense, double rhs) {
    if (tag.family >= families_.size()) throw DomainError("constraint tag uses an unregistered family");
    for (const auto& t : terms) {
        if (t.var < 0 || static_cast<std::size_t>(t.var) >= lb_.size())
            throw DomainError("constraint " + render(tag) + " references an undeclared variable");
    }
    std::vector<Term> sorted(terms.begin(), terms.end());
    std::sort(sorted.begin(), sorted.end(), [](const Term& a, const Term& b) { return a.var < b.var; });
    for (std::size_t p = 0; p < sorted.size();) {
        int var = sorted[p].var;
        double coef = 0.0;
        for (; p < sorted.size() && sorted[p].var == var; ++p) coef += sorted[p].coef;
        if (coef != 0.0) {
            index_.push_back(var);
            value_.push_back(coef);
        }
    }
    start_.push_back(index_.size());
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    row_tags_.push_back(tag);
    return static_cast<int>(sense_.size() - 1);
}

void LinearModel::set_bounds(int var, double lb, double ub) {
    if (lb > ub) throw DomainError("variable " + variable_name(var) + ": lower bound exceeds upper bound");
    lb_.at(static_cast<std::size_t>(var)) = lb;
    ub_.at(static_cast<std::size_t>(var)) = ub;
}

std::size_t LinearModel::num_integer() const {
    return static_cast<std::size_t>(std::count(integer_.begin(), integer_.end(), true));
}

std::span<const int> LinearModel::row_indices(int row) const {
    auto r = static_cast<std::size_t>(row);
    return {index_.data() + start_[r], start_[r + 1] - start_[r]};
}

std::span<const double> LinearModel::row_values(int row) const {
    auto r = static_cast<std::size_t>(row);
    return {value_.data() + start_[r], start_[r + 1] - start_[r]};
}

std::string LinearModel::render(const Tag& tag) const {
    std::string out = tag.family < families_.size() ? families_[tag.family] : "?";
    if (tag.i < 0 && tag.j < 0 && tag.k < 0) return out;
    out += '[';
    bool first = true;
    for (auto idx : {tag.i, tag.j, tag.k}) {
        if (idx < 0) continue;
        if (!first) out += ',';
        out += std::to_string(idx);
        first = false;
    }
    out += ']';
    return out;
}

void LinearModel::validate() const {
    for (std::size_t v = 0; v < lb_.size(); ++v)
        if (lb_[v] > ub_[v]) throw ValidationError("inconsistent bounds on " + render(var_tags_[v]));
    auto check_unique = [this](std::vector<Tag> tags, const char* what) {
        std::sort(tags.begin(), tags.end());
        auto dup = std::adjacent_find(tags.begin(), tags.end());
        if (dup != tags.end())
            throw ValidationError(std::string("duplicate ") + what + " name " + render(*dup));
    };
    check_unique(var_tags_, "variable");
    check_unique(row_tags_, "constraint");
}

double LinearModel::objective_value(std::span<const double> x) const {
    double z = 0.0;
    for (std::size_t v = 0; v < cost_.size(); ++v) z += cost_[v] * x[v];
    return z;
}

double LinearModel::row_activity(int row, std::span<const double> x) const {
    double a = 0.0;
    auto idx = row_indices(row);
    auto val = row_values(row);
    for (std::size_t p = 0; p < idx.size(); ++p) a += val[p] * x[static_cast<std::size_t>(idx[p])];
    return a;
}

double LinearModel::max_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t v = 0; v < lb_.size(); ++v) {
        worst = std::max(worst, lb_[v] - x[v]);
        worst = std::max(worst, x[v] - ub_[v]);
    }
    for (std::size_t r = 0; r < sense_.size(); ++r) {
        const double a = row_activity(static_cast<int>(r), x);
        switch (sense_[r]) {
            case Sense::less_equal: worst = std::max(worst, a - rhs_[r]); break;
            case Sense::greater_equal: worst = std::max(worst, rhs_[r] - a); break;
            case Sense::equal: worst = std::max(worst, std::abs(a - rhs_[r])); break;
        }
    }
    return worst;
}

double LinearModel::max_integrality_violation(std::span<const double> x) const {
    double worst = 0.0;
    for (std::size_t v = 0; v < lb_.size(); ++v)
        if (integer_[v]) worst = std::max(worst, std::abs(x[v] - std::round(x[v])));
    return worst;
}

double LinearModel::dual_objective(std::span<const double> row_dual, std::span<const double> reduced_cost) const {
    double z = 0.0;
    for (std::size_t r = 0; r < rhs_.size(); ++r) z += rhs_[r] * row_dual[r];
    for (std::size_t v = 0; v < lb_.size(); ++v) {
        const double d = reduced_cost[v];
        if (d > 0.0 && std::isfinite(lb_[v])) z += d * lb_[v];
        if (d < 0.0 && std::isfinite(ub_[v])) z += d * ub_[v];
    }
    return z;
}

namespace {

std::string mps_number(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string to_mps(const LinearModel& model, std::string_view name) {
    std::ostringstream os;
    os << "NAME " << name << "\n";
    os << "ROWS\n N  obj\n";
    for (std::size_t r = 0; r < model.num_constraints(); ++r) {
        const char* s = "E";
        switch (model.sense(static_cast<int>(r))) {
            case Sense::less_equal: s = "L"; break;
            case Sense::greater_equal: s = "G"; break;
            case Sense::equal: s = "E"; break;
        }
        os << " " << s << "  " << model.constraint_name(static_cast<int>(r)) << "\n";
    }

    // Transpose to column order.
    const auto n = model.num_variables();
    std::vector<std::vector<std::pair<int, double>>> cols(n);
    for (std::size_t r = 0; r < model.num_constraints(); ++r) {
        auto idx = model.row_indices(static_cast<int>(r));
        auto val = model.row_values(static_cast<int>(r));
        for (std::size_t p = 0; p < idx.size(); ++p)
            cols[static_cast<std::size_t>(idx[p])].emplace_back(static_cast<int>(r), val[p]);
    }

    os << "COLUMNS\n";
    bool in_int = false;
    int marker = 0;
    for (std::size_t v = 0; v < n; ++v) {
        const int var = static_cast<int>(v);
        if (model.is_integer(var) != in_int) {
            in_int = model.is_integer(var);
            os << "    MARKER" << marker++ << "  'MARKER'  " << (in_int ? "'INTORG'" : "'INTEND'") << "\n";
        }
        const auto cname = model.variable_name(var);
        bool wrote = false;
        if (model.cost(var) != 0.0) {
            os << "    " << cname << "  obj  " << mps_number(model.cost(var)) << "\n";
            wrote = true;
        }
        for (const auto& [row, coef] : cols[v]) {
            os << "    " << cname << "  " << model.constraint_name(row) << "  " << mps_number(coef) << "\n";
            wrote = true;
        }
        if (!wrote) os << "    " << cname << "  obj  0\n";
    }
    if (in_int) os << "    MARKER" << marker++ << "  'MARKER'  'INTEND'\n";

    os << "RHS\n";
    for (std::size_t r = 0; r < model.num_constraints(); ++r) {
        const double b = model.rhs(static_cast<int>(r));
        if (b != 0.0) os << "    rhs  " << model.constraint_name(static_cast<int>(r)) << "  " << mps_number(b) << "\n";
    }

    os << "BOUNDS\n";
    for (std::size_t v = 0; v < n; ++v) {
        const int var = static_cast<int>(v);
        const auto cname = model.variable_name(var);
        const double lb = model.lower(var);
        const double ub = model.upper(var);
        if (lb == ub) {
            os << " FX bnd  " << cname << "  " << mps_number(lb) << "\n";
            continue;
        }
        if (std::isinf(lb) && std::isinf(ub)) {
            os << " FR bnd  " << cname << "\n";
            continue;
        }
        if (std::isinf(lb))
            os << " MI bnd  " << cname << "\n";
        else if (lb != 0.0 || model.is_integer(var))
            os << " LO bnd  " << cname << "  " << mps_number(lb) << "\n";
        if (std::isinf(ub)) {
            if (model.is_integer(var)) os << " PL bnd  " << cname << "\n";
        } else {
            os << " UP bnd  " << cname << "  " << mps_number(ub) << "\n";
        }
    }
    os << "ENDATA\n";
    return os.str();
}

void write_mps(const LinearModel& model, const std::filesystem::path& path, std::string_view name) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << to_mps(model, name);
}

std::vector<FamilyStats> model_statistics(const LinearModel& model) {
    std::vector<FamilyStats> stats(model.num_families());
    for (std::size_t f = 0; f < stats.size(); ++f) stats[f].family = model.family_name(static_cast<std::uint16_t>(f));
    for (std::size_t v = 0; v < model.num_variables(); ++v) ++stats[model.variable_tag(static_cast<int>(v)).family].variables;
    for (std::size_t r = 0; r < model.num_constraints(); ++r) {
        auto& s = stats[model.constraint_tag(static_cast<int>(r)).family];
        ++s.constraints;
        s.nonzeros += model.row_indices(static_cast<int>(r)).size();
    }
    return stats;
}

void write_model_statistics(const LinearModel& model, const std::filesystem::path& path) {
    CsvWriter w(path);
    w.header({"family", "variables", "constraints", "nonzeros"});
    std::size_t nv = 0, nc = 0, nz = 0;
    for (const auto& s : model_statistics(model)) {
        w.cell(s.family).cell(s.variables).cell(s.constraints).cell(s.nonzeros).end_row();
        nv += s.variables;
        nc += s.constraints;
        nz += s.nonzeros;
    }
    w.cell("total").cell(nv).cell(nc).cell(nz).end_row();
}

}  // namespace secmkt
