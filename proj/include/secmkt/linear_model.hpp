#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace secmkt {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { less_equal, equal, greater_equal };

/// Semantic label of a variable or constraint: an equation family plus up to three indices.
/// The rendered name is `family[i,j,k]` with unused (negative) indices dropped.
struct Tag {
    std::uint16_t family = 0;
    std::int32_t i = -1;
    std::int32_t j = -1;
    std::int32_t k = -1;

    bool operator==(const Tag&) const = default;
    auto operator<=>(const Tag&) const = default;
};

struct Term {
    int var;
    double coef;
};

/// Mixed-integer linear program in minimization form, solver agnostic.
class LinearModel {
public:
    /// Registers (or looks up) an equation family and returns its id.
    std::uint16_t family(std::string_view name);
    std::optional<std::uint16_t> find_family(std::string_view name) const;
    const std::string& family_name(std::uint16_t id) const { return families_.at(id); }
    std::size_t num_families() const { return families_.size(); }

    int add_variable(Tag tag, double lb, double ub, double cost = 0.0, bool integer = false);
    int add_variable(std::string_view name, double lb, double ub, double cost = 0.0, bool integer = false) {
        return add_variable(Tag{family(name)}, lb, ub, cost, integer);
    }
    /// Duplicate variables in `terms` are merged; zero coefficients dropped.
    int add_constraint(Tag tag, std::span<const Term> terms, Sense sense, double rhs);
    int add_constraint(Tag tag, std::initializer_list<Term> terms, Sense sense, double rhs) {
        return add_constraint(tag, std::span<const Term>(terms.begin(), terms.size()), sense, rhs);
    }
    int add_constraint(std::string_view name, std::initializer_list<Term> terms, Sense sense, double rhs) {
        return add_constraint(Tag{family(name)}, terms, sense, rhs);
    }

    void set_cost(int var, double cost) { cost_.at(static_cast<std::size_t>(var)) = cost; }
    void set_bounds(int var, double lb, double ub);
    void set_integer(int var, bool integer) { integer_.at(static_cast<std::size_t>(var)) = integer; }

    std::size_t num_variables() const { return lb_.size(); }
    std::size_t num_constraints() const { return sense_.size(); }
    std::size_t num_nonzeros() const { return index_.size(); }
    std::size_t num_integer() const;

    double lower(int var) const { return lb_[static_cast<std::size_t>(var)]; }
    double upper(int var) const { return ub_[static_cast<std::size_t>(var)]; }
    double cost(int var) const { return cost_[static_cast<std::size_t>(var)]; }
    bool is_integer(int var) const { return integer_[static_cast<std::size_t>(var)]; }
    const Tag& variable_tag(int var) const { return var_tags_[static_cast<std::size_t>(var)]; }

    Sense sense(int row) const { return sense_[static_cast<std::size_t>(row)]; }
    double rhs(int row) const { return rhs_[static_cast<std::size_t>(row)]; }
    const Tag& constraint_tag(int row) const { return row_tags_[static_cast<std::size_t>(row)]; }
    std::span<const int> row_indices(int row) const;
    std::span<const double> row_values(int row) const;

    std::string variable_name(int var) const { return render(var_tags_[static_cast<std::size_t>(var)]); }
    std::string constraint_name(int row) const { return render(row_tags_[static_cast<std::size_t>(row)]); }
    std::string render(const Tag& tag) const;

    /// Checks bound consistency and name uniqueness; throws ValidationError.
    void validate() const;

    double objective_value(std::span<const double> x) const;
    double row_activity(int row, std::span<const double> x) const;
    /// Largest bound or row violation of `x`.
    double max_violation(std::span<const double> x) const;
    /// Largest distance of an integer variable from the nearest integer.
    double max_integrality_violation(std::span<const double> x) const;

    /// Dual objective b'y + bound terms for an LP given row duals and reduced costs.
    double dual_objective(std::span<const double> row_dual, std::span<const double> reduced_cost) const;

    // Raw arrays for solver backends.
    const std::vector<double>& lower_bounds() const { return lb_; }
    const std::vector<double>& upper_bounds() const { return ub_; }
    const std::vector<double>& costs() const { return cost_; }
    const std::vector<std::size_t>& row_starts() const { return start_; }
    const std::vector<int>& column_indices() const { return index_; }
    const std::vector<double>& coefficients() const { return value_; }

private:
    std::vector<std::string> families_;
    std::unordered_map<std::string, std::uint16_t> family_ids_;

    std::vector<double> lb_, ub_, cost_;
    std::vector<bool> integer_;
    std::vector<Tag> var_tags_;

    std::vector<std::size_t> start_{0};
    std::vector<int> index_;
    std::vector<double> value_;
    std::vector<Sense> sense_;
    std::vector<double> rhs_;
    std::vector<Tag> row_tags_;
};

/// Free-format MPS with integer markers. Names are the rendered tags.
void write_mps(const LinearModel& model, const std::filesystem::path& path, std::string_view name = "SECMKT");
std::string to_mps(const LinearModel& model, std::string_view name = "SECMKT");

/// Per-family variable, constraint, and nonzero counts.
struct FamilyStats {
    std::string family;
    std::size_t variables = 0;
    std::size_t constraints = 0;
    std::size_t nonzeros = 0;
};
std::vector<FamilyStats> model_statistics(const LinearModel& model);
void write_model_statistics(const LinearModel& model, const std::filesystem::path& path);

}  // namespace secmkt
