#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "secmkt/error.hpp"
#include "secmkt/linear_model.hpp"

namespace secmkt {

enum class LpAlgorithm { automatic, dual_simplex, primal_simplex };

/// Everything a backend needs for one solve of a LinearModel.
struct BackendRequest {
    bool relax_integrality = false;
    /// Variables pinned to a value for this solve only.
    std::vector<std::pair<int, double>> fixings;
    double rel_gap = 0.0;
    int seed = 0;
    double feasibility_tol = 1e-6;
    double integrality_tol = 1e-5;
    double time_limit = kInf;
    int threads = 1;
    LpAlgorithm algorithm = LpAlgorithm::automatic;
};

struct BackendResult {
    SolveStatus status = SolveStatus::error;
    double objective = 0.0;
    double dual_bound = -kInf;
    double gap = kInf;
    std::vector<double> x;
    std::vector<double> row_dual;      // d objective / d rhs
    std::vector<double> reduced_cost;  // c - A'y
    bool has_duals = false;
};

/// Narrow solver contract: load a model, set gap/seed/tolerances, solve, query primal and dual.
class SolverBackend {
public:
    virtual ~SolverBackend() = default;
    virtual std::string name() const = 0;
    /// False when concurrent solves must be serialized.
    virtual bool reentrant() const = 0;
    virtual BackendResult solve(const LinearModel& model, const BackendRequest& request) = 0;
};

std::shared_ptr<SolverBackend> make_highs_backend();
/// Backend named by the SECMKT_SOLVER environment variable (default and only bundled: "highs").
std::shared_ptr<SolverBackend> default_backend();

struct SolverOptions {
    double rel_gap = 0.0;
    int seed = 0;
    double feasibility_tol = 1e-6;
    double integrality_tol = 1e-5;
    double time_limit = kInf;
    int threads = 1;
    std::shared_ptr<SolverBackend> backend;  // null: default_backend()
};

struct MipSolution {
    SolveStatus status = SolveStatus::error;
    double objective = 0.0;
    std::vector<double> x;
    double gap = kInf;
    double dual_bound = -kInf;

    bool has_solution() const { return status == SolveStatus::optimal || status == SolveStatus::feasible; }
};

struct LpSolution {
    SolveStatus status = SolveStatus::error;
    double objective = 0.0;
    std::vector<double> x;
    std::vector<double> row_dual;
    std::vector<double> reduced_cost;
    /// Objective of the incumbent the LP was fixed from.
    double incumbent_objective = 0.0;
    /// Largest |x_lp - x_incumbent| over all variables.
    double max_primal_change = 0.0;

    double objective_drift() const;
};

/// Solves the MILP (or LP when no integer variables). Throws SolverError when no
/// solution is available (infeasible, unbounded, failure).
MipSolution solve_mip(const LinearModel& model, const SolverOptions& options = {});

/// Drops integrality, fixes integer variables at the rounded incumbent, and solves the LP for
/// duals. Throws SolverError if the fixed LP is infeasible.
LpSolution fix_and_resolve(const LinearModel& model, const MipSolution& incumbent, const SolverOptions& options = {},
                           LpAlgorithm algorithm = LpAlgorithm::automatic);

struct SolutionPool {
    std::vector<MipSolution> solutions;
    /// Fewer than the requested number of distinct solutions were found.
    bool shortfall = false;
    int solves = 0;
};

/// Up to `count` solutions within `options.rel_gap` of the best one found, pairwise distinct in
/// their binary assignment, generated by iterative no-good cuts over all binary variables.
SolutionPool solution_pool(const LinearModel& model, int count, const SolverOptions& options = {});

}  // namespace secmkt
