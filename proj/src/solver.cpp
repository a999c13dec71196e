#include "secmkt/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <mutex>

#include "Highs.h"

namespace secmkt {

const char* to_string(SolveStatus status) {
    switch (status) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::feasible: return "feasible";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::limit_reached: return "limit_reached";
        case SolveStatus::error: return "error";
    }
    return "unknown";
}

namespace {

class HighsBackend final : public SolverBackend {
public:
    std::string name() const override { return "highs"; }
    bool reentrant() const override { return false; }

    BackendResult solve(const LinearModel& model, const BackendRequest& req) override {
        const auto n = model.num_variables();
        const auto m = model.num_constraints();

        HighsLp lp;
        lp.num_col_ = static_cast<HighsInt>(n);
        lp.num_row_ = static_cast<HighsInt>(m);
        lp.sense_ = ObjSense::kMinimize;
        lp.col_cost_ = model.costs();
        lp.col_lower_ = model.lower_bounds();
        lp.col_upper_ = model.upper_bounds();
        for (auto& v : lp.col_lower_)
            if (std::isinf(v)) v = -kHighsInf;
        for (auto& v : lp.col_upper_)
            if (std::isinf(v)) v = kHighsInf;
        for (const auto& [var, value] : req.fixings) {
            lp.col_lower_[static_cast<std::size_t>(var)] = value;
            lp.col_upper_[static_cast<std::size_t>(var)] = value;
        }
        lp.row_lower_.resize(m);
        lp.row_upper_.resize(m);
        for (std::size_t r = 0; r < m; ++r) {
            const double b = model.rhs(static_cast<int>(r));
            switch (model.sense(static_cast<int>(r))) {
                case Sense::less_equal: lp.row_lower_[r] = -kHighsInf; lp.row_upper_[r] = b; break;
                case Sense::greater_equal: lp.row_lower_[r] = b; lp.row_upper_[r] = kHighsInf; break;
                case Sense::equal: lp.row_lower_[r] = b; lp.row_upper_[r] = b; break;
            }
        }
        lp.a_matrix_.format_ = MatrixFormat::kRowwise;
        lp.a_matrix_.num_col_ = lp.num_col_;
        lp.a_matrix_.num_row_ = lp.num_row_;
        lp.a_matrix_.start_.assign(model.row_starts().begin(), model.row_starts().end());
        lp.a_matrix_.index_.assign(model.column_indices().begin(), model.column_indices().end());
        lp.a_matrix_.value_ = model.coefficients();

        bool mip = false;
        if (!req.relax_integrality && model.num_integer() > 0) {
            mip = true;
            lp.integrality_.resize(n);
            for (std::size_t v = 0; v < n; ++v)
                lp.integrality_[v] = model.is_integer(static_cast<int>(v)) ? HighsVarType::kInteger
                                                                             : HighsVarType::kContinuous;
        }

        Highs highs;
        highs.setOptionValue("output_flag", false);
        highs.setOptionValue("threads", std::max(1, req.threads));
        highs.setOptionValue("random_seed", req.seed);
        highs.setOptionValue("mip_rel_gap", req.rel_gap);
        highs.setOptionValue("primal_feasibility_tolerance", std::min(1e-7, req.feasibility_tol));
        highs.setOptionValue("mip_feasibility_tolerance", std::min(req.feasibility_tol, req.integrality_tol));
        if (std::isfinite(req.time_limit)) highs.setOptionValue("time_limit", req.time_limit);
        switch (req.algorithm) {
            case LpAlgorithm::automatic: break;
            case LpAlgorithm::dual_simplex:
                highs.setOptionValue("solver", "simplex");
                highs.setOptionValue("simplex_strategy", 1);
                break;
            case LpAlgorithm::primal_simplex:
                highs.setOptionValue("solver", "simplex");
                highs.setOptionValue("simplex_strategy", 4);
                highs.setOptionValue("presolve", "off");
                break;
        }

        BackendResult out;
        if (highs.passModel(std::move(lp)) == HighsStatus::kError) {
            out.status = SolveStatus::error;
            return out;
        }
        if (highs.run() == HighsStatus::kError) {
            out.status = SolveStatus::error;
            return out;
        }

        const auto status = highs.getModelStatus();
        const auto& info = highs.getInfo();
        const auto& sol = highs.getSolution();
        switch (status) {
            case HighsModelStatus::kOptimal: out.status = SolveStatus::optimal; break;
            case HighsModelStatus::kInfeasible: out.status = SolveStatus::infeasible; break;
            case HighsModelStatus::kUnbounded:
            case HighsModelStatus::kUnboundedOrInfeasible: out.status = SolveStatus::unbounded; break;
            case HighsModelStatus::kTimeLimit:
            case HighsModelStatus::kIterationLimit:
            case HighsModelStatus::kSolutionLimit:
            case HighsModelStatus::kInterrupt:
                out.status = sol.value_valid ? SolveStatus::feasible : SolveStatus::limit_reached;
                break;
            default: out.status = SolveStatus::error; break;
        }
        if (sol.value_valid) {
            out.x = sol.col_value;
            out.objective = info.objective_function_value;
        }
        if (mip) {
            out.gap = info.mip_gap;
            out.dual_bound = info.mip_dual_bound;
        } else if (out.status == SolveStatus::optimal) {
            out.gap = 0.0;
            out.dual_bound = out.objective;
        }
        if (!mip && sol.dual_valid) {
            out.row_dual = sol.row_dual;
            out.reduced_cost = sol.col_dual;
            out.has_duals = true;
        }
        return out;
    }
};

std::mutex& backend_mutex() {
    static std::mutex mutex;
    return mutex;
}

BackendResult run_backend(const LinearModel& model, const BackendRequest& req, const SolverOptions& options) {
    auto backend = options.backend ? options.backend : default_backend();
    if (backend->reentrant()) return backend->solve(model, req);
    std::lock_guard lock(backend_mutex());
    return backend->solve(model, req);
}

BackendRequest make_request(const SolverOptions& options) {
    BackendRequest req;
    req.rel_gap = options.rel_gap;
    req.seed = options.seed;
    req.feasibility_tol = options.feasibility_tol;
    req.integrality_tol = options.integrality_tol;
    req.time_limit = options.time_limit;
    req.threads = options.threads;
    return req;
}

}  // namespace

std::shared_ptr<SolverBackend> make_highs_backend() { return std::make_shared<HighsBackend>(); }

std::shared_ptr<SolverBackend> default_backend() {
    static const std::shared_ptr<SolverBackend> backend = [] {
        const char* env = std::getenv("SECMKT_SOLVER");
        std::string name = env ? env : "highs";
        if (name != "highs") throw Error("unknown solver backend '" + name + "' (available: highs)");
        return make_highs_backend();
    }();
    return backend;
}

double LpSolution::objective_drift() const {
    return std::abs(objective - incumbent_objective) / std::max(1.0, std::abs(incumbent_objective));
}

MipSolution solve_mip(const LinearModel& model, const SolverOptions& options) {
    auto result = run_backend(model, make_request(options), options);
    if (result.status != SolveStatus::optimal && result.status != SolveStatus::feasible)
        throw SolverError(std::string("MIP solve failed: ") + to_string(result.status), result.status);
    MipSolution sol;
    sol.status = result.status;
    sol.x = std::move(result.x);
    // Snap integers so downstream consumers see exact 0/1 values.
    for (std::size_t v = 0; v < sol.x.size(); ++v)
        if (model.is_integer(static_cast<int>(v))) sol.x[v] = std::round(sol.x[v]);
    sol.objective = model.objective_value(sol.x);
    sol.gap = result.gap;
    sol.dual_bound = result.dual_bound;
    return sol;
}

LpSolution fix_and_resolve(const LinearModel& model, const MipSolution& incumbent, const SolverOptions& options,
                           LpAlgorithm algorithm) {
    if (incumbent.x.size() != model.num_variables())
        throw DomainError("incumbent does not match the model dimension");
    auto req = make_request(options);
    req.relax_integrality = true;
    req.algorithm = algorithm;
    for (std::size_t v = 0; v < model.num_variables(); ++v)
        if (model.is_integer(static_cast<int>(v))) req.fixings.emplace_back(static_cast<int>(v), std::round(incumbent.x[v]));

    auto result = run_backend(model, req, options);
    if (result.status != SolveStatus::optimal)
        throw SolverError(std::string("fixed LP re-solve failed: ") + to_string(result.status), result.status);
    if (!result.has_duals) throw SolverError("fixed LP re-solve returned no duals", SolveStatus::error);

    LpSolution lp;
    lp.status = result.status;
    lp.x = std::move(result.x);
    lp.objective = model.objective_value(lp.x);
    lp.row_dual = std::move(result.row_dual);
    lp.reduced_cost = std::move(result.reduced_cost);
    lp.incumbent_objective = incumbent.objective;
    for (std::size_t v = 0; v < lp.x.size(); ++v)
        lp.max_primal_change = std::max(lp.max_primal_change, std::abs(lp.x[v] - incumbent.x[v]));
    return lp;
}

SolutionPool solution_pool(const LinearModel& model, int count, const SolverOptions& options) {
    if (count < 1) throw DomainError("solution pool size must be >= 1");
    std::vector<int> binaries;
    for (std::size_t v = 0; v < model.num_variables(); ++v) {
        const int var = static_cast<int>(v);
        if (!model.is_integer(var)) continue;
        if (model.lower(var) < 0.0 || model.upper(var) > 1.0)
            throw DomainError("no-good cuts require binary integer variables; " + model.variable_name(var) + " is not");
        binaries.push_back(var);
    }

    SolutionPool pool;
    LinearModel work = model;
    const auto cut_family = work.family("pool_nogood");
    const auto cutoff_family = work.family("pool_cutoff");

    auto first = solve_mip(work, options);
    ++pool.solves;
    pool.solutions.push_back(first);

    if (count > 1) {
        if (binaries.empty()) {
            pool.shortfall = true;
            return pool;
        }
        std::vector<Term> objective;
        for (std::size_t v = 0; v < work.num_variables(); ++v)
            if (work.cost(static_cast<int>(v)) != 0.0) objective.push_back({static_cast<int>(v), work.cost(static_cast<int>(v))});
        work.add_constraint(Tag{cutoff_family}, objective, Sense::less_equal,
                            first.objective + options.rel_gap * std::abs(first.objective) + 1e-9 * std::max(1.0, std::abs(first.objective)));
    }

    while (static_cast<int>(pool.solutions.size()) < count) {
        const auto& last = pool.solutions.back();
        std::vector<Term> cut;
        double ones = 0.0;
        for (int var : binaries) {
            if (last.x[static_cast<std::size_t>(var)] > 0.5) {
                cut.push_back({var, -1.0});
                ones += 1.0;
            } else {
                cut.push_back({var, 1.0});
            }
        }
        work.add_constraint(Tag{cut_family, static_cast<std::int32_t>(pool.solutions.size())}, cut,
                            Sense::greater_equal, 1.0 - ones);
        MipSolution next;
        try {
            next = solve_mip(work, options);
        } catch (const SolverError& e) {
            if (e.status() == SolveStatus::infeasible) {
                pool.shortfall = true;
                ++pool.solves;
                break;
            }
            throw;
        }
        ++pool.solves;
        next.x.resize(model.num_variables());
        pool.solutions.push_back(std::move(next));
    }

    // Keep members within the gap of the best objective actually found.
    double best = kInf;
    for (const auto& s : pool.solutions) best = std::min(best, s.objective);
    const double limit = best + options.rel_gap * std::abs(best) + 1e-9 * std::max(1.0, std::abs(best));
    std::erase_if(pool.solutions, [limit](const MipSolution& s) { return s.objective > limit; });
    if (static_cast<int>(pool.solutions.size()) < count) pool.shortfall = true;
    return pool;
}

}  // namespace secmkt
