#include "secmkt/sensitivity.hpp"

#include <cmath>
#include <string>

#include "secmkt/csv.hpp"
#include "secmkt/error.hpp"

namespace secmkt {

PtdfMatrix compute_ptdf(const Network& net, std::optional<int> reference_bus) {
    const auto n_bus = static_cast<Eigen::Index>(net.num_buses());
    const auto n_line = static_cast<Eigen::Index>(net.num_lines());
    const auto ref = static_cast<Eigen::Index>(net.bus_index(reference_bus.value_or(net.reference_bus)));

    // Reduced nodal susceptance matrix: buses other than the reference, in order.
    auto reduced = [ref](Eigen::Index bus) { return bus < ref ? bus : bus - 1; };
    Eigen::MatrixXd b_red = Eigen::MatrixXd::Zero(n_bus - 1, n_bus - 1);
    for (std::size_t k = 0; k < net.num_lines(); ++k) {
        const double b = 1.0 / net.lines[k].reactance;
        const auto i = static_cast<Eigen::Index>(net.line_from(k));
        const auto j = static_cast<Eigen::Index>(net.line_to(k));
        if (i != ref) b_red(reduced(i), reduced(i)) += b;
        if (j != ref) b_red(reduced(j), reduced(j)) += b;
        if (i != ref && j != ref) {
            b_red(reduced(i), reduced(j)) -= b;
            b_red(reduced(j), reduced(i)) -= b;
        }
    }

    PtdfMatrix ptdf = PtdfMatrix::Zero(n_line, n_bus);
    if (n_bus == 1) return ptdf;

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(b_red);
    if (!(std::abs(lu.determinant()) > 0.0) || !std::isfinite(lu.determinant()))
        throw DomainError("singular susceptance matrix");
    // X = B_red^-1; angle at bus i for a unit injection at bus n is X(i, n).
    const Eigen::MatrixXd x = lu.solve(Eigen::MatrixXd::Identity(n_bus - 1, n_bus - 1));
    if (!x.allFinite()) throw DomainError("singular susceptance matrix");

    for (Eigen::Index k = 0; k < n_line; ++k) {
        const auto& line = net.lines[static_cast<std::size_t>(k)];
        const double b = 1.0 / line.reactance;
        const auto i = static_cast<Eigen::Index>(net.line_from(static_cast<std::size_t>(k)));
        const auto j = static_cast<Eigen::Index>(net.line_to(static_cast<std::size_t>(k)));
        for (Eigen::Index n = 0; n < n_bus; ++n) {
            if (n == ref) continue;
            const double theta_i = i == ref ? 0.0 : x(reduced(i), reduced(n));
            const double theta_j = j == ref ? 0.0 : x(reduced(j), reduced(n));
            ptdf(k, n) = b * (theta_i - theta_j);
        }
    }
    return ptdf;
}

double LodfMatrix::operator()(std::size_t monitored, std::size_t outaged) const {
    if (outaged >= radial_.size() || monitored >= radial_.size())
        throw DomainError("line index out of range");
    if (radial_[outaged])
        throw DomainError("LODF undefined: outage of radial line position " + std::to_string(outaged) +
                          " islands the network");
    if (monitored == outaged) throw DomainError("self-LODF is not part of the model");
    return values_(static_cast<Eigen::Index>(monitored), static_cast<Eigen::Index>(outaged));
}

LodfMatrix compute_lodf(const Network& net, const PtdfMatrix& ptdf) {
    const auto radial = classify_lines(net);
    const auto m = static_cast<Eigen::Index>(net.num_lines());
    Eigen::MatrixXd values = Eigen::MatrixXd::Constant(m, m, std::nan(""));
    for (Eigen::Index l = 0; l < m; ++l) {
        if (radial[static_cast<std::size_t>(l)]) continue;
        const auto f = static_cast<Eigen::Index>(net.line_from(static_cast<std::size_t>(l)));
        const auto t = static_cast<Eigen::Index>(net.line_to(static_cast<std::size_t>(l)));
        const double self = ptdf(l, f) - ptdf(l, t);
        const double denom = 1.0 - self;
        for (Eigen::Index k = 0; k < m; ++k) {
            if (k == l) continue;
            values(k, l) = (ptdf(k, f) - ptdf(k, t)) / denom;
        }
    }
    return LodfMatrix(std::move(values), radial);
}

PtdfMatrix compute_post_ptdf(const Network& net, const PtdfMatrix& ptdf, const LodfMatrix& lodf,
                             std::size_t outaged) {
    const auto m = static_cast<Eigen::Index>(net.num_lines());
    const auto l = static_cast<Eigen::Index>(outaged);
    if (outaged >= lodf.size()) throw DomainError("line index out of range");
    if (lodf.radial(outaged))
        throw DomainError("post-contingency PTDF undefined: line position " + std::to_string(outaged) +
                          " is radial");
    PtdfMatrix post = ptdf;
    for (Eigen::Index k = 0; k < m; ++k) {
        if (k == l) {
            post.row(k).setZero();
            continue;
        }
        post.row(k) += lodf(static_cast<std::size_t>(k), outaged) * ptdf.row(l);
    }
    return post;
}

PtdfMatrix compute_post_ptdf(const Network& net, std::size_t outaged) {
    const auto ptdf = compute_ptdf(net);
    return compute_post_ptdf(net, ptdf, compute_lodf(net, ptdf), outaged);
}

SensitivityFactors::SensitivityFactors(const Network& net)
    : net_(net), ptdf_(compute_ptdf(net)), radial_(classify_lines(net)), lodf_(compute_lodf(net, ptdf_)) {}

const PtdfMatrix& SensitivityFactors::ptdf_post(std::size_t outaged) const {
    std::lock_guard lock(cache_mutex_);
    auto it = post_cache_.find(outaged);
    if (it == post_cache_.end()) {
        auto post = std::make_unique<PtdfMatrix>(compute_post_ptdf(net_, ptdf_, lodf_, outaged));
        it = post_cache_.emplace(outaged, std::move(post)).first;
    }
    return *it->second;
}

void SensitivityFactors::dump_csv(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    {
        CsvWriter w(dir / "ptdf_base.csv");
        w.cell("line");
        for (const auto& b : net_.buses) w.cell("bus" + std::to_string(b.id));
        w.end_row();
        for (Eigen::Index k = 0; k < ptdf_.rows(); ++k) {
            w.cell(net_.lines[static_cast<std::size_t>(k)].id);
            for (Eigen::Index n = 0; n < ptdf_.cols(); ++n) w.cell(ptdf_(k, n));
            w.end_row();
        }
    }
    {
        CsvWriter w(dir / "lodf.csv");
        w.cell("monitored\\outaged");
        for (const auto& l : net_.lines) w.cell("line" + std::to_string(l.id));
        w.end_row();
        for (std::size_t k = 0; k < net_.num_lines(); ++k) {
            w.cell(net_.lines[k].id);
            for (std::size_t l = 0; l < net_.num_lines(); ++l) {
                if (lodf_.defined(k, l))
                    w.cell(lodf_(k, l));
                else
                    w.cell("");
            }
            w.end_row();
        }
    }
}

std::vector<double> line_flows(const PtdfMatrix& ptdf, std::span<const double> injection) {
    std::vector<double> flows(static_cast<std::size_t>(ptdf.rows()), 0.0);
    for (Eigen::Index k = 0; k < ptdf.rows(); ++k) {
        double f = 0.0;
        for (Eigen::Index n = 0; n < ptdf.cols(); ++n) f += ptdf(k, n) * injection[static_cast<std::size_t>(n)];
        flows[static_cast<std::size_t>(k)] = f;
    }
    return flows;
}

}  // namespace secmkt
