#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "secmkt/network.hpp"

namespace secmkt {

/// Entries with magnitude below this are treated as structural zeros when building models.
inline constexpr double kSensitivityZero = 1e-10;

/// Line-by-bus DC power transfer distribution factors. Row k, column n: MW on line k per MW
/// injected at bus n and withdrawn at the reference bus.
using PtdfMatrix = Eigen::MatrixXd;

/// Base-topology PTDF. `reference_bus` (an id) overrides the network's reference.
PtdfMatrix compute_ptdf(const Network& net, std::optional<int> reference_bus = std::nullopt);

/// Line outage distribution factors. Entry (k, l) is defined only for non-radial l and k != l.
class LodfMatrix {
public:
    LodfMatrix() = default;
    LodfMatrix(Eigen::MatrixXd values, std::vector<bool> radial)
        : values_(std::move(values)), radial_(std::move(radial)) {}

    /// Throws DomainError for radial `outaged` or `monitored == outaged`.
    double operator()(std::size_t monitored, std::size_t outaged) const;
    bool defined(std::size_t monitored, std::size_t outaged) const {
        return monitored != outaged && !radial_[outaged];
    }
    bool radial(std::size_t line) const { return radial_[line]; }
    std::size_t size() const { return radial_.size(); }

private:
    Eigen::MatrixXd values_;
    std::vector<bool> radial_;
};

LodfMatrix compute_lodf(const Network& net, const PtdfMatrix& ptdf);

/// Post-contingency PTDF for the topology with line `outaged` removed, built from base factors.
/// The outaged line's own row is zero. Throws DomainError for a radial line.
PtdfMatrix compute_post_ptdf(const Network& net, const PtdfMatrix& ptdf, const LodfMatrix& lodf,
                             std::size_t outaged);
PtdfMatrix compute_post_ptdf(const Network& net, std::size_t outaged);

/// Base factors plus a lazily filled, thread-safe cache of post-contingency PTDFs.
class SensitivityFactors {
public:
    explicit SensitivityFactors(const Network& net);

    const PtdfMatrix& ptdf_base() const { return ptdf_; }
    const LodfMatrix& lodf() const { return lodf_; }
    const std::vector<bool>& radial() const { return radial_; }
    /// Materialized on first request per line.
    const PtdfMatrix& ptdf_post(std::size_t outaged) const;

    /// ptdf_base.csv, lodf.csv (blank where undefined).
    void dump_csv(const std::filesystem::path& dir) const;

private:
    Network net_;
    PtdfMatrix ptdf_;
    std::vector<bool> radial_;
    LodfMatrix lodf_;
    mutable std::mutex cache_mutex_;
    mutable std::map<std::size_t, std::unique_ptr<PtdfMatrix>> post_cache_;
};

/// DC line flows for a bus injection vector (indexed by bus position).
std::vector<double> line_flows(const PtdfMatrix& ptdf, std::span<const double> injection);

}  // namespace secmkt
