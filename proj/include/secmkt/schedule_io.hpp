#pragma once

#include <filesystem>

#include "secmkt/market_models.hpp"

namespace secmkt {

/// Columns generator, hour, u, v, w, p, reserve (base-case dispatch only).
void write_schedule_csv(const Schedule& schedule, const Network& net, const std::filesystem::path& path);

/// Reads the format written by write_schedule_csv. Every (generator, hour) of `net` must appear
/// exactly once. The result carries no recourse dispatch.
Schedule read_schedule_csv(const Network& net, const std::filesystem::path& path);

/// Columns metric, value.
void write_costs_csv(const CostBreakdown& costs, const ScenarioSet& scenarios, const std::filesystem::path& path);

}  // namespace secmkt
