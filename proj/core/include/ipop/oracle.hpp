#pragma once

#include "ipop/dispatch.hpp"
#include "ipop/profile.hpp"

#include <cstdint>
#include <span>

namespace ipop {

/// Outcome of a brute-force search, with enough bookkeeping to audit cost.
struct OracleResult {
    Allocation best;
    ActiveSet active_set;
    double grid_step = 0.0;
    std::uint64_t evaluations = 0;
};

/// Exhaustive search over the demand simplex on a fixed power grid. All but
/// the last module sweep their own grids; the last module absorbs the exact
/// remainder, so the demand constraint holds without searching it. Intended
/// for validation only: fleets of more than 4 modules are refused.
/// Ties resolve to the lexicographically smallest allocation vector.
[[nodiscard]] OracleResult grid_search(const ActiveSet& active, double demand, double step,
                                       std::span<const ModuleProfile> profiles);

/// Runs grid_search over every non-empty subset of the fleet that can serve
/// the demand and returns the global best. evaluations sums over subsets.
[[nodiscard]] OracleResult enumerate_combinations(std::span<const ModuleProfile> profiles,
                                                  double demand, double step);

} // namespace ipop
