#pragma once

#include "ipop/profile.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ipop {

/// Ordered subset of fleet module ids allowed to carry load.
struct ActiveSet {
    std::vector<std::string> module_ids;

    [[nodiscard]] bool contains(const std::string& id) const;
    [[nodiscard]] std::string label() const; ///< ids joined with '+'
    bool operator==(const ActiveSet& other) const = default;
};

struct ModuleAllocation {
    std::string module_id;
    double p_out = 0.0;
    double p_in = 0.0;
    double current = 0.0;
    bool clamped = false; ///< sits at p_out_min or p_out_max
};

/// Per-module operating points for one total demand.
struct Allocation {
    std::vector<ModuleAllocation> modules;
    double total_p_out = 0.0;
    double total_p_in = 0.0;
    double eta = 0.0;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// Demand at which two active sets deliver the same optimal efficiency.
struct SwitchingPoint {
    double p_total = 0.0;
    ActiveSet set_below;
    ActiveSet set_above;
    double eta_at_switch = 0.0;
};

struct PriorityEntry {
    std::string module_id;
    double peak_eta = 0.0;
    double peak_power = 0.0; ///< output power at the efficiency peak
};

/// Modules ordered by peak efficiency, best first.
struct PriorityList {
    std::vector<PriorityEntry> entries;
};

/// Orders modules by descending peak efficiency; ties broken by lower
/// no-load input power (P_in at i_min), then by module id.
PriorityList build_priority_list(std::span<const ModuleProfile> profiles);

/// Sum of p_out_min / p_out_max over the active modules.
std::pair<double, double> feasible_range(const ActiveSet& active,
                                         std::span<const ModuleProfile> profiles);

/// Splits `demand` across the active modules so total efficiency is
/// maximal: all unclamped modules share one marginal rate dP_out/dP_in,
/// and modules whose share would leave their power bounds are held at the
/// violated bound while the remainder is re-solved on the reduced set.
///
/// FeasibilityError when demand is outside the set's feasible range.
Allocation solve_equal_incremental(const ActiveSet& active, double demand,
                                   std::span<const ModuleProfile> profiles);

/// Locates the demand in [p_lo, p_hi] where the optimal efficiencies of the
/// two sets cross, by bisection on their efficiency difference. Returns
/// nullopt when the difference does not change sign over the bracket.
/// FeasibilityError when either set cannot serve a bracket endpoint.
std::optional<SwitchingPoint> find_switching_point(const ActiveSet& set_a, const ActiveSet& set_b,
                                                   double p_lo, double p_hi,
                                                   std::span<const ModuleProfile> profiles);

/// One demand interval of a dispatch schedule. `feasible == false` marks a
/// gap no candidate set can serve (active is empty there).
struct ScheduleRange {
    double p_lo = 0.0;
    double p_hi = 0.0;
    ActiveSet active;
    double example_demand = 0.0;
    double eta = 0.0;
    bool feasible = true;
};

struct DispatchSchedule {
    std::vector<ScheduleRange> ranges;
    std::vector<SwitchingPoint> switching_points;
};

/// Best feasible candidate set and its allocation for one demand, or
/// nullopt when no candidate can serve it. Candidates are all priority-list
/// prefixes plus every single module; `exhaustive` widens this to every
/// non-empty subset (fleets of at most 12 modules).
std::optional<std::pair<ActiveSet, Allocation>> best_allocation(
    std::span<const ModuleProfile> profiles, double demand, bool exhaustive = false);

/// Sweeps demands over [p_min, p_max] with the given step, picks the best
/// candidate set at each gridpoint, merges equal winners into ranges and
/// refines range boundaries with find_switching_point. Ranges are half-open
/// in spirit: a demand exactly at a switching point belongs to the upper
/// (set_above) range.
DispatchSchedule build_dispatch_schedule(std::span<const ModuleProfile> profiles, double p_min,
                                         double p_max, double step, bool exhaustive = false);

} // namespace ipop
