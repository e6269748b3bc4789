#pragma once

#include "ipop/dispatch.hpp"
#include "ipop/profile.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ipoptest {

// Closed-form pair used across the suite: in output-power terms
// A costs P + 0.002 P^2 + 3 and B costs P + 0.001 P^2 + 6, both on
// [10, 400] W, so demand 300 W splits (100, 200) with eta = 300/369.
inline std::vector<ipop::ModuleProfile> closed_form_fleet(double b_p_max = 400.0) {
    std::vector<ipop::ModuleProfile> fleet;
    fleet.push_back(ipop::quadratic_loss_profile("A", 3.0, 0.002, 10.0, 400.0));
    fleet.push_back(ipop::quadratic_loss_profile("B", 6.0, 0.001, 10.0, b_p_max));
    return fleet;
}

// n copies of the module P_in = P + 0.001 P^2 + 5 on [10, 400] W. A lone
// copy and a pair have equal optimal efficiency at exactly 100 W.
inline std::vector<ipop::ModuleProfile> identical_fleet(int n, double a0 = 5.0,
                                                        double a2 = 0.001) {
    std::vector<ipop::ModuleProfile> fleet;
    for (int i = 0; i < n; ++i) {
        fleet.push_back(
            ipop::quadratic_loss_profile("m" + std::to_string(i + 1), a0, a2, 10.0, 400.0));
    }
    return fleet;
}

inline ipop::ActiveSet full_set(const std::vector<ipop::ModuleProfile>& fleet) {
    ipop::ActiveSet set;
    for (const ipop::ModuleProfile& m : fleet) {
        set.module_ids.push_back(m.module_id());
    }
    return set;
}

// Seeded quadratic-loss fleet with spans kept small enough that a 0.1 W
// grid oracle over m-1 free axes stays affordable.
inline std::vector<ipop::ModuleProfile> random_quadratic_fleet(std::uint64_t seed, int count) {
    std::mt19937_64 eng(seed);
    auto uniform = [&eng](double lo, double hi) {
        const double u = static_cast<double>(eng() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    };
    std::vector<ipop::ModuleProfile> fleet;
    fleet.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double a0 = uniform(2.0, 12.0);
        const double a2 = uniform(5e-4, 5e-3);
        const double p_min = uniform(5.0, 20.0);
        const double span = count <= 2 ? uniform(150.0, 350.0) : uniform(60.0, 110.0);
        fleet.push_back(ipop::quadratic_loss_profile("m" + std::to_string(i + 1), a0, a2, p_min,
                                                     p_min + span, 100.0));
    }
    return fleet;
}

// Demands spread over the interior of the fleet's feasible band.
inline std::vector<double> spread_demands(const std::vector<ipop::ModuleProfile>& fleet,
                                          int n = 5) {
    double sum_min = 0.0;
    double sum_max = 0.0;
    for (const ipop::ModuleProfile& m : fleet) {
        sum_min += m.p_out_min();
        sum_max += m.p_out_max();
    }
    std::vector<double> demands;
    demands.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double f = 0.12 + 0.82 * static_cast<double>(i) / static_cast<double>(n - 1);
        demands.push_back(sum_min + f * (sum_max - sum_min));
    }
    return demands;
}

// Equal-split control group: demand/m to every module, or no value when
// that violates some module's bounds.
inline std::optional<ipop::Allocation> equal_split(const std::vector<ipop::ModuleProfile>& fleet,
                                                   double demand) {
    const double share = demand / static_cast<double>(fleet.size());
    ipop::Allocation alloc;
    for (const ipop::ModuleProfile& m : fleet) {
        if (share < m.p_out_min() || share > m.p_out_max()) {
            return std::nullopt;
        }
        ipop::ModuleAllocation ma;
        ma.module_id = m.module_id();
        ma.p_out = share;
        ma.current = m.invert_pout(share);
        ma.p_in = m.eval_pin(ma.current);
        alloc.total_p_out += ma.p_out;
        alloc.total_p_in += ma.p_in;
        alloc.modules.push_back(std::move(ma));
    }
    alloc.eta = alloc.total_p_out / alloc.total_p_in;
    return alloc;
}

} // namespace ipoptest
