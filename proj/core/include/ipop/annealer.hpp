#pragma once

#include "ipop/dispatch.hpp"
#include "ipop/profile.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>

namespace ipop {

/// Tuning knobs for the simulated-annealing allocator. The cooling ratio and
/// the acceptance scale are deliberately separate parameters.
struct AnnealerConfig {
    double t0 = 1.0;
    double cooling = 0.95;
    int iters_per_temp = 100;
    double t_thres = 1e-4;
    double boltzmann = 0.01;
    std::uint64_t seed = 1;
    double max_transfer_frac = 0.25;

    /// Throws InputError naming the offending field.
    void validate() const;

    [[nodiscard]] nlohmann::json to_json() const;

    /// Accepts a partial object; absent fields keep their defaults. Unknown
    /// keys are rejected so typos cannot silently fall back to defaults.
    static AnnealerConfig from_json(const nlohmann::json& j);
};

/// Deterministic random source for the annealer. Uniform doubles are built
/// from the top 53 bits of the engine output so results do not depend on the
/// standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] std::uint64_t next_u64() { return engine_(); }

    /// Uniform draw in [0, 1).
    [[nodiscard]] double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n); n must be >= 1.
    [[nodiscard]] std::size_t uniform_below(std::size_t n) {
        const auto idx = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
        return idx < n ? idx : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

/// Metropolis acceptance rule. Improvements are accepted without consuming a
/// draw; all other deltas use exactly one uniform draw against
/// exp(delta_eta / (boltzmann * temperature)).
[[nodiscard]] bool metropolis_accept(double delta_eta, double temperature,
                                     const AnnealerConfig& config, Rng& rng);

/// Transfers a random amount of output power between two distinct modules of
/// the allocation, keeping the total exact and every module inside its
/// bounds. Single-module allocations are returned unchanged without
/// consuming randomness.
[[nodiscard]] Allocation perturb(const Allocation& allocation, double temperature,
                                 const AnnealerConfig& config, Rng& rng,
                                 std::span<const ModuleProfile> profiles);

/// Draws a feasible allocation for the active set by scaling uniform
/// per-module draws onto the demand total, then iteratively reconciling box
/// bounds.
[[nodiscard]] Allocation random_feasible_allocation(const ActiveSet& active, double demand,
                                                    std::span<const ModuleProfile> profiles,
                                                    Rng& rng);

/// Called once per completed temperature level with the level index
/// (1-based), the level's temperature, and the incumbent best efficiency.
using LevelObserver = std::function<void(int level, double temperature, double best_eta)>;

/// Simulated-annealing refinement of the power split across a fixed active
/// set: geometric cooling from t0, iters_per_temp perturbation rounds per
/// level, stop once the temperature falls to t_thres. Returns the best
/// allocation ever visited. Deterministic for a fixed (inputs, seed) pair.
[[nodiscard]] Allocation anneal(std::span<const ModuleProfile> profiles, const ActiveSet& active,
                                double demand, const AnnealerConfig& config,
                                const std::optional<Allocation>& warm_start = std::nullopt,
                                const LevelObserver& observer = nullptr);

} // namespace ipop
