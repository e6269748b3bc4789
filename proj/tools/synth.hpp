#pragma once

#include "ipop/profile.hpp"

#include <vector>

namespace ipop::cli {

/// Quadratic-loss model P_in = P_out + a2*P_out^2 + a0 on [p_min, p_max] W.
struct SynthModule {
    std::string id;
    double a0 = 0.0;
    double a2 = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
};

inline constexpr double kSynthBusVoltage = 80.0;

/// Pinned two-module demonstration fleet. The loss coefficients are chosen
/// so the single-module efficiency curves cross at exactly 290 W and the
/// second module starts paying for itself at exactly 550 W, giving the
/// schedule its three regimes.
const std::vector<SynthModule>& synth_fleet();

std::vector<ModuleProfile> synth_profiles();

/// Noiseless samples of the fleet models, evenly spaced in current.
std::vector<EfficiencySample> synth_samples(int per_module = 26);

} // namespace ipop::cli
