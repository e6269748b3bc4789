#include "synth.hpp"

#include "ipop/errors.hpp"

namespace ipop::cli {

const std::vector<SynthModule>& synth_fleet() {
    // Crossings: a0 gap / a2 gap = 3.364/4e-5 = 290^2, and with both modules
    // sharing load the combined model is P + 2.1e-5*P^2 + 8.809, which meets
    // mod_a's curve at 550 W.
    static const std::vector<SynthModule> fleet = {
        {"mod_a", 6.0865, 3e-5, 30.0, 800.0},
        {"mod_b", 2.7225, 7e-5, 20.0, 500.0},
    };
    return fleet;
}

std::vector<ModuleProfile> synth_profiles() {
    std::vector<ModuleProfile> profiles;
    profiles.reserve(synth_fleet().size());
    for (const SynthModule& m : synth_fleet()) {
        profiles.push_back(
            quadratic_loss_profile(m.id, m.a0, m.a2, m.p_min, m.p_max, kSynthBusVoltage));
    }
    return profiles;
}

std::vector<EfficiencySample> synth_samples(int per_module) {
    if (per_module < 2) {
        throw InputError("sample generation needs at least 2 points per module");
    }
    std::vector<EfficiencySample> samples;
    samples.reserve(synth_fleet().size() * static_cast<std::size_t>(per_module));
    for (const SynthModule& m : synth_fleet()) {
        const double i_lo = m.p_min / kSynthBusVoltage;
        const double i_hi = m.p_max / kSynthBusVoltage;
        for (int k = 0; k < per_module; ++k) {
            const double current = i_lo + (i_hi - i_lo) * k / (per_module - 1);
            const double p_out = kSynthBusVoltage * current;
            EfficiencySample s;
            s.module_id = m.id;
            s.current = current;
            s.p_out = p_out;
            s.p_in = p_out + m.a2 * p_out * p_out + m.a0;
            samples.push_back(std::move(s));
        }
    }
    return samples;
}

} // namespace ipop::cli
