#pragma once

#include "ipop/polynomial.hpp"

#include <nlohmann/json_fwd.hpp>

#include <span>
#include <string>
#include <vector>

namespace ipop {

/// One measured operating point of one converter module.
struct EfficiencySample {
    std::string module_id;
    double current = 0.0; ///< output current, A
    double p_in = 0.0;    ///< input power, W
    double p_out = 0.0;   ///< output power, W
};

/// Throws InputError unless current/p_in/p_out are finite, strictly positive
/// and p_out <= p_in. `context` is prefixed to the message (e.g. "line 7").
void validate_sample(const EfficiencySample& sample, const std::string& context = {});

struct PeakEfficiency {
    double current = 0.0;
    double eta = 0.0;
};

/// Fitted power model of one module: input and output power as polynomials
/// in output current, valid on [i_min, i_max].
///
/// Construction validates that P_out is strictly increasing and that
/// 0 < P_out <= P_in across the range; violations raise ModelError.
/// Instances are immutable and safe to share across threads.
class ModuleProfile {
public:
    ModuleProfile(std::string module_id, PowerPolynomial pin_poly, PowerPolynomial pout_poly,
                  double i_min, double i_max);

    [[nodiscard]] const std::string& module_id() const { return module_id_; }
    [[nodiscard]] const PowerPolynomial& pin_poly() const { return pin_; }
    [[nodiscard]] const PowerPolynomial& pout_poly() const { return pout_; }
    [[nodiscard]] double i_min() const { return i_min_; }
    [[nodiscard]] double i_max() const { return i_max_; }
    [[nodiscard]] double p_out_min() const { return p_out_min_; }
    [[nodiscard]] double p_out_max() const { return p_out_max_; }

    /// Input power at `current`; RangeError outside [i_min, i_max].
    [[nodiscard]] double eval_pin(double current) const;

    /// Output power at `current`; RangeError outside [i_min, i_max].
    [[nodiscard]] double eval_pout(double current) const;

    /// P_out / P_in at `current`.
    [[nodiscard]] double efficiency(double current) const;

    /// The unique current with eval_pout(current) == p_out, found by
    /// bracketed bisection with guarded Newton steps.
    /// RangeError when p_out is outside [p_out_min, p_out_max].
    [[nodiscard]] double invert_pout(double p_out) const;

    /// dP_out/dP_in at `current`, from the analytic polynomial derivatives.
    /// SingularityError when dP_in/dI vanishes there.
    [[nodiscard]] double marginal_rate(double current) const;

    /// Location and value of the efficiency maximum over [i_min, i_max]
    /// (dense scan plus golden-section refinement).
    [[nodiscard]] PeakEfficiency peak_efficiency() const;

    /// Schema: {"module_id": str, "pin_coeffs": [c0..cN],
    ///          "pout_coeffs": [c0..cN], "i_min": f, "i_max": f},
    /// coefficients constant term first.
    [[nodiscard]] nlohmann::json to_json() const;
    static ModuleProfile from_json(const nlohmann::json& j);

private:
    double clamp_to_range(double current) const;

    std::string module_id_;
    PowerPolynomial pin_;
    PowerPolynomial pout_;
    double i_min_;
    double i_max_;
    double p_out_min_;
    double p_out_max_;
};

/// Builds a profile from the quadratic loss model
/// P_in = P_out + a2*P_out^2 + a0 on output power [p_min, p_max], with the
/// output bus held at `bus_voltage` so that P_out = bus_voltage * I.
ModuleProfile quadratic_loss_profile(const std::string& module_id, double a0, double a2,
                                     double p_min, double p_max, double bus_voltage = 80.0);

/// Profile lookup by id; InputError when absent or duplicated.
const ModuleProfile& find_profile(std::span<const ModuleProfile> profiles,
                                  const std::string& module_id);

} // namespace ipop
