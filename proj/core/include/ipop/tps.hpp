#pragma once

#include <string>

namespace ipop {

/// Normalized operating point of a dual-active-bridge stage.
struct OperatingPoint {
    double k = 1.0; ///< voltage gain n*u_in/u_out, > 0
    double p = 0.0; ///< per-unit transmission power in [0, 1]
};

enum class TpsMode { One = 1, Two = 2 };
enum class TpsRegime { Buck, Boost };

[[nodiscard]] std::string to_string(TpsMode mode);
[[nodiscard]] std::string to_string(TpsRegime regime);

/// Minimum-current-stress phase-shift ratios for one operating point.
struct PhaseShiftSet {
    double d1 = 0.0; ///< primary inner shift ratio
    double d2 = 0.0; ///< outer shift ratio
    double d3 = 0.0; ///< secondary inner shift ratio
    TpsMode mode = TpsMode::One;
    TpsRegime regime = TpsRegime::Buck;
};

/// k = n*u_in/u_out; all arguments must be > 0.
[[nodiscard]] double voltage_gain(double n, double u_in, double u_out);

/// Per-unit power separating the low-power mode (below) from the high-power
/// mode (at or above). Zero at k = 1, where only the high-power mode exists.
[[nodiscard]] double mode_boundary(double k);

/// Evaluates the minimum-current-stress policy at the operating point,
/// choosing the regime from k and the mode from mode_boundary. Radicands in
/// [-1e-12, 0) are treated as 0; anything more negative raises DomainError.
[[nodiscard]] PhaseShiftSet phase_shifts(const OperatingPoint& point);

/// Row-forced variants used to probe continuity across the mode boundary.
[[nodiscard]] PhaseShiftSet mode1_shifts(double k, double p);
[[nodiscard]] PhaseShiftSet mode2_shifts(double k, double p);

/// Peak inductor current in per-unit for the given shifts.
[[nodiscard]] double current_stress(double k, const PhaseShiftSet& shifts);

} // namespace ipop
