#include "ipop/tps.hpp"

#include "ipop/errors.hpp"
#include "ipop/log.hpp"

#include <cmath>
#include <sstream>

namespace ipop {

namespace {

constexpr double kRadicandSlack = 1e-12;

void check_point(double k, double p) {
    if (!std::isfinite(k) || k <= 0.0) {
        throw InputError("voltage gain k must be finite and > 0");
    }
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
        throw InputError("per-unit power p must lie in [0, 1]");
    }
}

/// Square root with the documented tolerance for boundary noise: radicands
/// in [-1e-12, 0) count as 0, anything lower is outside the policy's domain.
double checked_sqrt(double radicand, double k, double p, const char* expression) {
    if (radicand < -kRadicandSlack) {
        std::ostringstream oss;
        oss.precision(12);
        oss << "negative radicand " << radicand << " in " << expression << " at k = " << k
            << ", p = " << p << "; the operating point is outside the policy's real domain";
        throw DomainError(oss.str());
    }
    return std::sqrt(std::max(0.0, radicand));
}

void warn_d2(double d2, double k, double p) {
    if (d2 < 0.0 || d2 > 1.0) {
        std::ostringstream oss;
        oss.precision(12);
        oss << "tps: d2 = " << d2 << " lies outside [0, 1] at k = " << k << ", p = " << p;
        log_warn(oss.str());
    }
}

} // namespace

std::string to_string(TpsMode mode) {
    return mode == TpsMode::One ? "1" : "2";
}

std::string to_string(TpsRegime regime) {
    return regime == TpsRegime::Boost ? "boost" : "buck";
}

double voltage_gain(double n, double u_in, double u_out) {
    if (!std::isfinite(n) || n <= 0.0 || !std::isfinite(u_in) || u_in <= 0.0 ||
        !std::isfinite(u_out) || u_out <= 0.0) {
        throw InputError("voltage_gain needs n, u_in, u_out all finite and > 0");
    }
    return n * u_in / u_out;
}

double mode_boundary(double k) {
    if (!std::isfinite(k) || k <= 0.0) {
        throw InputError("voltage gain k must be finite and > 0");
    }
    if (k > 1.0) {
        return 2.0 * (k - 1.0) / (k * k);
    }
    return 2.0 * (k - k * k);
}

PhaseShiftSet mode2_shifts(double k, double p) {
    check_point(k, p);
    if (k == 1.0) {
        throw DomainError("the low-power mode does not exist at k = 1");
    }
    PhaseShiftSet s;
    s.mode = TpsMode::Two;
    if (k > 1.0) {
        s.regime = TpsRegime::Boost;
        s.d1 = 1.0 - checked_sqrt(p / (2.0 * (k - 1.0)), k, p, "p/(2(k-1))");
        s.d3 = 1.0 - checked_sqrt(p * k * k / (2.0 * (k - 1.0)), k, p, "p*k^2/(2(k-1))");
    } else {
        s.regime = TpsRegime::Buck;
        s.d1 = 1.0 - checked_sqrt(p / (2.0 * k * (1.0 - k)), k, p, "p/(2k(1-k))");
        s.d3 = 1.0 - checked_sqrt(p * k / (2.0 * (1.0 - k)), k, p, "p*k/(2(1-k))");
    }
    const double radicand = -s.d1 * s.d1 - s.d3 * s.d3 - p + 1.0;
    s.d2 = 0.5 * (1.0 + s.d1 - s.d3 - checked_sqrt(radicand, k, p, "-d1^2 - d3^2 - p + 1"));
    warn_d2(s.d2, k, p);
    return s;
}

PhaseShiftSet mode1_shifts(double k, double p) {
    check_point(k, p);
    PhaseShiftSet s;
    s.mode = TpsMode::One;
    if (k > 1.0) {
        s.regime = TpsRegime::Boost;
        s.d1 = (k - 1.0) * checked_sqrt((1.0 - p) / (k * k - 2.0 * k + 2.0), k, p,
                                        "(1-p)/(k^2-2k+2)");
        s.d3 = 0.0;
    } else {
        s.regime = TpsRegime::Buck;
        s.d1 = 0.0;
        s.d3 = (1.0 - k) * checked_sqrt((1.0 - p) / (2.0 * k * k - 2.0 * k + 1.0), k, p,
                                        "(1-p)/(2k^2-2k+1)");
    }
    const double radicand = (1.0 - s.d1) * (1.0 - s.d3) - 0.5 * p;
    s.d2 = 1.0 - s.d3 - checked_sqrt(radicand, k, p, "(1-d1)(1-d3) - p/2");
    warn_d2(s.d2, k, p);
    return s;
}

PhaseShiftSet phase_shifts(const OperatingPoint& point) {
    check_point(point.k, point.p);
    // The boundary itself belongs to the high-power mode.
    if (point.p < mode_boundary(point.k)) {
        return mode2_shifts(point.k, point.p);
    }
    return mode1_shifts(point.k, point.p);
}

double current_stress(double k, const PhaseShiftSet& shifts) {
    if (!std::isfinite(k) || k <= 0.0) {
        throw InputError("voltage gain k must be finite and > 0");
    }
    if (k > 1.0) {
        return -k * shifts.d1 + 2.0 * shifts.d2 + shifts.d3 + k - 1.0;
    }
    return -k * shifts.d1 + 2.0 * k * shifts.d2 - shifts.d3 * (1.0 - 2.0 * k) + 1.0 - k;
}

} // namespace ipop
