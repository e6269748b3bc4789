#include "ipop/profile.hpp"

#include "ipop/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace ipop {

namespace {

constexpr int kValidationGridPoints = 257; // 256 intervals, endpoints included
constexpr int kPeakScanPoints = 1025;      // 1024 intervals

std::string range_message(const std::string& module_id, const char* what, double value,
                          double lo, double hi) {
    std::ostringstream oss;
    oss << "module '" << module_id << "': " << what << " " << value
        << " outside operating range [" << lo << ", " << hi << "]";
    return oss.str();
}

} // namespace

void validate_sample(const EfficiencySample& sample, const std::string& context) {
    const std::string where = context.empty() ? std::string() : context + ": ";
    auto fail = [&](const std::string& why) {
        throw InputError(where + "sample for module '" + sample.module_id + "' " + why);
    };
    if (sample.module_id.empty()) fail("has an empty module id");
    if (!std::isfinite(sample.current) || sample.current <= 0.0)
        fail("needs a finite current > 0");
    if (!std::isfinite(sample.p_in) || sample.p_in <= 0.0)
        fail("needs a finite input power > 0");
    if (!std::isfinite(sample.p_out) || sample.p_out <= 0.0)
        fail("needs a finite output power > 0");
    if (sample.p_out > sample.p_in)
        fail("has output power above input power (efficiency > 1)");
}

ModuleProfile::ModuleProfile(std::string module_id, PowerPolynomial pin_poly,
                             PowerPolynomial pout_poly, double i_min, double i_max)
    : module_id_(std::move(module_id)),
      pin_(std::move(pin_poly)),
      pout_(std::move(pout_poly)),
      i_min_(i_min),
      i_max_(i_max),
      p_out_min_(0.0),
      p_out_max_(0.0) {
    if (module_id_.empty()) {
        throw InputError("module profile needs a non-empty id");
    }
    if (!std::isfinite(i_min_) || !std::isfinite(i_max_) || i_min_ <= 0.0 || i_max_ <= i_min_) {
        throw InputError("module '" + module_id_ + "': need 0 < i_min < i_max");
    }

    const double span = i_max_ - i_min_;
    for (int k = 0; k < kValidationGridPoints; ++k) {
        const double current =
            i_min_ + span * static_cast<double>(k) / (kValidationGridPoints - 1);
        const double pout = pout_(current);
        const double pin = pin_(current);
        const double slope = pout_.derivative_at(current);
        if (!std::isfinite(pout) || !std::isfinite(pin)) {
            throw ModelError("module '" + module_id_ + "': power model not finite at I=" +
                             std::to_string(current));
        }
        if (slope <= 0.0) {
            throw ModelError("module '" + module_id_ +
                             "': fitted output power is not strictly increasing at I=" +
                             std::to_string(current));
        }
        if (pout <= 0.0) {
            throw ModelError("module '" + module_id_ + "': output power not positive at I=" +
                             std::to_string(current));
        }
        if (pout > pin * (1.0 + 1e-9)) {
            throw ModelError("module '" + module_id_ + "': efficiency above 1 at I=" +
                             std::to_string(current));
        }
    }

    p_out_min_ = pout_(i_min_);
    p_out_max_ = pout_(i_max_);
}

double ModuleProfile::clamp_to_range(double current) const {
    const double slack = 1e-9 * (i_max_ - i_min_);
    if (current < i_min_ - slack || current > i_max_ + slack) {
        throw RangeError(range_message(module_id_, "current", current, i_min_, i_max_));
    }
    return std::clamp(current, i_min_, i_max_);
}

double ModuleProfile::eval_pin(double current) const { return pin_(clamp_to_range(current)); }

double ModuleProfile::eval_pout(double current) const { return pout_(clamp_to_range(current)); }

double ModuleProfile::efficiency(double current) const {
    const double c = clamp_to_range(current);
    return pout_(c) / pin_(c);
}

double ModuleProfile::invert_pout(double p_out) const {
    const double slack = 1e-9 * (p_out_max_ - p_out_min_);
    if (p_out < p_out_min_ - slack || p_out > p_out_max_ + slack) {
        throw RangeError(range_message(module_id_, "output power", p_out, p_out_min_, p_out_max_));
    }
    const double target = std::clamp(p_out, p_out_min_, p_out_max_);

    double lo = i_min_;
    double hi = i_max_;
    double x = 0.5 * (lo + hi);
    const double tol = 1e-12 * std::max(1.0, std::abs(target));
    for (int iter = 0; iter < 200; ++iter) {
        const double f = pout_(x) - target;
        if (std::abs(f) <= tol) {
            return x;
        }
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double slope = pout_.derivative_at(x);
        double next = x - f / slope;
        if (!(slope > 0.0) || !(next > lo) || !(next < hi)) {
            next = 0.5 * (lo + hi); // Newton left the bracket; bisect
        }
        x = next;
        if (hi - lo <= 1e-15 * std::max(1.0, hi)) {
            break;
        }
    }
    const double residual = std::abs(pout_(x) - target);
    if (residual > 1e-9 * std::max(1.0, std::abs(target))) {
        throw SolverError("module '" + module_id_ + "': output power inversion stalled at P=" +
                          std::to_string(target));
    }
    return x;
}

double ModuleProfile::marginal_rate(double current) const {
    const double c = clamp_to_range(current);
    const double dpout = pout_.derivative_at(c);
    const double dpin = pin_.derivative_at(c);
    if (std::abs(dpin) < 1e-12 * std::max(1.0, std::abs(dpout))) {
        throw SingularityError("module '" + module_id_ +
                               "': input power slope vanishes at I=" + std::to_string(c));
    }
    return dpout / dpin;
}

PeakEfficiency ModuleProfile::peak_efficiency() const {
    const double span = i_max_ - i_min_;
    auto eta = [this](double c) { return pout_(c) / pin_(c); };

    int best_k = 0;
    double best_eta = -1.0;
    for (int k = 0; k < kPeakScanPoints; ++k) {
        const double c = i_min_ + span * static_cast<double>(k) / (kPeakScanPoints - 1);
        const double e = eta(c);
        if (e > best_eta) {
            best_eta = e;
            best_k = k;
        }
    }

    const double grid_step = span / (kPeakScanPoints - 1);
    double lo = std::max(i_min_, i_min_ + (best_k - 1) * grid_step);
    double hi = std::min(i_max_, i_min_ + (best_k + 1) * grid_step);

    // Golden-section refinement; robust when the curve is flat near the peak.
    constexpr double kInvPhi = 0.6180339887498949;
    double a = lo, b = hi;
    double c1 = b - kInvPhi * (b - a);
    double c2 = a + kInvPhi * (b - a);
    double f1 = eta(c1), f2 = eta(c2);
    while (b - a > 1e-12 * std::max(1.0, i_max_)) {
        if (f1 < f2) {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + kInvPhi * (b - a);
            f2 = eta(c2);
        } else {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - kInvPhi * (b - a);
            f1 = eta(c1);
        }
    }
    const double c_star = 0.5 * (a + b);
    const double eta_star = eta(c_star);
    if (eta_star >= best_eta) {
        return {c_star, eta_star};
    }
    return {i_min_ + best_k * grid_step, best_eta};
}

nlohmann::json ModuleProfile::to_json() const {
    return nlohmann::json{{"module_id", module_id_},
                          {"pin_coeffs", pin_.coefficients()},
                          {"pout_coeffs", pout_.coefficients()},
                          {"i_min", i_min_},
                          {"i_max", i_max_}};
}

ModuleProfile ModuleProfile::from_json(const nlohmann::json& j) {
    for (const char* key : {"module_id", "pin_coeffs", "pout_coeffs", "i_min", "i_max"}) {
        if (!j.contains(key)) {
            throw InputError(std::string("profile JSON is missing \"") + key + "\"");
        }
    }
    try {
        return ModuleProfile(j.at("module_id").get<std::string>(),
                             PowerPolynomial(j.at("pin_coeffs").get<std::vector<double>>()),
                             PowerPolynomial(j.at("pout_coeffs").get<std::vector<double>>()),
                             j.at("i_min").get<double>(), j.at("i_max").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("profile JSON has a wrong field type: ") + e.what());
    }
}

ModuleProfile quadratic_loss_profile(const std::string& module_id, double a0, double a2,
                                     double p_min, double p_max, double bus_voltage) {
    if (!(bus_voltage > 0.0) || !(p_min > 0.0) || !(p_max > p_min)) {
        throw InputError("quadratic loss profile needs bus_voltage > 0 and 0 < p_min < p_max");
    }
    // P_out = V*I, so P_in(I) = a0 + V*I + a2*V^2*I^2.
    PowerPolynomial pout({0.0, bus_voltage});
    PowerPolynomial pin({a0, bus_voltage, a2 * bus_voltage * bus_voltage});
    return ModuleProfile(module_id, std::move(pin), std::move(pout), p_min / bus_voltage,
                         p_max / bus_voltage);
}

const ModuleProfile& find_profile(std::span<const ModuleProfile> profiles,
                                  const std::string& module_id) {
    const ModuleProfile* found = nullptr;
    for (const ModuleProfile& p : profiles) {
        if (p.module_id() == module_id) {
            if (found != nullptr) {
                throw InputError("duplicate module id '" + module_id + "' in profile set");
            }
            found = &p;
        }
    }
    if (found == nullptr) {
        throw InputError("no profile for module id '" + module_id + "'");
    }
    return *found;
}

} // namespace ipop
