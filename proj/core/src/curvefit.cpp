#include "ipop/curvefit.hpp"

#include "ipop/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ipop {

namespace {

/// Coefficients of p(s*x + c) given coefficients of p(t), constant first.
std::vector<double> compose_affine(const std::vector<double>& coeffs, double s, double c) {
    // Horner in polynomial arithmetic: acc(x) = acc(x) * (s*x + c) + q_k.
    std::vector<double> acc{0.0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) {
        std::vector<double> next(acc.size() + 1, 0.0);
        for (std::size_t i = 0; i < acc.size(); ++i) {
            next[i] += acc[i] * c;
            next[i + 1] += acc[i] * s;
        }
        next[0] += *it;
        while (next.size() > 1 && next.back() == 0.0) {
            next.pop_back();
        }
        acc = std::move(next);
    }
    return acc;
}

} // namespace

PolynomialFit fit_polynomial(std::span<const double> xs, std::span<const double> ys, int degree) {
    if (degree < 1) {
        throw InputError("fit degree must be at least 1");
    }
    if (xs.size() != ys.size()) {
        throw InputError("fit needs matching x and y sample counts");
    }
    const std::size_t n = xs.size();
    const std::size_t cols = static_cast<std::size_t>(degree) + 1;
    if (n < cols) {
        throw InputError("underdetermined fit: " + std::to_string(n) + " samples for degree " +
                         std::to_string(degree) + " (need at least " + std::to_string(cols) + ")");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw InputError("fit samples must be finite");
        }
    }

    const auto [min_it, max_it] = std::minmax_element(xs.begin(), xs.end());
    const double x_lo = *min_it;
    const double x_hi = *max_it;
    if (x_hi == x_lo) {
        throw ConditioningError("fit abscissae are all identical; design matrix is rank deficient");
    }
    const double scale = 2.0 / (x_hi - x_lo);
    const double shift = -(x_hi + x_lo) / (x_hi - x_lo);

    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = scale * xs[i] + shift;
        double power = 1.0;
        for (std::size_t j = 0; j < cols; ++j) {
            design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = power;
            power *= t;
        }
        rhs(static_cast<Eigen::Index>(i)) = ys[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        throw ConditioningError("rank-deficient design matrix for degree " +
                                std::to_string(degree) + " (rank " + std::to_string(qr.rank()) +
                                "); reduce the degree or spread the samples");
    }
    const Eigen::VectorXd solution = qr.solve(rhs);

    std::vector<double> scaled(solution.data(), solution.data() + solution.size());
    std::vector<double> coeffs = compose_affine(scaled, scale, shift);
    coeffs.resize(cols, 0.0);
    PowerPolynomial poly(coeffs);

    FitReport report;
    report.degree = degree;
    report.sample_count = n;
    double ss_res = 0.0;
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += ys[i];
    }
    mean /= static_cast<double>(n);
    double ss_tot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ys[i] - poly(xs[i]);
        ss_res += r * r;
        ss_tot += (ys[i] - mean) * (ys[i] - mean);
        report.max_residual = std::max(report.max_residual, std::abs(r));
    }
    report.rmse = std::sqrt(ss_res / static_cast<double>(n));
    report.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
    return PolynomialFit{std::move(poly), report};
}

ProfileFit fit_profile_report(std::span<const EfficiencySample> samples, int degree) {
    if (degree < 3) {
        throw InputError("profile fit degree must be at least 3, got " + std::to_string(degree));
    }
    if (samples.empty()) {
        throw InputError("profile fit needs samples");
    }
    const std::string& id = samples.front().module_id;
    std::vector<double> currents, pins, pouts;
    currents.reserve(samples.size());
    pins.reserve(samples.size());
    pouts.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const EfficiencySample& s = samples[i];
        validate_sample(s, "sample " + std::to_string(i));
        if (s.module_id != id) {
            throw InputError("profile fit got mixed module ids '" + id + "' and '" + s.module_id +
                             "'; fit one module at a time");
        }
        currents.push_back(s.current);
        pins.push_back(s.p_in);
        pouts.push_back(s.p_out);
    }

    PolynomialFit pin_fit = fit_polynomial(currents, pins, degree);
    PolynomialFit pout_fit = fit_polynomial(currents, pouts, degree);
    const auto [lo_it, hi_it] = std::minmax_element(currents.begin(), currents.end());

    try {
        ModuleProfile profile(id, std::move(pin_fit.poly), std::move(pout_fit.poly), *lo_it,
                              *hi_it);
        return ProfileFit{std::move(profile), pin_fit.report, pout_fit.report};
    } catch (const ModelError& e) {
        throw ModelError(std::string(e.what()) +
                         "; try a lower fit degree or more measurement samples");
    }
}

ModuleProfile fit_profile(std::span<const EfficiencySample> samples, int degree) {
    return fit_profile_report(samples, degree).profile;
}

} // namespace ipop
