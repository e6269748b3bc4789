#pragma once

#include "ipop/profile.hpp"

#include <cstddef>
#include <span>

namespace ipop {

/// Quality summary of one least-squares fit, residuals computed on the
/// input samples against the returned polynomial.
struct FitReport {
    int degree = 0;
    double rmse = 0.0;
    double r_squared = 0.0;
    double max_residual = 0.0;
    std::size_t sample_count = 0;
};

struct PolynomialFit {
    PowerPolynomial poly;
    FitReport report;
};

/// Least-squares polynomial fit of y over x via a column-pivoted QR
/// factorization. Abscissae are rescaled to [-1, 1] internally and the
/// coefficients mapped back, so raw ampere-unit systems stay conditioned.
///
/// InputError when fewer than degree+1 samples or degree < 1;
/// ConditioningError when the design matrix is rank deficient (e.g. all x
/// identical).
PolynomialFit fit_polynomial(std::span<const double> xs, std::span<const double> ys, int degree);

struct ProfileFit {
    ModuleProfile profile;
    FitReport pin_report;
    FitReport pout_report;
};

/// Fits a full module profile from measured samples of a single module:
/// pin_poly from (current, p_in), pout_poly from (current, p_out), with the
/// operating range set by the sample extremes.
///
/// Degree must be at least 3. Mixed module ids raise InputError; a fitted
/// output power that is not strictly increasing raises ModelError.
ProfileFit fit_profile_report(std::span<const EfficiencySample> samples, int degree = 3);

/// As fit_profile_report, keeping only the profile.
ModuleProfile fit_profile(std::span<const EfficiencySample> samples, int degree = 3);

} // namespace ipop
