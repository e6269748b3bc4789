#include "ipop/polynomial.hpp"

#include "ipop/errors.hpp"

#include <cmath>
#include <utility>

namespace ipop {

PowerPolynomial::PowerPolynomial(std::vector<double> coefficients)
    : coeffs_(std::move(coefficients)) {
    if (coeffs_.empty()) {
        throw InputError("polynomial needs at least one coefficient");
    }
    for (double c : coeffs_) {
        if (!std::isfinite(c)) {
            throw InputError("polynomial coefficients must be finite");
        }
    }
}

double PowerPolynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
        acc = acc * x + *it;
    }
    return acc;
}

double PowerPolynomial::derivative_at(double x) const {
    double acc = 0.0;
    for (std::size_t k = coeffs_.size() - 1; k >= 1; --k) {
        acc = acc * x + static_cast<double>(k) * coeffs_[k];
    }
    return acc;
}

PowerPolynomial PowerPolynomial::derivative() const {
    if (coeffs_.size() == 1) {
        return PowerPolynomial({0.0});
    }
    std::vector<double> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
        d[k - 1] = static_cast<double>(k) * coeffs_[k];
    }
    return PowerPolynomial(std::move(d));
}

} // namespace ipop
