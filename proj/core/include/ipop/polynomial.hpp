#pragma once

#include <vector>

namespace ipop {

/// Dense univariate polynomial over the reals, used for the fitted
/// input/output power models. Coefficients are stored constant term first:
/// coefficients()[k] multiplies current^k.
class PowerPolynomial {
public:
    /// Throws InputError on an empty or non-finite coefficient list.
    explicit PowerPolynomial(std::vector<double> coefficients);

    /// Declared degree, i.e. coefficient count minus one. Trailing zero
    /// coefficients are kept as given.
    [[nodiscard]] int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

    [[nodiscard]] const std::vector<double>& coefficients() const { return coeffs_; }

    /// Horner evaluation at x.
    [[nodiscard]] double operator()(double x) const;

    /// Value of the first derivative at x.
    [[nodiscard]] double derivative_at(double x) const;

    /// The derivative as a polynomial (degree 0 yields the zero constant).
    [[nodiscard]] PowerPolynomial derivative() const;

    bool operator==(const PowerPolynomial& other) const = default;

private:
    std::vector<double> coeffs_;
};

} // namespace ipop
