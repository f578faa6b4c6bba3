#pragma once

#include <complex>

namespace wtraj {

using Complex = std::complex<double>;

/// exp(-a u^2 + b u + c) with u = x - origin and Re a > 0.
///
/// Every state the simulator handles is a finite sum of these, so overlaps,
/// profile integrals and derivative matrix elements all reduce to Gaussian
/// integrals evaluated in closed form. The origin is kept near the packet
/// centre so the coefficients stay O(1) in units of the packet width.
struct GaussianForm {
  Complex a{1.0, 0.0};
  Complex b{0.0, 0.0};
  Complex c{0.0, 0.0};
  double origin = 0.0;

  Complex exponent(double x) const {
    const double u = x - origin;
    return -a * u * u + b * u + c;
  }
  Complex operator()(double x) const { return std::exp(exponent(x)); }

  /// d/dx of the form at x.
  Complex derivative(double x) const {
    const double u = x - origin;
    return (-2.0 * a * u + b) * std::exp(exponent(x));
  }

  GaussianForm conj() const { return {std::conj(a), std::conj(b), std::conj(c), origin}; }

  /// Same function expressed around another origin.
  GaussianForm recentered(double new_origin) const;

  /// Complex centre b / 2a, measured from x = 0.
  Complex center() const { return origin + b / (2.0 * a); }

  /// Integral over the real line. Throws PreconditionError when Re a <= 0.
  Complex integral() const;

  /// Integral over the real line of (slope * x + offset) times the form.
  Complex integral_linear(Complex slope, Complex offset) const;
};

/// Pointwise product; the result uses the origin of `lhs`.
GaussianForm operator*(const GaussianForm& lhs, const GaussianForm& rhs);

/// Multiplies the form by a constant factor k (folded into c).
GaussianForm scaled(const GaussianForm& form, Complex k);

}  // namespace wtraj
