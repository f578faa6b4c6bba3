#include "wtraj/gaussian_form.hpp"

#include <cmath>
#include <numbers>

#include "wtraj/error.hpp"

namespace wtraj {

GaussianForm GaussianForm::recentered(double new_origin) const {
  // -a(u' + s)^2 + b(u' + s) + c with u = x - origin, u' = x - new_origin.
  const double s = new_origin - origin;
  return {a, b - 2.0 * a * s, c - a * s * s + b * s, new_origin};
}

Complex GaussianForm::integral() const {
  if (!(a.real() > 0.0)) throw PreconditionError("Gaussian integral requires Re a > 0");
  // Integrate around the real part of the complex centre to keep b small.
  const GaussianForm g = recentered(center().real());
  return std::sqrt(std::numbers::pi / g.a) * std::exp(g.b * g.b / (4.0 * g.a) + g.c);
}

Complex GaussianForm::integral_linear(Complex slope, Complex offset) const {
  if (!(a.real() > 0.0)) throw PreconditionError("Gaussian integral requires Re a > 0");
  const GaussianForm g = recentered(center().real());
  const Complex i0 = std::sqrt(std::numbers::pi / g.a) * std::exp(g.b * g.b / (4.0 * g.a) + g.c);
  // ∫ u f du = (b / 2a) ∫ f du, and x = u + origin.
  const Complex first_moment = g.b / (2.0 * g.a) * i0;
  return slope * (first_moment + g.origin * i0) + offset * i0;
}

GaussianForm operator*(const GaussianForm& lhs, const GaussianForm& rhs) {
  const GaussianForm r = rhs.recentered(lhs.origin);
  return {lhs.a + r.a, lhs.b + r.b, lhs.c + r.c, lhs.origin};
}

GaussianForm scaled(const GaussianForm& form, Complex k) {
  GaussianForm out = form;
  out.c += std::log(k);
  return out;
}

}  // namespace wtraj
