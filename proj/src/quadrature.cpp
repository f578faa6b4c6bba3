#include "wtraj/quadrature.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <limits>

#include "wtraj/error.hpp"

namespace wtraj::quad {

namespace {
constexpr unsigned kMaxDepth = 25;
}

Complex integrate(const std::function<Complex(double)>& f, Interval domain, double rel_tol) {
  if (!(domain.hi > domain.lo)) throw PreconditionError("quadrature: empty interval");
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, domain.lo, domain.hi, kMaxDepth, rel_tol, &error);
}

double integrate_real(const std::function<double(double)>& f, Interval domain, double rel_tol) {
  if (!(domain.hi > domain.lo)) throw PreconditionError("quadrature: empty interval");
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, domain.lo, domain.hi, kMaxDepth, rel_tol, &error);
}

Interval covering(std::span<const std::pair<double, double>> centers_and_widths, double n_widths) {
  Interval out{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& [c, w] : centers_and_widths) {
    out.lo = std::min(out.lo, c - n_widths * w);
    out.hi = std::max(out.hi, c + n_widths * w);
  }
  if (!(out.hi > out.lo)) throw PreconditionError("quadrature: no support to cover");
  return out;
}

}  // namespace wtraj::quad
