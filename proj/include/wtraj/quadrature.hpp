#pragma once

#include <complex>
#include <functional>
#include <span>
#include <utility>

namespace wtraj::quad {

using Complex = std::complex<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double length() const { return hi - lo; }
};

/// Number of effective widths kept on each side of a Gaussian when an
/// integral over the real line is truncated to a finite interval.
inline constexpr double kTruncationWidths = 8.0;

/// Adaptive Gauss-Kronrod (7/15) integral of a complex integrand on [lo, hi].
Complex integrate(const std::function<Complex(double)>& f, Interval domain,
                  double rel_tol = 1e-12);

/// Real-valued convenience overload.
double integrate_real(const std::function<double(double)>& f, Interval domain,
                      double rel_tol = 1e-12);

/// Smallest interval containing [c - n w, c + n w] for every (c, w) given.
Interval covering(std::span<const std::pair<double, double>> centers_and_widths,
                  double n_widths = kTruncationWidths);

}  // namespace wtraj::quad
