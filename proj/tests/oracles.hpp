// oracles.hpp -- independent reference values for the test suites.
//
// Nothing here calls into the library: Bessel zeros come from a power series
// and bisection, and closed-form extremals are written out by hand.

#ifndef SOBOLEV_TESTS_ORACLES_HPP
#define SOBOLEV_TESTS_ORACLES_HPP

#include <cmath>
#include <numbers>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// J_nu(x) from its power series; adequate for 0 <= x <= 10, nu >= 0.
inline double bessel_j(double nu, double x) {
  double term = std::pow(x / 2, nu) / std::tgamma(nu + 1);
  double sum = term;
  const double x2 = x * x / 4;
  for (int k = 1; k < 80; ++k) {
    term *= -x2 / (double(k) * (k + nu));
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum))
      break;
  }
  return sum;
}

/// First positive zero of J_nu, bracketed in (lo, hi).
inline double bessel_first_zero(double nu, double lo, double hi) {
  double flo = bessel_j(nu, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(nu, mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// j_{n/2-1}: the first zero governing the p = 2 ball problem in R^n.
inline double ball_bessel_zero(int n) {
  const double nu = n / 2.0 - 1.0;
  // j_nu lies in (nu + 1, nu + 2 + 2 sqrt(nu + 1)) for the orders used here.
  return bessel_first_zero(nu, nu + 1.0, nu + 2.0 + 2.0 * std::sqrt(nu + 1.0));
}

inline double j0() { return bessel_first_zero(0.0, 2.0, 3.0); }

inline double omega(int n) {
  return std::pow(pi, n / 2.0) / std::tgamma(n / 2.0 + 1);
}

/// C_1 of the unit ball: the quotient of 1 - |x|^2.
inline double torsion_cp_unit_ball(int n) { return n * (n + 2.0) / omega(n); }

} // namespace oracle

#endif // SOBOLEV_TESTS_ORACLES_HPP
