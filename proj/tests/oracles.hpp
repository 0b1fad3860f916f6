#pragma once

// Reference values computed independently of the library: boost's adaptive
// Gauss-Kronrod quadrature, std:: Bessel and elliptic functions, and closed
// forms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "axisym/field.hpp"

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Adaptive 61-point Gauss-Kronrod over [a, b] split at the given points.
template <class Fn>
double integrate(Fn f, std::vector<double> cuts) {
  std::sort(cuts.begin(), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (!(cuts[i + 1] > cuts[i])) continue;
    sum += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 12, 1e-13);
  }
  return sum;
}

/// Cuts [0, end] at scale * 4^k so that a feature of width `scale` at 0 is resolved.
inline std::vector<double> geometric_cuts(double scale, double end) {
  std::vector<double> cuts{0.0};
  for (double c = scale; c < end; c *= 4.0) cuts.push_back(c);
  cuts.push_back(end);
  return cuts;
}

/// H(t) = (pi t)^{-1/2} int_{-pi/2}^{pi/2} exp(-sin^2/t) cos 2phi; the cos 2phi
/// mean is zero, so exp is replaced by expm1 to avoid cancellation at large t.
inline double H(double t) {
  auto f = [t](double phi) {
    const double s = std::sin(phi);
    return std::expm1(-s * s / t) * std::cos(2.0 * phi);
  };
  return 2.0 * integrate(f, geometric_cuts(std::sqrt(t), pi / 2)) / std::sqrt(pi * t);
}

/// d/dt of the same integral, differentiated under the integral sign.
inline double H_prime(double t) {
  auto f = [t](double phi) {
    const double s2 = std::sin(phi) * std::sin(phi);
    return s2 / (t * t) * std::exp(-s2 / t) * std::cos(2.0 * phi);
  };
  const double d = 2.0 * integrate(f, geometric_cuts(std::sqrt(t), pi / 2)) / std::sqrt(pi * t);
  return d - H(t) / (2.0 * t);
}

/// Closed form through the modified Bessel function: H = sqrt(pi/t) e^{-x} I_1(x), x = 1/(2t).
inline double H_bessel(double t) {
  const double x = 0.5 / t;
  return std::sqrt(2.0 * pi * x) * std::exp(-x) * std::cyl_bessel_i(1.0, x);
}

/// F(s) = int_0^{pi/2} cos 2phi (sin^2 + s/4)^{-1/2}; the constant a^{-1/2} is
/// subtracted (zero mean of cos 2phi) and the remainder formed without cancellation.
inline double F(double s) {
  const double a = 0.25 * s;
  auto f = [a](double phi) {
    const double x = std::sin(phi) * std::sin(phi) / a;
    return std::expm1(-0.5 * std::log1p(x)) * std::cos(2.0 * phi);
  };
  return integrate(f, geometric_cuts(std::min(std::sqrt(a), 0.5), pi / 2)) / std::sqrt(a);
}

inline double F_prime(double s) {
  const double a = 0.25 * s;
  auto f = [a](double phi) {
    const double x = std::sin(phi) * std::sin(phi) / a;
    return std::expm1(-1.5 * std::log1p(x)) * std::cos(2.0 * phi);
  };
  return -0.125 * integrate(f, geometric_cuts(std::min(std::sqrt(a), 0.5), pi / 2)) / (a * std::sqrt(a));
}

/// Closed form through complete elliptic integrals of modulus sqrt(1 / (1 + s/4)).
inline double F_elliptic(double s) {
  const double k = 0.25 * s;
  const double m = 1.0 / (1.0 + k);
  const double K = std::comp_ellint_1(std::sqrt(m));
  const double E = std::comp_ellint_2(std::sqrt(m));
  return (2.0 * (K - E) / m - K) / std::sqrt(1.0 + k);
}

/// r (4 pi t)^{-5/2} exp(-(r^2 + z^2) / 4t): r times the five-dimensional heat kernel.
inline double exact_5d(double r, double z, double t) {
  return r * std::pow(4.0 * pi * t, -2.5) * std::exp(-(r * r + z * z) / (4.0 * t));
}

/// Velocity of omega = r exp(-rho^2), rho^2 = r^2 + z^2. The Stokes stream
/// function is psi = r^2 h(rho) with h the five-dimensional Newtonian
/// potential of exp(-rho^2): rho^4 h' = -m(rho), m(rho) = int_0^rho x^4 e^{-x^2}.
struct RingVelocity {
  double ur = 0.0, uz = 0.0;
};

inline double ring_m(double rho) {
  if (rho < 1.0) {  // sum (-1)^n rho^{2n+5} / (n! (2n+5))
    double term = std::pow(rho, 5), sum = 0.0;
    for (int n = 0; n < 40; ++n) {
      sum += term / (2 * n + 5);
      term *= -rho * rho / (n + 1);
    }
    return sum;
  }
  return 3.0 * std::sqrt(pi) / 8.0 * std::erf(rho) - std::exp(-rho * rho) * (0.5 * rho * rho * rho + 0.75 * rho);
}

inline double ring_h(double rho) {
  auto g = [](double s) { return ring_m(s) / std::pow(s, 4); };
  const double far = std::max(rho, 12.0);
  double h = integrate(g, {rho, far});
  h += (3.0 * std::sqrt(pi) / 8.0) / (3.0 * far * far * far);  // m is saturated beyond 12
  return h;
}

inline RingVelocity ring_velocity(double r, double z) {
  const double rho = std::hypot(r, z);
  const double hp_over_rho = -ring_m(rho) / std::pow(rho, 5);
  return {-r * z * hp_over_rho, 2.0 * ring_h(rho) + r * r * hp_over_rho};
}

inline double relative_l2(const axisym::ScalarField& a, const axisym::ScalarField& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < a.values().size(); ++n) {
    const double d = a.values()[n] - b.values()[n];
    num += d * d;
    den += b.values()[n] * b.values()[n];
  }
  return std::sqrt(num / den);
}

/// Least-squares slope of log(err) against log(1/h) for successive halvings.
inline double refinement_order(const std::vector<double>& errors) {
  const std::size_t n = errors.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = i * std::log(2.0), y = -std::log(errors[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace oracle
