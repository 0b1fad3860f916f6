#pragma once

#include <functional>
#include <span>
#include <vector>

namespace axisym {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
};

/// Globally adaptive 7/15-point Gauss-Kronrod quadrature of f over [a, b].
///
/// `breakpoints` (strictly inside (a, b), any order) seed the initial
/// partition; the interval with the largest error estimate is bisected until
/// the summed estimate drops below max(abs_tol, rel_tol * |value|).
QuadratureResult integrate_gk15(const std::function<double(double)>& f, double a, double b,
                                double rel_tol = 1e-13, double abs_tol = 0.0,
                                std::span<const double> breakpoints = {},
                                int max_intervals = 4000);

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int n);

}  // namespace axisym
