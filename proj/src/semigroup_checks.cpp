#include <cmath>
#include <limits>
#include <sstream>

#include "axisym/errors.hpp"
#include "axisym/sampling.hpp"
#include "axisym/semigroup.hpp"
#include "axisym/special_functions.hpp"

namespace axisym {

namespace {
double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

const char* to_string(SemigroupItem item) {
  switch (item) {
    case SemigroupItem::i: return "i";
    case SemigroupItem::ii: return "ii";
    case SemigroupItem::iii: return "iii";
  }
  return "?";
}

void validate_semigroup_exponents(SemigroupItem item, double p, double q, double a, double b) {
  std::ostringstream why;
  if (!(p >= 1.0 && q >= p)) why << "need 1 <= p <= q; ";
  switch (item) {
    case SemigroupItem::i:
      if (!(a + b <= 0.0 && a >= -1.0 && b >= -1.0)) why << "item (i) needs a+b <= 0, a,b >= -1";
      break;
    case SemigroupItem::ii:
      if (!(a + b <= 1.0 && a >= -1.0 && b >= -1.0)) why << "item (ii) needs a+b <= 1, a,b >= -1";
      break;
    case SemigroupItem::iii:
      if (!(a + b <= 0.0 && a >= 0.0 && b >= -1.0)) why << "item (iii) needs g+e <= 0, g >= 0, e >= -1";
      break;
  }
  if (!why.str().empty()) throw DomainError("check_semigroup_bound: " + why.str());
}

double semigroup_time_power(double p, double q, double a, double b) {
  return 0.5 - 0.5 * (a + b) + inv(p) - inv(q);
}

RatioReport check_semigroup_bound(SemigroupItem item, double p, double q, double a, double b,
                                  const SemigroupCheckOptions& opt) {
  validate_semigroup_exponents(item, p, q, a, b);
  if (opt.t_levels < 2) throw DomainError("check_semigroup_bound: need >= 2 time levels");
  const Grid& grid = opt.grid;
  Semigroup sg(grid, ConvPath::direct, Exec::serial);
  std::vector<double> levels(opt.t_levels);
  for (int j = 0; j < opt.t_levels; ++j)
    levels[j] = opt.t_lo * std::pow(opt.t_hi / opt.t_lo, static_cast<double>(j) / (opt.t_levels - 1));
  std::vector<std::shared_ptr<const SemigroupKernelPlan>> plans(opt.t_levels);
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < opt.t_levels; ++j) plans[j] = sg.build_plan(levels[j]);

  const double power = semigroup_time_power(p, q, a, b);
  const double in_weight = item == SemigroupItem::ii ? b - 1.0 : b;
  MixtureOptions mix;
  mix.rc_hi = std::min(6.0, 0.75 * grid.r_max());
  mix.zc_abs = std::min(6.0, 0.75 * grid.z_max());

  auto sampler = [&](std::mt19937_64& rng) -> double {
    const ScalarField f = render_mixture(grid, draw_mixture(rng, mix));
    const double den = lp_norm_omega(f, p);
    if (!(den > 0.0)) return kNaN;
    std::uniform_int_distribution<int> pick(0, opt.t_levels - 1);
    const int level = pick(rng);
    const auto& plan = *plans[level];
    const double t = levels[level];
    const ScalarField g = multiply_by_r_power(f, in_weight);
    ScalarField tmp(grid), out1(grid), out2(grid);
    double num = 0.0;
    switch (item) {
      case SemigroupItem::i:
        sg.convolve_z(plan, false, g, tmp);
        sg.mix_r(plan.div_r, plan, tmp, out1, false);
        sg.convolve_z(plan, true, g, tmp);
        sg.mix_r(plan.plain, plan, tmp, out2, false);
        num = weighted_lp_vector(out1, out2, a, q, Measure::omega);
        break;
      case SemigroupItem::ii:
        sg.convolve_z(plan, false, g, tmp);
        sg.mix_r(plan.plain, plan, tmp, out1, false);
        num = weighted_lp(out1, a, q, Measure::omega);
        break;
      case SemigroupItem::iii:
        sg.convolve_z(plan, false, g, tmp);
        sg.mix_r(plan.grad_r, plan, tmp, out1, false);
        sg.convolve_z(plan, true, g, tmp);
        sg.mix_r(plan.plain, plan, tmp, out2, false);
        num = weighted_lp_vector(out1, out2, a, q, Measure::omega);
        break;
    }
    return std::pow(t, power) * num / den;
  };

  RatioReport report = run_ratio_suite(opt.samples, opt.seed, sampler);
  report.suite = "semigroup_bound";
  report.variant = to_string(item);
  report.exponents = {a, b};
  report.p = p;
  report.q = q;
  report.time_power = power;
  return report;
}

double pointwise_assertion_ratio(char assertion, double alpha, double beta, double r, double rb,
                                 double dz, double t) {
  const double tau = t / (r * rb);
  const double dr = r - rb;
  const double zeta2 = dr * dr + dz * dz;
  // e^{-zeta^2/4t} / e^{-zeta^2/5t}
  const double gauss = std::exp(-zeta2 / (20.0 * t));
  const double norm = std::pow(t, 0.5 - 0.5 * (alpha + beta));
  double lhs = 0.0;
  if (assertion == 'a') {
    lhs = t * std::pow(r, alpha - 1.5) * std::pow(rb, beta - 1.5) * std::abs(eval_H_prime(tau)) +
          std::pow(r, alpha - 0.5) * std::pow(rb, beta - 0.5) * std::abs(eval_H(tau));
  } else {
    lhs = std::pow(rb, 0.5 + beta) * std::pow(r, alpha - 0.5) * (std::abs(dr) + std::abs(dz)) /
          (2.0 * t) * std::abs(eval_H(tau));
  }
  return lhs * gauss * norm;
}

RatioReport check_pointwise_assertions(char assertion, double alpha, double beta,
                                       std::int64_t samples, std::uint64_t seed) {
  if (assertion != 'a' && assertion != 'b')
    throw DomainError("check_pointwise_assertions: assertion must be 'a' or 'b'");
  const double cap = assertion == 'a' ? 1.0 : 0.0;
  if (!(alpha + beta <= cap && alpha >= -1.0 && beta >= -1.0)) {
    std::ostringstream msg;
    msg << "check_pointwise_assertions: assertion " << assertion << " needs alpha+beta <= " << cap
        << " and alpha, beta >= -1";
    throw DomainError(msg.str());
  }
  auto sampler = [&](std::mt19937_64& rng) {
    const double r = log_uniform(rng, 1e-2, 1e2);
    const double rb = log_uniform(rng, 1e-2, 1e2);
    const double dz = log_uniform(rng, 1e-3, 1e2);
    const double t = log_uniform(rng, 1e-2, 1e2);
    return pointwise_assertion_ratio(assertion, alpha, beta, r, rb, dz, t);
  };
  RatioReport report = run_ratio_suite(samples, seed, sampler);
  report.suite = "pointwise_assertion";
  report.variant = std::string(1, assertion);
  report.exponents = {alpha, beta};
  report.time_power = 0.5 - 0.5 * (alpha + beta);
  return report;
}

}  // namespace axisym
