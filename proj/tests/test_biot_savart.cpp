#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "axisym/biot_savart.hpp"
#include "axisym/errors.hpp"
#include "axisym/special_functions.hpp"
#include "oracles.hpp"

using namespace axisym;

namespace {

ScalarField ring_vorticity(const Grid& g) {
  return ScalarField::from_function(g, [](double r, double z) { return r * std::exp(-(r * r + z * z)); }, Quantity::omega_theta);
}

ScalarField gaussian_ring(const Grid& g) {
  return ScalarField::from_function(g, [](double r, double z) { return r * std::exp(-2 * ((r - 1.5) * (r - 1.5) + z * z)); },
                                    Quantity::omega_theta);
}

ScalarField random_vorticity(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return render_mixture(g, draw_mixture(rng, mixture_for(g)), Quantity::omega_theta, AxisFactor::linear);
}

double velocity_l2(const ScalarField& a, const ScalarField& b) {
  return std::sqrt(std::pow(lp_norm_omega(a, 2.0), 2) + std::pow(lp_norm_omega(b, 2.0), 2));
}

}  // namespace

TEST_CASE("kernel closed forms") {
  const auto [gr0, gz0] = kernel_G(1.3, 0.4, 0.7, 0.4);
  CHECK(gr0 == 0.0);
  CHECK(std::isfinite(gz0));
  for (double c : {-1.0, 0.0, 2.5}) {
    const auto [a, az] = kernel_G(1.2, 0.3, 0.8, -0.6);
    const auto [b, bz] = kernel_G(1.2, 2 * c - 0.3, 0.8, 2 * c + 0.6);
    CHECK(a == doctest::Approx(-b).epsilon(1e-14));
    CHECK(az == doctest::Approx(bz).epsilon(1e-14));
  }
  // xi^2 = 1 at (1, 0; 1, 1): G_r = F'(1)/pi, G_z = (F(1) - 2 F'(1)) / (4 pi).
  const double F1 = oracle::F(1.0), Fp1 = oracle::F_prime(1.0);
  const auto [gr, gz] = kernel_G(1.0, 0.0, 1.0, 1.0);
  CHECK(gr == doctest::Approx(Fp1 / std::numbers::pi).epsilon(1e-10));
  CHECK(gz == doctest::Approx((F1 - 2 * Fp1) / (4 * std::numbers::pi)).epsilon(1e-10));
  CHECK_THROWS_AS(kernel_G(1.0, 0.5, 1.0, 0.5), SingularPointError);
}

TEST_CASE("zero vorticity gives zero velocity on every path") {
  const Grid g(16, 32, 4.0, 4.0);
  for (BSPath p : {BSPath::naive, BSPath::fft, BSPath::streaming}) {
    const Velocity v = BiotSavart(g, p).velocity(ScalarField(g, Quantity::omega_theta));
    CHECK(v.ur.max_abs() == 0.0);
    CHECK(v.uz.max_abs() == 0.0);
    CHECK(v.ur.tag() == Quantity::u_r);
    CHECK(v.uz.tag() == Quantity::u_z);
  }
}

TEST_CASE("velocity of r exp(-rho^2) against its stream function") {
  std::vector<double> errors;
  for (int n : {24, 48, 96}) {
    const Grid g(n, 2 * n, 6.0, 6.0);
    const Velocity v = velocity_from_vorticity(ring_vorticity(g));
    ScalarField er(g), ez(g), xr(g), xz(g);
    for (int i = 0; i < g.nr(); ++i)
      for (int k = 0; k < g.nz(); ++k) {
        const auto u = oracle::ring_velocity(g.r(i), g.z(k));
        xr(i, k) = u.ur;
        xz(i, k) = u.uz;
      }
    errors.push_back(velocity_l2(v.ur - xr, v.uz - xz) / velocity_l2(xr, xz));
  }
  MESSAGE("velocity errors " << errors[0] << " " << errors[1] << " " << errors[2]);
  CHECK(errors[2] < 2e-3);
  CHECK(oracle::refinement_order(errors) == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("divergence and curl residuals converge at second order") {
  std::vector<double> div, curl;
  for (int n : {32, 64, 128}) {
    const Grid g(n, n, 6.0, 3.0);
    const ScalarField w = gaussian_ring(g);
    const BSResiduals res = bs_residuals(w, velocity_from_vorticity(w));
    div.push_back(res.divergence);
    curl.push_back(res.curl);
  }
  CHECK(oracle::refinement_order(div) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(oracle::refinement_order(curl) == doctest::Approx(2.0).epsilon(0.15));
  CHECK(curl.back() < 0.05);
}

TEST_CASE("naive, FFT and streaming paths agree") {
  const Grid g(32, 32, 4.0, 2.0);
  const ScalarField w = random_vorticity(g, 4);
  const Velocity a = BiotSavart(g, BSPath::naive).velocity(w);
  const Velocity b = BiotSavart(g, BSPath::fft).velocity(w);
  const Velocity c = BiotSavart(g, BSPath::streaming).velocity(w);
  const double scale = std::max(a.ur.max_abs(), a.uz.max_abs());
  CHECK((a.ur - b.ur).max_abs() <= 1e-10 * scale);
  CHECK((a.uz - b.uz).max_abs() <= 1e-10 * scale);
  CHECK((c.ur - b.ur).max_abs() <= 1e-12 * scale);
  CHECK((c.uz - b.uz).max_abs() <= 1e-12 * scale);
  const Velocity d = BiotSavart(g, BSPath::fft, SelfCell::analytic, Exec::serial).velocity(w);
  CHECK((d.ur - b.ur).max_abs() <= 1e-13 * scale);
  CHECK((d.uz - b.uz).max_abs() <= 1e-13 * scale);
}

TEST_CASE("linearity, symmetry of the cache and grid checks") {
  const Grid g(24, 48, 6.0, 6.0);
  const BiotSavart bs(g);
  const ScalarField a = random_vorticity(g, 1), b = random_vorticity(g, 2);
  const Velocity vab = bs.velocity(1.5 * a + (-0.5) * b);
  const Velocity va = bs.velocity(a), vb = bs.velocity(b);
  const double scale = std::max(vab.ur.max_abs(), vab.uz.max_abs());
  CHECK((vab.ur - (1.5 * va.ur + (-0.5) * vb.ur)).max_abs() <= 1e-12 * scale);
  CHECK((vab.uz - (1.5 * va.uz + (-0.5) * vb.uz)).max_abs() <= 1e-12 * scale);
  REQUIRE(bs.cache() != nullptr);
  CHECK(bs.cache()->grid_hash == g.hash());
  CHECK(bs.cache()->max_gr_real_residual < 1e-12);
  CHECK(bs.cache()->max_gz_imag_residual < 1e-12);
  CHECK_THROWS_AS(bs.velocity(ScalarField(Grid(24, 48, 6.0, 5.0))), GridMismatchError);
}

TEST_CASE("u_r vanishes on the axis to first order") {
  std::vector<double> edge;
  for (int n : {24, 48, 96}) {
    const Grid g(n, 2 * n, 6.0, 6.0);
    const Velocity v = velocity_from_vorticity(gaussian_ring(g));
    double m = 0.0;
    for (int k = 0; k < g.nz(); ++k) m = std::max(m, std::abs(v.ur(0, k)));
    edge.push_back(m / v.ur.max_abs());
  }
  CHECK(edge[1] < edge[0]);
  CHECK(edge[2] < edge[1]);
  CHECK(oracle::refinement_order(edge) >= 0.8);
}

TEST_CASE("self-cell treatments agree under refinement") {
  std::vector<double> diffs;
  for (int n : {24, 48, 96}) {
    const Grid g(n, 2 * n, 6.0, 6.0);
    const ScalarField w = gaussian_ring(g);
    const Velocity a = BiotSavart(g, BSPath::fft, SelfCell::analytic).velocity(w);
    const Velocity b = BiotSavart(g, BSPath::fft, SelfCell::omit).velocity(w);
    diffs.push_back(velocity_l2(a.ur - b.ur, a.uz - b.uz) / velocity_l2(a.ur, a.uz));
  }
  CHECK(diffs[1] < diffs[0]);
  CHECK(diffs[2] < diffs[1]);
}

TEST_CASE("weighted velocity estimates") {
  SampledCheckOptions opt;
  opt.samples = 300;
  CHECK(bs_estimate_q(4.0 / 3.0, 0.0, 0.0) == doctest::Approx(4.0));
  const RatioReport r = check_bs_weighted_estimate(4.0 / 3.0, 4.0, 0.0, 0.0, opt);
  CHECK(r.finite());
  CHECK(r.evaluated == r.samples);
  opt.rescale = 2.0;
  const RatioReport s = check_bs_weighted_estimate(4.0 / 3.0, 4.0, 0.0, 0.0, opt);
  CHECK(std::abs(s.sup_ratio - r.sup_ratio) <= 0.05 * r.sup_ratio);
  CHECK_THROWS_AS(check_bs_weighted_estimate(2.0, 4.0, 0.0, 0.0, opt), DomainError);  // wrong q
  CHECK_THROWS_AS(check_bs_weighted_estimate(2.0, 2.0, 0.0, 1.0, opt), DomainError);  // beta - alpha = 1
  CHECK_THROWS_AS(check_bs_weighted_estimate(1.0, 2.0, 0.0, 0.0, opt), DomainError);  // p = 1

  opt.rescale = 1.0;
  const RatioReport l = check_lemur_bounds(2.0, opt);
  CHECK(l.finite());
  opt.rescale = 0.5;
  const RatioReport ls = check_lemur_bounds(2.0, opt);
  CHECK(std::abs(ls.sup_ratio - l.sup_ratio) <= 0.05 * l.sup_ratio);
  CHECK_THROWS_AS(check_lemur_bounds(1.0, opt), DomainError);
}
