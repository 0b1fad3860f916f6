#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <random>

#include <doctest.h>

#include "axisym/errors.hpp"
#include "axisym/field.hpp"
#include "axisym/mild_solver.hpp"
#include "axisym/sampling.hpp"
#include "axisym/trajectory.hpp"
#include "oracles.hpp"

using namespace axisym;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

// Unit cells so that the box [1,2]x[0,1] is a union of whole cells.
Grid box_grid() { return Grid(40, 80, 4.0, 4.0); }

ScalarField box(const Grid& g, double value) {
  return ScalarField::from_function(g, [value](double r, double z) {
    return (r > 1.0 && r < 2.0 && z > 0.0 && z < 1.0) ? value : 0.0;
  });
}

ScalarField random_field(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return render_mixture(g, draw_mixture(rng, mixture_for(g)));
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("grid nodes are cell centred and cover the box") {
  const Grid g(12, 20, 3.0, 5.0);
  CHECK(g.r(0) > 0.0);
  CHECK(g.nr() * g.hr() == doctest::Approx(3.0));
  CHECK(g.nz() * g.hz() == doctest::Approx(10.0));
  CHECK(g.z(0) == doctest::Approx(-5.0 + 0.5 * g.hz()));
  CHECK(g.r(11) == doctest::Approx(3.0 - 0.5 * g.hr()));
  CHECK(g.hash() == Grid(12, 20, 3.0, 5.0).hash());
  CHECK(g.hash() != Grid(12, 20, 3.0, 5.5).hash());
  CHECK_THROWS_AS(Grid(0, 4, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(Grid(4, 4, -1.0, 1.0), DomainError);
}

TEST_CASE("L^p norms of a box") {
  const Grid g = box_grid();
  const ScalarField f = box(g, 2.0);
  CHECK(lp_norm_omega(f, 2.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(lp_norm_r3(f, 2.0) == doctest::Approx(2.0 * std::sqrt(3.0 * std::numbers::pi)).epsilon(1e-12));
  CHECK(lp_norm_r3(f, 2.0) == doctest::Approx(6.1400).epsilon(1e-4));
  CHECK(lp_norm_omega(f, kInf) == 2.0);
  const ScalarField one = box(g, 1.0);
  CHECK(weighted_lp(one, 1.0, 1.0, Measure::omega) == doctest::Approx(1.5).epsilon(1e-12));
  const ScalarField zero(g);
  for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) {
    CHECK(lp_norm_omega(zero, p) == 0.0);
    CHECK(lp_norm_r3(zero, p) == 0.0);
  }
  CHECK_THROWS_AS(lp_norm_omega(f, 0.5), DomainError);
  CHECK_THROWS_AS(lp_norm_r3(f, 0.5), DomainError);
  CHECK_THROWS_AS(weighted_lp(f, 1.0, 0.9, Measure::r3), DomainError);
}

TEST_CASE("L^1 norm of a Gaussian converges to the integral") {
  // int_0^R int_{-Z}^{Z} exp(-(r-2)^2 - z^2) = (sqrt(pi)/2)(erf(R-2) + erf(2)) sqrt(pi) erf(Z)
  auto gauss = [](double r, double z) { return std::exp(-((r - 2) * (r - 2) + z * z)); };
  const double exact = std::numbers::pi / 2 * (std::erf(6.0) + std::erf(2.0)) * std::erf(8.0);
  std::vector<double> errors;
  for (int n : {16, 32, 64}) {
    const Grid g(n, 2 * n, 8.0, 8.0);
    errors.push_back(std::abs(lp_norm_omega(ScalarField::from_function(g, gauss), 1.0) - exact) / exact);
  }
  // The integrand does not vanish at r = 0, so the midpoint rule is second order.
  CHECK(oracle::refinement_order(errors) == doctest::Approx(2.0).epsilon(0.05));
  const Grid fine(256, 512, 8.0, 8.0);
  CHECK(rel(lp_norm_omega(ScalarField::from_function(fine, gauss), 1.0), exact) < 1e-5);
}

TEST_CASE("weighted norms") {
  const Grid g(32, 64, 6.0, 6.0);
  const ScalarField f = random_field(g, 3);
  for (double p : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    CHECK(weighted_lp(f, 0.0, p, Measure::omega) == doctest::Approx(lp_norm_omega(f, p)).epsilon(1e-14));
    CHECK(weighted_lp(f, 0.0, p, Measure::r3) == doctest::Approx(lp_norm_r3(f, p)).epsilon(1e-14));
    // ||f||_{L^p(R^3)}^p = 2 pi ||r^{1/p} f||_{L^p(Omega)}^p
    CHECK(std::pow(lp_norm_r3(f, p), p) ==
          doctest::Approx(2 * std::numbers::pi * std::pow(weighted_lp(f, 1.0 / p, p, Measure::omega), p)).epsilon(1e-12));
  }
  CHECK(lp_norm_r3(f, 2.0) ==
        doctest::Approx(std::sqrt(2 * std::numbers::pi) * lp_norm_omega(multiply_by_r_power(f, 0.5), 2.0)).epsilon(1e-13));
  // a = -1 on a field near the axis equals the norm of f / r
  const ScalarField near = ScalarField::from_function(g, [](double r, double z) { return std::exp(-4 * ((r - 0.5) * (r - 0.5) + z * z)); });
  const ScalarField divided = ScalarField::from_function(g, [&](double r, double z) { return std::exp(-4 * ((r - 0.5) * (r - 0.5) + z * z)) / r; });
  CHECK(weighted_lp(near, -1.0, 2.0, Measure::omega) == doctest::Approx(lp_norm_omega(divided, 2.0)).epsilon(1e-14));
}

TEST_CASE("Holder interpolation and triangle inequality on random fields") {
  const Grid g(24, 48, 6.0, 6.0);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const ScalarField f = random_field(g, seed), h = random_field(g, 1000 + seed);
    for (auto [p1, p2, theta] : {std::tuple{1.0, 4.0, 0.5}, std::tuple{2.0, kInf, 0.25}, std::tuple{1.0, 2.0, 0.3}}) {
      const double p = 1.0 / (theta / p1 + (1.0 - theta) / p2);
      for (Measure m : {Measure::omega, Measure::r3}) {
        const double lhs = weighted_lp(f, 0.0, p, m);
        const double rhs = std::pow(weighted_lp(f, 0.0, p1, m), theta) * std::pow(weighted_lp(f, 0.0, p2, m), 1 - theta);
        CHECK(lhs <= rhs * (1 + 1e-12));
      }
    }
    for (double p : {1.0, 1.5, 2.0, 4.0, kInf}) CHECK(lp_norm_omega(f + h, p) <= (lp_norm_omega(f, p) + lp_norm_omega(h, p)) * (1 + 1e-13));
  }
}

TEST_CASE("gradient on polynomials and smooth data") {
  const Grid g(16, 32, 4.0, 4.0);
  const auto [gr, gz] = gradient_tilde(ScalarField::from_function(g, [](double r, double) { return r; }));
  CHECK((gr - ScalarField::from_function(g, [](double, double) { return 1.0; })).max_abs() <= 1e-12);
  CHECK(gz.max_abs() <= 1e-12);
  const auto [qr, qz] = gradient_tilde(ScalarField::from_function(g, [](double r, double z) { return r * r * z; }));
  CHECK((qr - ScalarField::from_function(g, [](double r, double z) { return 2 * r * z; })).max_abs() <= 1e-11);
  CHECK((qz - ScalarField::from_function(g, [](double r, double) { return r * r; })).max_abs() <= 1e-11);

  std::vector<double> ez, er;
  for (int n : {16, 32, 64}) {
    const Grid h(n, 2 * n, 4.0, 4.0);
    const auto [sr, sz] = gradient_tilde(ScalarField::from_function(h, [](double r, double z) { return std::sin(r) * std::sin(z); }));
    ez.push_back((sz - ScalarField::from_function(h, [](double r, double z) { return std::sin(r) * std::cos(z); })).max_abs());
    er.push_back((sr - ScalarField::from_function(h, [](double r, double z) { return std::cos(r) * std::sin(z); })).max_abs());
  }
  CHECK(oracle::refinement_order(ez) == doctest::Approx(2.0).epsilon(0.05));
  CHECK(oracle::refinement_order(er) == doctest::Approx(2.0).epsilon(0.05));
  CHECK_THROWS_AS(gradient_tilde(ScalarField(Grid(3, 8, 1.0, 1.0))), DomainError);
}

TEST_CASE("gradient is linear") {
  const Grid g(20, 40, 5.0, 5.0);
  const ScalarField f = random_field(g, 7), h = random_field(g, 8);
  const auto [a_r, a_z] = gradient_tilde(2.5 * f + (-1.5) * h);
  const auto [f_r, f_z] = gradient_tilde(f);
  const auto [h_r, h_z] = gradient_tilde(h);
  const double scale = std::max(a_r.max_abs(), a_z.max_abs());
  CHECK((a_r - (2.5 * f_r + (-1.5) * h_r)).max_abs() <= 1e-14 * scale * 10);
  CHECK((a_z - (2.5 * f_z + (-1.5) * h_z)).max_abs() <= 1e-14 * scale * 10);
}

TEST_CASE("snapshots round trip bit-exactly") {
  const Grid g(10, 14, 2.5, 3.5);
  ScalarField f = random_field(g, 11);
  f.set_tag(Quantity::u_theta);
  f(0, 0) = std::nextafter(1.0 / 3.0, 1.0);
  const auto dir = std::filesystem::temp_directory_path();
  write_snapshot_binary(dir / "axisym_snap.bin", f, 0.125);
  write_snapshot_text(dir / "axisym_snap.txt", f, 0.125);
  for (const auto& [back, t] : {read_snapshot_binary(dir / "axisym_snap.bin"), read_snapshot_text(dir / "axisym_snap.txt")}) {
    CHECK(back.grid() == g);
    CHECK(back.tag() == Quantity::u_theta);
    CHECK(t == 0.125);
    CHECK(back.values() == f.values());
  }
  std::filesystem::remove(dir / "axisym_snap.bin");
  std::filesystem::remove(dir / "axisym_snap.txt");
  CHECK_THROWS(read_snapshot_binary(dir / "axisym_no_such_snapshot.bin"));
}

TEST_CASE("X_T components: zero, single snapshot, errors") {
  const Grid g(16, 32, 6.0, 6.0);
  Trajectory zero(g);
  for (int n = 0; n <= 8; ++n) zero.push(0.1 * n, AxiState::zero(g));
  const auto xz = compute_xt_components(zero, 0.8);
  for (const auto& [name, v] : xz.named()) CHECK_MESSAGE(v == 0.0, name);
  const auto ez = et_membership(zero, 0.8);
  CHECK(ez.L4L2_omega == 0.0);
  CHECK(ez.L4L4_utheta == 0.0);
  CHECK(ez.Linf_r_utheta == 0.0);

  const ScalarField w = ScalarField::from_function(g, [](double r, double z) { return std::exp(-((r - 2) * (r - 2) + z * z)); }, Quantity::omega_theta);
  const ScalarField u = 0.5 * w;
  Trajectory one(g);
  one.push(0.5, AxiState(w, u));
  const auto xs = compute_xt_components(one, 0.5);
  CHECK(xs.sup_L1_omega_Omega == lp_norm_omega(w, 1.0));
  CHECK(xs.sup_L32_omega_R3 == lp_norm_r3(w, 1.5));
  CHECK(xs.sup_t_Linf_omega == 0.5 * w.max_abs());
  CHECK(xs.sup_L2_utheta_Omega == lp_norm_omega(u, 2.0));
  CHECK(xs.sup_t12_L2_u_over_r == std::sqrt(0.5) * weighted_lp(u, -1.0, 2.0, Measure::omega));
  CHECK(xs.L2L2_omega_Omega == 0.0);
  double sum = 0.0;
  for (const auto& [name, v] : xs.named()) {
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(xs.total() == doctest::Approx(sum));

  CHECK_THROWS_AS(compute_xt_components(Trajectory(g), 1.0), DomainError);
  CHECK_THROWS_AS(et_membership(Trajectory(g), 1.0), DomainError);
  Trajectory bad(g);
  bad.push(1.0, AxiState::zero(g));
  CHECK_THROWS_AS(bad.push(1.0, AxiState::zero(g)), DomainError);
  CHECK_THROWS_AS(bad.push(2.0, AxiState::zero(Grid(8, 8, 1.0, 1.0))), GridMismatchError);
}

TEST_CASE("E_T norms of a constant state scale as T^{1/4}") {
  const Grid g(16, 32, 6.0, 6.0);
  const ScalarField w = ScalarField::from_function(g, [](double r, double z) { return r * std::exp(-(r * r + z * z)); }, Quantity::omega_theta);
  Trajectory traj(g);
  for (int n = 0; n <= 32; ++n) traj.push(0.125 * n, AxiState(w, 0.3 * w));
  const auto e1 = et_membership(traj, 1.0), e4 = et_membership(traj, 4.0);
  CHECK(e4.L4L2_omega / e1.L4L2_omega == doctest::Approx(std::pow(4.0, 0.25)).epsilon(1e-12));
  CHECK(e4.L4L4_utheta / e1.L4L4_utheta == doctest::Approx(std::pow(4.0, 0.25)).epsilon(1e-12));
  CHECK(e4.Linf_r_utheta == e1.Linf_r_utheta);
  CHECK(e1.L4L2_omega == doctest::Approx(lp_norm_r3(w, 2.0)).epsilon(1e-12));
}

TEST_CASE("X_T total is invariant under the Navier-Stokes scaling") {
  // Evolve data and its lambda-rescaled copy independently; the totals must match.
  const Grid g(32, 64, 8.0, 8.0);
  const double lambda = 2.0;
  auto w0 = [](double r, double z) { return r * std::exp(-((r - 2) * (r - 2) + z * z)); };
  auto u0 = [](double r, double z) { return 0.4 * r * std::exp(-((r - 2) * (r - 2) + (z - 0.5) * (z - 0.5))); };
  const AxiState x0(ScalarField::from_function(g, w0, Quantity::omega_theta), ScalarField::from_function(g, u0, Quantity::u_theta));
  const Grid gs = g.rescaled(lambda);
  const AxiState xs(ScalarField::from_function(gs, [&](double r, double z) { return lambda * lambda * w0(lambda * r, lambda * z); }, Quantity::omega_theta),
                    ScalarField::from_function(gs, [&](double r, double z) { return lambda * u0(lambda * r, lambda * z); }, Quantity::u_theta));
  const Trajectory a = linear_evolution(x0, 1.0, 0.125);
  const Trajectory b = linear_evolution(xs, 1.0 / (lambda * lambda), 0.125 / (lambda * lambda));
  const double ta = xt_norm(a, 1.0), tb = xt_norm(b, 1.0 / (lambda * lambda));
  CHECK(std::abs(ta - tb) / ta <= 0.02);
  // The exact rescaling of stored samples is invariant to rounding.
  CHECK(xt_norm(rescale_trajectory(a, lambda), 1.0 / (lambda * lambda)) == doctest::Approx(ta).epsilon(1e-12));
}
