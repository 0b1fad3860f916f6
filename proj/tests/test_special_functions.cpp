#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>
#include <sstream>

#include <doctest.h>

#include "axisym/errors.hpp"
#include "axisym/special_functions.hpp"
#include "oracles.hpp"

using namespace axisym;

namespace {
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
const double sqrt_pi = std::sqrt(std::numbers::pi);
}  // namespace

TEST_CASE("oracles agree with the closed forms") {
  for (double t : {1e-3, 0.01, 0.1, 1.0, 10.0, 1e3, 1e6}) CHECK(rel(oracle::H(t), oracle::H_bessel(t)) < 1e-11);
  for (double s : {1e-6, 1e-3, 0.1, 1.0, 4.0, 50.0, 100.0}) CHECK(rel(oracle::F(s), oracle::F_elliptic(s)) < 1e-10);
}

TEST_CASE("H matches quadrature across the table range") {
  double worst = 0.0;
  for (int i = 0; i <= 240; ++i) {
    const double t = std::pow(10.0, -6.0 + 12.0 * (i + 0.37) / 241.0);
    worst = std::max(worst, rel(eval_H(t), oracle::H(t)));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("H' and F' match quadrature across the table range") {
  // The H' oracle cancels terms of size 1/(2t) down to -3/4 for small t, so
  // its own error is about 1e-13 / t; that is added to the tolerance.
  double wh = 0.0, wf = 0.0, wF = 0.0;
  for (int i = 0; i <= 120; ++i) {
    const double x = std::pow(10.0, -6.0 + 12.0 * (i + 0.61) / 121.0);
    const double ref = oracle::H_prime(x);
    wh = std::max(wh, std::abs(eval_H_prime(x) - ref) / (1e-8 * std::abs(ref) + 1e-13 / x));
    wF = std::max(wF, rel(eval_F(x), oracle::F(x)));
    wf = std::max(wf, rel(eval_F_prime(x), oracle::F_prime(x)));
  }
  CHECK(wh <= 1.0);
  CHECK(wF < 1e-8);
  CHECK(wf < 1e-8);
}

TEST_CASE("H asymptotic anchors") {
  CHECK(std::abs(eval_H(1e-3) - 0.99925) <= 1e-5);
  CHECK(std::abs(std::pow(1e4, 1.5) * eval_H(1e4) - 0.443113) <= 1e-3);
  CHECK(std::abs(eval_H_prime(1e-3) + 0.75) <= 2e-3);
  CHECK(std::abs(std::pow(1e4, 2.5) * eval_H_prime(1e4) + 0.664669) <= 2e-3);
  CHECK(std::abs(std::pow(1e12, 1.5) * eval_H(1e12) - sqrt_pi / 4) < 1e-9);
}

TEST_CASE("H and F at one against quadrature and finite differences") {
  CHECK(rel(eval_H(1.0), oracle::H(1.0)) < 1e-8);
  const double h = 1e-5;
  CHECK(std::abs(eval_H_prime(1.0) - (eval_H(1.0 + h) - eval_H(1.0 - h)) / (2 * h)) < 1e-5);
  CHECK(rel(eval_F(4.0), oracle::F(4.0)) < 1e-8);
  CHECK(std::abs(eval_F_prime(1.0) - (eval_F(1.0 + h) - eval_F(1.0 - h)) / (2 * h)) < 1e-5);
}

TEST_CASE("sqrt(s) F(s) decays monotonically to zero beyond s = 100") {
  double prev = std::numeric_limits<double>::infinity();
  for (double s = 100.0; s <= 1e8; s *= 1.5) {
    const double v = std::sqrt(s) * eval_F(s);
    const double ref = std::sqrt(s) * oracle::F(s);
    CHECK(v > 0.0);
    CHECK(ref < prev);
    CHECK(rel(v, ref) < 1e-8);
    prev = ref;
  }
  CHECK(prev < 1e-7);
}

TEST_CASE("F grows logarithmically as s -> 0") {
  for (double s : {1e-12, 1e-9, 1e-7})
    CHECK(std::abs(eval_F(s) + 0.5 * std::log(s) - (3 * std::log(2.0) - 2.0)) < 1e-5);
  CHECK(rel(eval_F(1e-7), oracle::F_elliptic(1e-7)) < 1e-8);
}

TEST_CASE("domain errors") {
  for (double bad : {0.0, -1.0, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity()}) {
    CHECK_THROWS_AS(eval_H(bad), DomainError);
    CHECK_THROWS_AS(eval_H_prime(bad), DomainError);
    CHECK_THROWS_AS(eval_F(bad), DomainError);
    CHECK_THROWS_AS(eval_F_prime(bad), DomainError);
  }
  CHECK_THROWS_AS(check_corH_bounds(0), DomainError);
}

TEST_CASE("H is positive and decreasing for t >= 1") {
  double prev = eval_H(1.0);
  for (double t = 1.01; t < 1e7; t *= 1.01) {
    const double v = eval_H(t);
    REQUIRE(v > 0.0);
    CHECK(v < prev);
    prev = v;
  }
  for (double t = 1e-9; t < 1.0; t *= 1.1) CHECK(eval_H(t) > 0.0);
}

TEST_CASE("branches are continuous at the seams") {
  const auto& h = h_table();
  const auto& f = f_table();
  for (double x : {h.x_lo, h.x_hi}) {
    const double below = std::nextafter(x, 0.0), above = std::nextafter(x, 1e300);
    CHECK(rel(eval_H(below), eval_H(above)) < 1e-6);
    CHECK(rel(eval_H_prime(below), eval_H_prime(above)) < 1e-6);
  }
  for (double x : {f.x_lo, f.x_hi}) {
    const double below = std::nextafter(x, 0.0), above = std::nextafter(x, 1e300);
    CHECK(rel(eval_F(below), eval_F(above)) < 1e-6);
    CHECK(rel(eval_F_prime(below), eval_F_prime(above)) < 1e-6);
  }
  const double hs = h_small_series_seam(), fs = f_small_series_seam();
  CHECK(rel(series::H_small(hs), quadrature_form::H(hs)) < 1e-9);
  CHECK(rel(series::F_small(fs), quadrature_form::F(fs)) < 1e-9);
}

TEST_CASE("tables are log-spaced, increasing and verified at build") {
  for (const KernelTable* tab : {&h_table(), &f_table()}) {
    CHECK(tab->x_lo > 0.0);
    CHECK(tab->abscissae.size() == 4096);
    CHECK(tab->interpolation_order == 3);
    for (std::size_t i = 1; i < tab->abscissae.size(); ++i) REQUIRE(tab->abscissae[i] > tab->abscissae[i - 1]);
    CHECK(tab->max_midpoint_error <= 1e-8);
  }
}

TEST_CASE("table cache round trip and key check") {
  KernelTableParams params;
  params.nodes = 256;
  params.x_lo = 1e-2;
  params.x_hi = 1e2;
  params.check_tol = 1e-5;
  const KernelTable tab = KernelTable::build(KernelTable::Kind::H, params);
  const auto key = table_cache_key(KernelTable::Kind::H, params);
  const auto path = std::filesystem::temp_directory_path() / "axisym_test_table.bin";
  tab.save_binary(path, key);
  KernelTable back;
  REQUIRE(KernelTable::load_binary(path, key, back));
  CHECK(back.abscissae == tab.abscissae);
  CHECK(back.f.values == tab.f.values);
  CHECK(back.value(0.3) == tab.value(0.3));
  CHECK_FALSE(KernelTable::load_binary(path, key + 1, back));
  params.nodes = 257;
  CHECK(table_cache_key(KernelTable::Kind::H, params) != key);
  std::ostringstream dump;
  tab.dump_text(dump);
  CHECK(dump.str().find("H table") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("bounds on t^a H and t^b H'") {
  const CorHReport rep = check_corH_bounds(4001, {0.0, 1.5, 2.0}, {0.0, 2.5});
  REQUIRE(rep.entries.size() == 5);
  const auto& h0 = rep.entries[0];
  const auto& h32 = rep.entries[1];
  const auto& h2 = rep.entries[2];
  CHECK(h0.bounded);
  CHECK(std::abs(h0.sup - 1.0) < 1e-6);
  CHECK(h32.bounded);
  CHECK(std::isfinite(h32.sup));
  CHECK(h32.sup >= sqrt_pi / 4 * (1 - 1e-6));
  CHECK_FALSE(h2.bounded);
  CHECK(rep.entries[3].bounded);
  CHECK(rep.entries[4].bounded);
  CHECK(rep.entries[4].sup >= 3 * sqrt_pi / 8 * (1 - 1e-6));
}

TEST_CASE("measured remainders of the expansions") {
  // Leading F term: remainder / (s |ln s|) stays bounded.
  double worst = 0.0;
  for (double s = 1e-6; s <= 1e-2; s *= 10.0) {
    const double lead = 3 * std::log(2.0) - 2.0 - 0.5 * std::log(s);
    worst = std::max(worst, std::abs(oracle::F(s) - lead) / (s * std::abs(std::log(s))));
  }
  MESSAGE("F small-s remainder constant " << worst);
  CHECK(worst < 10.0);

  // Leading H term at large t: relative remainder falls like 1/t.
  for (double t : {1e2, 1e3, 1e4}) {
    const double lead = sqrt_pi / (4 * std::pow(t, 1.5));
    const double c = t * std::abs(oracle::H(t) / lead - 1.0);
    MESSAGE("H large-t remainder constant at t = " << t << ": " << c);
    CHECK(c < 10.0);
  }
}

TEST_CASE("far-field kernel combination F - 2sF' decays without cancellation") {
  // Both terms share the s^{-3/2} tail with the same sign: the sum tends to 2 pi s^{-3/2}
  // with a relative correction -9/(2s).
  for (double s = 1e2; s <= 1e5; s *= 3.0) {
    const double v = std::pow(s, 1.5) * (eval_F(s) - 2 * s * eval_F_prime(s)) / (2 * std::numbers::pi);
    CHECK(v > 0.0);
    CHECK(std::abs(s * (v - 1.0) + 4.5) < 0.5);
  }
}
