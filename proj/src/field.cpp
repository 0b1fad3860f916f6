#include "axisym/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <sstream>

#include "axisym/errors.hpp"

namespace axisym {

Grid::Grid(int nr, int nz, double r_max, double z_max)
    : nr_(nr), nz_(nz), r_max_(r_max), z_max_(z_max) {
  if (nr < 1 || nz < 1 || !(r_max > 0.0) || !(z_max > 0.0) || !std::isfinite(r_max) ||
      !std::isfinite(z_max))
    throw DomainError("Grid: counts must be >= 1 and extents positive");
  hr_ = r_max / nr;
  hz_ = 2.0 * z_max / nz;
}

Grid Grid::rescaled(double lambda) const {
  if (!(lambda > 0.0)) throw DomainError("Grid::rescaled: lambda must be positive");
  return Grid(nr_, nz_, r_max_ / lambda, z_max_ / lambda);
}

std::uint64_t Grid::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  mix(&nr_, sizeof nr_);
  mix(&nz_, sizeof nz_);
  mix(&r_max_, sizeof r_max_);
  mix(&z_max_, sizeof z_max_);
  return h;
}

bool Grid::operator==(const Grid& o) const {
  return nr_ == o.nr_ && nz_ == o.nz_ && r_max_ == o.r_max_ && z_max_ == o.z_max_;
}

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::omega_theta: return "omega_theta";
    case Quantity::u_theta: return "u_theta";
    case Quantity::u_r: return "u_r";
    case Quantity::u_z: return "u_z";
    case Quantity::generic: return "generic";
  }
  return "generic";
}

Quantity quantity_from_string(const std::string& s) {
  for (Quantity q : {Quantity::omega_theta, Quantity::u_theta, Quantity::u_r, Quantity::u_z,
                     Quantity::generic})
    if (s == to_string(q)) return q;
  throw DomainError("unknown quantity tag: " + s);
}

ScalarField::ScalarField(const Grid& grid, Quantity tag)
    : grid_(grid), tag_(tag), values_(grid.size(), 0.0) {}

ScalarField& ScalarField::axpy(double a, const ScalarField& other) {
  require_same_grid(grid_, other.grid_, "ScalarField::axpy");
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i < n; ++i) values_[i] += a * other.values_[i];
  return *this;
}

ScalarField& ScalarField::scale(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

bool ScalarField::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.axpy(1.0, b);
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  ScalarField out = a;
  out.axpy(-1.0, b);
  return out;
}

ScalarField operator*(double s, const ScalarField& a) {
  ScalarField out = a;
  out.scale(s);
  return out;
}

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (a != b) throw GridMismatchError(std::string(where) + ": fields live on different grids");
}

ScalarField multiply_by_r_power(const ScalarField& f, double a) {
  ScalarField out = f;
  if (a == 0.0) return out;
  const Grid& g = f.grid();
  for (int i = 0; i < g.nr(); ++i) {
    const double w = std::pow(g.r(i), a);
    double* row = out.row(i);
    for (int k = 0; k < g.nz(); ++k) row[k] *= w;
  }
  return out;
}

AxiState::AxiState(ScalarField w, ScalarField u) : omega(std::move(w)), u_theta(std::move(u)) {
  require_same_grid(omega.grid(), u_theta.grid(), "AxiState");
  omega.set_tag(Quantity::omega_theta);
  u_theta.set_tag(Quantity::u_theta);
}

AxiState AxiState::zero(const Grid& grid) {
  return AxiState(ScalarField(grid, Quantity::omega_theta), ScalarField(grid, Quantity::u_theta));
}

namespace {

void require_p(double p) {
  if (!(p >= 1.0)) {
    std::ostringstream msg;
    msg << "L^p norm requires p >= 1, got " << p;
    throw DomainError(msg.str());
  }
}

// Core of every discrete norm: weights w_i per r row multiply |f|^p.
template <class Value>
double row_weighted_norm(const Grid& g, double p, double weight_exp, Measure m, Value value) {
  require_p(p);
  if (std::isinf(p)) {
    double mx = 0.0;
    for (int i = 0; i < g.nr(); ++i) {
      const double w = weight_exp == 0.0 ? 1.0 : std::pow(g.r(i), weight_exp);
      for (int k = 0; k < g.nz(); ++k) mx = std::max(mx, w * value(i, k));
    }
    return mx;
  }
  double total = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    const double r = g.r(i);
    double w = weight_exp == 0.0 ? 1.0 : std::pow(r, weight_exp * p);
    if (m == Measure::r3) w *= 2.0 * std::numbers::pi * r;
    double row = 0.0;
    if (p == 1.0) {
      for (int k = 0; k < g.nz(); ++k) row += value(i, k);
    } else if (p == 2.0) {
      for (int k = 0; k < g.nz(); ++k) {
        const double v = value(i, k);
        row += v * v;
      }
    } else {
      for (int k = 0; k < g.nz(); ++k) {
        const double v = value(i, k);
        if (v != 0.0) row += std::pow(v, p);
      }
    }
    total += w * row;
  }
  total *= g.cell_area();
  if (total == 0.0) return 0.0;
  return p == 1.0 ? total : p == 2.0 ? std::sqrt(total) : std::pow(total, 1.0 / p);
}

}  // namespace

double lp_norm_omega(const ScalarField& f, double p) { return weighted_lp(f, 0.0, p, Measure::omega); }

double lp_norm_r3(const ScalarField& f, double p) { return weighted_lp(f, 0.0, p, Measure::r3); }

double weighted_lp(const ScalarField& f, double a, double p, Measure measure) {
  return row_weighted_norm(f.grid(), p, a, measure,
                           [&f](int i, int k) { return std::abs(f(i, k)); });
}

double weighted_lp_vector(const ScalarField& a, const ScalarField& b, double weight, double p,
                          Measure measure) {
  require_same_grid(a.grid(), b.grid(), "weighted_lp_vector");
  return row_weighted_norm(a.grid(), p, weight, measure,
                           [&](int i, int k) { return std::hypot(a(i, k), b(i, k)); });
}

std::pair<ScalarField, ScalarField> gradient_tilde(const ScalarField& f) {
  const Grid& g = f.grid();
  if (g.nr() < 4 || g.nz() < 4) throw DomainError("gradient_tilde: grid needs at least 4x4 nodes");
  ScalarField dr(g), dz(g);
  const int nr = g.nr(), nz = g.nz();
  const double ir = 0.5 / g.hr(), iz = 0.5 / g.hz();
#pragma omp parallel for schedule(static)
  for (int i = 0; i < nr; ++i) {
    const double* c = f.row(i);
    double* out = dr.row(i);
    if (i == 0) {
      const double *a = f.row(1), *b = f.row(2);
      for (int k = 0; k < nz; ++k) out[k] = (-3.0 * c[k] + 4.0 * a[k] - b[k]) * ir;
    } else if (i == nr - 1) {
      const double *a = f.row(nr - 2), *b = f.row(nr - 3);
      for (int k = 0; k < nz; ++k) out[k] = (3.0 * c[k] - 4.0 * a[k] + b[k]) * ir;
    } else {
      const double *up = f.row(i + 1), *dn = f.row(i - 1);
      for (int k = 0; k < nz; ++k) out[k] = (up[k] - dn[k]) * ir;
    }
    double* oz = dz.row(i);
    oz[0] = (-3.0 * c[0] + 4.0 * c[1] - c[2]) * iz;
    for (int k = 1; k < nz - 1; ++k) oz[k] = (c[k + 1] - c[k - 1]) * iz;
    oz[nz - 1] = (3.0 * c[nz - 1] - 4.0 * c[nz - 2] + c[nz - 3]) * iz;
  }
  return {std::move(dr), std::move(dz)};
}

}  // namespace axisym
