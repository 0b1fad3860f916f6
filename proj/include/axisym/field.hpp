#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace axisym {

/// Truncated half-plane {0 < r < R_max, |z| < Z_max} with cell-centered
/// nodes: r_i = (i + 1/2) h_r, z_k = -Z_max + (k + 1/2) h_z.
class Grid {
 public:
  Grid() = default;
  Grid(int nr, int nz, double r_max, double z_max);

  int nr() const { return nr_; }
  int nz() const { return nz_; }
  double hr() const { return hr_; }
  double hz() const { return hz_; }
  double r_max() const { return r_max_; }
  double z_max() const { return z_max_; }
  std::size_t size() const { return static_cast<std::size_t>(nr_) * nz_; }

  double r(int i) const { return (i + 0.5) * hr_; }
  double z(int k) const { return -z_max_ + (k + 0.5) * hz_; }
  double cell_area() const { return hr_ * hz_; }

  /// Same node counts, all lengths divided by lambda.
  Grid rescaled(double lambda) const;

  std::uint64_t hash() const;
  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  int nr_ = 0, nz_ = 0;
  double r_max_ = 0.0, z_max_ = 0.0, hr_ = 0.0, hz_ = 0.0;
};

enum class Quantity { omega_theta, u_theta, u_r, u_z, generic };
const char* to_string(Quantity q);
Quantity quantity_from_string(const std::string& s);

/// One axisymmetric scalar on a grid, stored row-major in r: values[i*nz + k].
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(const Grid& grid, Quantity tag = Quantity::generic);

  const Grid& grid() const { return grid_; }
  Quantity tag() const { return tag_; }
  void set_tag(Quantity q) { tag_ = q; }

  double& operator()(int i, int k) { return values_[static_cast<std::size_t>(i) * grid_.nz() + k]; }
  double operator()(int i, int k) const { return values_[static_cast<std::size_t>(i) * grid_.nz() + k]; }
  double* row(int i) { return values_.data() + static_cast<std::size_t>(i) * grid_.nz(); }
  const double* row(int i) const { return values_.data() + static_cast<std::size_t>(i) * grid_.nz(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  /// this += a * other
  ScalarField& axpy(double a, const ScalarField& other);
  ScalarField& scale(double a);
  bool all_finite() const;
  double max_abs() const;

  template <class Fn>
  static ScalarField from_function(const Grid& grid, Fn fn, Quantity tag = Quantity::generic) {
    ScalarField f(grid, tag);
    for (int i = 0; i < grid.nr(); ++i)
      for (int k = 0; k < grid.nz(); ++k) f(i, k) = fn(grid.r(i), grid.z(k));
    return f;
  }

 private:
  Grid grid_;
  Quantity tag_ = Quantity::generic;
  std::vector<double> values_;
};

ScalarField operator+(const ScalarField& a, const ScalarField& b);
ScalarField operator-(const ScalarField& a, const ScalarField& b);
ScalarField operator*(double s, const ScalarField& a);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

/// Pointwise r^a f.
ScalarField multiply_by_r_power(const ScalarField& f, double a);

/// (u_r, u_z) as recovered from the vorticity.
struct Velocity {
  ScalarField ur;
  ScalarField uz;
};

/// (omega^theta, u^theta) at one time, with an optional cached velocity.
struct AxiState {
  ScalarField omega;
  ScalarField u_theta;
  std::shared_ptr<const Velocity> velocity;  // valid iff non-null

  AxiState() = default;
  AxiState(ScalarField w, ScalarField u);
  static AxiState zero(const Grid& grid);

  const Grid& grid() const { return omega.grid(); }
  void invalidate_velocity() { velocity.reset(); }
};

enum class Measure { omega, r3 };

/// (sum |f|^p h_r h_z)^{1/p}; p = infinity gives max |f|.
double lp_norm_omega(const ScalarField& f, double p);
/// (2 pi sum |f|^p r h_r h_z)^{1/p}; p = infinity gives max |f|.
double lp_norm_r3(const ScalarField& f, double p);
/// Norm of r^a f in the chosen measure.
double weighted_lp(const ScalarField& f, double a, double p, Measure measure);
/// Norm of the pointwise Euclidean length of a vector field (a, b).
double weighted_lp_vector(const ScalarField& a, const ScalarField& b, double weight, double p,
                          Measure measure);

/// (d/dr f, d/dz f): centered second order inside, one-sided second order on edges.
std::pair<ScalarField, ScalarField> gradient_tilde(const ScalarField& f);

// Snapshot files: header (magic, version, nr, nz, R_max, Z_max, tag, time)
// followed by the raw values. Both variants round-trip bit-exactly.
void write_snapshot_binary(const std::filesystem::path& path, const ScalarField& f, double time);
std::pair<ScalarField, double> read_snapshot_binary(const std::filesystem::path& path);
void write_snapshot_text(const std::filesystem::path& path, const ScalarField& f, double time);
std::pair<ScalarField, double> read_snapshot_text(const std::filesystem::path& path);

}  // namespace axisym
