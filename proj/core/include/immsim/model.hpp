#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace immsim {

/// Position or displacement. One-dimensional problems use only the first
/// coordinate; the second one is kept at zero.
using Point = std::array<double, 2>;

/// Periodic box [0, L)^d with a cell-centered grid of n cells per side.
/// Grid index layout is axis 0 fastest: index = i0 + n * i1.
class TorusDomain {
 public:
  TorusDomain() = default;
  TorusDomain(int dimension, double side_length, int cells_per_side);

  int dimension() const noexcept { return dimension_; }
  double side_length() const noexcept { return side_length_; }
  int cells_per_side() const noexcept { return cells_per_side_; }

  std::size_t cell_count() const noexcept;
  double spacing() const noexcept { return side_length_ / cells_per_side_; }
  double cell_volume() const noexcept;
  double volume() const noexcept;

  Point cell_center(std::size_t index) const;
  std::size_t cell_index(const Point& x) const;
  Point wrap(const Point& x) const;
  /// Minimum-image displacement `to - from`.
  Point displacement(const Point& from, const Point& to) const;
  double distance(const Point& a, const Point& b) const;

  bool operator==(const TorusDomain&) const = default;

 private:
  int dimension_ = 1;
  double side_length_ = 10.0;
  int cells_per_side_ = 100;
};

double norm(const Point& p) noexcept;

/// Grid-sampled function on a torus.
struct ScalarField {
  TorusDomain domain;
  std::vector<double> values;

  ScalarField() = default;
  explicit ScalarField(const TorusDomain& dom, double fill = 0.0);
  ScalarField(const TorusDomain& dom, std::vector<double> v);

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  double min() const;
  double max() const;
  /// Cell-volume weighted sum.
  double integral() const;

  bool operator==(const ScalarField&) const = default;
};

double sup_distance(const ScalarField& a, const ScalarField& b);
double l1_distance(const ScalarField& a, const ScalarField& b);

/// Radial function with compact support used to build convolution kernels.
/// `breakpoints` lists radii where the function has a kink or a jump.
struct RadialKernel {
  std::function<double(double)> profile;
  double cutoff = 0.0;
  std::vector<double> breakpoints;
};

enum class PotentialKind { tophat, gaussian, exponential, tabulated };

/// Nonnegative, bounded, compactly supported repulsion kernel phi(|x|).
///
/// tophat:      amplitude for r <= radius (cutoff = radius)
/// gaussian:    amplitude * exp(-r^2 / (2 scale^2)) for r <= cutoff
/// exponential: amplitude * exp(-r / scale) for r <= cutoff
/// tabulated:   linear interpolation of `table` on a uniform radial grid
///              spanning [0, cutoff]
///
/// An optional floor (r, phi*) asserts phi(x) >= phi* for |x| <= r.
class Potential {
 public:
  Potential() = default;

  static Potential zero();
  static Potential tophat(double amplitude, double radius);
  static Potential gaussian(double amplitude, double scale, double cutoff);
  static Potential exponential(double amplitude, double scale, double cutoff);
  static Potential tabulated(std::vector<double> table, double cutoff);

  /// Returns a copy carrying an explicit floor; throws AssumptionViolation
  /// if the kernel dips below `value` somewhere inside `radius`.
  Potential with_floor(double radius, double value) const;

  double operator()(double r) const noexcept;
  double operator()(const Point& displacement) const noexcept;

  PotentialKind kind() const noexcept { return kind_; }
  double amplitude() const noexcept { return amplitude_; }
  double length() const noexcept { return length_; }
  double cutoff() const noexcept { return cutoff_; }
  const std::vector<double>& table() const noexcept { return table_; }
  std::optional<double> explicit_floor_radius() const noexcept { return floor_radius_; }
  std::optional<double> explicit_floor_value() const noexcept { return floor_value_; }

  double upper_bound() const noexcept;
  bool is_zero() const noexcept { return upper_bound() == 0.0; }

  /// phi -> factor * phi (floor value scales along).
  Potential scaled(double factor) const;

  RadialKernel radial() const;

  bool operator==(const Potential&) const = default;

 private:
  PotentialKind kind_ = PotentialKind::tophat;
  double amplitude_ = 0.0;
  double length_ = 0.0;
  double cutoff_ = 0.0;
  std::vector<double> table_;
  std::optional<double> floor_radius_;
  std::optional<double> floor_value_;
};

struct PotentialStats {
  double phi_bar = 0.0;
  double l1_norm = 0.0;
  std::optional<double> floor_radius;
  std::optional<double> floor_value;
};

/// Sup, total mass and floor of `pot` in the dimension of `dom`. Closed forms
/// are used for every built-in kind (tabulated kernels integrate exactly as
/// piecewise-linear profiles). Throws AssumptionViolation when the support does
/// not fit in half the torus.
PotentialStats potential_stats(const Potential& pot, const TorusDomain& dom);

/// Throws AssumptionViolation unless mass > 0.
void require_positive_mass(double mass);

enum class RateKind { constant, patches, sinusoid, attraction_centers, tabulated };

/// Axis-aligned box [lo, hi) carrying a constant immigration intensity.
struct RatePatch {
  Point lo{};
  Point hi{};
  double value = 0.0;

  bool operator==(const RatePatch&) const = default;
};

/// Immigration intensity b(x) with a known upper bound b_bar.
class RateField {
 public:
  RateField() = default;

  static RateField constant(double value);
  /// Patches are tested in order; b = 0 outside every patch.
  static RateField patches(std::vector<RatePatch> patches, int dimension);
  /// base + amplitude * sin(2 pi (k . x) / period)
  static RateField sinusoid(double base, double amplitude, std::array<int, 2> wavenumber,
                            double period);
  /// Piecewise constant on the cells of `values.domain`.
  static RateField tabulated(ScalarField values);

  double operator()(const Point& x) const;
  double upper_bound() const noexcept { return b_bar_; }
  RateKind kind() const noexcept { return kind_; }

  double base() const noexcept { return base_; }
  double amplitude() const noexcept { return amplitude_; }
  std::array<int, 2> wavenumber() const noexcept { return wavenumber_; }
  double period() const noexcept { return period_; }
  int dimension() const noexcept { return dimension_; }
  const std::vector<RatePatch>& patch_list() const noexcept { return patches_; }
  const ScalarField& table() const noexcept { return table_; }
  const std::vector<Point>& centers() const noexcept { return centers_; }
  const Potential& center_kernel() const noexcept { return center_kernel_; }
  double cap() const noexcept { return cap_; }

  /// b -> factor * b.
  RateField scaled(double factor) const;

  bool operator==(const RateField&) const = default;

  friend RateField build_attraction_rate(const std::vector<Point>& centers,
                                         const Potential& kernel, double base, double cap,
                                         const TorusDomain& dom);

 private:
  RateKind kind_ = RateKind::constant;
  double base_ = 0.0;
  double amplitude_ = 0.0;
  std::array<int, 2> wavenumber_{1, 0};
  double period_ = 1.0;
  int dimension_ = 1;
  std::vector<RatePatch> patches_;
  ScalarField table_;
  std::vector<Point> centers_;
  Potential center_kernel_;
  double cap_ = 0.0;
  double b_bar_ = 0.0;
};

/// b(x) = min(cap, base * exp(sum_y kernel(x - y))) sampled on the cells of
/// `dom`. No centers (or a zero kernel) gives the constant field `base`.
RateField build_attraction_rate(const std::vector<Point>& centers, const Potential& kernel,
                                double base, double cap, const TorusDomain& dom);

double eval_potential(const Potential& pot, const Point& displacement);
double eval_rate(const RateField& rate, const Point& x);

/// Cell-centered samples of a field.
ScalarField discretize(const RateField& rate, const TorusDomain& dom);
ScalarField discretize(const std::function<double(const Point&)>& f, const TorusDomain& dom);

/// Cell-averaged kernel indexed by displacement: entry k holds the mean of
/// the kernel over the cell centered at displacement (k0 h, k1 h) taken modulo
/// the torus. Summing entries times the cell volume gives the grid mass.
ScalarField discretize_kernel(const RadialKernel& kernel, const TorusDomain& dom);

/// Kernel of `pot` on `dom`; throws GridTooCoarse when the cutoff spans fewer
/// than two grid spacings (the zero potential is exempt).
ScalarField discretize(const Potential& pot, const TorusDomain& dom);

}  // namespace immsim
