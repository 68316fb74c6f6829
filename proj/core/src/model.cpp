#include "immsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "immsim/error.hpp"
#include "quadrature.hpp"

namespace immsim {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

[[noreturn]] void violation(const std::string& what) {
  throw Error(Errc::assumption_violation, what);
}

// Minimum image of a scalar coordinate on a circle of circumference L.
double min_image(double s, double L) { return s - L * std::round(s / L); }

}  // namespace

// ---------------------------------------------------------------------------
// TorusDomain

TorusDomain::TorusDomain(int dimension, double side_length, int cells_per_side)
    : dimension_(dimension), side_length_(side_length), cells_per_side_(cells_per_side) {
  if (dimension != 1 && dimension != 2) {
    throw Error(Errc::range_error, "dimension must be 1 or 2");
  }
  if (!(side_length > 0.0) || !std::isfinite(side_length)) {
    throw Error(Errc::range_error, "side_length must be positive");
  }
  if (cells_per_side < 1) {
    throw Error(Errc::range_error, "grid_points_per_side must be positive");
  }
}

std::size_t TorusDomain::cell_count() const noexcept {
  const auto n = static_cast<std::size_t>(cells_per_side_);
  return dimension_ == 1 ? n : n * n;
}

double TorusDomain::cell_volume() const noexcept {
  const double h = spacing();
  return dimension_ == 1 ? h : h * h;
}

double TorusDomain::volume() const noexcept {
  return dimension_ == 1 ? side_length_ : side_length_ * side_length_;
}

Point TorusDomain::cell_center(std::size_t index) const {
  const auto n = static_cast<std::size_t>(cells_per_side_);
  const double h = spacing();
  Point c{};
  c[0] = (static_cast<double>(index % n) + 0.5) * h;
  if (dimension_ == 2) c[1] = (static_cast<double>(index / n) + 0.5) * h;
  return c;
}

std::size_t TorusDomain::cell_index(const Point& x) const {
  const Point w = wrap(x);
  const double h = spacing();
  auto axis = [&](double v) {
    auto i = static_cast<long>(std::floor(v / h));
    return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(cells_per_side_) - 1));
  };
  std::size_t idx = axis(w[0]);
  if (dimension_ == 2) idx += static_cast<std::size_t>(cells_per_side_) * axis(w[1]);
  return idx;
}

Point TorusDomain::wrap(const Point& x) const {
  Point w{};
  for (int a = 0; a < dimension_; ++a) {
    double v = std::fmod(x[a], side_length_);
    if (v < 0.0) v += side_length_;
    if (v >= side_length_) v = 0.0;
    w[a] = v;
  }
  return w;
}

Point TorusDomain::displacement(const Point& from, const Point& to) const {
  Point d{};
  for (int a = 0; a < dimension_; ++a) d[a] = min_image(to[a] - from[a], side_length_);
  return d;
}

double TorusDomain::distance(const Point& a, const Point& b) const {
  return norm(displacement(a, b));
}

double norm(const Point& p) noexcept { return std::hypot(p[0], p[1]); }

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(const TorusDomain& dom, double fill)
    : domain(dom), values(dom.cell_count(), fill) {}

ScalarField::ScalarField(const TorusDomain& dom, std::vector<double> v)
    : domain(dom), values(std::move(v)) {
  if (values.size() != dom.cell_count()) {
    throw Error(Errc::domain_mismatch, "field size does not match the grid");
  }
}

double ScalarField::min() const { return *std::min_element(values.begin(), values.end()); }
double ScalarField::max() const { return *std::max_element(values.begin(), values.end()); }

double ScalarField::integral() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s * domain.cell_volume();
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
  if (a.domain != b.domain) throw Error(Errc::domain_mismatch, "fields live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  if (a.domain != b.domain) throw Error(Errc::domain_mismatch, "fields live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d * a.domain.cell_volume();
}

// ---------------------------------------------------------------------------
// Potential

Potential Potential::zero() { return Potential{}; }

Potential Potential::tophat(double amplitude, double radius) {
  if (!finite_nonneg(amplitude)) violation("tophat amplitude must be finite and nonnegative");
  if (!(radius > 0.0) || !std::isfinite(radius)) violation("tophat radius must be positive");
  Potential p;
  p.kind_ = PotentialKind::tophat;
  p.amplitude_ = amplitude;
  p.length_ = radius;
  p.cutoff_ = radius;
  return p;
}

Potential Potential::gaussian(double amplitude, double scale, double cutoff) {
  if (!finite_nonneg(amplitude)) violation("gaussian amplitude must be finite and nonnegative");
  if (!(scale > 0.0) || !(cutoff > 0.0) || !std::isfinite(cutoff)) {
    violation("gaussian scale and cutoff must be positive");
  }
  Potential p;
  p.kind_ = PotentialKind::gaussian;
  p.amplitude_ = amplitude;
  p.length_ = scale;
  p.cutoff_ = cutoff;
  return p;
}

Potential Potential::exponential(double amplitude, double scale, double cutoff) {
  if (!finite_nonneg(amplitude)) violation("exponential amplitude must be finite and nonnegative");
  if (!(scale > 0.0) || !(cutoff > 0.0) || !std::isfinite(cutoff)) {
    violation("exponential scale and cutoff must be positive");
  }
  Potential p;
  p.kind_ = PotentialKind::exponential;
  p.amplitude_ = amplitude;
  p.length_ = scale;
  p.cutoff_ = cutoff;
  return p;
}

Potential Potential::tabulated(std::vector<double> table, double cutoff) {
  if (table.size() < 2) violation("tabulated potential needs at least two samples");
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) violation("tabulated cutoff must be positive");
  for (double v : table) {
    if (!finite_nonneg(v)) violation("tabulated potential values must be finite and nonnegative");
  }
  Potential p;
  p.kind_ = PotentialKind::tabulated;
  p.amplitude_ = *std::max_element(table.begin(), table.end());
  p.length_ = cutoff / static_cast<double>(table.size() - 1);
  p.cutoff_ = cutoff;
  p.table_ = std::move(table);
  return p;
}

Potential Potential::with_floor(double radius, double value) const {
  if (!(radius > 0.0) || !(value > 0.0)) violation("floor radius and value must be positive");
  if (radius > cutoff_) violation("floor radius exceeds the support of the potential");
  constexpr int kSamples = 2001;
  for (int i = 0; i < kSamples; ++i) {
    const double r = radius * i / (kSamples - 1);
    if ((*this)(r) < value * (1.0 - 1e-12)) {
      std::ostringstream os;
      os << "potential drops to " << (*this)(r) << " < floor " << value << " at r=" << r;
      violation(os.str());
    }
  }
  Potential p = *this;
  p.floor_radius_ = radius;
  p.floor_value_ = value;
  return p;
}

double Potential::operator()(double r) const noexcept {
  r = std::abs(r);
  if (r > cutoff_ || amplitude_ == 0.0) return 0.0;
  switch (kind_) {
    case PotentialKind::tophat:
      return amplitude_;
    case PotentialKind::gaussian:
      return amplitude_ * std::exp(-0.5 * (r * r) / (length_ * length_));
    case PotentialKind::exponential:
      return amplitude_ * std::exp(-r / length_);
    case PotentialKind::tabulated: {
      const double pos = r / length_;
      const auto i = std::min(static_cast<std::size_t>(pos), table_.size() - 2);
      const double f = pos - static_cast<double>(i);
      return table_[i] + f * (table_[i + 1] - table_[i]);
    }
  }
  return 0.0;
}

double Potential::operator()(const Point& displacement) const noexcept {
  return (*this)(norm(displacement));
}

double Potential::upper_bound() const noexcept { return amplitude_; }

Potential Potential::scaled(double factor) const {
  if (!finite_nonneg(factor)) violation("potential scale factor must be nonnegative");
  Potential p = *this;
  p.amplitude_ *= factor;
  for (double& v : p.table_) v *= factor;
  if (p.floor_value_) {
    if (factor > 0.0) {
      *p.floor_value_ *= factor;
    } else {
      p.floor_value_.reset();
      p.floor_radius_.reset();
    }
  }
  return p;
}

RadialKernel Potential::radial() const {
  RadialKernel k;
  Potential self = *this;
  k.profile = [self](double r) { return self(r); };
  k.cutoff = cutoff_;
  k.breakpoints = {0.0, cutoff_};
  if (kind_ == PotentialKind::tabulated) {
    for (std::size_t i = 1; i + 1 < table_.size(); ++i) {
      k.breakpoints.push_back(length_ * static_cast<double>(i));
    }
  }
  return k;
}

PotentialStats potential_stats(const Potential& pot, const TorusDomain& dom) {
  const double L = dom.side_length();
  if (pot.cutoff() > 0.5 * L * (1.0 + 1e-12)) {
    violation("potential cutoff exceeds half the torus side");
  }
  PotentialStats s;
  s.phi_bar = pot.upper_bound();
  if (!std::isfinite(s.phi_bar) || s.phi_bar < 0.0) violation("potential is not bounded");
  const bool two_d = dom.dimension() == 2;
  const double A = pot.amplitude();
  const double R = pot.cutoff();
  const double a = pot.length();
  constexpr double pi = std::numbers::pi;
  switch (pot.kind()) {
    case PotentialKind::tophat:
      s.l1_norm = two_d ? A * pi * R * R : 2.0 * A * R;
      break;
    case PotentialKind::gaussian:
      s.l1_norm = two_d ? 2.0 * pi * A * a * a * (1.0 - std::exp(-0.5 * R * R / (a * a)))
                        : A * a * std::sqrt(2.0 * pi) * std::erf(R / (a * std::sqrt(2.0)));
      break;
    case PotentialKind::exponential:
      s.l1_norm = two_d ? 2.0 * pi * A * a * a * (1.0 - std::exp(-R / a) * (1.0 + R / a))
                        : 2.0 * A * a * (1.0 - std::exp(-R / a));
      break;
    case PotentialKind::tabulated: {
      const auto& t = pot.table();
      double acc = 0.0;
      for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        const double r0 = a * static_cast<double>(i);
        const double r1 = r0 + a;
        acc += two_d ? a / 6.0 * (t[i] * (2.0 * r0 + r1) + t[i + 1] * (r0 + 2.0 * r1))
                     : 0.5 * a * (t[i] + t[i + 1]);
      }
      s.l1_norm = two_d ? 2.0 * pi * acc : 2.0 * acc;
      break;
    }
  }
  if (!std::isfinite(s.l1_norm)) violation("potential is not integrable");

  if (pot.explicit_floor_radius()) {
    s.floor_radius = pot.explicit_floor_radius();
    s.floor_value = pot.explicit_floor_value();
  } else if (A > 0.0) {
    switch (pot.kind()) {
      case PotentialKind::tophat:
        s.floor_radius = R;
        s.floor_value = A;
        break;
      case PotentialKind::gaussian:
      case PotentialKind::exponential:
        if (a <= R) {
          s.floor_radius = a;
          s.floor_value = pot(a);
        }
        break;
      case PotentialKind::tabulated:
        break;
    }
  }
  return s;
}

void require_positive_mass(double mass) {
  if (!(mass > 0.0)) violation("operation requires a potential with positive mass");
}

// ---------------------------------------------------------------------------
// RateField

RateField RateField::constant(double value) {
  if (!finite_nonneg(value)) violation("constant rate must be finite and nonnegative");
  RateField r;
  r.kind_ = RateKind::constant;
  r.base_ = value;
  r.b_bar_ = value;
  return r;
}

RateField RateField::patches(std::vector<RatePatch> patches, int dimension) {
  if (dimension != 1 && dimension != 2) throw Error(Errc::range_error, "dimension must be 1 or 2");
  RateField r;
  r.kind_ = RateKind::patches;
  r.dimension_ = dimension;
  for (auto& p : patches) {
    if (!finite_nonneg(p.value)) violation("patch rate must be finite and nonnegative");
    r.b_bar_ = std::max(r.b_bar_, p.value);
    if (dimension == 1) {
      p.lo[1] = 0.0;
      p.hi[1] = 0.0;
    }
  }
  r.patches_ = std::move(patches);
  return r;
}

RateField RateField::sinusoid(double base, double amplitude, std::array<int, 2> wavenumber,
                              double period) {
  if (!std::isfinite(base) || !std::isfinite(amplitude) || std::abs(amplitude) > base) {
    violation("sinusoid rate requires |amplitude| <= base");
  }
  if (!(period > 0.0)) violation("sinusoid period must be positive");
  RateField r;
  r.kind_ = RateKind::sinusoid;
  r.base_ = base;
  r.amplitude_ = amplitude;
  r.wavenumber_ = wavenumber;
  r.period_ = period;
  r.b_bar_ = base + std::abs(amplitude);
  return r;
}

RateField RateField::tabulated(ScalarField values) {
  if (values.size() != values.domain.cell_count()) {
    throw Error(Errc::domain_mismatch, "tabulated rate does not match its grid");
  }
  for (double v : values.values) {
    if (!finite_nonneg(v)) violation("tabulated rate values must be finite and nonnegative");
  }
  RateField r;
  r.kind_ = RateKind::tabulated;
  r.dimension_ = values.domain.dimension();
  r.b_bar_ = values.max();
  r.table_ = std::move(values);
  return r;
}

double RateField::operator()(const Point& x) const {
  switch (kind_) {
    case RateKind::constant:
      return base_;
    case RateKind::patches:
      for (const auto& p : patches_) {
        bool inside = x[0] >= p.lo[0] && x[0] < p.hi[0];
        if (dimension_ == 2) inside = inside && x[1] >= p.lo[1] && x[1] < p.hi[1];
        if (inside) return p.value;
      }
      return 0.0;
    case RateKind::sinusoid: {
      const double phase = 2.0 * std::numbers::pi *
                           (wavenumber_[0] * x[0] + wavenumber_[1] * x[1]) / period_;
      return std::max(0.0, base_ + amplitude_ * std::sin(phase));
    }
    case RateKind::attraction_centers:
    case RateKind::tabulated:
      return table_[table_.domain.cell_index(x)];
  }
  return 0.0;
}

RateField RateField::scaled(double factor) const {
  if (!finite_nonneg(factor)) violation("rate scale factor must be nonnegative");
  RateField r = *this;
  r.base_ *= factor;
  r.amplitude_ *= factor;
  r.cap_ *= factor;
  r.b_bar_ *= factor;
  for (auto& p : r.patches_) p.value *= factor;
  for (double& v : r.table_.values) v *= factor;
  return r;
}

RateField build_attraction_rate(const std::vector<Point>& centers, const Potential& kernel,
                                double base, double cap, const TorusDomain& dom) {
  if (!(base > 0.0) || !std::isfinite(base)) violation("attraction base rate must be positive");
  if (!(cap >= base)) violation("attraction cap must be at least the base rate");
  if (centers.empty() || kernel.is_zero()) return RateField::constant(base);
  ScalarField table(dom);
  for (std::size_t i = 0; i < table.size(); ++i) {
    const Point x = dom.cell_center(i);
    double exponent = 0.0;
    for (const auto& y : centers) exponent += kernel(dom.displacement(y, x));
    table[i] = std::min(cap, base * std::exp(exponent));
  }
  RateField r = RateField::tabulated(std::move(table));
  r.kind_ = RateKind::attraction_centers;
  r.base_ = base;
  r.cap_ = cap;
  r.centers_ = centers;
  r.center_kernel_ = kernel;
  return r;
}

double eval_potential(const Potential& pot, const Point& displacement) {
  return pot(displacement);
}

double eval_rate(const RateField& rate, const Point& x) { return rate(x); }

// ---------------------------------------------------------------------------
// Discretization

ScalarField discretize(const RateField& rate, const TorusDomain& dom) {
  ScalarField f(dom);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = rate(dom.cell_center(i));
  return f;
}

ScalarField discretize(const std::function<double(const Point&)>& fn, const TorusDomain& dom) {
  ScalarField f(dom);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = fn(dom.cell_center(i));
  return f;
}

namespace {

// Integral over [a, b] of g(|min_image(s)|) split at every point where the
// integrand has a kink or jump.
double cell_integral_1d(const RadialKernel& k, double a, double b, double L) {
  std::vector<double> cuts{a, b};
  for (int shift = -2; shift <= 2; ++shift) {
    const double base = shift * L;
    cuts.push_back(base + 0.5 * L);
    for (double rb : k.breakpoints) {
      cuts.push_back(base + rb);
      cuts.push_back(base - rb);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double prev = a;
  for (double c : cuts) {
    if (c <= prev || c > b) continue;
    total += detail::gauss_legendre(prev, c, [&](double s) {
      return k.profile(std::abs(s - L * std::round(s / L)));
    });
    prev = c;
  }
  if (prev < b) {
    total += detail::gauss_legendre(prev, b, [&](double s) {
      return k.profile(std::abs(s - L * std::round(s / L)));
    });
  }
  return total;
}

// Smallest |min_image(s)| over s in [a, b].
double min_abs_image(double a, double b, double L) {
  if (std::floor(a / L) != std::floor(b / L) || std::fmod(a, L) == 0.0) return 0.0;
  return std::min(std::abs(a - L * std::round(a / L)), std::abs(b - L * std::round(b / L)));
}

std::vector<double> axis_cuts(double a, double b, double L, int subdivisions) {
  std::vector<double> cuts;
  for (int i = 0; i <= subdivisions; ++i) cuts.push_back(a + (b - a) * i / subdivisions);
  for (int shift = -2; shift <= 2; ++shift) {
    for (double c : {shift * L, shift * L + 0.5 * L}) {
      if (c > a && c < b) cuts.push_back(c);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

}  // namespace

ScalarField discretize_kernel(const RadialKernel& kernel, const TorusDomain& dom) {
  ScalarField w(dom);
  const double L = dom.side_length();
  const double h = dom.spacing();
  const int n = dom.cells_per_side();
  if (kernel.cutoff <= 0.0) return w;
  if (dom.dimension() == 1) {
    for (int k = 0; k < n; ++k) {
      const double s = k * h;
      const double a = s - 0.5 * h;
      const double b = s + 0.5 * h;
      if (min_abs_image(a, b, L) > kernel.cutoff) continue;
      w[static_cast<std::size_t>(k)] = cell_integral_1d(kernel, a, b, L) / h;
    }
    return w;
  }
  constexpr int kSub = 4;
  for (int k1 = 0; k1 < n; ++k1) {
    const double a1 = k1 * h - 0.5 * h;
    const double b1 = a1 + h;
    const double d1 = min_abs_image(a1, b1, L);
    if (d1 > kernel.cutoff) continue;
    const auto cuts1 = axis_cuts(a1, b1, L, kSub);
    for (int k0 = 0; k0 < n; ++k0) {
      const double a0 = k0 * h - 0.5 * h;
      const double b0 = a0 + h;
      const double d0 = min_abs_image(a0, b0, L);
      if (std::hypot(d0, d1) > kernel.cutoff) continue;
      const auto cuts0 = axis_cuts(a0, b0, L, kSub);
      double total = 0.0;
      for (std::size_t j = 0; j + 1 < cuts1.size(); ++j) {
        total += detail::gauss_legendre(cuts1[j], cuts1[j + 1], [&](double y) {
          const double my = y - L * std::round(y / L);
          double inner = 0.0;
          for (std::size_t i = 0; i + 1 < cuts0.size(); ++i) {
            inner += detail::gauss_legendre(cuts0[i], cuts0[i + 1], [&](double x) {
              const double mx = x - L * std::round(x / L);
              return kernel.profile(std::hypot(mx, my));
            });
          }
          return inner;
        });
      }
      w[static_cast<std::size_t>(k0) + static_cast<std::size_t>(n) * k1] = total / (h * h);
    }
  }
  return w;
}

ScalarField discretize(const Potential& pot, const TorusDomain& dom) {
  if (pot.cutoff() > 0.5 * dom.side_length() * (1.0 + 1e-12)) {
    violation("potential cutoff exceeds half the torus side");
  }
  if (!pot.is_zero() && pot.cutoff() < 2.0 * dom.spacing()) {
    std::ostringstream os;
    os << "cutoff " << pot.cutoff() << " is below two grid spacings (" << dom.spacing() << ")";
    throw Error(Errc::grid_too_coarse, os.str());
  }
  if (pot.is_zero()) return ScalarField(dom);
  return discretize_kernel(pot.radial(), dom);
}

}  // namespace immsim
