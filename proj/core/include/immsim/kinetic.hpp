#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "immsim/convolution.hpp"
#include "immsim/model.hpp"

namespace immsim {

enum class KineticMethod { rk4, picard };

/// kinetic: d rho/dt = b exp(-(phi * rho))
/// closure: d rho/dt = b exp(-((1 - e^{-phi}) * rho))   (product decoupling)
enum class RhsVariant { kinetic, closure };

/// Largest admissible dt * b_bar for the explicit marches.
inline constexpr double kMaxStepRate = 0.05;

struct KineticConfig {
  TorusDomain domain;
  Potential potential;
  RateField rate;
  /// Initial density; an empty value list means rho_0 = 0.
  ScalarField initial;
  double dt = 0.01;
  double t_end = 1.0;
  KineticMethod method = KineticMethod::rk4;
  RhsVariant variant = RhsVariant::kinetic;
  /// Output times in [0, t_end]. Empty means {0, t_end}. 0 and t_end are
  /// always included.
  std::vector<double> snapshot_times;
};

struct KineticSolution {
  std::vector<double> times;
  std::vector<ScalarField> densities;
  RhsVariant variant = RhsVariant::kinetic;
  /// Picard only: largest iteration count used by any segment.
  std::size_t max_iterations = 0;
  std::size_t segments = 0;
};

/// Evaluates the right-hand side for a fixed (b, kernel) pair on one grid.
class KineticRhs {
 public:
  KineticRhs(const TorusDomain& dom, const Potential& pot, const RateField& rate,
             RhsVariant variant);

  ScalarField operator()(const ScalarField& rho) const;

  const Convolver& convolver() const noexcept { return conv_; }
  const ScalarField& rate_samples() const noexcept { return rate_; }
  /// Grid mass of the kernel in use.
  double mass() const noexcept { return conv_.mass(); }

 private:
  ScalarField rate_;
  Convolver conv_;
};

/// Kernel 1 - exp(-phi) on the grid of `dom`.
ScalarField discretize_closure_kernel(const Potential& pot, const TorusDomain& dom);

ScalarField rhs_kinetic(const RateField& rate, const Potential& pot, const ScalarField& rho);
ScalarField rhs_closure(const RateField& rate, const Potential& pot, const ScalarField& rho);

/// Fixed-step classical RK4 march. Throws StepTooLarge if dt * b_bar > 0.05.
KineticSolution solve(const KineticConfig& cfg);

/// Picard iteration of the integral form u = V(u) for u_t = <phi>_h (rho_t - rho_0),
/// restarted segment by segment. `segment` defaults to 0.9 / b_plus. Throws
/// NoContraction if b_plus * segment >= 1 and NonConvergence if a segment
/// needs more than 200 sweeps to move less than 1e-10.
KineticSolution solve_picard(const KineticConfig& cfg, std::optional<double> segment = {});

/// Closed-form density of the homogeneous problem with zero initial state:
/// log(1 + b <phi> t) / <phi>.
double homogeneous_exact(double b, double mass, double t);

/// Largest relative deviation of any positive-time snapshot cell from
/// homogeneous_exact(b, mass, t).
double homogeneous_deviation(const KineticSolution& sol, double b, double mass);

struct EffectiveRates {
  double minus = 0.0;
  double plus = 0.0;
};

/// b+- = mass * sup/inf over the grid of b(x) exp(-(phi * rho0)(x)), using the
/// grid mass of the kernel.
EffectiveRates effective_rates(const RateField& rate, const Potential& pot, const ScalarField& rho0,
                               RhsVariant variant = RhsVariant::kinetic);

struct EnvelopePair {
  double minus = 0.0;
  double plus = 0.0;
};

/// Closed-form envelopes omega_-(t) <= u_t(x) <= omega_+(t).
EnvelopePair envelopes(double b_minus, double b_plus, double t);

class EnvelopeBounds {
 public:
  EnvelopeBounds(double b_minus, double b_plus);
  explicit EnvelopeBounds(const EffectiveRates& r) : EnvelopeBounds(r.minus, r.plus) {}

  double b_minus() const noexcept { return b_minus_; }
  double b_plus() const noexcept { return b_plus_; }
  double omega_minus(double t) const { return envelopes(b_minus_, b_plus_, t).minus; }
  double omega_plus(double t) const { return envelopes(b_minus_, b_plus_, t).plus; }

 private:
  double b_minus_;
  double b_plus_;
};

struct BoundRow {
  double t = 0.0;
  double omega_minus = 0.0;
  double omega_plus = 0.0;
  /// min over cells of rho_t - (rho_0 + omega_-/mass)
  double min_slack = 0.0;
  /// min over cells of (rho_0 + omega_+/mass) - rho_t
  double max_slack = 0.0;
};

struct BoundReport {
  std::vector<BoundRow> rows;
  double tolerance = 1e-9;
  double allowance = 0.0;
  bool passed = true;
  double worst_slack = 0.0;
  double worst_time = 0.0;
  std::size_t worst_cell = 0;

  /// Throws BoundViolation naming the worst offender when !passed.
  void require() const;
};

/// Checks rho_0 + omega_-/mass <= rho_t <= rho_0 + omega_+/mass at every
/// snapshot and cell, accepting slack down to -(tolerance + allowance).
BoundReport verify_bounds(const KineticSolution& sol, const EnvelopeBounds& env,
                          const ScalarField& rho0, double mass, double tolerance = 1e-9,
                          double allowance = 0.0);

/// Principal branch of w e^w = z for z >= 0 (Newton, bisection fallback).
double lambert_w(double z);

/// Local existence horizon ((theta - theta0)/b_bar) exp(theta0 - mass e^theta).
/// Throws OrderViolation unless theta > theta0.
double horizon_T(double theta0, double theta, double b_bar, double mass);

struct HorizonTau {
  double delta = 0.0;
  /// (delta / b_bar) exp(theta0 - 1/delta)
  double tau = 0.0;
  /// exp(-delta - 1/delta) / (b_bar mass)
  double tau_alt = 0.0;
};

/// Supremum over theta of horizon_T. Throws InfiniteTheta for theta0 = -inf.
HorizonTau horizon_tau(double theta0, double b_bar, double mass);

}  // namespace immsim
