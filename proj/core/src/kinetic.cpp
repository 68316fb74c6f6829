#include "immsim/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "immsim/error.hpp"
#include "kinetic_detail.hpp"

namespace immsim {

namespace detail {

std::vector<double> normalized_snapshots(const std::vector<double>& requested, double t_end) {
  std::vector<double> times{0.0, t_end};
  for (double t : requested) {
    if (!(t >= 0.0) || t > t_end * (1.0 + 1e-12)) {
      std::ostringstream os;
      os << "snapshot time " << t << " outside [0, " << t_end << "]";
      throw Error(Errc::time_out_of_range, os.str());
    }
    times.push_back(std::min(t, t_end));
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return times;
}

ScalarField initial_density(const KineticConfig& cfg) {
  if (cfg.initial.values.empty()) return ScalarField(cfg.domain);
  if (cfg.initial.domain != cfg.domain) {
    throw Error(Errc::domain_mismatch, "initial density is not defined on the solver grid");
  }
  require_nonnegative(cfg.initial);
  return cfg.initial;
}

void require_nonnegative(const ScalarField& rho) {
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0)) {
      std::ostringstream os;
      os << "density " << rho[i] << " at cell " << i;
      throw Error(Errc::negative_density, os.str());
    }
  }
}

void check_config(const KineticConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw Error(Errc::range_error, "dt must be positive");
  if (!(cfg.t_end >= 0.0) || !std::isfinite(cfg.t_end)) {
    throw Error(Errc::range_error, "t_end must be finite and nonnegative");
  }
  const double step_rate = cfg.dt * cfg.rate.upper_bound();
  if (step_rate > kMaxStepRate * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt * b_bar = " << step_rate << " exceeds " << kMaxStepRate;
    throw Error(Errc::step_too_large, os.str());
  }
}

}  // namespace detail

ScalarField discretize_closure_kernel(const Potential& pot, const TorusDomain& dom) {
  // Same support checks as the plain kernel.
  (void)discretize(pot, dom);
  if (pot.is_zero()) return ScalarField(dom);
  RadialKernel k = pot.radial();
  Potential copy = pot;
  k.profile = [copy](double r) { return -std::expm1(-copy(r)); };
  return discretize_kernel(k, dom);
}

KineticRhs::KineticRhs(const TorusDomain& dom, const Potential& pot, const RateField& rate,
                       RhsVariant variant)
    : rate_(discretize(rate, dom)),
      conv_(variant == RhsVariant::kinetic ? discretize(pot, dom)
                                           : discretize_closure_kernel(pot, dom)) {}

ScalarField KineticRhs::operator()(const ScalarField& rho) const {
  ScalarField out = conv_.apply(rho);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = rate_[i] * std::exp(-std::max(0.0, out[i]));
  }
  return out;
}

ScalarField rhs_kinetic(const RateField& rate, const Potential& pot, const ScalarField& rho) {
  detail::require_nonnegative(rho);
  return KineticRhs(rho.domain, pot, rate, RhsVariant::kinetic)(rho);
}

ScalarField rhs_closure(const RateField& rate, const Potential& pot, const ScalarField& rho) {
  detail::require_nonnegative(rho);
  return KineticRhs(rho.domain, pot, rate, RhsVariant::closure)(rho);
}

KineticSolution solve(const KineticConfig& cfg) {
  detail::check_config(cfg);
  if (cfg.method == KineticMethod::picard) return solve_picard(cfg);

  const KineticRhs rhs(cfg.domain, cfg.potential, cfg.rate, cfg.variant);
  const auto times = detail::normalized_snapshots(cfg.snapshot_times, cfg.t_end);
  ScalarField rho = detail::initial_density(cfg);
  const std::size_t n = rho.size();

  KineticSolution sol;
  sol.variant = cfg.variant;
  sol.times = times;
  sol.densities.reserve(times.size());
  sol.densities.push_back(rho);

  ScalarField stage(cfg.domain);
  for (std::size_t s = 1; s < times.size(); ++s) {
    const double span = times[s] - times[s - 1];
    const auto steps = std::max<long>(1, static_cast<long>(std::ceil(span / cfg.dt - 1e-9)));
    const double h = span / static_cast<double>(steps);
    for (long k = 0; k < steps; ++k) {
      const ScalarField k1 = rhs(rho);
      for (std::size_t i = 0; i < n; ++i) stage[i] = rho[i] + 0.5 * h * k1[i];
      const ScalarField k2 = rhs(stage);
      for (std::size_t i = 0; i < n; ++i) stage[i] = rho[i] + 0.5 * h * k2[i];
      const ScalarField k3 = rhs(stage);
      for (std::size_t i = 0; i < n; ++i) stage[i] = rho[i] + h * k3[i];
      const ScalarField k4 = rhs(stage);
      for (std::size_t i = 0; i < n; ++i) {
        rho[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    }
    sol.densities.push_back(rho);
  }
  return sol;
}

double homogeneous_exact(double b, double mass, double t) {
  require_positive_mass(mass);
  return std::log1p(b * mass * t) / mass;
}

double homogeneous_deviation(const KineticSolution& sol, double b, double mass) {
  double worst = 0.0;
  for (std::size_t j = 0; j < sol.times.size(); ++j) {
    const double exact = homogeneous_exact(b, mass, sol.times[j]);
    if (exact == 0.0) continue;
    for (double v : sol.densities[j].values) worst = std::max(worst, std::abs(v - exact) / exact);
  }
  return worst;
}

EffectiveRates effective_rates(const RateField& rate, const Potential& pot, const ScalarField& rho0,
                               RhsVariant variant) {
  const KineticRhs rhs(rho0.domain, pot, rate, variant);
  const ScalarField c = rhs(rho0);
  return {rhs.mass() * c.min(), rhs.mass() * c.max()};
}

EnvelopePair envelopes(double b_minus, double b_plus, double t) {
  if (!(b_minus >= 0.0) || b_plus < b_minus) {
    throw Error(Errc::range_error, "envelopes need 0 <= b_minus <= b_plus");
  }
  if (b_plus == b_minus) {
    const double w = std::log1p(b_plus * t);
    return {w, w};
  }
  const double gap = b_plus - b_minus;
  // log(b+/gap - (b-/gap) e^{-gap t}) written as log1p of a nonnegative term.
  const double lower = std::log1p(-b_minus * std::expm1(-gap * t) / gap);
  return {lower, lower + gap * t};
}

EnvelopeBounds::EnvelopeBounds(double b_minus, double b_plus) : b_minus_(b_minus), b_plus_(b_plus) {
  if (!(b_minus >= 0.0) || b_plus < b_minus) {
    throw Error(Errc::range_error, "envelopes need 0 <= b_minus <= b_plus");
  }
}

void BoundReport::require() const {
  if (passed) return;
  std::ostringstream os;
  os.precision(17);
  os << "worst slack " << worst_slack << " at t=" << worst_time << " cell " << worst_cell;
  throw Error(Errc::bound_violation, os.str());
}

BoundReport verify_bounds(const KineticSolution& sol, const EnvelopeBounds& env,
                          const ScalarField& rho0, double mass, double tolerance,
                          double allowance) {
  require_positive_mass(mass);
  BoundReport report;
  report.tolerance = tolerance;
  report.allowance = allowance;
  report.worst_slack = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < sol.times.size(); ++s) {
    const double t = sol.times[s];
    const ScalarField& rho = sol.densities[s];
    if (rho.domain != rho0.domain) throw Error(Errc::domain_mismatch, "snapshot grid differs from rho0");
    BoundRow row;
    row.t = t;
    row.omega_minus = env.omega_minus(t);
    row.omega_plus = env.omega_plus(t);
    row.min_slack = std::numeric_limits<double>::infinity();
    row.max_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rho.size(); ++i) {
      const double lo = rho[i] - (rho0[i] + row.omega_minus / mass);
      const double hi = (rho0[i] + row.omega_plus / mass) - rho[i];
      row.min_slack = std::min(row.min_slack, lo);
      row.max_slack = std::min(row.max_slack, hi);
      const double worst = std::min(lo, hi);
      if (worst < report.worst_slack) {
        report.worst_slack = worst;
        report.worst_time = t;
        report.worst_cell = i;
      }
    }
    report.rows.push_back(row);
  }
  report.passed = report.worst_slack >= -(tolerance + allowance);
  return report;
}

namespace {

// Solves w + log w = log_z for very large z, where w e^w overflows.
double lambert_w_from_log(double log_z) {
  double w = log_z - std::log(log_z);
  for (int i = 0; i < 100; ++i) {
    const double step = (w + std::log(w) - log_z) / (1.0 + 1.0 / w);
    w -= step;
    if (std::abs(step) <= 1e-16 * w) break;
  }
  return w;
}

}  // namespace

double lambert_w(double z) {
  if (!(z >= 0.0)) throw Error(Errc::range_error, "lambert_w needs z >= 0");
  if (z == 0.0) return 0.0;
  if (!std::isfinite(z)) return z;
  double lo = 0.0;
  double hi = std::log1p(z);
  double w = z < 1.0 ? z / (1.0 + z) : std::log1p(z) - std::log1p(std::log1p(z)) * 0.5;
  for (int i = 0; i < 200; ++i) {
    const double ew = std::exp(w);
    const double f = w * ew - z;
    if (f == 0.0) return w;
    if (f > 0.0) hi = std::min(hi, w); else lo = std::max(lo, w);
    double next = w - f / (ew * (w + 1.0));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, w)) {
      return next;
    }
    w = next;
  }
  return w;
}

double horizon_T(double theta0, double theta, double b_bar, double mass) {
  if (!std::isfinite(theta0) || !std::isfinite(theta)) {
    throw Error(Errc::infinite_theta, "horizon needs finite exponents");
  }
  if (!(theta > theta0)) throw Error(Errc::order_violation, "horizon needs theta > theta0");
  if (!(b_bar > 0.0)) throw Error(Errc::range_error, "horizon needs b_bar > 0");
  require_positive_mass(mass);
  return (theta - theta0) / b_bar * std::exp(theta0 - mass * std::exp(theta));
}

HorizonTau horizon_tau(double theta0, double b_bar, double mass) {
  if (!std::isfinite(theta0)) {
    throw Error(Errc::infinite_theta, "theta0 = -inf needs a finite surrogate");
  }
  if (!(b_bar > 0.0)) throw Error(Errc::range_error, "horizon needs b_bar > 0");
  require_positive_mass(mass);
  const double log_z = -theta0 - std::log(mass);
  HorizonTau h;
  h.delta = log_z > 700.0 ? lambert_w_from_log(log_z) : lambert_w(std::exp(log_z));
  h.tau = h.delta / b_bar * std::exp(theta0 - 1.0 / h.delta);
  h.tau_alt = std::exp(-h.delta - 1.0 / h.delta) / (b_bar * mass);
  return h;
}

}  // namespace immsim
