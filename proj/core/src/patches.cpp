#include "immsim/patches.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "immsim/error.hpp"
#include "immsim/kinetic.hpp"

namespace immsim {

namespace {

void validate(const PatchParams& p) {
  if (!(p.b_A > 0.0) || !(p.b_B > 0.0)) throw Error(Errc::range_error, "patch rates must be positive");
  if (!(p.alpha >= 0.0)) throw Error(Errc::range_error, "alpha must be nonnegative");
}

}  // namespace

std::array<double, 2> rhs_patch(const PatchParams& p, const PatchState& s) {
  return {p.b_A * std::exp(-p.alpha * s.rho_A - s.rho_B),
          p.b_B * std::exp(-s.rho_A - p.alpha * s.rho_B)};
}

std::vector<PatchState> solve_patch(const PatchParams& p, double t_end, double dt,
                                    double snapshot_every) {
  validate(p);
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw Error(Errc::range_error, "need dt > 0 and t_end >= 0");
  const double step_rate = dt * std::max(p.b_A, p.b_B);
  if (step_rate > kMaxStepRate * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "dt * max(b_A, b_B) = " << step_rate << " exceeds " << kMaxStepRate;
    throw Error(Errc::step_too_large, os.str());
  }
  const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-9));
  const long stride = snapshot_every > 0.0
                          ? std::max(1L, static_cast<long>(std::llround(snapshot_every / dt)))
                          : std::max(1L, steps);
  std::vector<PatchState> out{PatchState{}};
  PatchState s;
  for (long k = 0; k < steps; ++k) {
    const double h = (k + 1 == steps) ? t_end - dt * static_cast<double>(k) : dt;
    const auto k1 = rhs_patch(p, s);
    const auto k2 = rhs_patch(p, {0.0, s.rho_A + 0.5 * h * k1[0], s.rho_B + 0.5 * h * k1[1]});
    const auto k3 = rhs_patch(p, {0.0, s.rho_A + 0.5 * h * k2[0], s.rho_B + 0.5 * h * k2[1]});
    const auto k4 = rhs_patch(p, {0.0, s.rho_A + h * k3[0], s.rho_B + h * k3[1]});
    s.rho_A += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    s.rho_B += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    s.t = (k + 1 == steps) ? t_end : dt * static_cast<double>(k + 1);
    if ((k + 1) % stride == 0 || k + 1 == steps) out.push_back(s);
  }
  return out;
}

double invariant_residual(const PatchParams& p, const PatchState& s) {
  validate(p);
  if (p.alpha == 1.0) throw Error(Errc::alpha_one, "the invariant degenerates at alpha = 1");
  const double a = p.alpha - 1.0;
  return std::expm1(a * s.rho_A) - p.b_A / p.b_B * std::expm1(a * s.rho_B);
}

PatchState explicit_alpha1(double b_A, double b_B, double t) {
  const double total = b_A + b_B;
  const double g = std::log1p(total * t);
  return {t, b_A / total * g, b_B / total * g};
}

double max_invariant_residual(const PatchParams& p, const std::vector<PatchState>& trajectory) {
  double worst = 0.0;
  for (const auto& s : trajectory) worst = std::max(worst, std::abs(invariant_residual(p, s)));
  return worst;
}

double max_alpha1_deviation(const PatchParams& p, const std::vector<PatchState>& trajectory) {
  validate(p);
  if (p.alpha != 1.0) throw Error(Errc::range_error, "closed form holds only at alpha = 1");
  double worst = 0.0;
  for (const auto& s : trajectory) {
    const PatchState e = explicit_alpha1(p.b_A, p.b_B, s.t);
    worst = std::max({worst, std::abs(s.rho_A - e.rho_A), std::abs(s.rho_B - e.rho_B)});
  }
  return worst;
}

double homogeneous_patch(double b, double alpha, double t) {
  return std::log1p((1.0 + alpha) * b * t) / (1.0 + alpha);
}

double asymptote_A(const PatchParams& p) {
  validate(p);
  if (!(p.alpha < 1.0) || !(p.b_A < p.b_B)) {
    throw Error(Errc::not_unstable_regime, "asymptote requires alpha < 1 and b_A < b_B");
  }
  return (std::log(p.b_B) - std::log(p.b_B - p.b_A)) / (1.0 - p.alpha);
}

}  // namespace immsim
