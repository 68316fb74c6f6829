// Segmented Picard iteration for the integral form of the kinetic equation.
//
// With u_t = m (rho_t - rho_0), m the grid mass of the kernel, the problem is
//   u_t = bhat * int_0^t exp(-(k * u_s) / m) ds,   bhat = m b exp(-(k * rho_0)).
// On each segment u is represented by its values at Chebyshev-Lobatto nodes in
// time and the time integral is applied exactly to the interpolating
// polynomial. A segment restarts from the accumulated u with the rate reduced
// by exp(-(k * U)/m).

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "immsim/error.hpp"
#include "immsim/kinetic.hpp"
#include "kinetic_detail.hpp"

namespace immsim {

namespace {

constexpr std::size_t kNodes = 24;
constexpr std::size_t kMaxSweeps = 200;
constexpr double kSweepTolerance = 1e-10;

struct GaussRule {
  std::vector<double> x;
  std::vector<double> w;
};

GaussRule gauss_legendre_rule(std::size_t n) {
  GaussRule r{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-16) break;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

// Chebyshev-Lobatto nodes on [-1, 1] in ascending order with barycentric
// weights and the cumulative integration matrix of the interpolant.
struct Collocation {
  std::vector<double> x;
  std::vector<double> bary;
  std::vector<double> integral;  // row-major kNodes x kNodes, for [-1, 1]

  Collocation() : x(kNodes), bary(kNodes), integral(kNodes * kNodes, 0.0) {
    const double last = static_cast<double>(kNodes - 1);
    for (std::size_t j = 0; j < kNodes; ++j) {
      x[j] = -std::cos(std::numbers::pi * static_cast<double>(j) / last);
      bary[j] = (j % 2 == 0 ? 1.0 : -1.0) * ((j == 0 || j == kNodes - 1) ? 0.5 : 1.0);
    }
    const GaussRule g = gauss_legendre_rule(kNodes);
    std::vector<double> basis(kNodes);
    for (std::size_t k = 1; k < kNodes; ++k) {
      const double half = 0.5 * (x[k] + 1.0);
      for (std::size_t q = 0; q < g.x.size(); ++q) {
        const double s = -1.0 + half * (g.x[q] + 1.0);
        lagrange_basis(s, basis);
        for (std::size_t j = 0; j < kNodes; ++j) integral[k * kNodes + j] += half * g.w[q] * basis[j];
      }
    }
  }

  void lagrange_basis(double s, std::vector<double>& out) const {
    for (std::size_t j = 0; j < kNodes; ++j) {
      if (s == x[j]) {
        std::fill(out.begin(), out.end(), 0.0);
        out[j] = 1.0;
        return;
      }
    }
    double denom = 0.0;
    for (std::size_t j = 0; j < kNodes; ++j) {
      out[j] = bary[j] / (s - x[j]);
      denom += out[j];
    }
    for (double& v : out) v /= denom;
  }
};

const Collocation& collocation() {
  static const Collocation c;
  return c;
}

}  // namespace

KineticSolution solve_picard(const KineticConfig& cfg, std::optional<double> segment) {
  detail::check_config(cfg);
  const KineticRhs rhs(cfg.domain, cfg.potential, cfg.rate, cfg.variant);
  const auto times = detail::normalized_snapshots(cfg.snapshot_times, cfg.t_end);
  const ScalarField rho0 = detail::initial_density(cfg);
  const std::size_t n = rho0.size();
  const double mass = rhs.mass();

  KineticSolution sol;
  sol.variant = cfg.variant;
  sol.times = times;

  // bhat = m b exp(-(k * rho0)) and b_plus = sup bhat.
  ScalarField bhat = rhs(rho0);
  for (double& v : bhat.values) v *= mass;
  const double b_plus = bhat.max();

  if (segment && !(*segment > 0.0)) throw Error(Errc::range_error, "segment length must be positive");
  if (segment && b_plus * *segment >= 1.0) {
    std::ostringstream os;
    os << "b_plus * T = " << b_plus * *segment << " is not below 1";
    throw Error(Errc::no_contraction, os.str());
  }

  // Without interaction, or without immigration, the solution is explicit.
  if (mass == 0.0 || b_plus == 0.0) {
    const ScalarField& b = rhs.rate_samples();
    for (double t : times) {
      ScalarField rho = rho0;
      if (mass == 0.0) {
        for (std::size_t i = 0; i < n; ++i) rho[i] += t * b[i];
      }
      sol.densities.push_back(std::move(rho));
    }
    return sol;
  }

  const double T = segment.value_or(0.9 / b_plus);
  const Collocation& col = collocation();
  const auto segments =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.t_end / T - 1e-12)));

  ScalarField accumulated(cfg.domain);  // U at the start of the current segment
  std::vector<ScalarField> u(kNodes, ScalarField(cfg.domain));
  std::vector<ScalarField> next(kNodes, ScalarField(cfg.domain));
  std::vector<ScalarField> decay(kNodes, ScalarField(cfg.domain, 1.0));
  std::vector<double> basis(kNodes);
  std::size_t snap = 0;

  auto emit = [&](const ScalarField& u_total) {
    ScalarField rho = rho0;
    for (std::size_t i = 0; i < n; ++i) rho[i] += u_total[i] / mass;
    sol.densities.push_back(std::move(rho));
  };

  emit(accumulated);
  ++snap;
  if (cfg.t_end == 0.0) return sol;

  for (std::size_t s = 0; s < segments; ++s) {
    const double start = static_cast<double>(s) * T;
    const double end = (s + 1 == segments) ? cfg.t_end : std::min(cfg.t_end, start + T);
    const double half = 0.5 * (end - start);

    ScalarField b_seg = rhs.convolver().apply(accumulated);
    for (std::size_t i = 0; i < n; ++i) b_seg[i] = bhat[i] * std::exp(-std::max(0.0, b_seg[i]) / mass);

    for (auto& f : u) std::fill(f.values.begin(), f.values.end(), 0.0);
    std::size_t sweeps = 0;
    for (;;) {
      ++sweeps;
      if (sweeps > kMaxSweeps) {
        throw Error(Errc::non_convergence, "Picard segment did not converge in 200 sweeps");
      }
      for (std::size_t j = 1; j < kNodes; ++j) {
        decay[j] = rhs.convolver().apply(u[j]);
        for (double& v : decay[j].values) v = std::exp(-std::max(0.0, v) / mass);
      }
      double change = 0.0;
      for (std::size_t k = 0; k < kNodes; ++k) {
        const double* row = &col.integral[k * kNodes];
        for (std::size_t i = 0; i < n; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < kNodes; ++j) acc += row[j] * decay[j][i];
          next[k][i] = b_seg[i] * half * acc;
          change = std::max(change, std::abs(next[k][i] - u[k][i]));
        }
      }
      std::swap(u, next);
      if (change < kSweepTolerance) break;
    }
    sol.max_iterations = std::max(sol.max_iterations, sweeps);
    ++sol.segments;

    // Snapshots that fall inside (start, end].
    const bool last = s + 1 == segments;
    while (snap < times.size() && (times[snap] <= end || last)) {
      const double ref = std::clamp((times[snap] - start) / half - 1.0, -1.0, 1.0);
      col.lagrange_basis(ref, basis);
      ScalarField total = accumulated;
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < kNodes; ++j) acc += basis[j] * u[j][i];
        total[i] += acc;
      }
      emit(total);
      ++snap;
    }
    for (std::size_t i = 0; i < n; ++i) accumulated[i] += u[kNodes - 1][i];
  }
  return sol;
}

}  // namespace immsim
