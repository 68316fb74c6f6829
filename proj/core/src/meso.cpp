#include "immsim/meso.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "immsim/error.hpp"
#include "immsim/random.hpp"
#include "immsim/stats.hpp"

namespace immsim {

namespace {

void require_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(Errc::epsilon_out_of_range, "epsilon must lie in (0, 1]");
  }
}

/// First-derivative weights at x0 for the nodes x (Fornberg's recursion).
std::vector<double> derivative_weights(double x0, const std::vector<double>& x) {
  const std::size_t n = x.size();
  // c[j][k]: weight of node j for derivative order k (k = 0, 1).
  std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - x0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) w[j] = c[j][1];
  return w;
}

std::vector<Point> poisson_configuration(const ScalarField& intensity, RandomStream& rng) {
  const TorusDomain& dom = intensity.domain;
  const double h = dom.spacing();
  std::vector<Point> pts;
  for (std::size_t i = 0; i < intensity.size(); ++i) {
    const auto k = rng.poisson(intensity[i] * dom.cell_volume());
    const Point c = dom.cell_center(i);
    for (std::uint64_t p = 0; p < k; ++p) {
      Point x{};
      for (int a = 0; a < dom.dimension(); ++a) x[a] = c[a] + (rng.uniform() - 0.5) * h;
      pts.push_back(dom.wrap(x));
    }
  }
  return pts;
}

}  // namespace

MicroModel scaled_model(const RateField& rate, const Potential& pot, const TorusDomain& dom,
                        double epsilon) {
  require_epsilon(epsilon);
  if (epsilon == 1.0) return {dom, rate, pot};
  return {dom, rate.scaled(1.0 / epsilon), pot.scaled(epsilon)};
}

double scaled_interaction(double phi, double epsilon) {
  require_epsilon(epsilon);
  return std::expm1(-epsilon * phi) / epsilon;
}

double rescaled_closure_mass(const Potential& pot, const TorusDomain& dom, double epsilon) {
  require_epsilon(epsilon);
  return discretize_closure_kernel(pot.scaled(epsilon), dom).integral() / epsilon;
}

EmpiricalDensity estimate_density(const std::vector<EventLog>& logs, const TorusDomain& grid,
                                  double t, double epsilon) {
  require_epsilon(epsilon);
  if (logs.size() < 2) throw Error(Errc::too_few_replicas, "density estimate needs at least 2 replicas");
  const std::size_t n = grid.cell_count();
  const double scale = epsilon / grid.cell_volume();
  std::vector<double> sum(n, 0.0);
  std::vector<double> sum_sq(n, 0.0);
  std::vector<double> counts(n);
  for (const auto& log : logs) {
    if (!(t >= 0.0) || t > log.t_end) throw Error(Errc::time_out_of_range, "density time outside [0, t_end]");
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const auto& p : log.configuration_at(t).points) counts[grid.cell_index(p)] += 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = scale * counts[i];
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }
  const double r = static_cast<double>(logs.size());
  EmpiricalDensity est{t, epsilon, logs.size(), ScalarField(grid), ScalarField(grid)};
  for (std::size_t i = 0; i < n; ++i) {
    const double mean = sum[i] / r;
    const double var = std::max(0.0, (sum_sq[i] - r * mean * mean) / (r - 1.0));
    est.density[i] = mean;
    est.stderr_field[i] = std::sqrt(var / r);
  }
  return est;
}

PairCorrelation estimate_pair_correlation(const std::vector<EventLog>& logs,
                                          const TorusDomain& dom, std::size_t bins, double r_max,
                                          double t) {
  if (logs.size() < 50) throw Error(Errc::too_few_replicas, "pair correlation needs at least 50 replicas");
  if (bins == 0) throw Error(Errc::range_error, "pair correlation needs at least one bin");
  if (!(r_max > 0.0) || r_max > 0.5 * dom.side_length() * (1.0 + 1e-12)) {
    throw Error(Errc::range_error, "pair correlation range must lie in (0, L/2]");
  }
  PairCorrelation pc;
  const double width = r_max / static_cast<double>(bins);
  std::vector<double> shell(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    const double lo = width * static_cast<double>(b);
    const double hi = width * static_cast<double>(b + 1);
    pc.bin_lo.push_back(lo);
    pc.bin_hi.push_back(hi);
    shell[b] = dom.dimension() == 1 ? 2.0 * (hi - lo) : std::numbers::pi * (hi * hi - lo * lo);
  }

  std::vector<std::vector<double>> per_replica(bins);
  std::vector<double> hist(bins);
  for (const auto& log : logs) {
    const auto pts = log.configuration_at(t).points;
    if (pts.size() < 2) continue;
    std::fill(hist.begin(), hist.end(), 0.0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      for (std::size_t j = i + 1; j < pts.size(); ++j) {
        const double r = dom.distance(pts[i], pts[j]);
        if (r <= 0.0 || r > r_max) continue;
        const auto b = std::min(bins - 1, static_cast<std::size_t>(std::ceil(r / width) - 1.0));
        hist[b] += 1.0;
      }
    }
    const double n = static_cast<double>(pts.size());
    const double pairs = 0.5 * n * (n - 1.0);
    for (std::size_t b = 0; b < bins; ++b) {
      per_replica[b].push_back(hist[b] / (pairs * shell[b] / dom.volume()));
    }
    ++pc.contributing;
  }
  if (pc.contributing == 0) throw Error(Errc::no_pairs, "no replica holds two points");
  for (std::size_t b = 0; b < bins; ++b) {
    const SampleSummary s = summarize(per_replica[b]);
    pc.g2.push_back(s.mean);
    pc.stderr_g2.push_back(s.stderr_mean);
  }
  return pc;
}

double vlasov_residual(const KineticSolution& sol, const Potential& pot, const RateField& rate) {
  constexpr std::size_t kStencil = 5;
  const std::size_t m = sol.times.size();
  if (m < kStencil || sol.densities.size() != m) {
    throw Error(Errc::too_few_snapshots, "residual needs at least five snapshots");
  }
  const TorusDomain& dom = sol.densities.front().domain;
  const KineticRhs rhs(dom, pot, rate, sol.variant);
  double worst = 0.0;
  std::vector<double> nodes(kStencil);
  for (std::size_t s = 0; s < m; ++s) {
    const std::size_t first = std::min(s >= kStencil / 2 ? s - kStencil / 2 : 0, m - kStencil);
    for (std::size_t j = 0; j < kStencil; ++j) nodes[j] = sol.times[first + j];
    const auto w = derivative_weights(sol.times[s], nodes);
    const ScalarField f = rhs(sol.densities[s]);
    for (std::size_t i = 0; i < f.size(); ++i) {
      double deriv = 0.0;
      for (std::size_t j = 0; j < kStencil; ++j) deriv += w[j] * sol.densities[first + j][i];
      worst = std::max(worst, std::abs(deriv - f[i]));
    }
  }
  return worst;
}

double approximation_horizon(double theta0, double b_bar, double mass) {
  return 0.5 * horizon_tau(theta0, b_bar, mass).tau;
}

double default_comparison_horizon(const KineticConfig& cfg, double cap) {
  const double rho_max = cfg.initial.values.empty() ? 0.0 : cfg.initial.max();
  const double mass = potential_stats(cfg.potential, cfg.domain).phi_bar;
  if (mass == 0.0) return cap;
  return std::min(approximation_horizon(std::log(rho_max + 0.01), cfg.rate.upper_bound(), mass), cap);
}

ComparisonReport convergence_report(const ConvergenceSpec& spec) {
  if (spec.ladder.empty()) throw Error(Errc::range_error, "epsilon ladder is empty");
  for (std::size_t k = 0; k < spec.ladder.size(); ++k) {
    require_epsilon(spec.ladder[k]);
    if (k > 0 && !(spec.ladder[k] < spec.ladder[k - 1])) {
      throw Error(Errc::range_error, "epsilon ladder must be strictly decreasing");
    }
  }
  if (spec.samples == 0) throw Error(Errc::range_error, "comparison needs at least one sample time");

  ComparisonReport report;
  report.approximation_limit = default_comparison_horizon(spec.kinetic, std::numeric_limits<double>::infinity());
  report.horizon = spec.horizon > 0.0 ? spec.horizon : std::min(report.approximation_limit, 1.0);
  report.extrapolation = report.horizon > report.approximation_limit;

  KineticConfig kin = spec.kinetic;
  kin.t_end = report.horizon;
  kin.snapshot_times.clear();
  for (std::size_t j = 1; j <= spec.samples; ++j) {
    kin.snapshot_times.push_back(report.horizon * static_cast<double>(j) / static_cast<double>(spec.samples));
  }
  const KineticSolution sol = solve(kin);
  const ScalarField rho0 = kin.initial.values.empty() ? ScalarField(kin.domain) : kin.initial;
  const TorusDomain& grid = kin.domain;

  for (std::size_t k = 0; k < spec.ladder.size(); ++k) {
    const double eps = spec.ladder[k];
    const MicroModel model = scaled_model(kin.rate, kin.potential, grid, eps);
    const std::uint64_t rung_seed = splitmix64(spec.seed ^ splitmix64(k + 1));

    std::vector<std::vector<Point>> initial;
    if (rho0.max() > 0.0) {
      ScalarField intensity = rho0;
      for (double& v : intensity.values) v /= eps;
      for (std::size_t r = 0; r < spec.replicas; ++r) {
        RandomStream rng(splitmix64(rung_seed ^ replica_seed(spec.seed, r)));
        initial.push_back(poisson_configuration(intensity, rng));
      }
    }
    const auto logs = simulate_replicas(model, report.horizon, rung_seed, spec.replicas, spec.threads, initial);

    LadderEntry entry{eps, -1.0, 0.0, 0.0};
    for (std::size_t s = 1; s < sol.times.size(); ++s) {
      const double t = sol.times[s];
      const EmpiricalDensity est = estimate_density(logs, grid, t, eps);
      const ScalarField& rho = sol.densities[s];
      ConvergenceRow row{eps, t, 0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < rho.size(); ++i) {
        const double d = std::abs(est.density[i] - rho[i]);
        row.l1_error += d * grid.cell_volume();
        if (d > row.sup_error) {
          row.sup_error = d;
          row.stderr_sup = est.stderr_field[i];
        }
      }
      if (row.sup_error > entry.error) entry = {eps, row.sup_error, row.stderr_sup, t};
      report.rows.push_back(row);
    }
    entry.error = std::max(entry.error, 0.0);
    report.ladder.push_back(entry);
  }

  for (std::size_t k = 1; k < report.ladder.size(); ++k) {
    const auto& a = report.ladder[k - 1];
    const auto& b = report.ladder[k];
    const double pooled = std::sqrt(a.stderr_error * a.stderr_error + b.stderr_error * b.stderr_error);
    if (b.error > a.error + 2.0 * pooled) report.monotone = false;
  }
  if (report.ladder.size() >= 2) {
    std::size_t ref = 1;
    for (std::size_t k = 0; k < report.ladder.size(); ++k) {
      if (report.ladder[k].epsilon == 0.5) ref = k;
    }
    if (ref + 1 < report.ladder.size()) {
      report.strict_improvement = report.ladder.back().error < report.ladder[ref].error;
    }
  }
  return report;
}

}  // namespace immsim
