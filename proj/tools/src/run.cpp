#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "csv.hpp"
#include "immsim/cli.hpp"
#include "immsim/error.hpp"
#include "immsim/kinetic.hpp"
#include "immsim/meso.hpp"
#include "immsim/microsim.hpp"
#include "immsim/patches.hpp"
#include "immsim/stats.hpp"

namespace immsim::cli {

namespace {

namespace fs = std::filesystem;

using Artifacts = std::vector<std::pair<std::string, CsvTable>>;

void add_check(ReportSummary& s, std::string name, bool passed, double slack) {
  s.checks.push_back({std::move(name), passed, slack});
}

KineticConfig kinetic_config(const RunConfig& c) {
  KineticConfig k;
  k.domain = c.domain;
  k.potential = c.potential;
  k.rate = c.rate;
  if (c.initial_density > 0.0) k.initial = ScalarField(c.domain, c.initial_density);
  k.dt = c.solver.dt;
  k.t_end = c.solver.t_end;
  k.method = c.solver.method;
  k.variant = c.solver.variant;
  k.snapshot_times = c.solver.snapshot_times;
  return k;
}

void run_kinetic(const RunConfig& c, ReportSummary& s, Artifacts& out) {
  const KineticConfig k = kinetic_config(c);
  const KineticSolution sol = (k.method == KineticMethod::picard && c.solver.segment)
                                  ? solve_picard(k, c.solver.segment)
                                  : solve(k);
  CsvTable density("t,cell_index,rho");
  for (std::size_t j = 0; j < sol.times.size(); ++j) {
    for (std::size_t i = 0; i < sol.densities[j].size(); ++i) {
      density.cell(sol.times[j]).cell(i).cell(sol.densities[j][i]).end_row();
    }
  }
  out.emplace_back("kinetic_density.csv", std::move(density));

  const ScalarField rho0 = k.initial.values.empty() ? ScalarField(k.domain) : k.initial;
  const KineticRhs rhs(k.domain, k.potential, k.rate, k.variant);
  const double mass = rhs.mass();
  s.values.emplace_back("grid_mass", mass);
  if (mass <= 0.0) return;

  const EffectiveRates rates = effective_rates(k.rate, k.potential, rho0, k.variant);
  s.values.emplace_back("b_minus", rates.minus);
  s.values.emplace_back("b_plus", rates.plus);
  const BoundReport report = verify_bounds(sol, EnvelopeBounds(rates), rho0, mass, 1e-9, c.solver.allowance);
  CsvTable bounds("t,omega_minus,omega_plus,min_slack,max_slack");
  for (const auto& row : report.rows) {
    bounds.cell(row.t).cell(row.omega_minus).cell(row.omega_plus).cell(row.min_slack).cell(row.max_slack).end_row();
  }
  out.emplace_back("kinetic_bounds.csv", std::move(bounds));
  add_check(s, "envelope_bounds", report.passed, report.worst_slack);

  if (k.rate.kind() == RateKind::constant && rho0.max() == 0.0) {
    const double worst = homogeneous_deviation(sol, k.rate.base(), mass);
    s.values.emplace_back("homogeneous_max_relative_deviation", worst);
    add_check(s, "homogeneous_solution", worst <= 1e-6, 1e-6 - worst);
  }
}

void run_patches(const RunConfig& c, ReportSummary& s, Artifacts& out) {
  const auto& p = c.patches;
  const auto traj = solve_patch(p.params, p.t_end, p.dt, p.snapshot_every);
  const bool alpha_one = p.params.alpha == 1.0;
  CsvTable table("t,rho_A,rho_B,invariant_residual");
  for (const auto& st : traj) {
    const double residual = alpha_one ? std::numeric_limits<double>::quiet_NaN() : invariant_residual(p.params, st);
    table.cell(st.t).cell(st.rho_A).cell(st.rho_B).cell(residual).end_row();
  }
  out.emplace_back("patches.csv", std::move(table));
  if (alpha_one) {
    const double worst = max_alpha1_deviation(p.params, traj);
    s.values.emplace_back("max_closed_form_deviation", worst);
    add_check(s, "closed_form_alpha_one", worst <= 1e-6, 1e-6 - worst);
  } else {
    const double worst = max_invariant_residual(p.params, traj);
    s.values.emplace_back("max_invariant_residual", worst);
    add_check(s, "invariant", worst <= 1e-8, 1e-8 - worst);
  }
  if (p.params.alpha < 1.0 && p.params.b_A < p.params.b_B) {
    s.values.emplace_back("asymptote_A", asymptote_A(p.params));
  }
  s.values.emplace_back("rho_A_final", traj.back().rho_A);
  s.values.emplace_back("rho_B_final", traj.back().rho_B);
}

std::string window_suffix(std::size_t k) { return "_w" + std::to_string(k); }

void run_micro(const RunConfig& c, unsigned threads, ReportSummary& s, Artifacts& out) {
  const MicroModel model{c.domain, c.rate, c.potential};
  const double t_end = c.solver.t_end;
  const auto logs = simulate_replicas(model, t_end, c.micro.seed, c.micro.replicas, threads);

  if (c.micro.write_events) {
    CsvTable events(c.domain.dimension() == 1 ? "replica,t,x" : "replica,t,x0,x1");
    for (const auto& log : logs) {
      for (const auto& e : log.events) {
        events.cell(static_cast<std::size_t>(log.replica)).cell(e.t).cell(e.x[0]);
        if (c.domain.dimension() == 2) events.cell(e.x[1]);
        events.end_row();
      }
    }
    out.emplace_back("micro_events.csv", std::move(events));
  }

  std::vector<double> times = c.micro.sample_times;
  if (times.empty()) times.push_back(t_end);
  const PotentialStats stats = potential_stats(c.potential, c.domain);
  const double b_bar = c.rate.upper_bound();
  const bool has_floor = stats.floor_radius && stats.floor_value;

  for (std::size_t k = 0; k < c.micro.windows.size(); ++k) {
    const WindowSpec& w = c.micro.windows[k];
    const auto rows = mean_trajectory(logs, w, times);
    CsvTable traj("t,mean_N,var_N,stderr,log_bound,pass");
    bool all = true;
    double slack = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
      double bound = std::numeric_limits<double>::infinity();
      if (has_floor) {
        const Covering cov = covering_bound(w, *stats.floor_radius, w.dimension);
        bound = log_count_bound(cov.count, cov.ball_volume, *stats.floor_value, b_bar, 1.0, row.t);
      }
      const double margin = bound + 3.0 * row.stderr_mean - row.mean;
      const bool pass = margin >= 0.0;
      all = all && pass;
      if (std::isfinite(bound)) slack = std::min(slack, margin);
      traj.cell(row.t).cell(row.mean).cell(row.variance).cell(row.stderr_mean).cell(bound).cell(pass).end_row();
    }
    out.emplace_back("micro_trajectory" + window_suffix(k) + ".csv", std::move(traj));
    if (has_floor) add_check(s, "log_count_bound" + window_suffix(k), all, slack);

    const double width = w.hi[0] - w.lo[0];
    const double diameter = w.dimension == 1 ? width : std::hypot(width, w.hi[1] - w.lo[1]);
    if (has_floor && diameter <= *stats.floor_radius) {
      const auto exp_rows = exp_moment_series(logs, w, *stats.floor_value, *stats.floor_radius, b_bar, 1.0, times);
      CsvTable table("t,mean,stderr,bound,pass");
      bool ok = true;
      double margin = std::numeric_limits<double>::infinity();
      for (const auto& r : exp_rows) {
        ok = ok && r.pass;
        margin = std::min(margin, r.bound + 3.0 * r.stderr_mean - r.mean);
        table.cell(r.t).cell(r.mean).cell(r.stderr_mean).cell(r.bound).cell(r.pass).end_row();
      }
      out.emplace_back("micro_exp_moment" + window_suffix(k) + ".csv", std::move(table));
      add_check(s, "exp_moment_bound" + window_suffix(k), ok, margin);
    }

    CsvTable fact("t,order,mean,stderr,ceiling,pass");
    bool fact_ok = true;
    double fact_margin = std::numeric_limits<double>::infinity();
    for (double t : times) {
      if (t == 0.0) continue;
      for (const auto& r : factorial_moments(logs, w, t, 3, b_bar, -std::numeric_limits<double>::infinity())) {
        fact_ok = fact_ok && r.pass;
        fact_margin = std::min(fact_margin, r.ceiling + 3.0 * r.stderr_mean - r.mean);
        fact.cell(t).cell(static_cast<std::size_t>(r.order)).cell(r.mean).cell(r.stderr_mean).cell(r.ceiling).cell(r.pass).end_row();
      }
    }
    out.emplace_back("micro_factorial" + window_suffix(k) + ".csv", std::move(fact));
    add_check(s, "factorial_moments" + window_suffix(k), fact_ok, fact_margin);

    if (c.potential.is_zero() && c.rate.kind() == RateKind::constant && t_end > 0.0) {
      std::vector<std::size_t> counts;
      for (const auto& log : logs) counts.push_back(count_window(log, w, t_end));
      const GoodnessOfFit gof = poisson_goodness_of_fit(counts, c.rate.base() * w.volume() * t_end);
      s.values.emplace_back("poisson_p_value" + window_suffix(k), gof.p_value);
      add_check(s, "poisson_law" + window_suffix(k), gof.p_value > 0.01, gof.p_value - 0.01);
    }
  }
}

void run_meso(const RunConfig& c, unsigned threads, ReportSummary& s, Artifacts& out) {
  ConvergenceSpec spec;
  spec.kinetic = kinetic_config(c);
  spec.ladder = c.micro.epsilons;
  spec.horizon = c.micro.horizon;
  spec.samples = c.micro.samples;
  spec.replicas = c.micro.replicas;
  spec.seed = c.micro.seed;
  spec.threads = threads;
  const ComparisonReport report = convergence_report(spec);

  CsvTable table("epsilon,t,sup_error,l1_error,stderr");
  for (const auto& r : report.rows) {
    table.cell(r.epsilon).cell(r.t).cell(r.sup_error).cell(r.l1_error).cell(r.stderr_sup).end_row();
  }
  out.emplace_back("meso_convergence.csv", std::move(table));
  s.values.emplace_back("horizon", report.horizon);
  s.values.emplace_back("approximation_limit", report.approximation_limit);
  s.values.emplace_back("extrapolation", report.extrapolation ? 1.0 : 0.0);
  for (const auto& e : report.ladder) {
    s.values.emplace_back("error_eps_" + format_number(e.epsilon), e.error);
    s.values.emplace_back("stderr_eps_" + format_number(e.epsilon), e.stderr_error);
  }
  add_check(s, "monotone_ladder", report.monotone, 0.0);
  if (report.ladder.size() >= 2) {
    double half = report.ladder[1].error;
    for (const auto& e : report.ladder) {
      if (e.epsilon == 0.5) half = e.error;
    }
    add_check(s, "strict_improvement", report.strict_improvement, half - report.ladder.back().error);
  }

  if (c.micro.pair_bins > 0) {
    const MicroModel model{c.domain, c.rate, c.potential};
    const auto logs = simulate_replicas(model, c.solver.t_end, c.micro.seed, c.micro.replicas, threads);
    const PairCorrelation pc = estimate_pair_correlation(logs, c.domain, c.micro.pair_bins, c.micro.pair_range, c.solver.t_end);
    CsvTable pairs("bin_lo,bin_hi,g2,stderr");
    for (std::size_t b = 0; b < pc.g2.size(); ++b) {
      pairs.cell(pc.bin_lo[b]).cell(pc.bin_hi[b]).cell(pc.g2[b]).cell(pc.stderr_g2[b]).end_row();
    }
    out.emplace_back("meso_pair_correlation.csv", std::move(pairs));
  }
}

void run_horizon(const RunConfig& c, ReportSummary& s, Artifacts& out) {
  const auto& h = c.horizon;
  const HorizonTau tau = horizon_tau(h.theta0, h.b_bar, h.mass);
  const double T = approximation_horizon(h.theta0, h.b_bar, h.mass);
  std::cout << "delta = " << format_number(tau.delta) << "\n"
            << "tau = " << format_number(tau.tau) << "\n"
            << "T = " << format_number(T) << "\n";
  CsvTable table("theta0,b_bar,mass,delta,tau,tau_alt,approximation_horizon");
  table.cell(h.theta0).cell(h.b_bar).cell(h.mass).cell(tau.delta).cell(tau.tau).cell(tau.tau_alt).cell(T).end_row();
  out.emplace_back("horizon.csv", std::move(table));
  s.values.emplace_back("delta", tau.delta);
  s.values.emplace_back("tau", tau.tau);
  s.values.emplace_back("approximation_horizon", T);
  const double gap = std::abs(tau.tau - tau.tau_alt);
  add_check(s, "tau_forms_agree", gap <= 1e-12 * tau.tau, 1e-12 * tau.tau - gap);
}

void write_summary(const fs::path& dir, const ReportSummary& s, const std::string& error) {
  std::ofstream txt(dir / "summary.txt", std::ios::binary);
  txt << "immsim " << s.version << "\n"
      << "subcommand: " << s.subcommand << "\n"
      << "seed: " << s.seed << "\n"
      << "runtime_seconds: " << format_number(s.runtime_seconds) << "\n";
  for (const auto& c : s.checks) {
    txt << "check " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << " (slack " << format_number(c.slack) << ")\n";
  }
  for (const auto& [name, v] : s.values) txt << "value " << name << ": " << format_number(v) << "\n";
  for (const auto& a : s.artifacts) txt << "artifact " << a << "\n";
  if (!error.empty()) txt << "error: " << error << "\n";
  txt << "status: " << (error.empty() && s.all_passed() ? "PASS" : "FAIL") << "\n";

  nlohmann::ordered_json j;
  j["tool"] = "immsim";
  j["version"] = s.version;
  j["subcommand"] = s.subcommand;
  j["seed"] = s.seed;
  j["runtime_seconds"] = s.runtime_seconds;
  j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : s.checks) {
    nlohmann::ordered_json e;
    e["name"] = c.name;
    e["passed"] = c.passed;
    e["slack"] = std::isfinite(c.slack) ? nlohmann::ordered_json(c.slack) : nlohmann::ordered_json(nullptr);
    j["checks"].push_back(e);
  }
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  for (const auto& [name, v] : s.values) values[name] = std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
  j["values"] = values;
  j["artifacts"] = s.artifacts;
  j["error"] = error.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(error);
  j["passed"] = error.empty() && s.all_passed();
  std::ofstream js(dir / "summary.json", std::ios::binary);
  js << j.dump(2) << "\n";
}

}  // namespace

bool ReportSummary::all_passed() const {
  for (const auto& c : checks) {
    if (!c.passed) return false;
  }
  return true;
}

int run(const RunConfig& cfg, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  ReportSummary summary;
  summary.subcommand = to_string(cfg.subcommand);
  summary.seed = cfg.micro.seed;
  Artifacts artifacts;
  std::string error;
  int status = kExitOk;

  try {
    fs::create_directories(cfg.output_dir);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    switch (cfg.subcommand) {
      case Subcommand::kinetic: run_kinetic(cfg, summary, artifacts); break;
      case Subcommand::patches: run_patches(cfg, summary, artifacts); break;
      case Subcommand::micro: run_micro(cfg, std::max(1u, threads), summary, artifacts); break;
      case Subcommand::meso: run_meso(cfg, std::max(1u, threads), summary, artifacts); break;
      case Subcommand::horizon: run_horizon(cfg, summary, artifacts); break;
    }
  } catch (const Error& e) {
    error = e.what();
    const bool config = e.code() == Errc::parse_error || e.code() == Errc::unknown_key ||
                        e.code() == Errc::range_error;
    status = config ? kExitConfig : kExitNumeric;
  }

  summary.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    const fs::path dir(cfg.output_dir);
    for (const auto& [name, table] : artifacts) {
      table.write(dir / name);
      summary.artifacts.push_back(name);
    }
    write_summary(dir, summary, error);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  if (!error.empty()) {
    std::cerr << "error: " << error << "\n";
    return status;
  }
  for (const auto& c : summary.checks) {
    std::cout << "check " << c.name << ": " << (c.passed ? "PASS" : "FAIL") << "\n";
  }
  return summary.all_passed() ? kExitOk : kExitCheck;
}

}  // namespace immsim::cli
