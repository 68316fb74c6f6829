#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "immsim/kinetic.hpp"
#include "immsim/microsim.hpp"
#include "immsim/model.hpp"

namespace immsim {

/// Micro model of the epsilon-scaled system: potential eps * phi and
/// intensity b / eps. eps = 1 returns the inputs unchanged. Throws
/// EpsilonOutOfRange unless eps is in (0, 1].
MicroModel scaled_model(const RateField& rate, const Potential& pot, const TorusDomain& dom,
                        double epsilon);

/// Rescaled interaction (e^{-eps phi} - 1) / eps; tends to -phi as eps -> 0.
double scaled_interaction(double phi, double epsilon);

/// (1/eps) times the grid mass of 1 - e^{-eps phi}; never exceeds the grid
/// mass of phi.
double rescaled_closure_mass(const Potential& pot, const TorusDomain& dom, double epsilon);

/// Replica average of eps * (count per cell) / (cell volume) at time t.
struct EmpiricalDensity {
  double t = 0.0;
  double epsilon = 1.0;
  std::size_t replicas = 0;
  ScalarField density;
  ScalarField stderr_field;
};

/// Binned on the cells of `grid`. Throws TooFewReplicas for fewer than two logs.
EmpiricalDensity estimate_density(const std::vector<EventLog>& logs, const TorusDomain& grid,
                                  double t, double epsilon);

struct PairCorrelation {
  std::vector<double> bin_lo;
  std::vector<double> bin_hi;
  std::vector<double> g2;
  std::vector<double> stderr_g2;
  /// Replicas with at least two points.
  std::size_t contributing = 0;
};

/// Torus pair-distance histogram on `bins` equal bins covering (0, r_max],
/// each replica normalized by N(N-1)/2 * shell / |domain| (the Poisson
/// expectation at the same mean count) and averaged. Throws TooFewReplicas
/// below 50 logs and NoPairs when no replica holds two points.
PairCorrelation estimate_pair_correlation(const std::vector<EventLog>& logs,
                                          const TorusDomain& dom, std::size_t bins, double r_max,
                                          double t);

/// sup over snapshots and cells of |d rho/dt - rhs(rho)| with the time
/// derivative taken from a five-point finite-difference stencil on the
/// snapshot times. Throws TooFewSnapshots below five snapshots.
double vlasov_residual(const KineticSolution& sol, const Potential& pot, const RateField& rate);

/// Half of horizon_tau: the interval on which the scaled micro densities are
/// known to approximate the kinetic solution.
double approximation_horizon(double theta0, double b_bar, double mass);

/// min(approximation_horizon(log(max rho0 + 0.01), b_bar, mass), cap) for a
/// kinetic configuration; a potential of zero mass imposes no limit beyond cap.
double default_comparison_horizon(const KineticConfig& cfg, double cap = 1.0);

struct ConvergenceRow {
  double epsilon = 1.0;
  double t = 0.0;
  double sup_error = 0.0;
  double l1_error = 0.0;
  /// Standard error of the estimate in the cell realizing sup_error.
  double stderr_sup = 0.0;
};

struct LadderEntry {
  double epsilon = 1.0;
  /// Largest sup_error over the sampled times.
  double error = 0.0;
  double stderr_error = 0.0;
  double t = 0.0;
};

struct ComparisonReport {
  double horizon = 0.0;
  double approximation_limit = 0.0;
  /// True when horizon exceeds approximation_limit.
  bool extrapolation = false;
  std::vector<ConvergenceRow> rows;
  std::vector<LadderEntry> ladder;
  /// error_{k+1} <= error_k + 2 sqrt(se_k^2 + se_{k+1}^2) along the ladder.
  bool monotone = true;
  /// Error at the last rung strictly below the error at eps = 1/2 (or the
  /// second rung when 1/2 is absent).
  bool strict_improvement = true;
};

struct ConvergenceSpec {
  KineticConfig kinetic;
  std::vector<double> ladder{1.0, 0.5, 0.25, 0.125};
  /// Comparison horizon; 0 selects default_comparison_horizon.
  double horizon = 0.0;
  /// Number of equally spaced comparison times in (0, horizon].
  std::size_t samples = 4;
  std::size_t replicas = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Solves the kinetic problem on [0, horizon], simulates every rung of the
/// ladder (Poisson initial points of intensity rho0 / eps) and compares the
/// rescaled densities with the kinetic snapshots.
ComparisonReport convergence_report(const ConvergenceSpec& spec);

}  // namespace immsim
