#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "immsim/model.hpp"

namespace immsim {

/// Finite point set on the torus.
struct Configuration {
  std::vector<Point> points;
};

struct BirthEvent {
  double t = 0.0;
  Point x{};

  bool operator==(const BirthEvent&) const = default;
};

/// Everything needed to reconstruct one replica: its random stream identity,
/// the initial configuration and the accepted births in time order.
struct EventLog {
  std::uint64_t master_seed = 0;
  std::uint64_t replica = 0;
  double t_end = 0.0;
  std::vector<Point> initial;
  std::vector<BirthEvent> events;
  std::size_t proposals = 0;

  bool operator==(const EventLog&) const = default;

  /// Points present at time t (initial ones included).
  Configuration configuration_at(double t) const;
};

struct MicroModel {
  TorusDomain domain;
  RateField rate;
  Potential potential;
};

/// Axis-aligned box [lo, hi) inside the torus.
struct WindowSpec {
  Point lo{};
  Point hi{};
  int dimension = 1;

  WindowSpec() = default;
  WindowSpec(const Point& lo, const Point& hi, int dimension);

  double volume() const noexcept;
  bool contains(const Point& x) const noexcept;

  bool operator==(const WindowSpec&) const = default;
};

/// b(x) exp(-sum_{y in gamma} phi(x - y)) with minimum-image distances.
/// Brute force over all points.
double birth_rate_density(const RateField& rate, const Potential& pot, const TorusDomain& dom,
                          const Configuration& gamma, const Point& x);

/// Per-replica generator seed derived from a master seed.
std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica) noexcept;

/// Exact thinning simulation of the pure-birth process on [0, t_end]:
/// proposals arrive at rate b_bar |domain| at uniform positions and are kept
/// with probability (b(x)/b_bar) exp(-sum phi).
EventLog simulate(const MicroModel& model, double t_end, std::uint64_t master_seed,
                  std::uint64_t replica = 0, const std::vector<Point>& initial = {});

/// Replicas 0..count-1 run on up to `threads` workers; the result is ordered
/// by replica index and independent of the worker count. `initial` may be
/// empty or hold one configuration per replica.
std::vector<EventLog> simulate_replicas(const MicroModel& model, double t_end,
                                        std::uint64_t master_seed, std::size_t count,
                                        unsigned threads = 1,
                                        const std::vector<std::vector<Point>>& initial = {});

/// Regenerates the proposal stream of `log` and checks that every accept or
/// reject decision, recomputed from the configuration reconstructed out of the
/// log itself, reproduces the logged births.
bool replay_matches(const MicroModel& model, const EventLog& log);

/// Number of points in the window at time t. Throws TimeOutOfRange for t
/// outside [0, t_end].
std::size_t count_window(const EventLog& log, const WindowSpec& w, double t);

struct MomentRow {
  double t = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double stderr_mean = 0.0;
};

/// Sample mean, variance and standard error of N_window over replicas.
/// Throws TooFewReplicas for fewer than two logs.
std::vector<MomentRow> mean_trajectory(const std::vector<EventLog>& logs, const WindowSpec& w,
                                       const std::vector<double>& times);

struct Covering {
  std::size_t count = 0;
  /// Volume of a ball of radius r/2.
  double ball_volume = 0.0;
};

/// Lattice covering of the window by balls of radius r/2: intervals of length
/// r in one dimension, inscribed squares of side r/sqrt(2) in two. The count
/// is an upper bound on the minimal covering number.
Covering covering_bound(const WindowSpec& w, double r, int dimension);

/// (m / phi_star) log(c0 + (e^{phi_star} - 1) b_bar upsilon t)
double log_count_bound(std::size_t m, double upsilon, double phi_star, double b_bar, double c0,
                       double t);

/// exp((e^alpha - 1) e^theta |window|)
double moment_constant(double alpha, double theta, double volume);

struct ExpMomentRow {
  double t = 0.0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  /// c0 + (e^{phi_star} - 1) b_bar upsilon t
  double bound = 0.0;
  bool pass = true;
};

/// Empirical E[exp(phi_star N_w(t))] against the linear growth bound, with a
/// 3-stderr allowance. Throws WindowTooLarge unless the window fits inside a
/// ball of radius r/2.
std::vector<ExpMomentRow> exp_moment_series(const std::vector<EventLog>& logs, const WindowSpec& w,
                                            double phi_star, double floor_radius, double b_bar,
                                            double c0, const std::vector<double>& times);

struct FactorialMomentRow {
  int order = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  /// (e^{theta_t} |window|)^m with e^{theta_t} = e^{theta0} + b_bar t
  double ceiling = 0.0;
  bool pass = true;
};

/// Empirical E[N(N-1)...(N-m+1)] for m = 1..max_order (max 4) with the
/// sub-Poisson ceiling; theta0 = -inf denotes the empty initial state.
std::vector<FactorialMomentRow> factorial_moments(const std::vector<EventLog>& logs,
                                                  const WindowSpec& w, double t, int max_order,
                                                  double b_bar, double theta0);

}  // namespace immsim
