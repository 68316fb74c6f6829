#include "immsim/microsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <thread>

#include "immsim/error.hpp"
#include "immsim/random.hpp"
#include "immsim/stats.hpp"

namespace immsim {

namespace {

/// Buckets of side >= cutoff so that every interacting pair sits in
/// neighbouring buckets. Falls back to one bucket when fewer than three fit.
class CellList {
 public:
  CellList(const TorusDomain& dom, const Potential& pot) : dom_(dom), pot_(pot) {
    if (!pot.is_zero()) {
      const auto fit = static_cast<int>(std::floor(dom.side_length() / pot.cutoff()));
      per_side_ = fit >= 3 ? fit : 1;
    }
    const auto n = static_cast<std::size_t>(per_side_);
    buckets_.resize(dom.dimension() == 1 ? n : n * n);
  }

  void insert(const Point& x) { buckets_[bucket_of(x)].push_back(x); }

  /// sum_y phi(x - y) over stored points.
  double potential_sum(const Point& x) const {
    if (pot_.is_zero()) return 0.0;
    if (per_side_ == 1) return sum_bucket(buckets_[0], x);
    const int n = per_side_;
    const auto [c0, c1] = coords(x);
    double total = 0.0;
    if (dom_.dimension() == 1) {
      for (int d0 = -1; d0 <= 1; ++d0) total += sum_bucket(buckets_[wrap(c0 + d0)], x);
      return total;
    }
    for (int d1 = -1; d1 <= 1; ++d1) {
      for (int d0 = -1; d0 <= 1; ++d0) {
        total += sum_bucket(buckets_[wrap(c0 + d0) + static_cast<std::size_t>(n) * wrap(c1 + d1)], x);
      }
    }
    return total;
  }

 private:
  std::pair<int, int> coords(const Point& x) const {
    const double side = dom_.side_length() / per_side_;
    auto axis = [&](double v) { return std::clamp(static_cast<int>(v / side), 0, per_side_ - 1); };
    return {axis(x[0]), dom_.dimension() == 2 ? axis(x[1]) : 0};
  }

  std::size_t wrap(int c) const { return static_cast<std::size_t>((c % per_side_ + per_side_) % per_side_); }

  std::size_t bucket_of(const Point& x) const {
    const auto [c0, c1] = coords(x);
    return static_cast<std::size_t>(c0) + static_cast<std::size_t>(per_side_) * static_cast<std::size_t>(c1);
  }

  double sum_bucket(const std::vector<Point>& bucket, const Point& x) const {
    double s = 0.0;
    for (const auto& y : bucket) s += pot_(dom_.displacement(y, x));
    return s;
  }

  const TorusDomain& dom_;
  const Potential& pot_;
  int per_side_ = 1;
  std::vector<std::vector<Point>> buckets_;
};

void validate(const MicroModel& m) {
  if (m.potential.cutoff() > 0.5 * m.domain.side_length() * (1.0 + 1e-12)) {
    throw Error(Errc::assumption_violation, "potential cutoff exceeds half the torus side");
  }
}

Point uniform_point(RandomStream& rng, const TorusDomain& dom) {
  Point x{};
  for (int a = 0; a < dom.dimension(); ++a) x[a] = rng.uniform() * dom.side_length();
  return x;
}

void require_replicas(std::size_t n, std::size_t needed) {
  if (n < needed) {
    throw Error(Errc::too_few_replicas,
                "need at least " + std::to_string(needed) + " replicas, got " + std::to_string(n));
  }
}

std::vector<double> window_counts(const std::vector<EventLog>& logs, const WindowSpec& w, double t) {
  std::vector<double> c;
  c.reserve(logs.size());
  for (const auto& log : logs) c.push_back(static_cast<double>(count_window(log, w, t)));
  return c;
}

}  // namespace

Configuration EventLog::configuration_at(double t) const {
  Configuration c{initial};
  for (const auto& e : events) {
    if (e.t > t) break;
    c.points.push_back(e.x);
  }
  return c;
}

WindowSpec::WindowSpec(const Point& lo_, const Point& hi_, int dim) : lo(lo_), hi(hi_), dimension(dim) {
  if (dim != 1 && dim != 2) throw Error(Errc::range_error, "window dimension must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    if (!(hi[a] > lo[a])) throw Error(Errc::range_error, "window must have positive volume");
  }
  if (dim == 1) lo[1] = hi[1] = 0.0;
}

double WindowSpec::volume() const noexcept {
  return dimension == 1 ? hi[0] - lo[0] : (hi[0] - lo[0]) * (hi[1] - lo[1]);
}

bool WindowSpec::contains(const Point& x) const noexcept {
  if (x[0] < lo[0] || x[0] >= hi[0]) return false;
  return dimension == 1 || (x[1] >= lo[1] && x[1] < hi[1]);
}

double birth_rate_density(const RateField& rate, const Potential& pot, const TorusDomain& dom,
                          const Configuration& gamma, const Point& x) {
  double s = 0.0;
  if (!pot.is_zero()) {
    for (const auto& y : gamma.points) s += pot(dom.displacement(y, x));
  }
  return rate(x) * std::exp(-s);
}

std::uint64_t replica_seed(std::uint64_t master_seed, std::uint64_t replica) noexcept {
  return splitmix64(splitmix64(master_seed) ^ splitmix64(replica + 0x632BE59BD9B4E019ULL));
}

EventLog simulate(const MicroModel& model, double t_end, std::uint64_t master_seed,
                  std::uint64_t replica, const std::vector<Point>& initial) {
  validate(model);
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error(Errc::range_error, "t_end must be finite and nonnegative");
  const TorusDomain& dom = model.domain;
  EventLog log;
  log.master_seed = master_seed;
  log.replica = replica;
  log.t_end = t_end;
  for (const auto& p : initial) log.initial.push_back(dom.wrap(p));

  const double b_bar = model.rate.upper_bound();
  if (b_bar <= 0.0) return log;

  CellList cells(dom, model.potential);
  for (const auto& p : log.initial) cells.insert(p);

  RandomStream rng(replica_seed(master_seed, replica));
  const double proposal_rate = b_bar * dom.volume();
  double t = 0.0;
  for (;;) {
    t += rng.exponential(proposal_rate);
    if (t > t_end) break;
    ++log.proposals;
    const Point x = uniform_point(rng, dom);
    const double accept = model.rate(x) / b_bar * std::exp(-cells.potential_sum(x));
    if (rng.uniform() < accept) {
      log.events.push_back({t, x});
      cells.insert(x);
    }
  }
  return log;
}

std::vector<EventLog> simulate_replicas(const MicroModel& model, double t_end,
                                        std::uint64_t master_seed, std::size_t count,
                                        unsigned threads,
                                        const std::vector<std::vector<Point>>& initial) {
  if (!initial.empty() && initial.size() != count) {
    throw Error(Errc::range_error, "initial configurations must match the replica count");
  }
  std::vector<EventLog> logs(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count || failed.load()) return;
      try {
        static const std::vector<Point> kEmpty;
        logs[i] = simulate(model, t_end, master_seed, i, initial.empty() ? kEmpty : initial[i]);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
        return;
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, count))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned k = 0; k < workers; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return logs;
}

bool replay_matches(const MicroModel& model, const EventLog& log) {
  const TorusDomain& dom = model.domain;
  const double b_bar = model.rate.upper_bound();
  if (b_bar <= 0.0) return log.events.empty() && log.proposals == 0;
  RandomStream rng(replica_seed(log.master_seed, log.replica));
  const double proposal_rate = b_bar * dom.volume();
  Configuration current{log.initial};
  std::size_t next_event = 0;
  std::size_t proposals = 0;
  double t = 0.0;
  for (;;) {
    t += rng.exponential(proposal_rate);
    if (t > log.t_end) break;
    ++proposals;
    const Point x = uniform_point(rng, dom);
    const double accept = birth_rate_density(model.rate, model.potential, dom, current, x) / b_bar;
    if (rng.uniform() < accept) {
      if (next_event >= log.events.size()) return false;
      const auto& e = log.events[next_event];
      if (e.t != t || e.x != x) return false;
      current.points.push_back(x);
      ++next_event;
    }
  }
  return next_event == log.events.size() && proposals == log.proposals;
}

std::size_t count_window(const EventLog& log, const WindowSpec& w, double t) {
  if (!(t >= 0.0) || t > log.t_end) {
    throw Error(Errc::time_out_of_range, "count time outside [0, t_end]");
  }
  std::size_t n = 0;
  for (const auto& p : log.initial) n += w.contains(p) ? 1 : 0;
  for (const auto& e : log.events) {
    if (e.t > t) break;
    n += w.contains(e.x) ? 1 : 0;
  }
  return n;
}

std::vector<MomentRow> mean_trajectory(const std::vector<EventLog>& logs, const WindowSpec& w,
                                       const std::vector<double>& times) {
  require_replicas(logs.size(), 2);
  std::vector<MomentRow> rows;
  for (double t : times) {
    const auto counts = window_counts(logs, w, t);
    const SampleSummary s = summarize(counts);
    rows.push_back({t, s.mean, s.variance, s.stderr_mean});
  }
  return rows;
}

Covering covering_bound(const WindowSpec& w, double r, int dimension) {
  if (!(r > 0.0)) throw Error(Errc::range_error, "covering radius must be positive");
  auto tiles = [](double length, double side) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(length / side - 1e-12)));
  };
  Covering c;
  if (dimension == 1) {
    c.count = tiles(w.hi[0] - w.lo[0], r);
    c.ball_volume = r;
  } else {
    const double side = r / std::numbers::sqrt2;
    c.count = tiles(w.hi[0] - w.lo[0], side) * tiles(w.hi[1] - w.lo[1], side);
    c.ball_volume = std::numbers::pi * r * r / 4.0;
  }
  return c;
}

double log_count_bound(std::size_t m, double upsilon, double phi_star, double b_bar, double c0,
                       double t) {
  if (!(phi_star > 0.0)) throw Error(Errc::assumption_violation, "floor value must be positive");
  if (!(c0 >= 1.0)) throw Error(Errc::range_error, "initial moment constant must be >= 1");
  return static_cast<double>(m) / phi_star *
         std::log(c0 + std::expm1(phi_star) * b_bar * upsilon * t);
}

double moment_constant(double alpha, double theta, double volume) {
  return std::exp(std::expm1(alpha) * std::exp(theta) * volume);
}

std::vector<ExpMomentRow> exp_moment_series(const std::vector<EventLog>& logs, const WindowSpec& w,
                                            double phi_star, double floor_radius, double b_bar,
                                            double c0, const std::vector<double>& times) {
  require_replicas(logs.size(), 2);
  const double width = w.hi[0] - w.lo[0];
  const double diameter = w.dimension == 1 ? width : std::hypot(width, w.hi[1] - w.lo[1]);
  if (diameter > floor_radius * (1.0 + 1e-12)) {
    throw Error(Errc::window_too_large, "window does not fit in a ball of radius r/2");
  }
  const double upsilon = covering_bound(w, floor_radius, w.dimension).ball_volume;
  std::vector<ExpMomentRow> rows;
  for (double t : times) {
    auto values = window_counts(logs, w, t);
    for (double& v : values) v = std::exp(phi_star * v);
    const SampleSummary s = summarize(values);
    ExpMomentRow row{t, s.mean, s.stderr_mean, c0 + std::expm1(phi_star) * b_bar * upsilon * t, true};
    row.pass = row.mean <= row.bound + 3.0 * row.stderr_mean;
    rows.push_back(row);
  }
  return rows;
}

std::vector<FactorialMomentRow> factorial_moments(const std::vector<EventLog>& logs,
                                                  const WindowSpec& w, double t, int max_order,
                                                  double b_bar, double theta0) {
  require_replicas(logs.size(), 2);
  if (max_order < 1 || max_order > 4) throw Error(Errc::range_error, "factorial moment order must be in 1..4");
  const auto counts = window_counts(logs, w, t);
  const double intensity = std::exp(theta0) + b_bar * t;
  std::vector<FactorialMomentRow> rows;
  for (int m = 1; m <= max_order; ++m) {
    std::vector<double> falling(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      double v = 1.0;
      for (int k = 0; k < m; ++k) v *= counts[i] - k;
      falling[i] = v;
    }
    const SampleSummary s = summarize(falling);
    FactorialMomentRow row{m, s.mean, s.stderr_mean, std::pow(intensity * w.volume(), m), true};
    row.pass = row.mean <= row.ceiling + 3.0 * row.stderr_mean;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace immsim
