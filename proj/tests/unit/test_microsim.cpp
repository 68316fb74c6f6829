#include <doctest.h>

#include <cmath>
#include <numbers>

#include "immsim/error.hpp"
#include "immsim/microsim.hpp"
#include "immsim/stats.hpp"

using namespace immsim;

namespace {

MicroModel line_model(const Potential& pot, double rate = 1.0) {
  return {TorusDomain(1, 10.0, 100), RateField::constant(rate), pot};
}

WindowSpec interval(double lo, double hi) { return WindowSpec({lo, 0.0}, {hi, 0.0}, 1); }

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an immsim::Error");
  return Errc::range_error;
}

}  // namespace

TEST_CASE("birth rate density") {
  const TorusDomain dom(1, 10.0, 100);
  const Potential pot = Potential::tophat(1.0, 1.0);
  const RateField b = RateField::constant(2.0);
  CHECK(birth_rate_density(b, pot, dom, {}, {3.0, 0.0}) == 2.0);
  const Configuration one{{{3.0, 0.0}}};
  CHECK(birth_rate_density(b, pot, dom, one, {3.5, 0.0}) == doctest::Approx(2.0 * std::exp(-1.0)));
  CHECK(birth_rate_density(b, pot, dom, one, {5.0, 0.0}) == 2.0);
  const Configuration wrapped{{{9.8, 0.0}}};
  CHECK(birth_rate_density(b, pot, dom, wrapped, {0.3, 0.0}) == doctest::Approx(2.0 * std::exp(-1.0)));
}

TEST_CASE("empty horizon and silent rate produce no births") {
  const MicroModel m = line_model(Potential::tophat(1.0, 1.0));
  const EventLog a = simulate(m, 0.0, 3);
  CHECK(a.events.empty());
  const EventLog b = simulate(line_model(Potential::tophat(1.0, 1.0), 0.0), 50.0, 3);
  CHECK(b.events.empty());
}

TEST_CASE("free process has Poisson window counts") {
  const MicroModel m = line_model(Potential::zero());
  const auto logs = simulate_replicas(m, 5.0, 11, 1000, 4);
  const WindowSpec w = interval(0.0, 1.0);
  std::vector<std::size_t> counts;
  for (const auto& log : logs) counts.push_back(count_window(log, w, 5.0));
  std::vector<double> as_double(counts.begin(), counts.end());
  const SampleSummary s = summarize(as_double);
  CHECK(std::abs(s.mean - 5.0) <= 4.0 * std::sqrt(5.0 / 1000.0));
  CHECK(s.variance / s.mean >= 0.8);
  CHECK(s.variance / s.mean <= 1.2);
  CHECK(poisson_goodness_of_fit(counts, 5.0).p_value > 0.01);
}

TEST_CASE("events are time ordered and inside the domain") {
  const auto log = simulate(line_model(Potential::gaussian(1.0, 0.5, 2.0)), 20.0, 5);
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    CHECK(log.events[i].x[0] >= 0.0);
    CHECK(log.events[i].x[0] < 10.0);
    CHECK(log.events[i].t <= 20.0);
    if (i > 0) CHECK(log.events[i].t >= log.events[i - 1].t);
  }
  CHECK(log.proposals >= log.events.size());
}

TEST_CASE("replay reproduces the log and detects tampering") {
  const MicroModel m = line_model(Potential::tophat(1.0, 1.0), 1.3);
  EventLog log = simulate(m, 15.0, 21, 4, {{1.0, 0.0}, {6.0, 0.0}});
  CHECK(log.initial.size() == 2);
  CHECK(replay_matches(m, log));
  REQUIRE(log.events.size() > 3);
  EventLog moved = log;
  moved.events[2].x[0] = std::fmod(moved.events[2].x[0] + 0.37, 10.0);
  CHECK_FALSE(replay_matches(m, moved));
  EventLog dropped = log;
  dropped.events.pop_back();
  CHECK_FALSE(replay_matches(m, dropped));
  EventLog reseeded = log;
  reseeded.replica = 5;
  CHECK_FALSE(replay_matches(m, reseeded));
}

TEST_CASE("replica results do not depend on the worker count") {
  const MicroModel m{TorusDomain(2, 6.0, 30), RateField::sinusoid(1.0, 0.5, {1, 1}, 6.0),
                     Potential::gaussian(1.0, 0.5, 1.5)};
  const auto serial = simulate_replicas(m, 3.0, 99, 12, 1);
  const auto parallel = simulate_replicas(m, 3.0, 99, 12, 4);
  CHECK(serial == parallel);
  for (const auto& log : serial) CHECK(replay_matches(m, log));
  CHECK(serial[0].events != serial[1].events);
}

TEST_CASE("window counting") {
  EventLog log;
  log.t_end = 10.0;
  log.initial = {{0.5, 0.0}};
  log.events = {{1.0, {0.7, 0.0}}, {2.0, {3.0, 0.0}}, {4.0, {0.2, 0.0}}};
  const WindowSpec w = interval(0.0, 1.0);
  CHECK(count_window(log, w, 0.0) == 1);
  CHECK(count_window(log, w, 1.0) == 2);
  CHECK(count_window(log, w, 3.0) == 2);
  CHECK(count_window(log, w, 10.0) == 3);
  CHECK(code_of([&] { count_window(log, w, 10.5); }) == Errc::time_out_of_range);
  CHECK(code_of([&] { mean_trajectory({log}, w, {1.0}); }) == Errc::too_few_replicas);
  const auto rows = mean_trajectory({log, log}, w, {0.0, 10.0});
  CHECK(rows[1].mean == 3.0);
  CHECK(rows[1].variance == 0.0);
}

TEST_CASE("covering bounds") {
  const Covering c1 = covering_bound(interval(0.0, 1.0), 2.0, 1);
  CHECK(c1.count == 1);
  CHECK(c1.ball_volume == 2.0);
  const Covering c2 = covering_bound(interval(0.0, 5.0), 1.0, 1);
  CHECK(c2.count == 5);
  const Covering sq = covering_bound(WindowSpec({0.0, 0.0}, {1.0, 1.0}, 2), std::sqrt(2.0), 2);
  CHECK(sq.count == 1);
  CHECK(sq.ball_volume == doctest::Approx(std::numbers::pi / 2.0));
  const Covering sq4 = covering_bound(WindowSpec({0.0, 0.0}, {2.0, 2.0}, 2), std::sqrt(2.0), 2);
  CHECK(sq4.count == 4);
}

TEST_CASE("logarithmic count bound") {
  CHECK(log_count_bound(1, 1.0, 1.0, 1.0, 1.0, 0.0) == 0.0);
  CHECK(log_count_bound(2, 1.0, 1.0, 1.0, 1.0, 1.0 / (std::numbers::e - 1.0)) == doctest::Approx(2.0 * std::log(2.0)));
  CHECK(code_of([] { log_count_bound(1, 1.0, 0.0, 1.0, 1.0, 1.0); }) == Errc::assumption_violation);
  CHECK(code_of([] { log_count_bound(1, 1.0, 1.0, 1.0, 0.5, 1.0); }) == Errc::range_error);
}

TEST_CASE("moment constant") {
  CHECK(moment_constant(0.0, 3.0, 2.0) == 1.0);
  CHECK(moment_constant(std::log(2.0), 0.0, 1.0) == doctest::Approx(std::numbers::e));
}

TEST_CASE("exponential and factorial moments of a repulsive process") {
  const MicroModel m = line_model(Potential::tophat(1.0, 1.0));
  const auto logs = simulate_replicas(m, 100.0, 7, 200, 4);
  const WindowSpec w = interval(0.0, 1.0);
  const std::vector<double> times{0.0, 10.0, 50.0, 100.0};
  const auto exp_rows = exp_moment_series(logs, w, 1.0, 1.0, 1.0, 1.0, times);
  REQUIRE(exp_rows.size() == 4);
  CHECK(exp_rows[0].mean == 1.0);
  for (const auto& r : exp_rows) {
    CHECK(r.pass);
    CHECK(r.bound == doctest::Approx(1.0 + (std::numbers::e - 1.0) * r.t));
  }
  const auto fact = factorial_moments(logs, w, 100.0, 3, 1.0, -std::numeric_limits<double>::infinity());
  REQUIRE(fact.size() == 3);
  for (const auto& r : fact) {
    CHECK(r.pass);
    CHECK(r.ceiling == doctest::Approx(std::pow(100.0, r.order)));
  }
  CHECK(code_of([&] { exp_moment_series(logs, interval(0.0, 2.0), 1.0, 1.0, 1.0, 1.0, times); }) ==
        Errc::window_too_large);
}

TEST_CASE("repulsion lowers the mean count") {
  const WindowSpec w = interval(2.0, 4.0);
  const auto free_logs = simulate_replicas(line_model(Potential::zero()), 20.0, 3, 100, 4);
  const auto rep_logs = simulate_replicas(line_model(Potential::tophat(1.0, 1.0)), 20.0, 3, 100, 4);
  const double free_mean = mean_trajectory(free_logs, w, {20.0})[0].mean;
  const double rep_mean = mean_trajectory(rep_logs, w, {20.0})[0].mean;
  CHECK(rep_mean < free_mean);
  CHECK(free_mean == doctest::Approx(40.0).epsilon(0.1));
}

TEST_CASE("cutoffs beyond half the torus are rejected") {
  const MicroModel m{TorusDomain(1, 4.0, 40), RateField::constant(1.0), Potential::gaussian(1.0, 0.5, 3.0)};
  CHECK(code_of([&] { simulate(m, 1.0, 1); }) == Errc::assumption_violation);
}
