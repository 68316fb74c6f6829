#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "immsim/error.hpp"
#include "immsim/model.hpp"
#include "oracles.hpp"

using namespace immsim;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an immsim::Error");
  return Errc::range_error;
}

}  // namespace

TEST_CASE("torus wraps points and uses minimum-image displacements") {
  const TorusDomain dom(2, 10.0, 20);
  CHECK(dom.cell_count() == 400);
  CHECK(dom.spacing() == doctest::Approx(0.5));
  CHECK(dom.volume() == doctest::Approx(100.0));
  const Point w = dom.wrap({-0.5, 10.25});
  CHECK(w[0] == doctest::Approx(9.5));
  CHECK(w[1] == doctest::Approx(0.25));
  const Point d = dom.displacement({9.8, 0.1}, {0.2, 9.9});
  CHECK(d[0] == doctest::Approx(0.4));
  CHECK(d[1] == doctest::Approx(-0.2));
  CHECK(dom.cell_index(dom.cell_center(57)) == 57);
  CHECK(dom.cell_index({0.75, 1.25}) == 1 + 20 * 2);
}

TEST_CASE("potential evaluation") {
  const Potential top = Potential::tophat(1.0, 1.0);
  CHECK(eval_potential(top, {0.5, 0.0}) == 1.0);
  CHECK(eval_potential(top, {2.0, 0.0}) == 0.0);
  const Potential g = Potential::gaussian(1.0, 1.0, 4.0);
  CHECK(eval_potential(g, {0.0, 0.0}) == 1.0);
  CHECK(g(1.0) == doctest::Approx(std::exp(-0.5)));
  CHECK(g(4.5) == 0.0);
  const Potential e = Potential::exponential(2.0, 0.5, 3.0);
  CHECK(e(1.0) == doctest::Approx(2.0 * std::exp(-2.0)));
  const Potential tab = Potential::tabulated({2.0, 1.0, 0.0}, 2.0);
  CHECK(tab(0.5) == doctest::Approx(1.5));
  CHECK(tab(1.5) == doctest::Approx(0.5));
  CHECK(tab(2.5) == 0.0);
}

TEST_CASE("potential stats: tophat in one dimension") {
  const TorusDomain dom(1, 10.0, 100);
  const PotentialStats s = potential_stats(Potential::tophat(1.0, 0.5), dom);
  CHECK(s.l1_norm == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s.phi_bar == 1.0);
  REQUIRE(s.floor_radius);
  CHECK(*s.floor_radius == 0.5);
  CHECK(*s.floor_value == 1.0);
}

TEST_CASE("potential stats: exponential mass matches a quadrature oracle") {
  const TorusDomain dom(1, 10.0, 400);
  const Potential e = Potential::exponential(1.0, 1.0, 5.0);
  const double quad = 2.0 * oracle::simpson([](double x) { return std::exp(-x); }, 0.0, 5.0, 2000);
  const PotentialStats s = potential_stats(e, dom);
  CHECK(s.l1_norm == doctest::Approx(quad).epsilon(1e-10));
  CHECK(std::abs(s.l1_norm - 2.0) < 2.0 * std::exp(-5.0) + 1e-12);
  CHECK(discretize(e, dom).integral() == doctest::Approx(quad).epsilon(1e-4));
}

TEST_CASE("potential stats: two-dimensional closed forms against radial quadrature") {
  const TorusDomain dom(2, 10.0, 100);
  const Potential g = Potential::gaussian(1.5, 0.7, 3.0);
  const double quad = 2.0 * std::numbers::pi *
                      oracle::simpson([&](double r) { return r * g(r); }, 0.0, 3.0, 4000);
  CHECK(potential_stats(g, dom).l1_norm == doctest::Approx(quad).epsilon(1e-10));
  const Potential tab = Potential::tabulated({1.0, 0.6, 0.1, 0.0}, 1.5);
  const double quad_tab = 2.0 * std::numbers::pi *
                          oracle::simpson([&](double r) { return r * tab(r); }, 0.0, 1.5, 6000);
  CHECK(potential_stats(tab, dom).l1_norm == doctest::Approx(quad_tab).epsilon(1e-6));
}

TEST_CASE("zero potential has zero mass and fails only where mass is required") {
  const TorusDomain dom(1, 10.0, 100);
  const PotentialStats s = potential_stats(Potential::zero(), dom);
  CHECK(s.l1_norm == 0.0);
  CHECK(code_of([&] { require_positive_mass(s.l1_norm); }) == Errc::assumption_violation);
}

TEST_CASE("support wider than half the torus is rejected") {
  const TorusDomain dom(1, 4.0, 100);
  CHECK(code_of([&] { potential_stats(Potential::tophat(1.0, 2.5), dom); }) ==
        Errc::assumption_violation);
}

TEST_CASE("explicit floors are validated") {
  const Potential g = Potential::gaussian(1.0, 1.0, 3.0);
  CHECK_NOTHROW(g.with_floor(1.0, std::exp(-0.5)));
  CHECK(code_of([&] { g.with_floor(1.0, 0.9); }) == Errc::assumption_violation);
  const Potential top = Potential::tophat(2.0, 0.8);
  double lowest = 1e300;
  for (int i = 0; i <= 1000; ++i) lowest = std::min(lowest, top(0.8 * i / 1000.0));
  CHECK(lowest == *potential_stats(top, TorusDomain(1, 10.0, 100)).floor_value);
}

TEST_CASE("rate evaluation") {
  CHECK(eval_rate(RateField::constant(1.0), {3.3, 0.0}) == 1.0);
  const RateField p = RateField::patches({{{0.0, 0.0}, {2.0, 0.0}, 1.0}, {{5.0, 0.0}, {7.0, 0.0}, 2.0}}, 1);
  CHECK(eval_rate(p, {6.0, 0.0}) == 2.0);
  CHECK(eval_rate(p, {1.0, 0.0}) == 1.0);
  CHECK(eval_rate(p, {3.0, 0.0}) == 0.0);
  CHECK(p.upper_bound() == 2.0);
  const RateField s = RateField::sinusoid(1.0, 0.5, {1, 0}, 10.0);
  CHECK(eval_rate(s, {2.5, 0.0}) == doctest::Approx(1.5));
  CHECK(s.upper_bound() == 1.5);
  CHECK_THROWS_AS(RateField::sinusoid(1.0, 1.5, {1, 0}, 10.0), Error);
}

TEST_CASE("attraction rates") {
  const TorusDomain dom(1, 10.0, 100);
  CHECK(build_attraction_rate({}, Potential::tophat(1.0, 1.0), 0.7, 5.0, dom) == RateField::constant(0.7));
  CHECK(build_attraction_rate({{{5.0, 0.0}}}, Potential::zero(), 0.7, 5.0, dom) == RateField::constant(0.7));
  const RateField r = build_attraction_rate({{{0.0, 0.0}}}, Potential::tophat(std::log(2.0), 1.0), 0.7, 5.0, dom);
  CHECK(r.kind() == RateKind::attraction_centers);
  CHECK(r({0.55, 0.0}) == doctest::Approx(1.4));
  CHECK(r({9.45, 0.0}) == doctest::Approx(1.4));
  CHECK(r({3.0, 0.0}) == doctest::Approx(0.7));
  const RateField capped = build_attraction_rate({{{0.0, 0.0}}}, Potential::tophat(std::log(2.0), 1.0), 0.7, 1.0, dom);
  CHECK(capped({0.55, 0.0}) == doctest::Approx(1.0));
  CHECK(capped.upper_bound() <= 1.0);
}

TEST_CASE("discretization of fields") {
  const TorusDomain dom(1, 10.0, 64);
  const ScalarField c = discretize(RateField::constant(3.0), dom);
  for (double v : c.values) CHECK(v == 3.0);
  const ScalarField s = discretize(RateField::sinusoid(1.0, 0.5, {1, 0}, 10.0), dom);
  CHECK(s.max() <= 1.5);
  CHECK(code_of([&] { discretize(Potential::tophat(1.0, 0.15), dom); }) == Errc::grid_too_coarse);
  CHECK_NOTHROW(discretize(Potential::zero(), dom));
}

TEST_CASE("tophat kernel mass on fine grids") {
  const ScalarField k1 = discretize(Potential::tophat(1.0, 0.5), TorusDomain(1, 10.0, 1000));
  CHECK(std::abs(k1.integral() - 1.0) < 1e-3);
  const ScalarField k2 = discretize(Potential::tophat(1.0, 1.0), TorusDomain(2, 10.0, 200));
  CHECK(std::abs(k2.integral() - std::numbers::pi) < 1e-3 * std::numbers::pi);
}

TEST_CASE("grid mass converges under refinement") {
  const Potential g = Potential::exponential(1.0, 0.6, 2.5);
  double previous = 1e300;
  for (int n : {40, 80, 160}) {
    const TorusDomain dom(2, 10.0, n);
    const double err = std::abs(discretize(g, dom).integral() - potential_stats(g, dom).l1_norm);
    CHECK(err <= previous);
    previous = err;
  }
  CHECK(previous < 1e-3);
}

TEST_CASE("random evaluations stay within the declared bounds") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> pos(0.0, 10.0);
  const Potential pots[] = {Potential::tophat(1.3, 0.9), Potential::gaussian(2.0, 0.5, 2.0),
                            Potential::exponential(0.4, 1.0, 4.0), Potential::tabulated({0.3, 1.2, 0.2, 0.0}, 1.0)};
  const RateField rates[] = {RateField::constant(2.0), RateField::sinusoid(1.0, 0.9, {2, 1}, 10.0),
                             RateField::patches({{{1.0, 1.0}, {3.0, 4.0}, 0.8}}, 2)};
  for (int i = 0; i < 2000; ++i) {
    const Point x{pos(gen) - 5.0, pos(gen) - 5.0};
    for (const auto& p : pots) {
      const double v = p(x);
      CHECK(v >= 0.0);
      CHECK(v <= p.upper_bound());
    }
    for (const auto& r : rates) {
      const double v = r({pos(gen), pos(gen)});
      CHECK(v >= 0.0);
      CHECK(v <= r.upper_bound());
    }
  }
}
