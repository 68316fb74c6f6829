#include <doctest.h>

#include <cmath>

#include "immsim/error.hpp"
#include "immsim/kinetic.hpp"
#include "oracles.hpp"

using namespace immsim;

namespace {

KineticConfig base_config(double t_end) {
  KineticConfig cfg;
  cfg.domain = TorusDomain(1, 10.0, 100);
  cfg.potential = Potential::tophat(1.0, 0.5);
  cfg.rate = RateField::constant(1.0);
  cfg.t_end = t_end;
  cfg.method = KineticMethod::picard;
  return cfg;
}

}  // namespace

TEST_CASE("segments violating the contraction condition are refused") {
  KineticConfig cfg = base_config(1.0);
  cfg.rate = RateField::constant(2.0);
  try {
    solve_picard(cfg, 0.6);
    FAIL("expected NoContraction");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::no_contraction);
  }
}

TEST_CASE("picard reproduces the homogeneous closed form") {
  KineticConfig cfg = base_config(5.0);
  cfg.snapshot_times = {0.25, 0.9, 1.3, 2.0, 3.7};
  const KineticSolution sol = solve_picard(cfg, 0.9);
  CHECK(sol.segments == 6);
  for (std::size_t s = 0; s < sol.times.size(); ++s) {
    const double exact = oracle::homogeneous_density(1.0, 1.0, sol.times[s]);
    for (double v : sol.densities[s].values) CHECK(std::abs(v - exact) <= 1e-8);
  }
}

TEST_CASE("no immigration means no change") {
  KineticConfig cfg = base_config(3.0);
  cfg.rate = RateField::constant(0.0);
  cfg.initial = ScalarField(cfg.domain, 0.4);
  const KineticSolution sol = solve_picard(cfg);
  CHECK(sol.max_iterations == 0);
  CHECK(sol.densities.back() == cfg.initial);
}

TEST_CASE("free case is linear in time") {
  KineticConfig cfg = base_config(2.0);
  cfg.potential = Potential::zero();
  const KineticSolution sol = solve_picard(cfg);
  for (double v : sol.densities.back().values) CHECK(v == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("picard and rk4 agree for heterogeneous problems") {
  KineticConfig cfg = base_config(3.0);
  cfg.rate = RateField::sinusoid(1.0, 0.6, {1, 0}, 10.0);
  cfg.potential = Potential::gaussian(1.0, 0.5, 2.0);
  ScalarField rho0(cfg.domain);
  for (std::size_t i = 0; i < rho0.size(); ++i) rho0[i] = 0.2 + 0.1 * std::cos(0.7 * cfg.domain.cell_center(i)[0]);
  cfg.initial = rho0;
  cfg.snapshot_times = {0.5, 1.0, 1.5, 2.0, 2.5};
  const KineticSolution picard = solve_picard(cfg);
  cfg.method = KineticMethod::rk4;
  const KineticSolution rk4 = solve(cfg);
  REQUIRE(picard.times == rk4.times);
  for (std::size_t s = 0; s < rk4.times.size(); ++s) {
    CHECK(sup_distance(picard.densities[s], rk4.densities[s]) <= 1e-8);
  }
  cfg.variant = RhsVariant::closure;
  const KineticSolution rk4c = solve(cfg);
  cfg.method = KineticMethod::picard;
  const KineticSolution picardc = solve(cfg);
  CHECK(sup_distance(picardc.densities.back(), rk4c.densities.back()) <= 1e-8);
}
