#include <doctest.h>

#include <cmath>
#include <numbers>

#include "immsim/error.hpp"
#include "immsim/patches.hpp"

using namespace immsim;

namespace {

const double kE = std::numbers::e;

PatchState state_at(const std::vector<PatchState>& traj, double t) {
  for (const auto& s : traj) {
    if (std::abs(s.t - t) < 1e-9) return s;
  }
  FAIL("time not in trajectory");
  return {};
}

}  // namespace

TEST_CASE("patch right-hand side") {
  const PatchParams p{1.3, 0.7, 0.4};
  const auto at0 = rhs_patch(p, {});
  CHECK(at0[0] == 1.3);
  CHECK(at0[1] == 0.7);
  const PatchParams no_self{1.0, 2.0, 0.0};
  CHECK(rhs_patch(no_self, {0.0, 0.3, 0.5})[0] == rhs_patch(no_self, {0.0, 4.0, 0.5})[0]);
  const PatchParams sym{1.5, 1.5, 0.8};
  const auto v = rhs_patch(sym, {0.0, 0.9, 0.9});
  CHECK(v[0] == v[1]);
}

TEST_CASE("alpha one trajectory matches its closed form") {
  const double t = (kE * kE - 1.0) / 2.0;
  const auto traj = solve_patch({1.0, 1.0, 1.0}, t, 0.01);
  CHECK(std::abs(traj.back().rho_A - 1.0) <= 1e-6);
  CHECK(std::abs(traj.back().rho_B - 1.0) <= 1e-6);
  CHECK(max_alpha1_deviation({1.0, 3.0, 1.0}, solve_patch({1.0, 3.0, 1.0}, 20.0, 0.01, 0.5)) <= 1e-6);
}

TEST_CASE("unstable regime: patch A saturates near its asymptote") {
  const PatchParams p{1.0, 2.0, 0.5};
  const auto traj = solve_patch(p, 1e4, 0.01, 1000.0);
  const double target = 2.0 * std::log(2.0);
  CHECK(std::abs(traj.back().rho_A - target) <= 0.05 * target);
  const PatchState s3 = state_at(traj, 1e3);
  const PatchState s4 = traj.back();
  CHECK(s4.rho_A - s3.rho_A <= 0.05 * asymptote_A(p));
  CHECK(s4.rho_B - s3.rho_B >= 0.5);
  CHECK(max_invariant_residual(p, traj) <= 1e-8);
}

TEST_CASE("equal rates follow the homogeneous patch formula") {
  for (double alpha : {0.0, 0.5, 1.0, 2.0}) {
    const auto traj = solve_patch({0.8, 0.8, alpha}, 30.0, 0.01, 1.0);
    for (const auto& s : traj) {
      const double exact = homogeneous_patch(0.8, alpha, s.t);
      CHECK(std::abs(s.rho_A - exact) <= 1e-6);
      CHECK(std::abs(s.rho_B - exact) <= 1e-6);
    }
  }
}

TEST_CASE("invariant along trajectories") {
  const PatchParams p{1.0, 2.0, 0.5};
  CHECK(invariant_residual(p, {}) == 0.0);
  for (const PatchParams& q : {p, PatchParams{0.3, 1.7, 0.0}, PatchParams{2.0, 1.0, 1.8}}) {
    CHECK(max_invariant_residual(q, solve_patch(q, 200.0, 0.01, 0.25)) <= 1e-8);
  }
  try {
    invariant_residual({1.0, 2.0, 1.0}, {});
    FAIL("expected AlphaOne");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::alpha_one);
  }
}

TEST_CASE("closed form at alpha one") {
  const PatchState s = explicit_alpha1(1.0, 1.0, (kE * kE - 1.0) / 2.0);
  CHECK(s.rho_A == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.rho_B == doctest::Approx(1.0).epsilon(1e-15));
  const PatchState z = explicit_alpha1(0.4, 2.0, 0.0);
  CHECK(z.rho_A == 0.0);
  CHECK(z.rho_B == 0.0);
  for (double t : {0.1, 1.0, 50.0}) {
    const PatchState r = explicit_alpha1(0.4, 2.0, t);
    CHECK(r.rho_A / r.rho_B == doctest::Approx(0.2).epsilon(1e-14));
  }
}

TEST_CASE("asymptote of the saturating patch") {
  CHECK(asymptote_A({1.0, 2.0, 0.5}) == doctest::Approx(1.386294).epsilon(1e-6));
  CHECK(asymptote_A({1e-9, 2.0, 0.5}) < 1e-8);
  for (double alpha : {1.0, 1.5}) {
    try {
      asymptote_A({1.0, 2.0, alpha});
      FAIL("expected NotUnstableRegime");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::not_unstable_regime);
    }
  }
}

TEST_CASE("no clear difference between patches when self repulsion dominates") {
  for (double alpha : {1.0, 1.5, 3.0}) {
    const auto traj = solve_patch({1.0, 1.009, alpha}, 1000.0, 0.01, 10.0);
    for (std::size_t k = 1; k < traj.size(); ++k) {
      const double ratio = traj[k].rho_A / traj[k].rho_B;
      CHECK(ratio >= 0.95);
      CHECK(ratio <= 1.05);
    }
  }
}

TEST_CASE("trajectories are monotone and step size is policed") {
  const auto traj = solve_patch({1.0, 2.0, 0.5}, 50.0, 0.01, 1.0);
  for (std::size_t k = 1; k < traj.size(); ++k) {
    CHECK(traj[k].rho_A >= traj[k - 1].rho_A);
    CHECK(traj[k].rho_B >= traj[k - 1].rho_B);
  }
  try {
    solve_patch({1.0, 2.0, 0.5}, 1.0, 0.03);
    FAIL("expected StepTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::step_too_large);
  }
}
