#pragma once

#include <array>
#include <vector>

namespace immsim {

/// Two-patch block-kernel model: interaction 1 between the patches and
/// `alpha` within each patch.
struct PatchParams {
  double b_A = 1.0;
  double b_B = 1.0;
  double alpha = 1.0;

  bool operator==(const PatchParams&) const = default;
};

struct PatchState {
  double t = 0.0;
  double rho_A = 0.0;
  double rho_B = 0.0;
};

/// (b_A e^{-alpha rho_A - rho_B}, b_B e^{-rho_A - alpha rho_B})
std::array<double, 2> rhs_patch(const PatchParams& p, const PatchState& s);

/// RK4 trajectory from the zero state. Snapshots are taken every
/// `snapshot_every` time units (0 = only the endpoints); the final state at
/// t_end is always included. Throws StepTooLarge if dt * max(b_A, b_B) > 0.05.
std::vector<PatchState> solve_patch(const PatchParams& p, double t_end, double dt,
                                    double snapshot_every = 0.0);

/// [e^{(alpha-1) rho_A} - 1] - (b_A/b_B)[e^{(alpha-1) rho_B} - 1], conserved
/// from the zero state. Throws AlphaOne for alpha == 1.
double invariant_residual(const PatchParams& p, const PatchState& s);

/// Largest |invariant_residual| along a trajectory.
double max_invariant_residual(const PatchParams& p, const std::vector<PatchState>& trajectory);

/// Closed form for alpha = 1.
PatchState explicit_alpha1(double b_A, double b_B, double t);

/// Largest absolute deviation of an alpha = 1 trajectory from explicit_alpha1.
double max_alpha1_deviation(const PatchParams& p, const std::vector<PatchState>& trajectory);

/// Closed form for b_A = b_B = b: log(1 + (1 + alpha) b t) / (1 + alpha).
double homogeneous_patch(double b, double alpha, double t);

/// Limit of rho_A when cross repulsion dominates (alpha < 1, b_A < b_B):
/// [log b_B - log(b_B - b_A)] / (1 - alpha). Throws NotUnstableRegime otherwise.
double asymptote_A(const PatchParams& p);

}  // namespace immsim
