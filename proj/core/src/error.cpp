#include "immsim/error.hpp"

namespace immsim {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::assumption_violation: return "AssumptionViolation";
    case Errc::grid_too_coarse: return "GridTooCoarse";
    case Errc::domain_mismatch: return "DomainMismatch";
    case Errc::negative_density: return "NegativeDensity";
    case Errc::step_too_large: return "StepTooLarge";
    case Errc::no_contraction: return "NoContraction";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::bound_violation: return "BoundViolation";
    case Errc::order_violation: return "OrderViolation";
    case Errc::infinite_theta: return "InfiniteTheta";
    case Errc::alpha_one: return "AlphaOne";
    case Errc::not_unstable_regime: return "NotUnstableRegime";
    case Errc::time_out_of_range: return "TimeOutOfRange";
    case Errc::too_few_replicas: return "TooFewReplicas";
    case Errc::window_too_large: return "WindowTooLarge";
    case Errc::no_pairs: return "NoPairs";
    case Errc::epsilon_out_of_range: return "EpsilonOutOfRange";
    case Errc::too_few_snapshots: return "TooFewSnapshots";
    case Errc::parse_error: return "ParseError";
    case Errc::unknown_key: return "UnknownKey";
    case Errc::range_error: return "RangeError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace immsim
