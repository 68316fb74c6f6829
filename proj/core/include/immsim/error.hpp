#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace immsim {

/// Failure categories raised by the solvers, simulators and the config layer.
enum class Errc {
  assumption_violation,
  grid_too_coarse,
  domain_mismatch,
  negative_density,
  step_too_large,
  no_contraction,
  non_convergence,
  bound_violation,
  order_violation,
  infinite_theta,
  alpha_one,
  not_unstable_regime,
  time_out_of_range,
  too_few_replicas,
  window_too_large,
  no_pairs,
  epsilon_out_of_range,
  too_few_snapshots,
  parse_error,
  unknown_key,
  range_error,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace immsim
