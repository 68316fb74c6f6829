#pragma once

#include <vector>

#include "immsim/kinetic.hpp"

namespace immsim::detail {

std::vector<double> normalized_snapshots(const std::vector<double>& requested, double t_end);
ScalarField initial_density(const KineticConfig& cfg);
void require_nonnegative(const ScalarField& rho);
void check_config(const KineticConfig& cfg);

}  // namespace immsim::detail
