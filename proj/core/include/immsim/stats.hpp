#pragma once

#include <cstddef>
#include <span>

namespace immsim {

struct SampleSummary {
  double mean = 0.0;
  /// Unbiased sample variance (0 for a single sample).
  double variance = 0.0;
  double stderr_mean = 0.0;
};

SampleSummary summarize(std::span<const double> samples);

struct GoodnessOfFit {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 0.0;
};

/// Pearson chi-square test of integer counts against Poisson(mean), with
/// neighbouring classes merged until every expected class size reaches
/// `min_expected`. The mean is treated as known (no fitted parameters).
GoodnessOfFit poisson_goodness_of_fit(std::span<const std::size_t> counts, double mean,
                                      double min_expected = 5.0);

}  // namespace immsim
