#include "immsim/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <vector>

#include "immsim/error.hpp"

namespace immsim {

SampleSummary summarize(std::span<const double> samples) {
  SampleSummary s;
  if (samples.empty()) return s;
  const double n = static_cast<double>(samples.size());
  for (double v : samples) s.mean += v;
  s.mean /= n;
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.variance = ss / (n - 1.0);
    s.stderr_mean = std::sqrt(s.variance / n);
  }
  return s;
}

GoodnessOfFit poisson_goodness_of_fit(std::span<const std::size_t> counts, double mean,
                                      double min_expected) {
  if (counts.size() < 2) throw Error(Errc::too_few_replicas, "goodness of fit needs samples");
  if (!(mean > 0.0)) throw Error(Errc::range_error, "Poisson mean must be positive");
  const double n = static_cast<double>(counts.size());
  std::size_t kmax = 0;
  for (auto c : counts) kmax = std::max(kmax, c);

  // Expected and observed class sizes for k = 0..kmax, last class open-ended.
  std::vector<double> expected(kmax + 1);
  std::vector<double> observed(kmax + 1, 0.0);
  double pk = std::exp(-mean);
  double cumulative = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    if (k > 0) pk *= mean / static_cast<double>(k);
    expected[k] = n * pk;
    cumulative += pk;
  }
  expected[kmax] += n * std::max(0.0, 1.0 - cumulative);
  for (auto c : counts) observed[c] += 1.0;

  // Merge from the left, then fold an undersized tail into its neighbour.
  std::vector<double> e_cls;
  std::vector<double> o_cls;
  double e_acc = 0.0;
  double o_acc = 0.0;
  for (std::size_t k = 0; k <= kmax; ++k) {
    e_acc += expected[k];
    o_acc += observed[k];
    if (e_acc >= min_expected) {
      e_cls.push_back(e_acc);
      o_cls.push_back(o_acc);
      e_acc = o_acc = 0.0;
    }
  }
  if (e_acc > 0.0 || o_acc > 0.0) {
    if (e_cls.empty()) {
      e_cls.push_back(e_acc);
      o_cls.push_back(o_acc);
    } else {
      e_cls.back() += e_acc;
      o_cls.back() += o_acc;
    }
  }

  GoodnessOfFit g;
  for (std::size_t i = 0; i < e_cls.size(); ++i) {
    const double d = o_cls[i] - e_cls[i];
    g.statistic += d * d / e_cls[i];
  }
  g.degrees_of_freedom = static_cast<int>(e_cls.size()) - 1;
  if (g.degrees_of_freedom < 1) {
    g.p_value = 1.0;
    return g;
  }
  const boost::math::chi_squared dist(g.degrees_of_freedom);
  g.p_value = boost::math::cdf(boost::math::complement(dist, g.statistic));
  return g;
}

}  // namespace immsim
