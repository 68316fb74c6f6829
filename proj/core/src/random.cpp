#include "immsim/random.hpp"

#include <cmath>

#include "immsim/error.hpp"

namespace immsim {

double RandomStream::exponential(double rate) {
  // 1 - u lies in (0, 1], so the logarithm is finite.
  return -std::log1p(-uniform()) / rate;
}

std::uint64_t RandomStream::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw Error(Errc::range_error, "Poisson mean must be finite and nonnegative");
  if (mean == 0.0) return 0;
  if (mean > 500.0) {
    // Split large means so exp(-mean) stays representable.
    const double half = 0.5 * mean;
    return poisson(half) + poisson(mean - half);
  }
  const double u = uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= mean / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace immsim
