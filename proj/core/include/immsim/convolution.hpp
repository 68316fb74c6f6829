#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "immsim/model.hpp"

namespace immsim {

enum class ConvolutionBackend { fft, direct };

/// Discrete circular convolution with a fixed kernel on a torus grid:
///   (k * rho)_i = sum_j w_{i-j} rho_j h^d
/// where w is a displacement-indexed kernel field (see discretize_kernel).
/// Immutable after construction; apply() may be called concurrently.
class Convolver {
 public:
  explicit Convolver(ScalarField kernel);
  ~Convolver();
  Convolver(Convolver&&) noexcept;
  Convolver& operator=(Convolver&&) noexcept;
  Convolver(const Convolver&) = delete;
  Convolver& operator=(const Convolver&) = delete;

  ScalarField apply(const ScalarField& rho,
                    ConvolutionBackend backend = ConvolutionBackend::fft) const;

  const TorusDomain& domain() const noexcept { return kernel_.domain; }
  const ScalarField& kernel() const noexcept { return kernel_; }
  /// Grid mass sum_k w_k h^d.
  double mass() const noexcept { return mass_; }

 private:
  ScalarField apply_fft(const ScalarField& rho) const;
  ScalarField apply_direct(const ScalarField& rho) const;

  struct Plans;
  ScalarField kernel_;
  double mass_ = 0.0;
  std::vector<std::complex<double>> spectrum_;
  std::unique_ptr<Plans> plans_;
};

/// One-shot convolution of `rho` with the kernel of `pot`.
/// Throws DomainMismatch if `rho` does not live on `dom`.
ScalarField convolve(const TorusDomain& dom, const Potential& pot, const ScalarField& rho,
                     ConvolutionBackend backend = ConvolutionBackend::fft);

}  // namespace immsim
