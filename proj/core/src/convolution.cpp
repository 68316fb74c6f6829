#include "immsim/convolution.hpp"

#include <fftw3.h>

#include <cstring>
#include <mutex>

#include "immsim/error.hpp"

namespace immsim {

namespace {

// The FFTW planner is not reentrant; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwReal {
  double* p;
  explicit FftwReal(std::size_t n) : p(fftw_alloc_real(n)) {}
  ~FftwReal() { fftw_free(p); }
  FftwReal(const FftwReal&) = delete;
  FftwReal& operator=(const FftwReal&) = delete;
};

struct FftwComplex {
  fftw_complex* p;
  explicit FftwComplex(std::size_t n) : p(fftw_alloc_complex(n)) {}
  ~FftwComplex() { fftw_free(p); }
  FftwComplex(const FftwComplex&) = delete;
  FftwComplex& operator=(const FftwComplex&) = delete;
};

std::size_t spectrum_size(const TorusDomain& dom) {
  const auto n = static_cast<std::size_t>(dom.cells_per_side());
  return dom.dimension() == 1 ? n / 2 + 1 : n * (n / 2 + 1);
}

}  // namespace

struct Convolver::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  explicit Plans(const TorusDomain& dom) {
    const int n = dom.cells_per_side();
    FftwReal real(dom.cell_count());
    FftwComplex cplx(spectrum_size(dom));
    // FFTW_ESTIMATE keeps the chosen algorithm, and hence the rounding, fixed
    // from run to run.
    std::lock_guard lock(planner_mutex());
    if (dom.dimension() == 1) {
      forward = fftw_plan_dft_r2c_1d(n, real.p, cplx.p, FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_1d(n, cplx.p, real.p, FFTW_ESTIMATE);
    } else {
      forward = fftw_plan_dft_r2c_2d(n, n, real.p, cplx.p, FFTW_ESTIMATE);
      backward = fftw_plan_dft_c2r_2d(n, n, cplx.p, real.p, FFTW_ESTIMATE);
    }
  }

  ~Plans() {
    std::lock_guard lock(planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

Convolver::Convolver(ScalarField kernel) : kernel_(std::move(kernel)) {
  const TorusDomain& dom = kernel_.domain;
  mass_ = kernel_.integral();
  plans_ = std::make_unique<Plans>(dom);
  const std::size_t nc = spectrum_size(dom);
  FftwReal in(dom.cell_count());
  FftwComplex out(nc);
  std::memcpy(in.p, kernel_.values.data(), sizeof(double) * dom.cell_count());
  fftw_execute_dft_r2c(plans_->forward, in.p, out.p);
  spectrum_.resize(nc);
  // Fold the cell volume and the inverse-transform normalisation into the kernel.
  const double scale = dom.cell_volume() / static_cast<double>(dom.cell_count());
  for (std::size_t i = 0; i < nc; ++i) {
    spectrum_[i] = std::complex<double>(out.p[i][0], out.p[i][1]) * scale;
  }
}

Convolver::~Convolver() = default;
Convolver::Convolver(Convolver&&) noexcept = default;
Convolver& Convolver::operator=(Convolver&&) noexcept = default;

ScalarField Convolver::apply(const ScalarField& rho, ConvolutionBackend backend) const {
  if (rho.domain != kernel_.domain || rho.size() != kernel_.size()) {
    throw Error(Errc::domain_mismatch, "density and kernel live on different grids");
  }
  return backend == ConvolutionBackend::fft ? apply_fft(rho) : apply_direct(rho);
}

ScalarField Convolver::apply_fft(const ScalarField& rho) const {
  const TorusDomain& dom = kernel_.domain;
  const std::size_t n = dom.cell_count();
  const std::size_t nc = spectrum_.size();
  FftwReal buf(n);
  FftwComplex spec(nc);
  std::memcpy(buf.p, rho.values.data(), sizeof(double) * n);
  fftw_execute_dft_r2c(plans_->forward, buf.p, spec.p);
  for (std::size_t i = 0; i < nc; ++i) {
    const std::complex<double> z = std::complex<double>(spec.p[i][0], spec.p[i][1]) * spectrum_[i];
    spec.p[i][0] = z.real();
    spec.p[i][1] = z.imag();
  }
  fftw_execute_dft_c2r(plans_->backward, spec.p, buf.p);
  ScalarField out(dom);
  std::memcpy(out.values.data(), buf.p, sizeof(double) * n);
  return out;
}

ScalarField Convolver::apply_direct(const ScalarField& rho) const {
  const TorusDomain& dom = kernel_.domain;
  const int n = dom.cells_per_side();
  const double vol = dom.cell_volume();
  ScalarField out(dom);
  if (dom.dimension() == 1) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += kernel_[static_cast<std::size_t>((i - j + n) % n)] * rho[j];
      out[static_cast<std::size_t>(i)] = acc * vol;
    }
    return out;
  }
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i0 = 0; i0 < n; ++i0) {
      double acc = 0.0;
      for (int j1 = 0; j1 < n; ++j1) {
        const std::size_t row = static_cast<std::size_t>((i1 - j1 + n) % n) * n;
        for (int j0 = 0; j0 < n; ++j0) {
          acc += kernel_[row + static_cast<std::size_t>((i0 - j0 + n) % n)] *
                 rho[static_cast<std::size_t>(j0) + static_cast<std::size_t>(j1) * n];
        }
      }
      out[static_cast<std::size_t>(i0) + static_cast<std::size_t>(i1) * n] = acc * vol;
    }
  }
  return out;
}

ScalarField convolve(const TorusDomain& dom, const Potential& pot, const ScalarField& rho,
                     ConvolutionBackend backend) {
  if (rho.domain != dom) throw Error(Errc::domain_mismatch, "density is not defined on this domain");
  return Convolver(discretize(pot, dom)).apply(rho, backend);
}

}  // namespace immsim
