#include "spdelab/fft.hpp"

#include <fftw3.h>

#include <mutex>
#include <stdexcept>

namespace spdelab {

namespace detail {
void FftwDeleter::operator()(void* p) const noexcept { fftw_free(p); }
}  // namespace detail

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

GridTransform::GridTransform(int dim, int n) : dim_(dim), n_(n) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("GridTransform: dim must be 1, 2 or 3");
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("GridTransform: n must be even and >= 2");
  real_size_ = 1;
  for (int d = 0; d < dim; ++d) real_size_ *= static_cast<std::size_t>(n);
  spectral_size_ = real_size_ / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);

  auto real = make_real();
  auto spec = make_spectral();
  int dims[3] = {n, n, n};
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c(dim, dims, real.get(), reinterpret_cast<fftw_complex*>(spec.get()),
                                    FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r(dim, dims, reinterpret_cast<fftw_complex*>(spec.get()), real.get(),
                                    FFTW_ESTIMATE);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) throw std::runtime_error("FFTW planning failed");
}

GridTransform::~GridTransform() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

FftwArray<double> GridTransform::make_real() const {
  auto* p = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
  if (p == nullptr) throw std::bad_alloc();
  return FftwArray<double>(p);
}

FftwArray<std::complex<double>> GridTransform::make_spectral() const {
  auto* p = static_cast<std::complex<double>*>(fftw_malloc(sizeof(std::complex<double>) * spectral_size_));
  if (p == nullptr) throw std::bad_alloc();
  return FftwArray<std::complex<double>>(p);
}

void GridTransform::forward(double* in, std::complex<double>* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), in, reinterpret_cast<fftw_complex*>(out));
}

void GridTransform::inverse(std::complex<double>* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in), out);
}

std::size_t GridTransform::spectral_index(const std::array<int, 3>& k) const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  const std::size_t half = n / 2 + 1;
  auto wrap = [n](int c) { return static_cast<std::size_t>(c < 0 ? c + static_cast<int>(n) : c); };
  switch (dim_) {
    case 1:
      return static_cast<std::size_t>(k[0]);
    case 2:
      return wrap(k[0]) * half + static_cast<std::size_t>(k[1]);
    default:
      return (wrap(k[0]) * n + wrap(k[1])) * half + static_cast<std::size_t>(k[2]);
  }
}

std::size_t GridTransform::real_index(const std::array<int, 3>& idx) const noexcept {
  const auto n = static_cast<std::size_t>(n_);
  std::size_t off = 0;
  for (int d = 0; d < dim_; ++d) off = off * n + static_cast<std::size_t>(idx[d]);
  return off;
}

int dealiased_grid_size(int cutoff) noexcept {
  int n = 2;
  while (n < 3 * cutoff) n *= 2;
  return n;
}

}  // namespace spdelab
