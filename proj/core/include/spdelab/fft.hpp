#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <memory>

namespace spdelab {

namespace detail {
struct FftwDeleter {
  void operator()(void* p) const noexcept;
};
}  // namespace detail

template <class T>
using FftwArray = std::unique_ptr<T[], detail::FftwDeleter>;

/// Real-to-half-complex transforms on an n^dim periodic grid (dim = 1, 2, 3).
///
/// Wraps one FFTW r2c/c2r plan pair. Plans are created under a global lock
/// (the FFTW planner is not reentrant); execution is thread-safe, so a
/// GridTransform may be shared, but each thread needs its own buffers.
/// Transforms are unnormalized.
class GridTransform {
 public:
  GridTransform(int dim, int n);
  ~GridTransform();
  GridTransform(const GridTransform&) = delete;
  GridTransform& operator=(const GridTransform&) = delete;

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  std::size_t real_size() const noexcept { return real_size_; }
  std::size_t spectral_size() const noexcept { return spectral_size_; }

  FftwArray<double> make_real() const;
  FftwArray<std::complex<double>> make_spectral() const;

  /// Physical -> spectral; `in` is preserved.
  void forward(double* in, std::complex<double>* out) const;
  /// Spectral -> physical; `in` is overwritten.
  void inverse(std::complex<double>* in, double* out) const;

  /// Offset of wavevector k in the half-complex layout. The last component
  /// must be in [0, n/2]; the others in (-n/2, n/2].
  std::size_t spectral_index(const std::array<int, 3>& k) const noexcept;

  /// Offset of grid point (i0, i1, i2) in the real layout.
  std::size_t real_index(const std::array<int, 3>& idx) const noexcept;

 private:
  int dim_;
  int n_;
  std::size_t real_size_;
  std::size_t spectral_size_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

/// Smallest power of two >= 3 * cutoff; a grid of that size makes quadratic
/// products of modes |k|_inf <= cutoff alias-free on the retained modes.
int dealiased_grid_size(int cutoff) noexcept;

}  // namespace spdelab
