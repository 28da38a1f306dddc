#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "spdelab/fft.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab {

/// F(u) together with the two norms the growth bound compares.
struct DriftEvaluation {
  SpectralField F;             ///< KS: B(u,u) - a u; FracNS: B(u,u)
  SpectralField scaled;        ///< A^{-gamma} F(u), i.e. G^{-1} F(u)
  double scaled_norm = 0.0;    ///< |A^{-gamma} F(u)|_H
  double input_norm_theta = 0.0;  ///< |A^theta u|_H

  explicit DriftEvaluation(const SpectrumPtr& spectrum) : F(spectrum), scaled(spectrum) {}
};

/// Pseudospectral evaluation of the bilinear term on the dealiased grid.
///
/// Holds FFT plans and scratch buffers for one spectrum. Not thread-safe:
/// give every worker its own context.
///
/// KS:     B(u, v) = P_0[u v'], the zero-mean part of the product.
/// FracNS: B(u, v) = P_L[(u . grad) v], computed in divergence form
///         sum_j d_j(u_j v) (exact for divergence-free u) and Leray-projected
///         onto the stored tangent directions.
class PseudospectralContext {
 public:
  explicit PseudospectralContext(SpectrumPtr spectrum);

  const SpectrumPtr& spectrum() const noexcept { return spectrum_; }

  void bilinear(const SpectralField& u, const SpectralField& v, SpectralField& out);
  SpectralField bilinear(const SpectralField& u, const SpectralField& v);

  void drift(const SpectralField& u, DriftEvaluation& out);
  DriftEvaluation drift(const SpectralField& u);

  /// |A^{-gamma} F(u)| / (1 + |A^theta u|^2).
  double growth_ratio(const SpectralField& u);

 private:
  struct Slot {
    std::size_t direct = 0;  // half-complex offset of k (valid if has_direct)
    std::size_t mirror = 0;  // half-complex offset of -k (valid if has_mirror)
    bool has_direct = false;
    bool has_mirror = false;
  };

  void check(const SpectralField& f) const;
  // derivative_axis >= 0 applies d/dx_axis before scattering.
  void scatter(const SpectralField& f, int component, int derivative_axis, std::complex<double>* out) const;
  std::complex<double> gather(const std::complex<double>* in, std::size_t entry) const;
  void bilinear_ks(const SpectralField& u, const SpectralField& v, SpectralField& out);
  void bilinear_ns(const SpectralField& u, const SpectralField& v, SpectralField& out);

  SpectrumPtr spectrum_;
  std::unique_ptr<GridTransform> fft_;
  std::vector<Slot> slots_;
  std::vector<std::array<double, 3>> wave_;  // physical wavevector per entry
  std::vector<double> inverse_gamma_;        // lambda^{-gamma}
  std::vector<double> theta_weight_;         // lambda^{2 theta}
  double to_physical_ = 1.0;
  double to_spectral_ = 1.0;

  std::vector<FftwArray<double>> u_real_;
  std::vector<FftwArray<double>> v_real_;
  FftwArray<double> product_;
  FftwArray<std::complex<double>> work_;
};

/// KS bilinear term u v' (zero-mean part, dealiased).
SpectralField b_ks(const SpectralField& u, const SpectralField& v);
/// FracNS bilinear term P_L[(u . grad) v] (dealiased).
SpectralField b_ns(const SpectralField& u, const SpectralField& v);
DriftEvaluation drift(const SpectralField& u);
double growth_ratio(const SpectralField& u);

}  // namespace spdelab
