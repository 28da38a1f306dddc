#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace spdelab {

class RandomStream;

enum class ModelKind { KuramotoSivashinsky, FractionalNavierStokes };

/// Parameters of one equation.
///
/// KS:     du + [nu A^2 u - A u + B(u,u)] dt = A^gamma dw on (-L/2, L/2), split as
///         L = nu A^2 - A + a (linear part) and F(u) = B(u,u) - a u.
/// FracNS: du + [nu A^alpha u + B(u,u)] dt = A^gamma dw on the 2*pi torus in d = 2, 3,
///         with L = nu A^alpha and F(u) = B(u,u).
///
/// `cutoff` is the largest retained |j| (KS) or |k|_inf (FracNS).
struct ModelSpec {
  ModelKind kind = ModelKind::KuramotoSivashinsky;
  double nu = 1.0;
  double a = 2.0;
  double gamma = 0.0;
  double theta = 0.7;
  double alpha = 1.0;
  int dim = 1;
  double length = 2.0 * std::numbers::pi;
  int cutoff = 32;
  int growth_exponent = 2;

  // Test switches: F = 0 and sigma = 0 respectively when false.
  bool drift_enabled = true;
  bool noise_enabled = true;

  /// Desk-scale KS preset: J = 32, nu = 1, a = 2, gamma = 0, theta = 0.7.
  static ModelSpec kuramoto_sivashinsky();
  /// Desk-scale FracNS preset: nu = 1, alpha = 3, gamma = -1/2, theta = 1,
  /// K = 8 (d = 2) or K = 4 (d = 3).
  static ModelSpec fractional_navier_stokes(int dim = 2);

  /// Throws SpecError on violated invariants (per-mode drift rates are
  /// checked by build_spectrum).
  void validate() const;

  /// Domain volume: L for KS, (2 pi)^d for FracNS.
  double volume() const noexcept;

  /// Stable 64-bit FNV-1a hash of the canonical text form.
  std::uint64_t hash() const;
  std::string canonical() const;

  bool operator==(const ModelSpec&) const = default;
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// One stored complex coefficient: a wavevector in the stored half-spectrum
/// and, for FracNS, one unit tangent direction orthogonal to it.
struct SpectralEntry {
  std::array<int, 3> k{};
  int tangent = 0;
  std::array<double, 3> direction{1.0, 0.0, 0.0};
  double lambda = 0.0;  ///< eigenvalue of A
  double mu = 0.0;      ///< drift rate of the linear part
  double sigma = 0.0;   ///< noise scale lambda^gamma (0 when noise is disabled)
  std::string label;
};

/// One real degree of freedom (cosine or sine part of an entry) in the
/// orthonormal real basis sqrt(2/V) e_t cos(k.x), sqrt(2/V) e_t sin(k.x).
struct DegreeOfFreedom {
  std::size_t entry = 0;
  int part = 0;  ///< 0 = cosine, 1 = sine
  double lambda = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  std::string label;

  /// sigma^2 / (2 mu), the variance under the invariant Gaussian measure.
  double stationary_variance() const noexcept { return sigma * sigma / (2.0 * mu); }
};

/// Mode table of the linear operator for one ModelSpec.
///
/// Entry ordering is fixed: KS by j = 1..J; FracNS lexicographic over the
/// stored half-spectrum (first nonzero component positive), then tangent
/// index. Each entry contributes two dofs, cosine first.
class OperatorSpectrum {
 public:
  const ModelSpec& spec() const noexcept { return spec_; }
  std::span<const SpectralEntry> entries() const noexcept { return entries_; }
  std::span<const DegreeOfFreedom> dofs() const noexcept { return dofs_; }
  std::size_t entry_count() const noexcept { return entries_.size(); }
  std::size_t dof_count() const noexcept { return dofs_.size(); }
  double min_mu() const noexcept { return min_mu_; }
  double max_mu() const noexcept { return max_mu_; }
  /// Pseudospectral grid points per dimension.
  int grid_size() const noexcept { return grid_size_; }
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  friend std::shared_ptr<const OperatorSpectrum> build_spectrum(const ModelSpec& spec);
  ModelSpec spec_;
  std::vector<SpectralEntry> entries_;
  std::vector<DegreeOfFreedom> dofs_;
  double min_mu_ = 0.0;
  double max_mu_ = 0.0;
  int grid_size_ = 0;
  std::vector<std::string> warnings_;
};

using SpectrumPtr = std::shared_ptr<const OperatorSpectrum>;

/// Builds the mode table; throws SpecError naming the first mode with mu <= 0.
SpectrumPtr build_spectrum(const ModelSpec& spec);

/// Truncated Fourier representation of a real, zero-mean (and for FracNS
/// divergence-free) field. Only the half-spectrum is stored; the coefficient
/// at -k is the conjugate of the one at k. Coefficients are orthonormal:
/// u(x) = V^{-1/2} sum_k c_k e^{i k.x}, so |u|_{L^2}^2 = 2 sum_half |c_k|^2.
class SpectralField {
 public:
  explicit SpectralField(SpectrumPtr spectrum);
  SpectralField(SpectrumPtr spectrum, std::vector<std::complex<double>> coefficients);

  const OperatorSpectrum& spectrum() const noexcept { return *spectrum_; }
  const SpectrumPtr& spectrum_ptr() const noexcept { return spectrum_; }
  std::size_t size() const noexcept { return coefficients_.size(); }

  std::span<std::complex<double>> coefficients() noexcept { return coefficients_; }
  std::span<const std::complex<double>> coefficients() const noexcept { return coefficients_; }
  std::complex<double>& operator[](std::size_t i) noexcept { return coefficients_[i]; }
  const std::complex<double>& operator[](std::size_t i) const noexcept { return coefficients_[i]; }

  /// Real orthonormal coordinate: sqrt(2) Re c (cosine) or -sqrt(2) Im c (sine).
  double dof(std::size_t index) const noexcept;
  void set_dof(std::size_t index, double value) noexcept;
  std::vector<double> dofs() const;
  static SpectralField from_dofs(SpectrumPtr spectrum, std::span<const double> values);

  /// Same spectrum object or an identical ModelSpec.
  bool compatible(const SpectralField& other) const noexcept;

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double s) noexcept;
  friend SpectralField operator+(SpectralField lhs, const SpectralField& rhs) { return lhs += rhs; }
  friend SpectralField operator-(SpectralField lhs, const SpectralField& rhs) { return lhs -= rhs; }
  friend SpectralField operator*(double s, SpectralField f) { return f *= s; }

 private:
  SpectrumPtr spectrum_;
  std::vector<std::complex<double>> coefficients_;
};

/// Multiplies every coefficient by lambda^s.
SpectralField apply_power(const SpectralField& v, double s);

/// |A^theta v|_H under the plain-integral L^2 inner product.
double sobolev_norm(const SpectralField& v, double theta);

/// Real L^2 inner product over the domain.
double inner_product(const SpectralField& u, const SpectralField& v);

/// Covariance of sample_gaussian_field: the invariant measure of the linear
/// equation, optionally with every variance multiplied by `scale`.
struct Covariance {
  double scale = 1.0;
  static Covariance invariant() noexcept { return {}; }
  static Covariance scaled(double beta) noexcept { return {beta}; }
};

/// Independent N(0, scale * sigma^2 / (2 mu)) per real dof, drawn in dof order.
SpectralField sample_gaussian_field(const SpectrumPtr& spectrum, Covariance covariance, std::uint64_t seed);
SpectralField sample_gaussian_field(const SpectrumPtr& spectrum, Covariance covariance, RandomStream& stream);

/// KS field A cos(2 pi j xi / L) + B sin(2 pi j xi / L).
SpectralField ks_trig_field(const SpectrumPtr& spectrum, int j, double cos_amplitude, double sin_amplitude);
/// Physical cosine / sine amplitude of KS index j.
double ks_cosine_amplitude(const SpectralField& u, int j);
double ks_sine_amplitude(const SpectralField& u, int j);

/// Index of the entry with wavevector k (half-spectrum or its mirror) and
/// tangent t; the bool is true when k is the mirror and the stored
/// coefficient must be conjugated.
std::pair<std::size_t, bool> find_entry(const OperatorSpectrum& spectrum, const std::array<int, 3>& k, int tangent = 0);

/// Velocity value at a physical point by direct summation over modes
/// (KS fields use component 0).
std::array<double, 3> evaluate(const SpectralField& u, const std::array<double, 3>& point);

/// Galerkin projection of a physical field sampled on the pseudospectral
/// grid (KS: component 0 of the callable). For FracNS the result is the
/// Leray-projected field.
SpectralField project_physical(const SpectrumPtr& spectrum,
                               const std::function<std::array<double, 3>(const std::array<double, 3>&)>& field);

/// mode_label, lambda, mu, sigma, stationary_variance; 17 significant digits.
void write_spectrum_csv(std::ostream& os, const OperatorSpectrum& spectrum);

/// "%.17g" with a '.' decimal separator regardless of locale.
std::string format_number(double value);

}  // namespace spdelab
