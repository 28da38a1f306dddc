#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "spdelab/random.hpp"
#include "spdelab/spectral.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

/// Exact joint law of (dbeta, I) over one step of length dt for a mode with
/// drift rate mu, where I = int_0^dt e^{-mu (dt - s)} dbeta(s):
///   Var(dbeta) = dt, Var(I) = (1 - e^{-2 mu dt}) / (2 mu), Cov = (1 - e^{-mu dt}) / mu.
struct IncrementLaw {
  double var_beta = 0.0;
  double var_conv = 0.0;
  double cov = 0.0;
  /// Var(I | dbeta) = Var(I) - Cov^2 / dt, evaluated without cancellation.
  double residual_var = 0.0;
};

IncrementLaw increment_law(double mu, double dt);

struct IncrementPair {
  double dbeta = 0.0;
  double conv = 0.0;
};

/// Draws dbeta = sqrt(dt) g1, I = (Cov / dt) dbeta + sqrt(residual) g2.
IncrementPair joint_increment(double mu, double dt, RandomStream& stream);
IncrementPair joint_increment(const IncrementLaw& law, RandomStream& stream);

/// Exact one-step propagator of the linear part for a fixed step.
///
/// Per real dof with rate mu and noise scale sigma:
///   linear:  z' = e^{-mu dt} z + sigma I
///   ETD1:    u' = e^{-mu dt} u - ((1 - e^{-mu dt}) / mu) F(u) + sigma I
/// Increments are drawn dof by dof in spectrum order, dbeta before I.
class OuPropagator {
 public:
  OuPropagator(SpectrumPtr spectrum, double dt);

  const SpectrumPtr& spectrum() const noexcept { return spectrum_; }
  double dt() const noexcept { return dt_; }
  std::size_t dof_count() const noexcept { return spectrum_->dof_count(); }

  void draw(RandomStream& stream, std::span<double> dbeta, std::span<double> conv) const;
  void advance(SpectralField& z, std::span<const double> conv) const;
  void advance(SpectralField& u, const SpectralField& drift, std::span<const double> conv) const;

 private:
  SpectrumPtr spectrum_;
  double dt_;
  std::vector<IncrementLaw> laws_;     // per entry
  std::vector<double> decay_;          // e^{-mu dt}
  std::vector<double> phi_;            // (1 - e^{-mu dt}) / mu
  std::vector<double> beta_scale_;     // sqrt(dt)
  std::vector<double> regression_;     // cov / dt
  std::vector<double> residual_sd_;
  std::vector<double> sigma_;
};

/// Number of uniform steps of size dt in [0, T]; throws unless dt divides T.
std::size_t step_count(double T, double dt);

/// Splits a path's increments over `factor` consecutive fine steps of length
/// dt_fine into increments of the coarse step factor * dt_fine:
///   dbeta_c = sum dbeta_m,  I_c = sum_m e^{-mu dt_fine (factor - 1 - m)} I_m.
void coarsen_increments(const OperatorSpectrum& spectrum, double dt_fine, std::size_t factor,
                        std::span<const double> fine_dbeta, std::span<const double> fine_conv,
                        std::vector<double>& coarse_dbeta, std::vector<double>& coarse_conv);

enum class PathKind { Linear, Nonlinear };

/// A discretized trajectory and the increments that drove it. Increments are
/// stored step-major: index step * dof_count + dof.
struct PathRecord {
  SpectrumPtr spectrum;
  PathKind kind = PathKind::Linear;
  std::uint64_t seed = 0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::vector<double> brownian;
  std::vector<double> convolution;

  std::size_t steps() const noexcept { return times.empty() ? 0 : times.size() - 1; }
  std::span<const double> brownian_step(std::size_t step) const;
  std::span<const double> convolution_step(std::size_t step) const;
  /// FNV-1a over the raw bytes of both increment arrays.
  std::uint64_t increment_hash() const;
};

/// Starting state of each path in an ensemble. Invariant draws consume
/// normals from the path's own stream before any increment.
struct InitialCondition {
  enum class Kind { Zero, Fixed, Invariant };
  Kind kind = Kind::Zero;
  std::optional<SpectralField> field;
  double scale = 1.0;

  static InitialCondition zero() { return {}; }
  static InitialCondition fixed(SpectralField x) { return {Kind::Fixed, std::move(x), 1.0}; }
  static InitialCondition invariant(double scale = 1.0) { return {Kind::Invariant, std::nullopt, scale}; }

  SpectralField draw(const SpectrumPtr& spectrum, RandomStream& stream) const;
};

/// Exact OU path on the uniform grid; deterministic in seed.
PathRecord simulate_linear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                           std::uint64_t seed);
/// Continues an existing stream (the record's seed field is left 0).
PathRecord simulate_linear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                           RandomStream& stream);

struct TransitionMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Per-dof law of z(t) started at x: N(e^{-mu t} x, sigma^2 (1 - e^{-2 mu t}) / (2 mu)).
std::vector<TransitionMoments> transition_moments(const SpectrumPtr& spectrum, const SpectralField& x, double t);

/// Per-dof mean/variance of z(T) over M independent linear paths. Path i
/// uses stream_seed(master_seed, i); reduction is in fixed chunk order.
std::vector<stats::RunningMoments> linear_terminal_moments(const SpectrumPtr& spectrum,
                                                           const InitialCondition& initial, double T, double dt,
                                                           std::size_t paths, std::uint64_t master_seed,
                                                           unsigned threads = 0);

/// Terminal dof values of M linear paths, row-major (path, dof).
std::vector<double> linear_terminal_samples(const SpectrumPtr& spectrum, const InitialCondition& initial, double T,
                                            double dt, std::size_t paths, std::uint64_t master_seed,
                                            unsigned threads = 0);

}  // namespace spdelab
