#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spdelab/linsim.hpp"
#include "spdelab/nonlinsim.hpp"
#include "spdelab/operators.hpp"

namespace spdelab {

/// Forward weights turn linear paths into the nonlinear law; reverse
/// weights turn nonlinear paths into the linear law.
enum class GirsanovDirection { Forward, Reverse };

/// Running truncated Girsanov exponent of one path.
///
/// With f = A^{-gamma} F evaluated at the left endpoint of each step:
///   Q += |f|^2 dt                      (never truncated)
///   active = active && Q <= N          (after the update, so D <= N)
///   if active: S += f . dbeta, D += |f|^2 dt
///   V = -S - D/2  (forward),  V = +S - D/2  (reverse).
///
/// The step's f is known at its left endpoint, so the cutoff is still a
/// stopping-time indicator. The forward sign makes e^V the density of the
/// exponential-Euler nonlinear law against the linear one, step by step.
class GirsanovLedger {
 public:
  explicit GirsanovLedger(GirsanovDirection direction = GirsanovDirection::Forward,
                          double truncation = std::numeric_limits<double>::infinity());

  /// Throws NumericalError on a non-finite drift.
  void accumulate(const DriftEvaluation& drift, std::span<const double> dbeta, double dt);

  GirsanovDirection direction() const noexcept { return direction_; }
  double sign() const noexcept { return direction_ == GirsanovDirection::Forward ? -1.0 : 1.0; }
  double S() const noexcept { return S_; }
  double D() const noexcept { return D_; }
  double Q() const noexcept { return Q_; }
  double N() const noexcept { return N_; }
  bool active() const noexcept { return active_; }
  bool truncated() const noexcept { return !active_; }
  std::size_t steps() const noexcept { return steps_; }
  double exponent() const noexcept { return sign() * S_ - 0.5 * D_; }
  double density() const;

 private:
  GirsanovDirection direction_;
  double N_;
  double S_ = 0.0;
  double D_ = 0.0;
  double Q_ = 0.0;
  bool active_ = true;
  std::size_t steps_ = 0;
};

/// Observables supported by the weighted estimators.
struct Observable {
  enum class Kind { Constant, ModeFirstMoment, ModeSecondMoment, SobolevEnergy };
  Kind kind = Kind::Constant;
  std::size_t dof = 0;  ///< for the mode moments
  double theta = 0.0;   ///< for SobolevEnergy
  int cutoff = 0;       ///< SobolevEnergy keeps modes with max |k_i| <= cutoff; 0 keeps all

  static Observable constant() { return {}; }
  static Observable mode_first(std::size_t dof) { return {Kind::ModeFirstMoment, dof, 0.0, 0}; }
  static Observable mode_second(std::size_t dof) { return {Kind::ModeSecondMoment, dof, 0.0, 0}; }
  static Observable sobolev_energy(double theta, int cutoff = 0) { return {Kind::SobolevEnergy, 0, theta, cutoff}; }

  double operator()(const SpectralField& u) const;
  /// Mean under the invariant Gaussian measure of the linear equation.
  double invariant_mean(const OperatorSpectrum& spectrum) const;
  std::string describe(const OperatorSpectrum& spectrum) const;
};

Observable observable_from_string(const std::string& text, const OperatorSpectrum& spectrum);

struct PathWeight {
  std::uint64_t path_id = 0;
  double V = 0.0;
  double density = 1.0;
  double Q = 0.0;
  bool truncated = false;
  double phi = 0.0;
};

/// Shared inputs of the ensemble experiments.
struct GirsanovRun {
  InitialCondition initial = InitialCondition::zero();
  double T = 0.25;
  double dt = 1.0 / 512.0;
  std::size_t paths = 10000;
  double truncation = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

/// Linear paths (path i on stream_seed(seed, i)) with forward ledgers and
/// phi evaluated at the terminal state.
std::vector<PathWeight> forward_weights(const SpectrumPtr& spectrum, const GirsanovRun& run,
                                        const Observable& phi = Observable::constant());

/// Nonlinear paths driven like forward_weights' linear paths, with reverse
/// ledgers. Paths that blow up propagate BlowUpError.
std::vector<PathWeight> reverse_weights(const SpectrumPtr& spectrum, const GirsanovRun& run,
                                        const Observable& phi = Observable::constant());

/// Reverse ledger along a recorded nonlinear path.
GirsanovLedger reverse_density(const PathRecord& path,
                               double truncation = std::numeric_limits<double>::infinity());
/// Forward ledger along a recorded linear path.
GirsanovLedger forward_density(const PathRecord& path,
                               double truncation = std::numeric_limits<double>::infinity());

struct NormalizationResult {
  double mean = 0.0;
  double standard_error = 0.0;
  double ess = 0.0;
  double truncation_frequency = 0.0;
  double exponent_mean = 0.0;
  double exponent_variance = 0.0;
  std::size_t paths = 0;
  std::vector<std::string> warnings;
};

NormalizationResult summarize_normalization(std::span<const PathWeight> weights);
NormalizationResult normalization_check(const SpectrumPtr& spectrum, const GirsanovRun& run);
/// Mean of the reverse density over nonlinear paths.
NormalizationResult reverse_normalization_check(const SpectrumPtr& spectrum, const GirsanovRun& run);

/// Empirical q-quantile of the untruncated Q_T over a pilot ensemble.
double pilot_truncation_level(const SpectrumPtr& spectrum, GirsanovRun run, std::size_t pilot_paths = 1000,
                              double q = 0.99);

struct ImportanceResult {
  double unnormalized = 0.0;  ///< mean(phi rho)
  double unnormalized_se = 0.0;
  double self_normalized = 0.0;  ///< sum(phi rho) / sum(rho)
  double self_normalized_se = 0.0;  ///< delta method
  double mean_weight = 0.0;
  double ess = 0.0;
  double truncation_frequency = 0.0;
  std::size_t paths = 0;
  std::vector<std::string> warnings;
};

ImportanceResult summarize_importance(std::span<const PathWeight> weights);
ImportanceResult importance_estimate(const SpectrumPtr& spectrum, const Observable& phi, const GirsanovRun& run);

/// Plain Monte Carlo of phi(u(T)) over nonlinear paths (independent check
/// for importance_estimate).
stats::Moments direct_nonlinear_estimate(const SpectrumPtr& spectrum, const Observable& phi, const GirsanovRun& run);

/// path_id, V, density, Q_T, truncated_flag.
void write_girsanov_csv(std::ostream& os, std::span<const PathWeight> weights);

}  // namespace spdelab
