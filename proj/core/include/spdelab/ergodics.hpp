#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spdelab/girsanov.hpp"
#include "spdelab/linsim.hpp"

namespace spdelab {

struct ModeStatistic {
  std::string label;
  double var_theory = 0.0;
  double var_empirical = 0.0;
  double mean_empirical = 0.0;
  double z_score = 0.0;  ///< (var_empirical - var_theory) / (var_theory sqrt(2 / (M - 1)))
  double ks_statistic = 0.0;
  double ks_critical = 0.0;
  bool flagged = false;  ///< |z_score| > 4
};

struct StationaryReport {
  std::string method;
  std::size_t samples = 0;
  std::vector<ModeStatistic> modes;

  std::size_t flagged_count() const;
};

/// Per-dof comparison of samples (row-major, sample x dof) with the
/// invariant Gaussian marginals. KS critical values are at level 0.01.
/// Throws SpecError below 10^3 samples.
StationaryReport stationary_stats(const OperatorSpectrum& spectrum, std::span<const double> samples,
                                  std::string method = "samples");

/// i.i.d. draws from sample_gaussian_field.
StationaryReport stationary_stats_exact(const SpectrumPtr& spectrum, std::size_t samples, std::uint64_t seed,
                                        unsigned threads = 0);

/// One long linear path from 0: burn-in of `spacing` relaxation times of the
/// slowest mode, then one sample every `spacing` relaxation times. Each
/// interval is covered by `substeps` exact OU steps.
StationaryReport stationary_stats_path(const SpectrumPtr& spectrum, std::size_t samples, std::uint64_t seed,
                                       double spacing = 10.0, std::size_t substeps = 8);

void write_ergodics_csv(std::ostream& os, const StationaryReport& report);

struct ErgodicAverage {
  std::vector<double> times;
  std::vector<double> running;  ///< (1/t) int_0^t phi, trapezoidal; running[0] = phi(path(0))
  double reference = 0.0;       ///< invariant mean (linear paths only)
  bool has_reference = false;

  double final_value() const { return running.back(); }
  /// |avg(T) - avg(T/2)| / |avg(T)|.
  double late_relative_change() const;
};

ErgodicAverage ergodic_average(const PathRecord& path, const Observable& phi);

/// Standard deviation of (1/T) int_0^T z(t)^2 dt for a stationary scalar OU
/// process with rate mu and variance v.
double ou_square_average_sd(double mu, double variance, double T);

struct MixingMode {
  std::string label;
  double statistic = 0.0;
  double critical = 0.0;
  bool below = true;
};

/// Per-dof Kolmogorov-Smirnov distances. Critical values use level / ndof
/// per mode so that `level` bounds the family-wise false rejection rate.
struct MixingReport {
  double time = 0.0;
  double level = 0.01;
  std::size_t samples = 0;
  std::vector<MixingMode> modes;

  bool all_below() const;
  double max_excess() const;  ///< largest statistic / critical
};

/// Linear terminal marginals from fixed x at time t (exact transition,
/// `steps` OU steps) against the invariant marginals.
MixingReport mixing_test(const SpectrumPtr& spectrum, const SpectralField& x, double t, std::size_t samples,
                         std::uint64_t seed, unsigned threads = 0, double level = 0.01, std::size_t steps = 1);

/// Same statistics for exact invariant draws (the t = infinity case).
MixingReport mixing_test_stationary(const SpectrumPtr& spectrum, std::size_t samples, std::uint64_t seed,
                                    double level = 0.01);

/// Two-sample distances between nonlinear terminal marginals from x1 and x2
/// at time t (independent noise, seeds derived from `seed`).
MixingReport nonlinear_mixing_test(const SpectrumPtr& spectrum, const SpectralField& x1, const SpectralField& x2,
                                   double t, double dt, std::size_t samples, std::uint64_t seed,
                                   unsigned threads = 0, double level = 0.01);

}  // namespace spdelab
