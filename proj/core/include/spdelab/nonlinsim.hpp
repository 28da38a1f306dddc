#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spdelab/linsim.hpp"
#include "spdelab/operators.hpp"

namespace spdelab {

struct NonlinearOptions {
  /// Abort when |A^theta u| exceeds this multiple of max(|A^theta x|, 1).
  double blowup_factor = 1e6;
};

/// One exponential-Euler (ETD1) step with exact stochastic convolution:
/// u' = e^{-mu dt} u - ((1 - e^{-mu dt}) / mu) F(u) + sigma I, drift frozen at
/// the left endpoint. `conv` holds the step's I per dof.
SpectralField step_nonlinear(const SpectralField& state, const OuPropagator& propagator,
                             std::span<const double> conv, PseudospectralContext& context);

/// Nonlinear path driven by exactly the increments simulate_linear draws for
/// the same seed.
PathRecord simulate_nonlinear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                              std::uint64_t seed, const NonlinearOptions& options = {});
PathRecord simulate_nonlinear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                              RandomStream& stream, const NonlinearOptions& options = {});

/// Nonlinear path driven by prescribed step-major increments.
PathRecord replay_nonlinear(const SpectrumPtr& spectrum, const SpectralField& x, double dt,
                            std::span<const double> dbeta, std::span<const double> conv,
                            const NonlinearOptions& options = {});

/// Terminal dof values of M nonlinear paths, row-major (path, dof). Path i
/// uses stream_seed(master_seed, i), like linear_terminal_samples.
std::vector<double> nonlinear_terminal_samples(const SpectrumPtr& spectrum, const InitialCondition& initial,
                                               double T, double dt, std::size_t paths, std::uint64_t master_seed,
                                               unsigned threads = 0, const NonlinearOptions& options = {});

/// Two nonlinear paths from x1 and x2 under one noise realization.
struct TwinPathResult {
  std::vector<double> times;
  std::vector<double> divergence;  ///< |A(u1 - u2)(t)|_H
  std::vector<double> budget;      ///< int_0^t (|A u1|^2 + |A u2|^2) ds, left-endpoint rule
  std::vector<double> norm_a1;     ///< |A u1(t)|_H
  std::vector<double> norm_a2;     ///< |A u2(t)|_H

  /// Largest per-step ratio d/dt log|AU|^2 / (|A u1|^2 + |A u2|^2); the
  /// smallest constant C for which the differential Gronwall inequality
  /// holds along this path (0 if the divergence never grows).
  double max_growth_ratio() const;
};

TwinPathResult twin_path_divergence(const SpectrumPtr& spectrum, const SpectralField& x1, const SpectralField& x2,
                                    double T, double dt, std::uint64_t seed, const NonlinearOptions& options = {});

}  // namespace spdelab
