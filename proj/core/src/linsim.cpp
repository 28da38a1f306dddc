#include "spdelab/linsim.hpp"

#include <cmath>
#include <cstring>

#include "spdelab/error.hpp"
#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr std::size_t kChunk = 256;

// (1 - e^{-2x})/(2x) - ((1 - e^{-x})/x)^2, the conditional variance of I
// given dbeta divided by dt. Power series below x = 0.1 where the direct
// difference cancels.
double residual_factor(double x) {
  if (x < 0.1) {
    constexpr int kTerms = 24;
    long double e1[kTerms];
    long double e2[kTerms];
    long double fact = 1.0L;  // (n+1)!
    long double p1 = 1.0L;    // (-1)^n
    long double p2 = 1.0L;    // (-2)^n
    for (int n = 0; n < kTerms; ++n) {
      fact *= static_cast<long double>(n + 1);
      e1[n] = p1 / fact;
      e2[n] = p2 / fact;
      p1 = -p1;
      p2 *= -2.0L;
    }
    long double sum = 0.0L;
    long double xp = 1.0L;
    for (int n = 0; n < kTerms; ++n) {
      long double sq = 0.0L;
      for (int m = 0; m <= n; ++m) sq += e1[m] * e1[n - m];
      sum += (e2[n] - sq) * xp;
      xp *= static_cast<long double>(x);
    }
    return std::max(0.0, static_cast<double>(sum));
  }
  const double e1 = -std::expm1(-x) / x;
  const double e2 = -std::expm1(-2.0 * x) / (2.0 * x);
  return std::max(0.0, e2 - e1 * e1);
}

}  // namespace

IncrementLaw increment_law(double mu, double dt) {
  if (!(mu > 0.0)) throw SpecError("increment law needs mu > 0");
  if (!(dt > 0.0)) throw SpecError("increment law needs dt > 0");
  const double x = mu * dt;
  IncrementLaw law;
  law.var_beta = dt;
  law.var_conv = -std::expm1(-2.0 * x) / (2.0 * mu);
  law.cov = -std::expm1(-x) / mu;
  law.residual_var = dt * residual_factor(x);
  return law;
}

IncrementPair joint_increment(const IncrementLaw& law, RandomStream& stream) {
  IncrementPair p;
  p.dbeta = std::sqrt(law.var_beta) * stream.normal();
  p.conv = law.cov / law.var_beta * p.dbeta + std::sqrt(law.residual_var) * stream.normal();
  return p;
}

IncrementPair joint_increment(double mu, double dt, RandomStream& stream) {
  return joint_increment(increment_law(mu, dt), stream);
}

OuPropagator::OuPropagator(SpectrumPtr spectrum, double dt) : spectrum_(std::move(spectrum)), dt_(dt) {
  if (!(dt > 0.0)) throw SpecError("time step must be positive");
  const auto entries = spectrum_->entries();
  const std::size_t n = entries.size();
  laws_.resize(n);
  decay_.resize(n);
  phi_.resize(n);
  beta_scale_.resize(n);
  regression_.resize(n);
  residual_sd_.resize(n);
  sigma_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = entries[i].mu;
    laws_[i] = increment_law(mu, dt);
    decay_[i] = std::exp(-mu * dt);
    phi_[i] = laws_[i].cov;
    beta_scale_[i] = std::sqrt(dt);
    regression_[i] = laws_[i].cov / dt;
    residual_sd_[i] = std::sqrt(laws_[i].residual_var);
    sigma_[i] = entries[i].sigma;
  }
}

void OuPropagator::draw(RandomStream& stream, std::span<double> dbeta, std::span<double> conv) const {
  const std::size_t n = laws_.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t part = 0; part < 2; ++part) {
      const std::size_t d = 2 * i + part;
      const double b = beta_scale_[i] * stream.normal();
      dbeta[d] = b;
      conv[d] = regression_[i] * b + residual_sd_[i] * stream.normal();
    }
  }
}

void OuPropagator::advance(SpectralField& z, std::span<const double> conv) const {
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = sigma_[i] / kSqrt2;
    z[i] = decay_[i] * z[i] + std::complex<double>(s * conv[2 * i], -s * conv[2 * i + 1]);
  }
}

void OuPropagator::advance(SpectralField& u, const SpectralField& drift, std::span<const double> conv) const {
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double s = sigma_[i] / kSqrt2;
    u[i] = decay_[i] * u[i] - phi_[i] * drift[i] + std::complex<double>(s * conv[2 * i], -s * conv[2 * i + 1]);
  }
}

std::size_t step_count(double T, double dt) {
  if (!(dt > 0.0)) throw SpecError("time step must be positive");
  if (!(T > 0.0)) throw SpecError("horizon T must be positive");
  const double ratio = T / dt;
  const double steps = std::round(ratio);
  if (steps < 1.0 || std::abs(ratio - steps) > 1e-9 * std::max(1.0, ratio)) {
    throw SpecError("time step does not divide the horizon T");
  }
  return static_cast<std::size_t>(steps);
}

void coarsen_increments(const OperatorSpectrum& spectrum, double dt_fine, std::size_t factor,
                        std::span<const double> fine_dbeta, std::span<const double> fine_conv,
                        std::vector<double>& coarse_dbeta, std::vector<double>& coarse_conv) {
  const std::size_t ndof = spectrum.dof_count();
  if (factor == 0 || fine_dbeta.size() % (ndof * factor) != 0 || fine_conv.size() != fine_dbeta.size()) {
    throw SpecError("fine increments do not split into whole coarse steps");
  }
  const std::size_t coarse_steps = fine_dbeta.size() / (ndof * factor);
  coarse_dbeta.assign(coarse_steps * ndof, 0.0);
  coarse_conv.assign(coarse_steps * ndof, 0.0);
  const auto dofs = spectrum.dofs();
  for (std::size_t c = 0; c < coarse_steps; ++c) {
    for (std::size_t d = 0; d < ndof; ++d) {
      const double decay = std::exp(-dofs[d].mu * dt_fine);
      double b = 0.0;
      double conv = 0.0;
      for (std::size_t m = 0; m < factor; ++m) {
        const std::size_t f = (c * factor + m) * ndof + d;
        b += fine_dbeta[f];
        conv = decay * conv + fine_conv[f];
      }
      coarse_dbeta[c * ndof + d] = b;
      coarse_conv[c * ndof + d] = conv;
    }
  }
}

std::span<const double> PathRecord::brownian_step(std::size_t step) const {
  const std::size_t n = spectrum->dof_count();
  return std::span<const double>(brownian).subspan(step * n, n);
}

std::span<const double> PathRecord::convolution_step(std::size_t step) const {
  const std::size_t n = spectrum->dof_count();
  return std::span<const double>(convolution).subspan(step * n, n);
}

std::uint64_t PathRecord::increment_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const std::vector<double>& v) {
    for (double x : v) {
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &x, sizeof x);
      for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
      }
    }
  };
  feed(brownian);
  feed(convolution);
  return h;
}

SpectralField InitialCondition::draw(const SpectrumPtr& spectrum, RandomStream& stream) const {
  switch (kind) {
    case Kind::Zero:
      return SpectralField(spectrum);
    case Kind::Fixed:
      if (!field) throw SpecError("fixed initial condition without a field");
      if (!(field->spectrum().spec() == spectrum->spec())) throw SpecError("initial field has a different spectrum");
      return SpectralField(spectrum, std::vector<std::complex<double>>(field->coefficients().begin(),
                                                                       field->coefficients().end()));
    case Kind::Invariant:
      return sample_gaussian_field(spectrum, Covariance::scaled(scale), stream);
  }
  return SpectralField(spectrum);
}

PathRecord simulate_linear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                           std::uint64_t seed) {
  RandomStream stream(seed);
  auto record = simulate_linear(spectrum, x, T, dt, stream);
  record.seed = seed;
  return record;
}

PathRecord simulate_linear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                           RandomStream& stream) {
  if (!(x.spectrum().spec() == spectrum->spec())) throw SpecError("initial field has a different spectrum");
  const std::size_t steps = step_count(T, dt);
  const OuPropagator prop(spectrum, dt);
  const std::size_t ndof = spectrum->dof_count();

  PathRecord rec;
  rec.spectrum = spectrum;
  rec.kind = PathKind::Linear;
  rec.dt = dt;
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);
  rec.brownian.resize(steps * ndof);
  rec.convolution.resize(steps * ndof);

  SpectralField z(spectrum, std::vector<std::complex<double>>(x.coefficients().begin(), x.coefficients().end()));
  rec.times.push_back(0.0);
  rec.states.push_back(z);
  for (std::size_t s = 0; s < steps; ++s) {
    std::span<double> db(rec.brownian.data() + s * ndof, ndof);
    std::span<double> cv(rec.convolution.data() + s * ndof, ndof);
    prop.draw(stream, db, cv);
    prop.advance(z, cv);
    rec.times.push_back(static_cast<double>(s + 1) * dt);
    rec.states.push_back(z);
  }
  return rec;
}

std::vector<TransitionMoments> transition_moments(const SpectrumPtr& spectrum, const SpectralField& x, double t) {
  if (!(t >= 0.0)) throw SpecError("transition time must be non-negative");
  const auto dofs = spectrum->dofs();
  std::vector<TransitionMoments> out(dofs.size());
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    const auto& d = dofs[i];
    out[i].mean = std::exp(-d.mu * t) * x.dof(i);
    out[i].variance = d.sigma * d.sigma * (-std::expm1(-2.0 * d.mu * t)) / (2.0 * d.mu);
  }
  return out;
}

namespace {

// Runs one linear path and writes its terminal dofs into `out`.
void terminal_dofs(const SpectrumPtr& spectrum, const OuPropagator& prop, const InitialCondition& initial,
                   std::size_t steps, std::uint64_t seed, std::vector<double>& db, std::vector<double>& cv,
                   std::span<double> out) {
  RandomStream stream(seed);
  SpectralField z = initial.draw(spectrum, stream);
  for (std::size_t s = 0; s < steps; ++s) {
    prop.draw(stream, db, cv);
    prop.advance(z, cv);
  }
  for (std::size_t d = 0; d < out.size(); ++d) out[d] = z.dof(d);
}

}  // namespace

std::vector<stats::RunningMoments> linear_terminal_moments(const SpectrumPtr& spectrum,
                                                           const InitialCondition& initial, double T, double dt,
                                                           std::size_t paths, std::uint64_t master_seed,
                                                           unsigned threads) {
  const std::size_t steps = step_count(T, dt);
  const OuPropagator prop(spectrum, dt);
  const std::size_t ndof = spectrum->dof_count();
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  std::vector<std::vector<stats::RunningMoments>> partial(chunks, std::vector<stats::RunningMoments>(ndof));
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> db(ndof);
    std::vector<double> cv(ndof);
    std::vector<double> terminal(ndof);
    const std::size_t end = std::min(paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      terminal_dofs(spectrum, prop, initial, steps, stream_seed(master_seed, p), db, cv, terminal);
      for (std::size_t d = 0; d < ndof; ++d) partial[c][d].add(terminal[d]);
    }
  });
  std::vector<stats::RunningMoments> total(ndof);
  for (const auto& chunk : partial) {
    for (std::size_t d = 0; d < ndof; ++d) total[d].merge(chunk[d]);
  }
  return total;
}

std::vector<double> linear_terminal_samples(const SpectrumPtr& spectrum, const InitialCondition& initial, double T,
                                            double dt, std::size_t paths, std::uint64_t master_seed,
                                            unsigned threads) {
  const std::size_t steps = step_count(T, dt);
  const OuPropagator prop(spectrum, dt);
  const std::size_t ndof = spectrum->dof_count();
  std::vector<double> out(paths * ndof);
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    std::vector<double> db(ndof);
    std::vector<double> cv(ndof);
    const std::size_t end = std::min(paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      terminal_dofs(spectrum, prop, initial, steps, stream_seed(master_seed, p), db, cv,
                    std::span<double>(out).subspan(p * ndof, ndof));
    }
  });
  return out;
}

}  // namespace spdelab
