#include "spdelab/nonlinsim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "spdelab/error.hpp"
#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

constexpr std::size_t kChunk = 64;

class BlowUpGuard {
 public:
  BlowUpGuard(const SpectralField& x, double factor)
      : theta_(x.spectrum().spec().theta), limit_(factor * std::max(sobolev_norm(x, theta_), 1.0)) {}

  void check(double norm_theta, double time) const {
    if (!(norm_theta <= limit_)) {
      std::ostringstream os;
      os << "blow-up: |A^theta u| = " << norm_theta << " exceeds " << limit_ << " at t = " << time;
      throw BlowUpError(os.str(), time, norm_theta);
    }
  }
  void check(const SpectralField& u, double time) const { check(sobolev_norm(u, theta_), time); }

 private:
  double theta_;
  double limit_;
};

SpectralField copy_onto(const SpectrumPtr& spectrum, const SpectralField& x) {
  if (!(x.spectrum().spec() == spectrum->spec())) throw SpecError("initial field has a different spectrum");
  return SpectralField(spectrum, std::vector<std::complex<double>>(x.coefficients().begin(), x.coefficients().end()));
}

}  // namespace

SpectralField step_nonlinear(const SpectralField& state, const OuPropagator& propagator,
                             std::span<const double> conv, PseudospectralContext& context) {
  DriftEvaluation d = context.drift(state);
  SpectralField next = state;
  propagator.advance(next, d.F, conv);
  return next;
}

PathRecord simulate_nonlinear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                              std::uint64_t seed, const NonlinearOptions& options) {
  RandomStream stream(seed);
  auto rec = simulate_nonlinear(spectrum, x, T, dt, stream, options);
  rec.seed = seed;
  return rec;
}

PathRecord simulate_nonlinear(const SpectrumPtr& spectrum, const SpectralField& x, double T, double dt,
                              RandomStream& stream, const NonlinearOptions& options) {
  const std::size_t steps = step_count(T, dt);
  const std::size_t ndof = spectrum->dof_count();
  const OuPropagator prop(spectrum, dt);
  std::vector<double> dbeta(steps * ndof);
  std::vector<double> conv(steps * ndof);
  for (std::size_t s = 0; s < steps; ++s) {
    prop.draw(stream, std::span<double>(dbeta).subspan(s * ndof, ndof), std::span<double>(conv).subspan(s * ndof, ndof));
  }
  return replay_nonlinear(spectrum, x, dt, dbeta, conv, options);
}

PathRecord replay_nonlinear(const SpectrumPtr& spectrum, const SpectralField& x, double dt,
                            std::span<const double> dbeta, std::span<const double> conv,
                            const NonlinearOptions& options) {
  const std::size_t ndof = spectrum->dof_count();
  if (dbeta.size() != conv.size() || dbeta.size() % ndof != 0) throw SpecError("increment arrays are inconsistent");
  const std::size_t steps = dbeta.size() / ndof;
  const OuPropagator prop(spectrum, dt);
  PseudospectralContext ctx(spectrum);
  DriftEvaluation d(spectrum);

  PathRecord rec;
  rec.spectrum = spectrum;
  rec.kind = PathKind::Nonlinear;
  rec.dt = dt;
  rec.brownian.assign(dbeta.begin(), dbeta.end());
  rec.convolution.assign(conv.begin(), conv.end());
  rec.times.reserve(steps + 1);
  rec.states.reserve(steps + 1);

  SpectralField u = copy_onto(spectrum, x);
  const BlowUpGuard guard(u, options.blowup_factor);
  rec.times.push_back(0.0);
  rec.states.push_back(u);
  for (std::size_t s = 0; s < steps; ++s) {
    ctx.drift(u, d);
    guard.check(d.input_norm_theta, static_cast<double>(s) * dt);
    prop.advance(u, d.F, conv.subspan(s * ndof, ndof));
    rec.times.push_back(static_cast<double>(s + 1) * dt);
    rec.states.push_back(u);
  }
  guard.check(u, static_cast<double>(steps) * dt);
  return rec;
}

std::vector<double> nonlinear_terminal_samples(const SpectrumPtr& spectrum, const InitialCondition& initial,
                                               double T, double dt, std::size_t paths, std::uint64_t master_seed,
                                               unsigned threads, const NonlinearOptions& options) {
  const std::size_t steps = step_count(T, dt);
  const OuPropagator prop(spectrum, dt);
  const std::size_t ndof = spectrum->dof_count();
  std::vector<double> out(paths * ndof);
  const std::size_t chunks = (paths + kChunk - 1) / kChunk;
  parallel_for(chunks, threads, [&](std::size_t c) {
    PseudospectralContext ctx(spectrum);
    DriftEvaluation d(spectrum);
    std::vector<double> db(ndof);
    std::vector<double> cv(ndof);
    const std::size_t end = std::min(paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      RandomStream stream(stream_seed(master_seed, p));
      SpectralField u = initial.draw(spectrum, stream);
      const BlowUpGuard guard(u, options.blowup_factor);
      for (std::size_t s = 0; s < steps; ++s) {
        prop.draw(stream, db, cv);
        ctx.drift(u, d);
        guard.check(d.input_norm_theta, static_cast<double>(s) * dt);
        prop.advance(u, d.F, cv);
      }
      guard.check(u, T);
      for (std::size_t k = 0; k < ndof; ++k) out[p * ndof + k] = u.dof(k);
    }
  });
  return out;
}

double TwinPathResult::max_growth_ratio() const {
  double best = 0.0;
  for (std::size_t n = 0; n + 1 < times.size(); ++n) {
    if (divergence[n] <= 0.0 || divergence[n + 1] <= 0.0) continue;
    const double dt = times[n + 1] - times[n];
    const double rate = 2.0 * std::log(divergence[n + 1] / divergence[n]) / dt;
    const double weight = norm_a1[n] * norm_a1[n] + norm_a2[n] * norm_a2[n];
    if (weight > 0.0) best = std::max(best, rate / weight);
  }
  return best;
}

TwinPathResult twin_path_divergence(const SpectrumPtr& spectrum, const SpectralField& x1, const SpectralField& x2,
                                    double T, double dt, std::uint64_t seed, const NonlinearOptions& options) {
  const std::size_t steps = step_count(T, dt);
  const std::size_t ndof = spectrum->dof_count();
  const OuPropagator prop(spectrum, dt);
  PseudospectralContext ctx(spectrum);
  DriftEvaluation d1(spectrum);
  DriftEvaluation d2(spectrum);
  RandomStream stream(seed);
  std::vector<double> db(ndof);
  std::vector<double> cv(ndof);

  SpectralField u1 = copy_onto(spectrum, x1);
  SpectralField u2 = copy_onto(spectrum, x2);
  const BlowUpGuard guard1(u1, options.blowup_factor);
  const BlowUpGuard guard2(u2, options.blowup_factor);

  TwinPathResult out;
  double budget = 0.0;
  auto record = [&](double t) {
    const double a1 = sobolev_norm(u1, 1.0);
    const double a2 = sobolev_norm(u2, 1.0);
    out.times.push_back(t);
    out.divergence.push_back(sobolev_norm(u1 - u2, 1.0));
    out.budget.push_back(budget);
    out.norm_a1.push_back(a1);
    out.norm_a2.push_back(a2);
  };
  record(0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    prop.draw(stream, db, cv);
    ctx.drift(u1, d1);
    ctx.drift(u2, d2);
    const double t = static_cast<double>(s) * dt;
    guard1.check(d1.input_norm_theta, t);
    guard2.check(d2.input_norm_theta, t);
    budget += (out.norm_a1.back() * out.norm_a1.back() + out.norm_a2.back() * out.norm_a2.back()) * dt;
    prop.advance(u1, d1.F, cv);
    prop.advance(u2, d2.F, cv);
    record(static_cast<double>(s + 1) * dt);
  }
  return out;
}

}  // namespace spdelab
