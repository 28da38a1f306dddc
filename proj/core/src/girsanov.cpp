#include "spdelab/girsanov.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "spdelab/error.hpp"
#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

constexpr std::size_t kChunk = 64;

int max_abs_component(const std::array<int, 3>& k) {
  return std::max({std::abs(k[0]), std::abs(k[1]), std::abs(k[2])});
}

void require_noise(const OperatorSpectrum& spectrum) {
  if (!spectrum.spec().noise_enabled) throw SpecError("Girsanov weights need the noise to be enabled");
}

std::vector<double> column(std::span<const PathWeight> w, double PathWeight::*field) {
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i].*field;
  return out;
}

double truncated_fraction(std::span<const PathWeight> w) {
  if (w.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& p : w) n += p.truncated ? 1 : 0;
  return static_cast<double>(n) / static_cast<double>(w.size());
}

void ess_warning(std::vector<std::string>& warnings, double ess, std::size_t paths) {
  if (ess < 0.01 * static_cast<double>(paths)) {
    std::ostringstream os;
    os << "weight collapse: ESS " << ess << " is below 1% of " << paths << " paths";
    warnings.push_back(os.str());
  }
}

}  // namespace

GirsanovLedger::GirsanovLedger(GirsanovDirection direction, double truncation)
    : direction_(direction), N_(truncation) {
  if (std::isnan(truncation) || truncation < 0.0) throw SpecError("truncation level must be >= 0");
}

void GirsanovLedger::accumulate(const DriftEvaluation& drift, std::span<const double> dbeta, double dt) {
  const auto& f = drift.scaled;
  if (dbeta.size() != f.spectrum().dof_count()) throw SpecError("increment size does not match the spectrum");
  double dot = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < dbeta.size(); ++k) {
    const double fk = f.dof(k);
    dot += fk * dbeta[k];
    sq += fk * fk;
  }
  if (!std::isfinite(dot) || !std::isfinite(sq)) {
    std::ostringstream os;
    os << "non-finite Girsanov integrand at step " << steps_;
    throw NumericalError(os.str());
  }
  Q_ += sq * dt;
  if (active_ && !(Q_ <= N_)) active_ = false;
  if (active_) {
    S_ += dot;
    D_ += sq * dt;
  }
  ++steps_;
}

double GirsanovLedger::density() const { return std::exp(exponent()); }

double Observable::operator()(const SpectralField& u) const {
  switch (kind) {
    case Kind::Constant:
      return 1.0;
    case Kind::ModeFirstMoment:
      return u.dof(dof);
    case Kind::ModeSecondMoment: {
      const double v = u.dof(dof);
      return v * v;
    }
    case Kind::SobolevEnergy: {
      const auto entries = u.spectrum().entries();
      double sum = 0.0;
      for (std::size_t i = 0; i < entries.size(); ++i) {
        if (cutoff > 0 && max_abs_component(entries[i].k) > cutoff) continue;
        sum += 2.0 * std::pow(entries[i].lambda, 2.0 * theta) * std::norm(u[i]);
      }
      return sum;
    }
  }
  return 0.0;
}

double Observable::invariant_mean(const OperatorSpectrum& spectrum) const {
  switch (kind) {
    case Kind::Constant:
      return 1.0;
    case Kind::ModeFirstMoment:
      return 0.0;
    case Kind::ModeSecondMoment:
      return spectrum.dofs()[dof].stationary_variance();
    case Kind::SobolevEnergy: {
      std::vector<double> terms;
      for (const auto& d : spectrum.dofs()) {
        if (cutoff > 0 && max_abs_component(spectrum.entries()[d.entry].k) > cutoff) continue;
        terms.push_back(std::pow(d.lambda, 2.0 * theta) * d.stationary_variance());
      }
      return stats::pairwise_sum(terms);
    }
  }
  return 0.0;
}

std::string Observable::describe(const OperatorSpectrum& spectrum) const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Constant:
      os << "constant";
      break;
    case Kind::ModeFirstMoment:
      os << "mode1:" << spectrum.dofs()[dof].label;
      break;
    case Kind::ModeSecondMoment:
      os << "mode2:" << spectrum.dofs()[dof].label;
      break;
    case Kind::SobolevEnergy:
      os << "energy:" << format_number(theta);
      if (cutoff > 0) os << ':' << cutoff;
      break;
  }
  return os.str();
}

Observable observable_from_string(const std::string& text, const OperatorSpectrum& spectrum) {
  auto find_dof = [&](const std::string& key) -> std::size_t {
    const auto dofs = spectrum.dofs();
    for (std::size_t i = 0; i < dofs.size(); ++i) {
      if (dofs[i].label == key) return i;
    }
    std::size_t pos = 0;
    unsigned long long idx = 0;
    try {
      idx = std::stoull(key, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != key.size() || pos == 0 || idx >= dofs.size()) throw SpecError("unknown mode '" + key + "'");
    return static_cast<std::size_t>(idx);
  };
  if (text == "constant") return Observable::constant();
  if (text.rfind("mode1:", 0) == 0) return Observable::mode_first(find_dof(text.substr(6)));
  if (text.rfind("mode2:", 0) == 0) return Observable::mode_second(find_dof(text.substr(6)));
  if (text.rfind("energy:", 0) == 0) {
    const std::string rest = text.substr(7);
    const auto colon = rest.find(':');
    try {
      const double theta = std::stod(rest.substr(0, colon));
      const int cutoff = colon == std::string::npos ? 0 : std::stoi(rest.substr(colon + 1));
      if (cutoff < 0) throw SpecError("energy cutoff must be >= 0");
      return Observable::sobolev_energy(theta, cutoff);
    } catch (const std::invalid_argument&) {
      throw SpecError("malformed observable '" + text + "'");
    }
  }
  throw SpecError("unknown observable '" + text + "' (constant, mode1:<mode>, mode2:<mode>, energy:<theta>[:cutoff])");
}

std::vector<PathWeight> forward_weights(const SpectrumPtr& spectrum, const GirsanovRun& run, const Observable& phi) {
  require_noise(*spectrum);
  const std::size_t steps = step_count(run.T, run.dt);
  const OuPropagator prop(spectrum, run.dt);
  const std::size_t ndof = spectrum->dof_count();
  std::vector<PathWeight> out(run.paths);
  const std::size_t chunks = (run.paths + kChunk - 1) / kChunk;
  parallel_for(chunks, run.threads, [&](std::size_t c) {
    PseudospectralContext ctx(spectrum);
    DriftEvaluation d(spectrum);
    std::vector<double> db(ndof);
    std::vector<double> cv(ndof);
    const std::size_t end = std::min(run.paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      RandomStream stream(stream_seed(run.seed, p));
      SpectralField z = run.initial.draw(spectrum, stream);
      GirsanovLedger ledger(GirsanovDirection::Forward, run.truncation);
      for (std::size_t s = 0; s < steps; ++s) {
        prop.draw(stream, db, cv);
        ctx.drift(z, d);
        ledger.accumulate(d, db, run.dt);
        prop.advance(z, cv);
      }
      out[p] = {p, ledger.exponent(), ledger.density(), ledger.Q(), ledger.truncated(), phi(z)};
    }
  });
  return out;
}

std::vector<PathWeight> reverse_weights(const SpectrumPtr& spectrum, const GirsanovRun& run, const Observable& phi) {
  require_noise(*spectrum);
  const std::size_t steps = step_count(run.T, run.dt);
  const OuPropagator prop(spectrum, run.dt);
  const std::size_t ndof = spectrum->dof_count();
  const NonlinearOptions guard_options;
  std::vector<PathWeight> out(run.paths);
  const std::size_t chunks = (run.paths + kChunk - 1) / kChunk;
  parallel_for(chunks, run.threads, [&](std::size_t c) {
    PseudospectralContext ctx(spectrum);
    DriftEvaluation d(spectrum);
    std::vector<double> db(ndof);
    std::vector<double> cv(ndof);
    const std::size_t end = std::min(run.paths, (c + 1) * kChunk);
    for (std::size_t p = c * kChunk; p < end; ++p) {
      RandomStream stream(stream_seed(run.seed, p));
      SpectralField u = run.initial.draw(spectrum, stream);
      const double limit = guard_options.blowup_factor * std::max(sobolev_norm(u, spectrum->spec().theta), 1.0);
      GirsanovLedger ledger(GirsanovDirection::Reverse, run.truncation);
      for (std::size_t s = 0; s < steps; ++s) {
        prop.draw(stream, db, cv);
        ctx.drift(u, d);
        if (!(d.input_norm_theta <= limit)) {
          const double t = static_cast<double>(s) * run.dt;
          throw BlowUpError("blow-up in reverse-weight path", t, d.input_norm_theta);
        }
        ledger.accumulate(d, db, run.dt);
        prop.advance(u, d.F, cv);
      }
      out[p] = {p, ledger.exponent(), ledger.density(), ledger.Q(), ledger.truncated(), phi(u)};
    }
  });
  return out;
}

namespace {

GirsanovLedger ledger_along(const PathRecord& path, GirsanovDirection direction, double truncation) {
  require_noise(*path.spectrum);
  const std::size_t ndof = path.spectrum->dof_count();
  if (path.brownian.size() != path.steps() * ndof) throw SpecError("path record has no recorded increments");
  PseudospectralContext ctx(path.spectrum);
  DriftEvaluation d(path.spectrum);
  GirsanovLedger ledger(direction, truncation);
  for (std::size_t s = 0; s < path.steps(); ++s) {
    ctx.drift(path.states[s], d);
    ledger.accumulate(d, path.brownian_step(s), path.dt);
  }
  return ledger;
}

}  // namespace

GirsanovLedger reverse_density(const PathRecord& path, double truncation) {
  if (path.kind != PathKind::Nonlinear) throw SpecError("reverse density needs a nonlinear path");
  return ledger_along(path, GirsanovDirection::Reverse, truncation);
}

GirsanovLedger forward_density(const PathRecord& path, double truncation) {
  if (path.kind != PathKind::Linear) throw SpecError("forward density needs a linear path");
  return ledger_along(path, GirsanovDirection::Forward, truncation);
}

NormalizationResult summarize_normalization(std::span<const PathWeight> weights) {
  NormalizationResult r;
  r.paths = weights.size();
  const auto rho = column(weights, &PathWeight::density);
  const auto m = stats::moments(rho);
  r.mean = m.mean;
  r.standard_error = m.standard_error();
  r.ess = stats::effective_sample_size(rho);
  r.truncation_frequency = truncated_fraction(weights);
  const auto v = stats::moments(column(weights, &PathWeight::V));
  r.exponent_mean = v.mean;
  r.exponent_variance = v.variance;
  ess_warning(r.warnings, r.ess, r.paths);
  return r;
}

NormalizationResult normalization_check(const SpectrumPtr& spectrum, const GirsanovRun& run) {
  return summarize_normalization(forward_weights(spectrum, run));
}

NormalizationResult reverse_normalization_check(const SpectrumPtr& spectrum, const GirsanovRun& run) {
  return summarize_normalization(reverse_weights(spectrum, run));
}

double pilot_truncation_level(const SpectrumPtr& spectrum, GirsanovRun run, std::size_t pilot_paths, double q) {
  run.paths = pilot_paths;
  run.truncation = std::numeric_limits<double>::infinity();
  const auto w = forward_weights(spectrum, run);
  return stats::quantile(column(w, &PathWeight::Q), q);
}

ImportanceResult summarize_importance(std::span<const PathWeight> weights) {
  ImportanceResult r;
  r.paths = weights.size();
  if (weights.empty()) return r;
  const auto rho = column(weights, &PathWeight::density);
  std::vector<double> prod(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) prod[i] = weights[i].phi * weights[i].density;
  const auto mp = stats::moments(prod);
  r.unnormalized = mp.mean;
  r.unnormalized_se = mp.standard_error();
  const double total = stats::pairwise_sum(rho);
  r.mean_weight = total / static_cast<double>(weights.size());
  r.self_normalized = stats::pairwise_sum(prod) / total;
  std::vector<double> dev(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double e = weights[i].density * (weights[i].phi - r.self_normalized);
    dev[i] = e * e;
  }
  r.self_normalized_se = std::sqrt(stats::pairwise_sum(dev)) / total;
  r.ess = stats::effective_sample_size(rho);
  r.truncation_frequency = truncated_fraction(weights);
  ess_warning(r.warnings, r.ess, r.paths);
  return r;
}

ImportanceResult importance_estimate(const SpectrumPtr& spectrum, const Observable& phi, const GirsanovRun& run) {
  return summarize_importance(forward_weights(spectrum, run, phi));
}

stats::Moments direct_nonlinear_estimate(const SpectrumPtr& spectrum, const Observable& phi, const GirsanovRun& run) {
  const auto samples = nonlinear_terminal_samples(spectrum, run.initial, run.T, run.dt, run.paths, run.seed,
                                                  run.threads);
  const std::size_t ndof = spectrum->dof_count();
  std::vector<double> values(run.paths);
  for (std::size_t p = 0; p < run.paths; ++p) {
    const auto u = SpectralField::from_dofs(spectrum, std::span<const double>(samples).subspan(p * ndof, ndof));
    values[p] = phi(u);
  }
  return stats::moments(values);
}

void write_girsanov_csv(std::ostream& os, std::span<const PathWeight> weights) {
  os << "path_id,V,density,Q_T,truncated_flag\n";
  for (const auto& w : weights) {
    os << w.path_id << ',' << format_number(w.V) << ',' << format_number(w.density) << ',' << format_number(w.Q)
       << ',' << (w.truncated ? 1 : 0) << '\n';
  }
}

}  // namespace spdelab
