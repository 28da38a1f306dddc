#include "spdelab/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "spdelab/error.hpp"
#include "spdelab/parallel.hpp"

namespace spdelab {

namespace {

std::vector<double> dof_column(std::span<const double> samples, std::size_t ndof, std::size_t k) {
  const std::size_t m = samples.size() / ndof;
  std::vector<double> col(m);
  for (std::size_t i = 0; i < m; ++i) col[i] = samples[i * ndof + k];
  return col;
}

MixingReport one_sample_mixing(const OperatorSpectrum& spectrum, std::span<const double> samples, double t,
                               double level) {
  const std::size_t ndof = spectrum.dof_count();
  MixingReport r;
  r.time = t;
  r.level = level;
  r.samples = samples.size() / ndof;
  const double crit = stats::ks_critical_value(r.samples, level / static_cast<double>(ndof));
  for (std::size_t k = 0; k < ndof; ++k) {
    const auto& d = spectrum.dofs()[k];
    const auto col = dof_column(samples, ndof, k);
    const double stat = stats::ks_statistic_normal(col, 0.0, d.stationary_variance());
    r.modes.push_back({d.label, stat, crit, stat <= crit});
  }
  return r;
}

}  // namespace

std::size_t StationaryReport::flagged_count() const {
  return static_cast<std::size_t>(std::count_if(modes.begin(), modes.end(), [](const auto& m) { return m.flagged; }));
}

StationaryReport stationary_stats(const OperatorSpectrum& spectrum, std::span<const double> samples,
                                  std::string method) {
  const std::size_t ndof = spectrum.dof_count();
  if (samples.size() % ndof != 0) throw SpecError("sample matrix does not match the spectrum");
  const std::size_t m = samples.size() / ndof;
  if (m < 1000) throw SpecError("stationary statistics need at least 1000 samples");
  StationaryReport r;
  r.method = std::move(method);
  r.samples = m;
  const double crit = stats::ks_critical_value(m, 0.01);
  const double rel_se = std::sqrt(2.0 / static_cast<double>(m - 1));
  for (std::size_t k = 0; k < ndof; ++k) {
    const auto& d = spectrum.dofs()[k];
    const auto col = dof_column(samples, ndof, k);
    const auto mom = stats::moments(col);
    ModeStatistic s;
    s.label = d.label;
    s.var_theory = d.stationary_variance();
    s.var_empirical = mom.variance;
    s.mean_empirical = mom.mean;
    s.z_score = (mom.variance - s.var_theory) / (s.var_theory * rel_se);
    s.ks_statistic = stats::ks_statistic_normal(col, 0.0, s.var_theory);
    s.ks_critical = crit;
    s.flagged = std::abs(s.z_score) > 4.0;
    r.modes.push_back(std::move(s));
  }
  return r;
}

StationaryReport stationary_stats_exact(const SpectrumPtr& spectrum, std::size_t samples, std::uint64_t seed,
                                        unsigned threads) {
  const std::size_t ndof = spectrum->dof_count();
  std::vector<double> data(samples * ndof);
  parallel_for(samples, threads, [&](std::size_t i) {
    const auto f = sample_gaussian_field(spectrum, Covariance::invariant(), stream_seed(seed, i));
    for (std::size_t k = 0; k < ndof; ++k) data[i * ndof + k] = f.dof(k);
  });
  return stationary_stats(*spectrum, data, "exact-sampler");
}

StationaryReport stationary_stats_path(const SpectrumPtr& spectrum, std::size_t samples, std::uint64_t seed,
                                       double spacing, std::size_t substeps) {
  if (!(spacing > 0.0) || substeps == 0) throw SpecError("spacing and substeps must be positive");
  const std::size_t ndof = spectrum->dof_count();
  const double interval = spacing / spectrum->min_mu();
  const OuPropagator prop(spectrum, interval / static_cast<double>(substeps));
  RandomStream stream(seed);
  SpectralField z(spectrum);
  std::vector<double> db(ndof);
  std::vector<double> cv(ndof);
  auto advance_interval = [&] {
    for (std::size_t s = 0; s < substeps; ++s) {
      prop.draw(stream, db, cv);
      prop.advance(z, cv);
    }
  };
  advance_interval();  // burn-in
  std::vector<double> data(samples * ndof);
  for (std::size_t i = 0; i < samples; ++i) {
    advance_interval();
    for (std::size_t k = 0; k < ndof; ++k) data[i * ndof + k] = z.dof(k);
  }
  return stationary_stats(*spectrum, data, "long-path");
}

void write_ergodics_csv(std::ostream& os, const StationaryReport& report) {
  os << "mode_label,var_theory,var_empirical,z_score,ks_statistic,ks_critical\n";
  for (const auto& m : report.modes) {
    os << m.label << ',' << format_number(m.var_theory) << ',' << format_number(m.var_empirical) << ','
       << format_number(m.z_score) << ',' << format_number(m.ks_statistic) << ',' << format_number(m.ks_critical)
       << '\n';
  }
}

double ErgodicAverage::late_relative_change() const {
  if (running.size() < 3) return 0.0;
  const double last = running.back();
  const double mid = running[(running.size() - 1) / 2];
  return std::abs(last - mid) / std::abs(last);
}

ErgodicAverage ergodic_average(const PathRecord& path, const Observable& phi) {
  ErgodicAverage r;
  if (path.states.empty()) throw SpecError("empty path");
  r.times = path.times;
  r.running.resize(path.states.size());
  double prev = phi(path.states[0]);
  double integral = 0.0;
  r.running[0] = prev;
  for (std::size_t n = 1; n < path.states.size(); ++n) {
    const double cur = phi(path.states[n]);
    integral += 0.5 * (prev + cur) * (path.times[n] - path.times[n - 1]);
    r.running[n] = integral / (path.times[n] - path.times[0]);
    prev = cur;
  }
  if (path.kind == PathKind::Linear) {
    r.reference = phi.invariant_mean(*path.spectrum);
    r.has_reference = true;
  }
  return r;
}

double ou_square_average_sd(double mu, double variance, double T) {
  // Cov(z_s^2, z_t^2) = 2 v^2 e^{-2 mu |t - s|}
  const double x = 2.0 * mu * T;
  const double inner = T / (2.0 * mu) - (-std::expm1(-x)) / (4.0 * mu * mu);
  return std::sqrt(4.0 * variance * variance * inner) / T;
}

bool MixingReport::all_below() const {
  return std::all_of(modes.begin(), modes.end(), [](const auto& m) { return m.below; });
}

double MixingReport::max_excess() const {
  double best = 0.0;
  for (const auto& m : modes) best = std::max(best, m.statistic / m.critical);
  return best;
}

MixingReport mixing_test(const SpectrumPtr& spectrum, const SpectralField& x, double t, std::size_t samples,
                         std::uint64_t seed, unsigned threads, double level, std::size_t steps) {
  if (steps == 0) throw SpecError("steps must be positive");
  const double dt = t / static_cast<double>(steps);
  const auto data =
      linear_terminal_samples(spectrum, InitialCondition::fixed(x), dt * static_cast<double>(steps), dt, samples,
                              seed, threads);
  return one_sample_mixing(*spectrum, data, t, level);
}

MixingReport mixing_test_stationary(const SpectrumPtr& spectrum, std::size_t samples, std::uint64_t seed,
                                    double level) {
  const std::size_t ndof = spectrum->dof_count();
  std::vector<double> data(samples * ndof);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto f = sample_gaussian_field(spectrum, Covariance::invariant(), stream_seed(seed, i));
    for (std::size_t k = 0; k < ndof; ++k) data[i * ndof + k] = f.dof(k);
  }
  return one_sample_mixing(*spectrum, data, std::numeric_limits<double>::infinity(), level);
}

MixingReport nonlinear_mixing_test(const SpectrumPtr& spectrum, const SpectralField& x1, const SpectralField& x2,
                                   double t, double dt, std::size_t samples, std::uint64_t seed, unsigned threads,
                                   double level) {
  const std::size_t ndof = spectrum->dof_count();
  const auto a = nonlinear_terminal_samples(spectrum, InitialCondition::fixed(x1), t, dt, samples, mix64(seed ^ 1),
                                            threads);
  const auto b = nonlinear_terminal_samples(spectrum, InitialCondition::fixed(x2), t, dt, samples, mix64(seed ^ 2),
                                            threads);
  MixingReport r;
  r.time = t;
  r.level = level;
  r.samples = samples;
  const double crit = stats::ks_critical_value_two_sample(samples, samples, level / static_cast<double>(ndof));
  for (std::size_t k = 0; k < ndof; ++k) {
    const auto ca = dof_column(a, ndof, k);
    const auto cb = dof_column(b, ndof, k);
    const double stat = stats::ks_statistic_two_sample(ca, cb);
    r.modes.push_back({spectrum->dofs()[k].label, stat, crit, stat <= crit});
  }
  return r;
}

}  // namespace spdelab
