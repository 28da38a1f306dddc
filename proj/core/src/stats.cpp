#include "spdelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spdelab::stats {

double pairwise_sum(std::span<const double> values) {
  constexpr std::size_t kLeaf = 32;
  if (values.size() <= kLeaf) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double Moments::standard_error() const {
  return count > 0 ? std::sqrt(variance / static_cast<double>(count)) : 0.0;
}

double Moments::variance_standard_error() const {
  if (count < 2) return 0.0;
  const double n = static_cast<double>(count);
  const double v = variance;
  // Var(s^2) = (mu4 - (n-3)/(n-1) sigma^4) / n
  const double var_s2 = (fourth_central - (n - 3.0) / (n - 1.0) * v * v) / n;
  return std::sqrt(std::max(var_s2, 0.0));
}

Moments moments(std::span<const double> values) {
  Moments m;
  m.count = values.size();
  if (values.empty()) return m;
  const double n = static_cast<double>(values.size());
  m.mean = pairwise_sum(values) / n;
  std::vector<double> sq(values.size());
  std::vector<double> quart(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - m.mean;
    sq[i] = d * d;
    quart[i] = sq[i] * sq[i];
  }
  const double ss = pairwise_sum(sq);
  m.variance = values.size() > 1 ? ss / (n - 1.0) : 0.0;
  m.fourth_central = pairwise_sum(quart) / n;
  return m;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

double normal_cdf(double x) noexcept {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

double kolmogorov_survival(double t) noexcept {
  if (t <= 0.0) return 1.0;
  if (t < 0.2) return 1.0;  // series converges slowly here; value is 1 to double precision
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_statistic_normal(std::span<const double> samples, double mean, double variance) {
  if (samples.empty()) return 0.0;
  if (!(variance > 0.0)) throw std::invalid_argument("reference variance must be positive");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  const double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - mean) / sd);
    const double i_d = static_cast<double>(i);
    d = std::max({d, (i_d + 1.0) / n - f, f - i_d / n});
  }
  return d;
}

double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {

// Solves kolmogorov_survival(t) = level by bisection.
double kolmogorov_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("significance level outside (0, 1)");
  double lo = 0.2;
  double hi = 10.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (kolmogorov_survival(mid) > level) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double ks_critical_value(std::size_t n, double level) {
  if (n == 0) throw std::invalid_argument("critical value needs at least one sample");
  const double sn = std::sqrt(static_cast<double>(n));
  return kolmogorov_quantile(level) / (sn + 0.12 + 0.11 / sn);
}

double ks_critical_value_two_sample(std::size_t n, std::size_t m, double level) {
  if (n == 0 || m == 0) throw std::invalid_argument("critical value needs non-empty samples");
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  return kolmogorov_quantile(level) * std::sqrt((nn + mm) / (nn * mm));
}

double effective_sample_size(std::span<const double> weights) {
  std::vector<double> sq(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) sq[i] = weights[i] * weights[i];
  const double s = pairwise_sum(weights);
  const double s2 = pairwise_sum(sq);
  return s2 > 0.0 ? s * s / s2 : 0.0;
}

double ols_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_slope needs matching samples of size >= 2");
  const double n = static_cast<double>(x.size());
  const double mx = pairwise_sum(x) / n;
  const double my = pairwise_sum(y) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace spdelab::stats
