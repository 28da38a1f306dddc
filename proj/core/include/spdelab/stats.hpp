#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spdelab::stats {

/// Fixed-order pairwise summation. The split points depend only on the
/// length, so the result is reproducible for a given input order.
double pairwise_sum(std::span<const double> values);

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased
  double fourth_central = 0.0;

  double standard_error() const;
  /// Standard error of the unbiased variance estimate from the sample's own
  /// fourth central moment.
  double variance_standard_error() const;
};

/// Streaming mean/variance with an order-fixed merge (Chan et al.), used for
/// ensemble reductions that must not depend on thread scheduling.
struct RunningMoments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) noexcept {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const RunningMoments& other) noexcept {
    if (other.count == 0.0) return;
    if (count == 0.0) {
      *this = other;
      return;
    }
    const double n = count + other.count;
    const double d = other.mean - mean;
    mean += d * other.count / n;
    m2 += other.m2 + d * d * count * other.count / n;
    count = n;
  }
  double variance() const noexcept { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
};

/// Two-pass moments with pairwise accumulation.
Moments moments(std::span<const double> values);

/// Empirical q-quantile by linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

double normal_cdf(double x) noexcept;

/// Kolmogorov limiting survival function Q(t) = 2 sum_k (-1)^{k-1} exp(-2 k^2 t^2).
double kolmogorov_survival(double t) noexcept;

/// Largest deviation between the empirical CDF of `samples` and the
/// N(mean, variance) CDF.
double ks_statistic_normal(std::span<const double> samples, double mean, double variance);

/// Two-sample Kolmogorov-Smirnov statistic.
double ks_statistic_two_sample(std::span<const double> a, std::span<const double> b);

/// One-sample critical value at significance `level`, using the Stephens
/// finite-sample correction sqrt(n) + 0.12 + 0.11/sqrt(n).
double ks_critical_value(std::size_t n, double level);

/// Two-sample critical value at significance `level` (asymptotic).
double ks_critical_value_two_sample(std::size_t n, std::size_t m, double level);

/// Effective sample size (sum w)^2 / sum w^2 of importance weights.
double effective_sample_size(std::span<const double> weights);

/// Ordinary least-squares slope of y on x.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace spdelab::stats
