#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spdelab/spectral.hpp"

namespace spdelab {

struct Condition {
  std::string name;
  std::string inequality;
  bool passed = false;
  double margin = 0.0;  ///< signed distance to the boundary, >= 0 on the passing side
};

/// Partial sums of sum lambda^{2(theta+gamma)} / (2 mu) over the first n
/// terms in increasing-lambda order, and the decay exponent of the terms
/// (least squares of log term on log n over the last decade).
struct SeriesDiagnostics {
  double exponent = 0.0;  ///< 2 (theta + gamma)
  std::vector<std::size_t> cutoffs;
  std::vector<double> partial_sums;
  double tail_exponent = 0.0;
  bool convergent = false;  ///< tail_exponent < -1 - kSeriesMargin
};

inline constexpr double kSeriesMargin = 1e-3;

struct RegimeReport {
  std::string model;
  std::vector<Condition> conditions;
  std::optional<SeriesDiagnostics> series;
  std::vector<std::string> notes;

  bool passed() const;
  const Condition* find(const std::string& name) const;
};

/// Admissibility of (gamma, theta) for the KS growth bound.
RegimeReport check_ks(double gamma, double theta);

/// Admissibility of (alpha, gamma, theta) for FracNS in dimension d (1 only
/// for the Burgers note).
RegimeReport check_ns(double alpha, double gamma, double theta, int d);

/// KS: terms indexed by j = 1, 2, ...  FracNS: one term per (k, tangent)
/// of the d-dimensional torus, sorted by lambda.
SeriesDiagnostics series_tail(const ModelSpec& spec, double theta, double gamma,
                              std::vector<std::size_t> cutoffs = {100, 1000, 10000});
SeriesDiagnostics series_tail(const ModelSpec& spec);

/// check_ks / check_ns for the ModelSpec's parameters plus series_tail.
RegimeReport check_regime(const ModelSpec& spec);

void print_regime_table(std::ostream& os, const RegimeReport& report);

}  // namespace spdelab
