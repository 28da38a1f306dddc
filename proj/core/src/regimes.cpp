#include "spdelab/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "spdelab/error.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// lhs < rhs
Condition strict_less(std::string name, const std::string& lhs_text, double lhs, const std::string& rhs_text,
                      double rhs) {
  const double margin = rhs - lhs;
  return {std::move(name), lhs_text + " < " + rhs_text + " (" + num(lhs) + " < " + num(rhs) + ")", margin > 0.0,
          margin};
}

// lhs <= rhs
Condition less_equal(std::string name, const std::string& lhs_text, double lhs, const std::string& rhs_text,
                     double rhs) {
  const double margin = rhs - lhs;
  return {std::move(name), lhs_text + " <= " + rhs_text + " (" + num(lhs) + " <= " + num(rhs) + ")", margin >= 0.0,
          margin};
}

constexpr double kPairingTolerance = 1e-12;

}  // namespace

bool RegimeReport::passed() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const auto& c) { return c.passed; });
}

const Condition* RegimeReport::find(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

RegimeReport check_ks(double gamma, double theta) {
  RegimeReport r;
  r.model = "ks";
  if (gamma < 0.0) {
    r.conditions.push_back(less_equal("theta-lower", "1/2 - gamma", 0.5 - gamma, "theta", theta));
  } else if (gamma <= 0.25) {
    r.conditions.push_back(less_equal("theta-lower", "5/8 - gamma", 0.625 - gamma, "theta", theta));
  } else if (gamma < 0.75) {
    r.conditions.push_back(less_equal("theta-lower", "3/8 - gamma/2", 0.375 - 0.5 * gamma, "theta", theta));
  }
  r.conditions.push_back(strict_less("theta-upper", "theta", theta, "3/4 - gamma", 0.75 - gamma));
  r.conditions.push_back(strict_less("gamma-bound", "gamma", gamma, "3/4", 0.75));
  r.conditions.push_back(strict_less("theta-plus-gamma", "theta + gamma", theta + gamma, "3/4", 0.75));
  if (gamma >= 0.75) r.notes.push_back("no admissible theta exists for gamma >= 3/4");
  if (theta == 0.0) {
    r.notes.push_back(
        "case theta=0 is not included: the growth bound needs theta > 0, and for gamma < 3/4 every branch "
        "requires a strictly positive lower bound on theta");
  }
  return r;
}

RegimeReport check_ns(double alpha, double gamma, double theta, int d) {
  if (d < 1 || d > 3) throw SpecError("dimension must be 1, 2 or 3");
  RegimeReport r;
  r.model = "ns";
  const double half_d = 0.5 * d;
  r.conditions.push_back(strict_less("conv-z", "d/2", half_d, "alpha - 2(theta + gamma)", alpha - 2.0 * (theta + gamma)));
  if (theta == 0.0) {
    r.conditions.push_back(
        strict_less("theta0-gamma", "1/2 + d/4", 0.5 + 0.25 * d, "gamma", gamma));
    r.conditions.push_back(strict_less("theta0-alpha", "1 + d", 1.0 + d, "alpha", alpha));
    r.notes.push_back("theta=0: the quadratic term is bounded with gamma = 1/2 + d/4 + eps, which needs alpha > 1 + d");
  } else {
    r.conditions.push_back(less_equal("theta-at-least-1", "1", 1.0, "theta", theta));
    const double pairing = -gamma - (theta - 0.5);
    Condition c{"pairing", "-gamma = theta - 1/2 (" + num(-gamma) + " = " + num(theta - 0.5) + ")",
                std::abs(pairing) <= kPairingTolerance, -std::abs(pairing)};
    if (c.passed) c.margin = 0.0;
    r.conditions.push_back(std::move(c));
    r.conditions.push_back(strict_less("alpha-lower", "d/2 + 1", half_d + 1.0, "alpha", alpha));
  }
  if (alpha == 1.0) r.notes.push_back("alpha = 1 is not allowed: the classical Navier-Stokes case is excluded");
  if (d == 1) {
    r.notes.push_back(std::string("d=1 corresponds to the stochastic Burgers equation, covered when alpha > 3/2 (") +
                      (alpha > 1.5 ? "holds" : "does not hold") + "); no Burgers simulator is provided");
  }
  return r;
}

SeriesDiagnostics series_tail(const ModelSpec& spec, double theta, double gamma, std::vector<std::size_t> cutoffs) {
  if (cutoffs.empty()) throw SpecError("series cutoffs must not be empty");
  std::sort(cutoffs.begin(), cutoffs.end());
  const std::size_t n = cutoffs.back();
  if (n < 20) throw SpecError("largest series cutoff must be at least 20");
  const double p = 2.0 * (theta + gamma);
  std::vector<double> terms;
  terms.reserve(n);
  if (spec.kind == ModelKind::KuramotoSivashinsky) {
    const double base = 2.0 * std::numbers::pi / spec.length;
    for (std::size_t j = 1; j <= n; ++j) {
      const double lambda = std::pow(base * static_cast<double>(j), 2);
      const double mu = spec.nu * lambda * lambda - lambda + spec.a;
      if (!(mu > 0.0)) throw SpecError("series term " + std::to_string(j) + " has mu <= 0");
      terms.push_back(std::pow(lambda, p) / (2.0 * mu));
    }
  } else {
    const int d = spec.dim;
    const double tangents = d - 1;
    // smallest ball holding n terms, with some slack
    const double ball = d == 2 ? std::numbers::pi : 4.0 * std::numbers::pi / 3.0;
    int radius = static_cast<int>(std::ceil(std::pow(2.0 * static_cast<double>(n) / (tangents * ball), 1.0 / d))) + 2;
    std::vector<long> lambdas;
    for (;;) {
      lambdas.clear();
      const long r2 = static_cast<long>(radius) * radius;
      for (int k1 = -radius; k1 <= radius; ++k1) {
        for (int k2 = -radius; k2 <= radius; ++k2) {
          for (int k3 = (d == 3 ? -radius : 0); k3 <= (d == 3 ? radius : 0); ++k3) {
            const int first = k1 != 0 ? k1 : (k2 != 0 ? k2 : k3);
            if (first <= 0) continue;
            const long l = static_cast<long>(k1) * k1 + static_cast<long>(k2) * k2 + static_cast<long>(k3) * k3;
            if (l > r2) continue;
            for (int t = 0; t < d - 1; ++t) lambdas.push_back(l);
          }
        }
      }
      if (lambdas.size() >= n) break;
      radius += 2;
    }
    std::sort(lambdas.begin(), lambdas.end());
    for (std::size_t i = 0; i < n; ++i) {
      const double lambda = static_cast<double>(lambdas[i]);
      const double mu = spec.nu * std::pow(lambda, spec.alpha);
      terms.push_back(std::pow(lambda, p) / (2.0 * mu));
    }
  }

  SeriesDiagnostics s;
  s.exponent = p;
  s.cutoffs = cutoffs;
  for (const auto c : cutoffs) s.partial_sums.push_back(stats::pairwise_sum(std::span<const double>(terms).first(c)));
  const std::size_t lo = n / 10;
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t i = lo; i <= n; ++i) {
    x.push_back(std::log(static_cast<double>(i)));
    y.push_back(std::log(terms[i - 1]));
  }
  s.tail_exponent = stats::ols_slope(x, y);
  s.convergent = s.tail_exponent < -1.0 - kSeriesMargin;
  return s;
}

SeriesDiagnostics series_tail(const ModelSpec& spec) { return series_tail(spec, spec.theta, spec.gamma); }

RegimeReport check_regime(const ModelSpec& spec) {
  RegimeReport r = spec.kind == ModelKind::KuramotoSivashinsky ? check_ks(spec.gamma, spec.theta)
                                                               : check_ns(spec.alpha, spec.gamma, spec.theta, spec.dim);
  r.series = series_tail(spec);
  return r;
}

void print_regime_table(std::ostream& os, const RegimeReport& report) {
  os << "model: " << report.model << "\n";
  std::size_t width = 9;
  for (const auto& c : report.conditions) width = std::max(width, c.name.size());
  for (const auto& c : report.conditions) {
    os << "  " << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << (c.passed ? "pass" : "FAIL")
       << "  margin " << std::setw(12) << num(c.margin) << "  " << c.inequality << "\n";
  }
  if (report.series) {
    const auto& s = *report.series;
    os << "  series sum lambda^" << num(s.exponent) << " / (2 mu):";
    for (std::size_t i = 0; i < s.cutoffs.size(); ++i) os << "  S(" << s.cutoffs[i] << ") = " << num(s.partial_sums[i]);
    os << "\n  tail exponent " << num(s.tail_exponent) << " -> " << (s.convergent ? "convergent" : "divergent") << "\n";
  }
  for (const auto& n : report.notes) os << "  note: " << n << "\n";
  os << "overall: " << (report.passed() ? "admissible" : "not admissible") << "\n";
}

}  // namespace spdelab
