#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "spdelab/error.hpp"
#include "spdelab/regimes.hpp"

using namespace spdelab;

namespace {

bool has_note(const RegimeReport& r, const std::string& text) {
  for (const auto& n : r.notes)
    if (n.find(text) != std::string::npos) return true;
  return false;
}

bool passes(const RegimeReport& r, const std::string& name) {
  const auto* c = r.find(name);
  EXPECT_NE(c, nullptr) << name;
  return c && c->passed;
}

ModelSpec ns_spec(int d, double alpha) {
  auto s = ModelSpec::fractional_navier_stokes(d);
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST(CheckKs, Examples) {
  const auto a = check_ks(0.0, 0.7);
  EXPECT_TRUE(a.passed());
  EXPECT_NEAR(a.find("theta-lower")->margin, 0.075, 1e-15);

  const auto b = check_ks(0.0, 0.0);
  EXPECT_FALSE(b.passed());
  EXPECT_TRUE(has_note(b, "case theta=0 is not included"));

  const auto c = check_ks(0.5, 0.2);
  EXPECT_TRUE(c.passed());
  EXPECT_NEAR(c.find("theta-lower")->margin, 0.2 - 0.125, 1e-15);
  EXPECT_NEAR(c.find("theta-upper")->margin, 0.05, 1e-15);

  EXPECT_TRUE(check_ks(-0.25, 0.8).passed());
  EXPECT_FALSE(check_ks(-0.25, 0.7).passed());
  const auto d = check_ks(0.8, 0.1);
  EXPECT_FALSE(d.passed());
  EXPECT_EQ(d.find("theta-lower"), nullptr);
  EXPECT_TRUE(has_note(d, "no admissible theta"));
}

TEST(CheckKs, BoundaryFlips) {
  constexpr double e = 1e-9;
  // theta-lower, one boundary per gamma branch (inclusive)
  EXPECT_TRUE(passes(check_ks(-0.1, 0.6 + e), "theta-lower"));
  EXPECT_FALSE(passes(check_ks(-0.1, 0.6 - e), "theta-lower"));
  EXPECT_TRUE(passes(check_ks(0.1, 0.525 + e), "theta-lower"));
  EXPECT_FALSE(passes(check_ks(0.1, 0.525 - e), "theta-lower"));
  EXPECT_TRUE(passes(check_ks(0.5, 0.125 + e), "theta-lower"));
  EXPECT_FALSE(passes(check_ks(0.5, 0.125 - e), "theta-lower"));
  // strict upper bounds
  EXPECT_TRUE(passes(check_ks(0.1, 0.65 - e), "theta-upper"));
  EXPECT_FALSE(passes(check_ks(0.1, 0.65 + e), "theta-upper"));
  EXPECT_TRUE(passes(check_ks(0.75 - e, 0.0), "gamma-bound"));
  EXPECT_FALSE(passes(check_ks(0.75 + e, 0.0), "gamma-bound"));
  EXPECT_TRUE(passes(check_ks(0.2, 0.55 - e), "theta-plus-gamma"));
  EXPECT_FALSE(passes(check_ks(0.2, 0.55 + e), "theta-plus-gamma"));
  // exact boundary of a strict condition fails
  EXPECT_FALSE(passes(check_ks(0.0, 0.75), "theta-plus-gamma"));
}

TEST(CheckNs, Examples) {
  const auto a = check_ns(3.0, -0.5, 1.0, 2);
  EXPECT_TRUE(a.passed());
  EXPECT_DOUBLE_EQ(a.find("conv-z")->margin, 1.0);
  EXPECT_DOUBLE_EQ(a.find("alpha-lower")->margin, 1.0);

  const auto b = check_ns(1.0, -0.5, 1.0, 3);
  EXPECT_FALSE(b.passed());
  EXPECT_TRUE(has_note(b, "alpha = 1 is not allowed"));

  const auto c = check_ns(3.5, 1.0 + 1e-3, 0.0, 2);
  EXPECT_TRUE(passes(c, "theta0-alpha"));
  EXPECT_TRUE(c.passed());
  EXPECT_FALSE(passes(check_ns(2.5, 1.0 + 1e-3, 0.0, 2), "theta0-alpha"));

  EXPECT_FALSE(passes(check_ns(3.0, -0.4, 1.0, 2), "pairing"));
  EXPECT_TRUE(has_note(check_ns(2.0, 0.0, 1.0, 1), "Burgers"));
  EXPECT_THROW(check_ns(3.0, -0.5, 1.0, 4), SpecError);
}

TEST(CheckNs, BoundaryFlips) {
  constexpr double e = 1e-9;
  // conv-z: 1 < alpha - 2(theta + gamma) with theta + gamma = 1/2, d = 2
  EXPECT_TRUE(passes(check_ns(2.0 + e, -0.5, 1.0, 2), "conv-z"));
  EXPECT_FALSE(passes(check_ns(2.0 - e, -0.5, 1.0, 2), "conv-z"));
  EXPECT_TRUE(passes(check_ns(2.5 + e, -0.5, 1.0, 3), "alpha-lower"));
  EXPECT_FALSE(passes(check_ns(2.5 - e, -0.5, 1.0, 3), "alpha-lower"));
  EXPECT_TRUE(passes(check_ns(4.0, -1.0 + e, 1.5 - e, 2), "theta-at-least-1"));
  EXPECT_TRUE(passes(check_ns(4.0, -0.5 - e, 1.0 + e, 2), "theta-at-least-1"));
  EXPECT_FALSE(passes(check_ns(4.0, -0.5 + e, 1.0 - e, 2), "theta-at-least-1"));
  EXPECT_TRUE(passes(check_ns(4.0, -0.5, 1.0, 2), "pairing"));
  EXPECT_FALSE(passes(check_ns(4.0, -0.5 + e, 1.0, 2), "pairing"));
  EXPECT_FALSE(passes(check_ns(4.0, -0.5 - e, 1.0, 2), "pairing"));
  EXPECT_TRUE(passes(check_ns(5.0, 1.0 + e, 0.0, 2), "theta0-gamma"));
  EXPECT_FALSE(passes(check_ns(5.0, 1.0 - e, 0.0, 2), "theta0-gamma"));
  EXPECT_TRUE(passes(check_ns(4.0 + e, 1.25 + e, 0.0, 3), "theta0-alpha"));
  EXPECT_FALSE(passes(check_ns(4.0 - e, 1.25 + e, 0.0, 3), "theta0-alpha"));
}

TEST(Series, KsDecayAndPartialSums) {
  const auto s = series_tail(ModelSpec::kuramoto_sivashinsky(), 0.7, 0.0);
  EXPECT_DOUBLE_EQ(s.exponent, 1.4);
  EXPECT_NEAR(s.tail_exponent, -1.2, 1e-3);
  EXPECT_TRUE(s.convergent);
  ASSERT_EQ(s.partial_sums.size(), 3u);

  // direct summation of j^{2.8} / (2 (j^4 - j^2 + 2))
  auto partial = [](int n) {
    long double acc = 0;
    for (int j = 1; j <= n; ++j) {
      const long double l = static_cast<long double>(j) * j;
      acc += std::pow(l, 1.4L) / (2 * (l * l - l + 2));
    }
    return static_cast<double>(acc);
  };
  EXPECT_NEAR(s.partial_sums[0], partial(100), 1e-12);
  EXPECT_NEAR(s.partial_sums[2], partial(10000), 1e-10);

  // The increment from 10^3 to 10^4 is close to the integral of j^{-1.2}/2.
  const double tail = (std::pow(1e3, -0.2) - std::pow(1e4, -0.2)) / 0.4;
  EXPECT_NEAR(s.partial_sums[2] - s.partial_sums[1], tail, 0.01 * tail);
  const double rel = (s.partial_sums[2] - s.partial_sums[1]) / s.partial_sums[2];
  EXPECT_NEAR(rel, 0.105, 0.002);
}

TEST(Series, KsBoundaryIsDivergent) {
  const auto s = series_tail(ModelSpec::kuramoto_sivashinsky(), 0.75, 0.0);
  EXPECT_NEAR(s.tail_exponent, -1.0, 1e-4);
  EXPECT_FALSE(s.convergent);
  // logarithmic growth: each decade adds about ln(10)/2
  EXPECT_NEAR(s.partial_sums[2] - s.partial_sums[1], 0.5 * std::log(10.0), 1e-3);
}

TEST(Series, NsDecayExponent) {
  const auto spec = ModelSpec::fractional_navier_stokes(2);
  const auto s = series_tail(spec);
  EXPECT_DOUBLE_EQ(s.exponent, 1.0);
  EXPECT_NEAR(s.tail_exponent, -2.0, 0.1);
  EXPECT_TRUE(s.convergent);
  EXPECT_TRUE(check_regime(spec).passed());
}

TEST(Series, VerdictsAgreeWithConditionsOnGrid) {
  int checked = 0;
  // KS: 26 points of theta + gamma in [0.55, 0.95], skipping +-0.005 around 3/4
  for (int i = 0; i <= 26; ++i) {
    const double sum = 0.55 + 0.4 * i / 26.0;
    if (std::abs(sum - 0.75) < 0.005) continue;
    const double gamma = (i % 3 == 0) ? -0.1 : (i % 3 == 1 ? 0.0 : 0.2);
    const double theta = sum - gamma;
    const bool analytic = check_ks(gamma, theta).find("theta-plus-gamma")->passed;
    EXPECT_EQ(series_tail(ModelSpec::kuramoto_sivashinsky(), theta, gamma).convergent, analytic)
        << "gamma " << gamma << " theta " << theta;
    ++checked;
  }
  // FracNS: alpha ladder across d/2 + 2(theta + gamma) for d = 2, 3
  for (int d : {2, 3}) {
    for (int i = 0; i < 13; ++i) {
      const double alpha = 1.25 + 0.25 * i + (d == 3 ? 0.125 : 0.0);
      const double boundary = 0.5 * d + 1.0;
      if (std::abs(alpha - boundary) < 0.1) continue;
      const auto spec = ns_spec(d, alpha);
      const bool analytic = check_ns(alpha, spec.gamma, spec.theta, d).find("conv-z")->passed;
      EXPECT_EQ(series_tail(spec).convergent, analytic) << "d " << d << " alpha " << alpha;
      ++checked;
    }
  }
  EXPECT_GE(checked, 50);
}

TEST(Regime, TableAndPresetReport) {
  const auto r = check_regime(ModelSpec::kuramoto_sivashinsky());
  EXPECT_TRUE(r.passed());
  ASSERT_TRUE(r.series.has_value());
  std::ostringstream os;
  print_regime_table(os, r);
  EXPECT_NE(os.str().find("theta-plus-gamma"), std::string::npos);
  EXPECT_NE(os.str().find("pass"), std::string::npos);
  EXPECT_NE(os.str().find("convergent"), std::string::npos);
}
