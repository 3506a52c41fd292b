#include <cmath>
#include <cstdlib>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <gtest/gtest.h>

#include "fracgal/analysis_oracles.hpp"

using namespace fracgal;
using namespace fracgal::oracle;

namespace {


// Integral over (0,1) of f(t) with (1-t)^{-2g}-type behaviour at t = 1:
// substitute 1 - t = s^q, q = 1/(1-2g). f receives t and 1 - t separately
// so the singular factor never sees a rounded-away distance.
template <class F>
double integrate_to_one(F f, double g) {
  const double q = 1.0 / (1.0 - 2.0 * g);
  auto h = [&](double s) -> double {
    const double d = std::pow(s, q);
    if (d <= 0.0) return 0.0;  // underflow; the transformed integrand is bounded
    return f(1.0 - d, d) * q * std::pow(s, q - 1.0);
  };
  boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(h, 0.0, 1.0, 1e-13);
}

// Textbook monomial derivatives for v(t) = c1 t + c2 t^2, with
// t = 1 - (1-t) and t^2 = 1 - 2(1-t) + (1-t)^2 for the right-sided one.
struct Quadratic {
  double c1, c2, g;
  double left(double t) const {
    return c1 * std::pow(t, 1.0 - g) / std::tgamma(2.0 - g) + c2 * 2.0 * std::pow(t, 2.0 - g) / std::tgamma(3.0 - g);
  }
  double right(double s) const {  // s = 1 - t
    const double d0 = std::pow(s, -g) / std::tgamma(1.0 - g);
    const double d1 = std::pow(s, 1.0 - g) / std::tgamma(2.0 - g);
    const double d2 = 2.0 * std::pow(s, 2.0 - g) / std::tgamma(3.0 - g);
    return c1 * (d0 - d1) + c2 * (d0 - 2.0 * d1 + d2);
  }
};

}  // namespace

TEST(RatioSides, Example) {
  const auto s = ratio_sides(0.5, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0);
  EXPECT_NEAR(s.lhs, (2.0 - std::sqrt(3.0)) / (std::sqrt(3.0) - std::sqrt(2.0)), 1e-14);
  EXPECT_NEAR(s.rhs, (std::sqrt(3.0) - std::sqrt(2.0)) / (std::sqrt(2.0) - 1.0), 1e-14);
  EXPECT_NEAR(s.lhs, 0.8430, 5e-5);
  EXPECT_NEAR(s.rhs, 0.7673, 5e-5);
  EXPECT_GT(s.lhs, s.rhs);
}

TEST(RatioSides, LinearTermDominatesForLargeMu) {
  const auto s = ratio_sides(0.3, 1e12, 0.1, 0.2, 0.5, 0.6, 0.9);
  EXPECT_NEAR(s.lhs, 0.1 / 0.3, 1e-9);
  EXPECT_NEAR(s.rhs, 0.1 / 0.3, 1e-9);
}

TEST(WaveRatioSides, Example) {
  const auto s = wave_ratio_sides(1.5, 0.0, 1.0, 2.0, 3.0);
  EXPECT_NEAR(s.lhs, (std::sqrt(3.0) - std::sqrt(2.0)) / (std::sqrt(2.0) - 1.0), 1e-14);
  EXPECT_EQ(s.rhs, 1.0);
  EXPECT_LT(s.lhs, s.rhs);
}

TEST(DiscreteConvolution, Values) {
  EXPECT_NEAR(discrete_conv_sum(0.0, 1.5, 2.0, 2), std::pow(3.0, -1.5), 1e-15);
  const double k3 = std::pow(9.0 - 1.0, -1.2) + std::sqrt(2.0) * std::pow(9.0 - 4.0, -1.2);
  EXPECT_NEAR(discrete_conv_sum(0.5, 1.2, 2.0, 3), k3, 1e-15);
  EXPECT_THROW(discrete_conv_sum(0.5, 1.2, 2.0, 1), ValidationError);
}

TEST(DiscreteConvolution, RatioIsScaledSum) {
  for (auto kind : {ConvKind::Singular, ConvKind::Integrable})
    for (std::size_t k : {2u, 17u, 300u}) {
      const double beta = 0.7, gamma = kind == ConvKind::Singular ? 1.4 : 0.6, sigma = 2.3;
      const double expected = discrete_conv_sum(beta, gamma, sigma, k) *
                              std::pow(static_cast<double>(k), -conv_exponent(kind, beta, gamma, sigma)) *
                              (kind == ConvKind::Integrable ? 1.0 - gamma : 1.0);
      EXPECT_LE(std::abs(conv_ratio(kind, beta, gamma, sigma, k) - expected), 1e-12 * expected) << k;
    }
}

TEST(DiscreteConvolution, CeilingHoldsOnDenseGrid) {
  for (auto kind : {ConvKind::Singular, ConvKind::Integrable})
    for (double beta : {-0.99, 0.0, 2.9})
      for (double sigma : {1.0, 3.9}) {
        const double gamma = kind == ConvKind::Singular ? 1.01 : 0.5;
        const double ceiling = conv_ceiling(kind, beta, gamma, sigma);
        for (std::size_t k = 2; k <= 600; ++k) ASSERT_LT(conv_ratio(kind, beta, gamma, sigma, k), ceiling) << k;
      }
}

TEST(DiscreteConvolution, KGrid) {
  const auto ks = conv_k_grid(100);
  EXPECT_EQ(ks.front(), 2u);
  EXPECT_EQ(ks.back(), 100u);
  EXPECT_TRUE(std::is_sorted(ks.begin(), ks.end()));
  EXPECT_NE(std::find(ks.begin(), ks.end(), 48u), ks.end());
  EXPECT_THROW(conv_k_grid(1), ValidationError);
}

TEST(Coercivity, ClosedFormsMatchQuadrature) {
  for (double g : {0.05, 0.25, 0.45})
    for (auto [c1, c2] : {std::pair{1.0, 0.0}, std::pair{0.3, -0.8}, std::pair{0.0, 1.0}}) {
      const Quadratic v{c1, c2, g};
      const auto terms = coercivity_terms(Cubic{{c1, c2, 0.0}}, g);
      const double pairing = integrate_to_one([&](double t, double d) { return v.left(t) * v.right(d); }, g);
      const double left = integrate_to_one([&](double t, double) { return v.left(t) * v.left(t); }, g);
      const double right = integrate_to_one([&](double, double d) { return v.right(d) * v.right(d); }, g);
      EXPECT_NEAR(terms.pairing, pairing, 1e-10 * std::abs(pairing)) << g << ' ' << c1 << ' ' << c2;
      EXPECT_NEAR(terms.left_norm2, left, 1e-10 * left);
      EXPECT_NEAR(terms.right_norm2, right, 1e-10 * right);
      EXPECT_GE(terms.pairing, std::cos(g * std::numbers::pi) * terms.left_norm2);
    }
  EXPECT_THROW(coercivity_terms(Cubic{{1, 0, 0}}, 0.5), ValidationError);
}

TEST(OracleChecks, PassWithReducedSamples) {
  for (const auto& o : {check_lem31(2000), check_pre_g(2000), check_g_wave(2000), check_coercivity(2000),
                        check_discrete_conv(ConvKind::Singular, 1 << 10, 40),
                        check_discrete_conv(ConvKind::Integrable, 1 << 10, 40)}) {
    EXPECT_TRUE(o.passed()) << o.check << " worst margin " << o.worst_margin;
    EXPECT_EQ(o.violations, 0u);
    EXPECT_EQ(o.seed, kRecordedSeed);
    EXPECT_FALSE(o.witness.empty());
  }
}

TEST(OracleChecks, SampleCounts) {
  EXPECT_EQ(check_lem31(300).samples, 300u);
  const auto conv = check_discrete_conv(ConvKind::Singular, 64, 10);
  EXPECT_EQ(conv.samples, 10u * conv_k_grid(64).size());
  EXPECT_THROW(check_lem31(0), ValidationError);
}

TEST(OracleChecks, DeterministicForSeed) {
  const auto a = check_pre_g(1500, 11), b = check_pre_g(1500, 11), c = check_pre_g(1500, 12);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  EXPECT_EQ(a.redrawn, b.redrawn);
  EXPECT_EQ(a.witness, b.witness);
  EXPECT_NE(a.worst_margin, c.worst_margin);
}

TEST(OracleChecks, ThreadCountDoesNotChangeOutcome) {
  ::setenv("FRACGAL_THREADS", "1", 1);
  const auto one = check_coercivity(1000, 3);
  ::setenv("FRACGAL_THREADS", "3", 1);
  const auto three = check_coercivity(1000, 3);
  ::unsetenv("FRACGAL_THREADS");
  EXPECT_EQ(one.worst_margin, three.worst_margin);
  EXPECT_EQ(one.witness, three.witness);
}

TEST(OracleChecks, RecordedSeedSuite) {
  const auto all = check_all(kRecordedSeed, 2000);
  ASSERT_EQ(all.size(), 6u);
  for (const auto& o : all) EXPECT_TRUE(o.passed()) << o.check;
}
