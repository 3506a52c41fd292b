#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/mpfr.hpp>
#include <gtest/gtest.h>

#include "fracgal/frac_weights.hpp"

using namespace fracgal;
using mp = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<50>>;

namespace {

// Naive difference of powers in 50 digits.
double naive_weight(const GradedMesh& mesh, double p, std::size_t m, std::size_t j) {
  const mp tm = mesh.node(m), a = mesh.node(j - 1), b = mesh.node(j), pp = p;
  const mp v = (pow(tm - a, pp) - pow(tm - b, pp)) / boost::multiprecision::tgamma(pp + 1);
  return static_cast<double>(v);
}

GradedMesh random_mesh(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> uJ(2, 128);
  std::uniform_real_distribution<double> us(1.0, 6.0), uT(0.1, 10.0);
  return GradedMesh(uJ(rng), us(rng), uT(rng));
}

}  // namespace

TEST(FracWeights, UniformExamples) {
  const GradedMesh mesh(2, 1.0, 2.0);  // tau = 1
  const KernelOrder diff(0.5, WeightKind::Diffusion);
  EXPECT_NEAR(weight(mesh, diff, 1, 1), 1.1283791671, 1e-10);
  EXPECT_NEAR(weight(mesh, diff, 2, 1), 0.4673899545, 1e-10);
  const KernelOrder wave(1.5, WeightKind::Wave);
  EXPECT_NEAR(weight(mesh, wave, 1, 1), 1.1283791671, 1e-10);
}

TEST(FracWeights, DiagonalIsExact) {
  const GradedMesh mesh(40, 2.7, 1.0);
  for (auto kind : {WeightKind::Diffusion, WeightKind::Wave}) {
    const KernelOrder k(kind == WeightKind::Diffusion ? 0.3 : 1.3, kind);
    for (std::size_t m = 1; m <= 40; ++m) {
      const double ref = std::pow(mesh.step(m), k.p) / std::tgamma(k.p + 1.0);
      EXPECT_LE(std::abs(diagonal_weight(mesh, k, m) - ref), 4.5e-16 * ref) << m;
    }
  }
}

TEST(FracWeights, PositiveAndTelescoping) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(0.01, 0.99);
  for (int trial = 0; trial < 40; ++trial) {
    const auto mesh = random_mesh(rng);
    const auto kind = trial % 2 ? WeightKind::Wave : WeightKind::Diffusion;
    const double alpha = ua(rng) + (kind == WeightKind::Wave ? 1.0 : 0.0);
    const FracWeightTable table(mesh, alpha, kind);
    for (std::size_t m = 1; m <= mesh.intervals(); ++m) {
      const auto row = table.row(m);
      double sum = 0.0;
      for (std::size_t j = 1; j <= m; ++j) {
        EXPECT_GT(row[j - 1], 0.0);
        sum += row[j - 1];
      }
      const double exact = std::pow(mesh.node(m), table.exponent()) / std::tgamma(table.exponent() + 1.0);
      EXPECT_LE(std::abs(sum - exact), 1e-13 * exact) << "m " << m;
    }
  }
}

TEST(FracWeights, StableFormMatchesExtendedNaiveForm) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> ua(0.01, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mesh = random_mesh(rng);
    const auto kind = trial % 2 ? WeightKind::Wave : WeightKind::Diffusion;
    const KernelOrder k(ua(rng) + (kind == WeightKind::Wave ? 1.0 : 0.0), kind);
    for (std::size_t m = 1; m <= mesh.intervals(); ++m)
      for (std::size_t j = 1; j <= m; ++j) {
        const double ref = naive_weight(mesh, k.p, m, j);
        EXPECT_LE(std::abs(weight(mesh, k, m, j) - ref), 1e-12 * ref) << m << ' ' << j;
      }
  }
}

TEST(FracWeights, HistoryCoefficientIsRowDifference) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ua(0.01, 0.99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mesh = random_mesh(rng);
    const auto kind = trial % 2 ? WeightKind::Wave : WeightKind::Diffusion;
    const KernelOrder k(ua(rng) + (kind == WeightKind::Wave ? 1.0 : 0.0), kind);
    for (std::size_t m = 2; m <= mesh.intervals(); ++m)
      for (std::size_t j = 1; j < m; ++j) {
        const mp tm = mesh.node(m), tn = mesh.node(m - 1), a = mesh.node(j - 1), b = mesh.node(j), p = k.p;
        const mp d = (pow(tn - a, p) - pow(tn - b, p) - pow(tm - a, p) + pow(tm - b, p)) /
                     boost::multiprecision::tgamma(p + 1);
        const double ref = static_cast<double>(d);
        const double v = history_coefficient(mesh, k, m, j);
        EXPECT_GT(v, 0.0);
        EXPECT_LE(std::abs(v - ref), 1e-11 * std::abs(ref)) << m << ' ' << j;
      }
  }
}

TEST(FracWeights, StreamingRowsMatchTable) {
  const GradedMesh mesh(33, 3.1, 1.0);
  const FracWeightTable table(mesh, 0.4, WeightKind::Diffusion);
  std::vector<double> row(33);
  for (std::size_t m = 1; m <= 33; ++m) {
    weight_row(mesh, table.order(), m, row);
    for (std::size_t j = 1; j <= m; ++j) EXPECT_EQ(row[j - 1], table(m, j));
  }
  EXPECT_THROW(weight_row(mesh, table.order(), 34, row), ValidationError);
}

TEST(HistorySum, Examples) {
  const GradedMesh mesh(2, 1.0, 2.0);
  const auto table = build_weights(mesh, 0.5, WeightKind::Diffusion);
  EXPECT_EQ(history_sum(table, 2, std::vector<double>{0.0, 0.0}), 0.0);
  EXPECT_NEAR(history_sum(table, 2, std::vector<double>{1.0, 2.0}), 0.4673899545 + 2.0 * 1.1283791671, 1e-10);
  const double ones = history_sum(table, 2, std::vector<double>{1.0, 1.0});
  EXPECT_NEAR(ones, std::sqrt(2.0) / std::tgamma(1.5), 1e-15);
  EXPECT_THROW(history_sum(table, 2, std::vector<double>{1.0}), ValidationError);
}

TEST(HistorySum, VectorValues) {
  const GradedMesh mesh(5, 2.0, 1.0);
  const auto table = build_weights(mesh, 1.4, WeightKind::Wave);
  std::vector<Eigen::VectorXd> v;
  for (int j = 0; j < 5; ++j) v.push_back(Eigen::VectorXd::Constant(3, j + 1.0));
  const Eigen::VectorXd s = history_sum(table, 5, v);
  std::vector<double> scalar{1, 2, 3, 4, 5};
  const double ref = history_sum(table, 5, scalar);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(s[i], ref);
}

TEST(FracWeights, RejectsMismatchedOrder) {
  const GradedMesh mesh(4, 1.0, 1.0);
  EXPECT_THROW(build_weights(mesh, 1.5, WeightKind::Diffusion), ValidationError);
  EXPECT_THROW(build_weights(mesh, 0.5, WeightKind::Wave), ValidationError);
  EXPECT_THROW(build_weights(mesh, 1.0, WeightKind::Wave), ValidationError);
  EXPECT_THROW(KernelOrder(0.0, WeightKind::Diffusion), ValidationError);
}
