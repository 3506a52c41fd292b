#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "fracgal/errors.hpp"

namespace fracgal::quad {

/// Gauss-Legendre rule with N points mapped from [-1, 1].
template <unsigned N>
struct GaussLegendre {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussLegendre() {
    using Rule = boost::math::quadrature::gauss<double, N>;
    const auto& x = Rule::abscissa();
    const auto& w = Rule::weights();
    // Boost stores the non-negative half of a symmetric rule.
    std::size_t k = 0;
    const std::size_t half = x.size();
    for (std::size_t i = half; i-- > 0;) {
      if (x[i] == 0.0) continue;
      nodes[k] = -x[i];
      weights[k] = w[i];
      ++k;
    }
    for (std::size_t i = 0; i < half; ++i) {
      nodes[k] = x[i];
      weights[k] = w[i];
      ++k;
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double s = 0.0;
    for (unsigned i = 0; i < N; ++i) s += weights[i] * f(c + h * nodes[i]);
    return s * h;
  }
};

template <unsigned N>
const GaussLegendre<N>& gauss_legendre() {
  static const GaussLegendre<N> rule;
  return rule;
}

/// Ratio between consecutive pieces of the graded composite rule.
inline constexpr double kGradingRatio = 0.25;

/// Number of geometric levels needed so the unresolved innermost piece of an
/// integrand behaving like |t - a|^exponent is below 1e-17 relative.
inline int graded_levels(double exponent) {
  if (!(exponent > -1.0)) throw ValidationError("graded rule needs an integrable singularity (exponent > -1)");
  const double needed = 17.0 * std::log(10.0) / ((1.0 + exponent) * std::log(1.0 / kGradingRatio));
  return std::max(32, static_cast<int>(std::ceil(needed)) + 1);
}

/// Integral of f(s) over (0, len) with geometrically graded pieces clustering
/// at s = 0. Callers that can express their integrand through the distance to
/// a singular endpoint should use this form: distances below the spacing of
/// doubles near the endpoint stay representable.
template <class F>
double graded_distance(F&& f, double len, double exponent = -0.5) {
  const auto& rule = gauss_legendre<16>();
  const int levels = graded_levels(exponent);
  double outer = len;
  double sum = 0.0;
  for (int l = 0; l < levels; ++l) {
    const double inner = outer * kGradingRatio;
    sum += rule.integrate(f, inner, outer);
    outer = inner;
  }
  // innermost sliver, one low-order rule
  sum += gauss_legendre<8>().integrate(f, 0.0, outer);
  return sum;
}

/// Composite 16-point rule on geometrically graded pieces clustering at `a`
/// (or at `b` when `toward_left` is false). Resolves integrands with an
/// algebraic endpoint singularity |t - endpoint|^exponent as long as the
/// singular endpoint is 0 or the integrand stays finite there; otherwise use
/// graded_distance.
template <class F>
double graded(F&& f, double a, double b, bool toward_left, double exponent = -0.5) {
  if (toward_left) return graded_distance([&](double s) { return f(a + s); }, b - a, exponent);
  return graded_distance([&](double s) { return f(b - s); }, b - a, exponent);
}

namespace detail {

template <class F>
double adaptive_gl(F& f, double a, double b, double whole, double tol, int depth, bool& ok) {
  const auto& rule = gauss_legendre<16>();
  const double m = 0.5 * (a + b);
  const double left = rule.integrate(f, a, m);
  const double right = rule.integrate(f, m, b);
  const double refined = left + right;
  if (!std::isfinite(refined)) {
    ok = false;
    return refined;
  }
  if (std::abs(refined - whole) <= tol * std::max(1.0, std::abs(refined)) || depth == 0) {
    if (std::abs(refined - whole) > tol * std::max(1.0, std::abs(refined))) ok = false;
    return refined;
  }
  return adaptive_gl(f, a, m, left, tol, depth - 1, ok) + adaptive_gl(f, m, b, right, tol, depth - 1, ok);
}

}  // namespace detail

/// 16-point Gauss-Legendre on [a, b] with an embedded bisection check; bisects
/// until the estimate settles to `tol`. Returns nullopt on non-convergence.
template <class F>
std::optional<double> checked_gauss_legendre(F&& f, double a, double b, double tol = 1e-13,
                                             int max_depth = 24) {
  const double whole = gauss_legendre<16>().integrate(f, a, b);
  bool ok = std::isfinite(whole);
  if (!ok) return std::nullopt;
  const double v = detail::adaptive_gl(f, a, b, whole, tol, max_depth, ok);
  if (!ok) return std::nullopt;
  return v;
}

/// Gauss-Jacobi rule for the weight (1 - x)^a (1 + x)^b on [-1, 1], built with
/// the Golub-Welsch eigenvalue method.
struct GaussJacobi {
  std::vector<double> nodes;
  std::vector<double> weights;

  GaussJacobi(int n, double a, double b) {
    if (n < 1 || !(a > -1.0) || !(b > -1.0)) throw ValidationError("invalid Gauss-Jacobi parameters");
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) {
      const double s = 2.0 * k + a + b;
      diag[k] = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
      if (k + 1 < n) {
        const double j = k + 1.0;
        const double t = 2.0 * j + a + b;
        const double num = 4.0 * j * (j + a) * (j + b) * (j + a + b);
        const double den = t * t * (t + 1.0) * (t - 1.0);
        off[k] = std::sqrt(num / den);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
    if (eig.info() != Eigen::Success) throw NumericalError("Gauss-Jacobi eigensolve failed");
    const double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                                std::lgamma(b + 1.0) - std::lgamma(a + b + 2.0));
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
      nodes[k] = eig.eigenvalues()[k];
      const double v = eig.eigenvectors()(0, k);
      weights[k] = mu0 * v * v;
    }
  }
};

/// Integral of f(t) (b - t)^(-gamma) over (a, b) for f smooth on [a, b] and
/// 0 <= gamma < 1, by a 20-point Gauss-Jacobi rule.
template <class F>
double right_weighted(F&& f, double a, double b, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ValidationError("right_weighted needs 0 <= gamma < 1");
  thread_local double cached_gamma = -1.0;
  thread_local std::optional<GaussJacobi> rule;
  if (!rule || cached_gamma != gamma) {
    rule.emplace(20, -gamma, 0.0);
    cached_gamma = gamma;
  }
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double s = 0.0;
  for (std::size_t i = 0; i < rule->nodes.size(); ++i) s += rule->weights[i] * f(c + h * rule->nodes[i]);
  // (b - t)^(-gamma) = h^(-gamma) (1 - x)^(-gamma)
  return s * std::pow(h, 1.0 - gamma);
}

}  // namespace fracgal::quad
