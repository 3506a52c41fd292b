#pragma once

// Discrete Green functions of the right-sided operators on a graded mesh.
// Both are piecewise constant, vanish on (t_m, T), and are stored through
// their left limits G_1..G_m at the nodes (G_{m+1} := 0).
//
// Diffusion (0 < alpha < 1), mu = lambda Gamma(2 - alpha), for k = 1..m:
//   sum_{j=k}^m (G_j - G_{j+1}) c_{j,k} + mu tau_k G_k = Gamma(2-alpha) [k == m]
// Wave (1 < alpha < 2), for k = 1..m:
//   sum_{j=k}^m (G_j - G_{j+1}) e_{j,k} = Gamma(3-alpha) tau_k
// with c_{j,k} = (t_j - t_{k-1})^{1-alpha} - (t_j - t_k)^{1-alpha} and e the
// same difference with exponent 2 - alpha. Both systems are triangular and
// are solved from k = m down to 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/multiprecision/float128.hpp>

#include "fracgal/errors.hpp"
#include "fracgal/frac_weights.hpp"
#include "fracgal/mittag_leffler.hpp"
#include "fracgal/quadrature.hpp"
#include "fracgal/scalar_steppers.hpp"
#include "fracgal/temporal_grid.hpp"

namespace fracgal {

struct GreenVector {
  WeightKind kind;
  double alpha;
  double lambda;  // zero for the wave kind
  std::size_t m;
  std::vector<double> values;  // G_1..G_m
  std::vector<double> jumps;   // G_j - G_{j+1}, j = 1..m, each rounded from the extended solve

  double operator[](std::size_t j) const { return j > m ? 0.0 : values[j - 1]; }
};

namespace detail {

/// (t_j - t_{k-1})^p - (t_j - t_k)^p for k <= j.
inline double kernel_gap(const GradedMesh& mesh, double p, std::size_t j, std::size_t k) {
  return power_gap(p, mesh.node(j) - mesh.node(k), mesh.step(k));
}

inline void check_target(const GradedMesh& mesh, std::size_t m) {
  require(m >= 1 && m <= mesh.intervals(), "Green function target m must lie in 1..J");
}

}  // namespace detail

/// Kernel differences of one (mesh, exponent) pair in 113-bit arithmetic,
/// shared by all Green functions on that mesh.
///
/// The jump form of the Green systems mixes signs and, for small exponents or
/// strong grading, the jumps are many orders of magnitude smaller than the
/// values. Summation by parts gives the equivalent value form
///   G_k (c_kk + mu tau_k) = sum_{j>k} G_j s_{j,k}   (diffusion)
///   G_k c_kk = Gamma(3-alpha) tau_k + sum_{j>k} G_j s_{j,k}   (wave)
/// with s_{j,k} = c_{j-1,k} - c_{j,k} > 0, in which every term is positive.
/// Values and jumps are both formed in extended precision and rounded once.
class GreenKernel {
 public:
  using real = boost::multiprecision::float128;

  /// Kernels for targets m <= `extent` (default: the whole mesh).
  GreenKernel(const GradedMesh& mesh, double alpha, WeightKind kind, std::size_t extent = 0)
      : mesh_(&mesh), alpha_(alpha), kind_(kind) {
    if (kind == WeightKind::Diffusion)
      detail::require(alpha > 0.0 && alpha < 1.0, "diffusion Green function needs alpha in (0, 1)");
    else
      detail::require(alpha > 1.0 && alpha < 2.0, "wave Green function needs alpha in (1, 2)");
    const std::size_t J = extent == 0 ? mesh.intervals() : extent;
    detail::require(J <= mesh.intervals(), "Green kernel extent exceeds the mesh");
    extent_ = J;
    const real p = kind == WeightKind::Diffusion ? real(1) - real(alpha) : real(2) - real(alpha);
    t_.resize(J + 1);
    for (std::size_t j = 0; j <= J; ++j) t_[j] = real(mesh.node(j));
    // c(j,k) for 1 <= k <= j <= J, row-major lower triangle
    c_.resize(J * (J + 1) / 2);
    for (std::size_t j = 1; j <= J; ++j)
      for (std::size_t k = 1; k <= j; ++k) {
        const real hi = pow(t_[j] - t_[k - 1], p);
        const real lo = k == j ? real(0) : pow(t_[j] - t_[k], p);
        c_[index(j, k)] = hi - lo;
      }
  }

  const GradedMesh& mesh() const noexcept { return *mesh_; }

  GreenVector diffusion(double lambda, std::size_t m) const {
    detail::require(kind_ == WeightKind::Diffusion, "kernel was built for the wave kind");
    detail::require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and non-negative");
    check_extent(m);
    const real g = gamma_of(2.0 - alpha_);
    const real mu = real(lambda) * g;
    std::vector<real> G(m + 1, real(0));
    // k = m: G_m (c_mm + mu tau_m) = Gamma(2 - alpha)
    G[m] = g / (c(m, m) + mu * tau(m));
    for (std::size_t k = m - 1; k >= 1; --k) {
      real s = 0;
      for (std::size_t j = k + 1; j <= m; ++j) s += G[j] * (c(j - 1, k) - c(j, k));
      const real den = c(k, k) + mu * tau(k);
      if (!(den > 0)) throw NumericalError("green_diffusion: singular step", k);
      G[k] = s / den;
    }
    return pack(G, lambda, m, WeightKind::Diffusion);
  }

  GreenVector wave(std::size_t m) const {
    detail::require(kind_ == WeightKind::Wave, "kernel was built for the diffusion kind");
    check_extent(m);
    const real g = gamma_of(3.0 - alpha_);
    std::vector<real> G(m + 1, real(0));
    G[m] = g * tau(m) / c(m, m);
    for (std::size_t k = m - 1; k >= 1; --k) {
      real s = g * tau(k);
      for (std::size_t j = k + 1; j <= m; ++j) s += G[j] * (c(j - 1, k) - c(j, k));
      if (!(c(k, k) > 0)) throw NumericalError("green_wave: singular step", k);
      G[k] = s / c(k, k);
    }
    return pack(G, 0.0, m, WeightKind::Wave);
  }

 private:
  static std::size_t index(std::size_t j, std::size_t k) { return (j - 1) * j / 2 + (k - 1); }
  const real& c(std::size_t j, std::size_t k) const { return c_[index(j, k)]; }
  real tau(std::size_t k) const { return t_[k] - t_[k - 1]; }
  // Gamma only scales the systems; the double value is used throughout
  static real gamma_of(double x) { return real(boost::math::tgamma(x)); }

  GreenVector pack(const std::vector<real>& G, double lambda, std::size_t m, WeightKind kind) const {
    GreenVector out{kind, alpha_, lambda, m, std::vector<double>(m), std::vector<double>(m)};
    for (std::size_t j = 1; j <= m; ++j) {
      out.values[j - 1] = static_cast<double>(G[j]);
      out.jumps[j - 1] = static_cast<double>(G[j] - (j < m ? G[j + 1] : real(0)));
    }
    return out;
  }

  void check_extent(std::size_t m) const {
    detail::check_target(*mesh_, m);
    detail::require(m <= extent_, "Green target beyond the kernel extent");
  }

  const GradedMesh* mesh_;
  double alpha_;
  WeightKind kind_;
  std::size_t extent_ = 0;
  std::vector<real> t_;
  std::vector<real> c_;
};

inline GreenVector green_diffusion(const GradedMesh& mesh, double alpha, double lambda, std::size_t m) {
  detail::check_target(mesh, m);
  return GreenKernel(mesh, alpha, WeightKind::Diffusion, m).diffusion(lambda, m);
}

inline GreenVector green_wave(const GradedMesh& mesh, double alpha, std::size_t m) {
  detail::check_target(mesh, m);
  return GreenKernel(mesh, alpha, WeightKind::Wave, m).wave(m);
}

/// Relative residual of the defining equation with test index k, measured
/// against the sum of absolute values of its terms.
inline double green_residual(const GradedMesh& mesh, const GreenVector& G, std::size_t k) {
  detail::require(k >= 1 && k <= G.m, "residual index out of range");
  const double p = G.kind == WeightKind::Diffusion ? 1.0 - G.alpha : 2.0 - G.alpha;
  double sum = 0.0, scale = 0.0;
  for (std::size_t j = k; j <= G.m; ++j) {
    const double term = G.jumps[j - 1] * detail::kernel_gap(mesh, p, j, k);
    sum += term;
    scale += std::abs(term);
  }
  double rhs;
  if (G.kind == WeightKind::Diffusion) {
    const double mu = G.lambda * boost::math::tgamma(2.0 - G.alpha);
    const double reaction = mu * mesh.step(k) * G[k];
    sum += reaction;
    scale += std::abs(reaction);
    rhs = k == G.m ? boost::math::tgamma(2.0 - G.alpha) : 0.0;
  } else {
    rhs = boost::math::tgamma(3.0 - G.alpha) * mesh.step(k);
  }
  scale += std::abs(rhs);
  return std::abs(sum - rhs) / scale;
}

/// Both sides of the telescoped k = 1 identity for the diffusion Green
/// function: G_m and sum_{j<m} (G_{j+1} - G_j) r_j / r_m with
/// r_j = t_j^{1-alpha} - (t_j - t_1)^{1-alpha} + mu t_1. Requires m >= 2.
struct TelescopedIdentity {
  double lhs;
  double rhs;
  double relative_gap() const { return std::abs(lhs - rhs) / std::abs(lhs); }
};

inline TelescopedIdentity telescoped_identity(const GradedMesh& mesh, const GreenVector& G) {
  detail::require(G.kind == WeightKind::Diffusion, "telescoped identity is stated for the diffusion kind");
  detail::require(G.m >= 2, "telescoped identity needs m >= 2 (empty sum otherwise)");
  const double p = 1.0 - G.alpha;
  const double mu = G.lambda * boost::math::tgamma(2.0 - G.alpha);
  const double t1 = mesh.node(1);
  auto r = [&](std::size_t j) { return detail::kernel_gap(mesh, p, j, 1) + mu * t1; };
  const double den = r(G.m);
  double s = 0.0;
  for (std::size_t j = 1; j < G.m; ++j) s -= G.jumps[j - 1] * r(j);
  return {G[G.m], s / den};
}

/// g = D_{t_m-}^alpha G, a finite sum of (t_k - t)_+^{-alpha} / Gamma(1-alpha).
class RightDerivativeOfGreen {
 public:
  explicit RightDerivativeOfGreen(const GradedMesh& mesh, const GreenVector& G)
      : mesh_(&mesh), G_(&G), inv_gamma_(ml::recip_gamma(1.0 - G.alpha)) {
    detail::require(G.kind == WeightKind::Diffusion, "right derivative helper expects the diffusion kind");
  }

  /// Sum over k >= first of the terms; t must lie below t_first.
  double partial(double t, std::size_t first) const {
    double s = 0.0;
    for (std::size_t k = std::max<std::size_t>(first, 1); k <= G_->m; ++k)
      s += G_->jumps[k - 1] * std::pow(mesh_->node(k) - t, -G_->alpha);
    return s * inv_gamma_;
  }

  double operator()(double t) const { return partial(t, mesh_->interval_left_limit(t)); }

  /// partial(t_j - s, j) with the distance s to t_j kept exact.
  double from_right(double s, std::size_t j) const {
    double acc = G_->jumps[j - 1] * std::pow(s, -G_->alpha);
    for (std::size_t k = j + 1; k <= G_->m; ++k)
      acc += G_->jumps[k - 1] * std::pow(mesh_->node(k) - mesh_->node(j) + s, -G_->alpha);
    return acc * inv_gamma_;
  }

  /// Average of g over interval j (closed form).
  double average(std::size_t j) const {
    const double p = 1.0 - G_->alpha;
    double s = 0.0;
    for (std::size_t k = j; k <= G_->m; ++k)
      s += G_->jumps[k - 1] * detail::power_gap(p, mesh_->node(k) - mesh_->node(j), mesh_->step(j)) / p;
    return s * inv_gamma_ / mesh_->step(j);
  }

  /// Coefficient of (t_j - t)^{-alpha} in g.
  double singular_coefficient(std::size_t j) const { return G_->jumps[j - 1] * inv_gamma_; }

 private:
  const GradedMesh* mesh_;
  const GreenVector* G_;
  double inv_gamma_;
};

struct DualityResult {
  double lhs;
  double rhs;
  double gap;
};

/// Compares (U_m - (Q y)_m) with <(I - Q) y, (I - Q) D_{t_m-}^alpha G^m> for
/// the mode solution y(t) = c E_{alpha,1}(-lambda t^alpha), whose DG
/// projection is the scalar DG trajectory started from c.
inline DualityResult duality_check_diffusion(const GradedMesh& mesh, double alpha, double lambda, std::size_t m,
                                             double c = 1.0) {
  detail::check_target(mesh, m);
  const auto U = dg_scalar_solve(mesh, alpha, lambda, c);
  auto y = [&](double t) { return c * ml::mode_solution(lambda, alpha, t); };
  QTauOptions qopt;
  qopt.singular_exponent_at_zero = 0.0;  // y - y(0) ~ t^alpha: bounded, non-smooth
  qopt.tolerance = 1e-13;
  const auto ybar = q_tau(y, mesh, qopt);
  const double lhs = U.at_node(m) - ybar[m - 1];

  const auto G = green_diffusion(mesh, alpha, lambda, m);
  const RightDerivativeOfGreen g(mesh, G);
  double rhs = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    const double a = mesh.node(j - 1);
    const double b = mesh.node(j);
    const double mid = 0.5 * (a + b);
    const double yj = ybar[j - 1];
    const double gj = g.average(j);
    // left half: g is smooth there; y may be non-smooth at t = 0
    auto left = [&](double t) { return (y(t) - yj) * (g.partial(t, j) - gj); };
    double part;
    if (j == 1) {
      part = quad::graded(left, a, mid, true, 0.0);
    } else {
      const auto r = quad::checked_gauss_legendre(left, a, mid, 1e-13);
      if (!r) throw NumericalError("duality check: quadrature did not converge", j);
      part = *r;
    }
    // right half: weight (t_j - t)^{-alpha} from the k = j term by Gauss-Jacobi
    auto weighted = [&](double t) { return (y(t) - yj) * g.singular_coefficient(j); };
    part += quad::right_weighted(weighted, mid, b, alpha);
    auto smooth = [&](double t) { return (y(t) - yj) * (g.partial(t, j + 1) - gj); };
    const auto r = quad::checked_gauss_legendre(smooth, mid, b, 1e-13);
    if (!r) throw NumericalError("duality check: quadrature did not converge", j);
    part += *r;
    rhs += part;
  }
  return {lhs, rhs, std::abs(lhs - rhs)};
}

/// sum_j (m/j)^{(sigma-1)(1-alpha)} ||(I - Q) D_{t_m-}^alpha G^m||_{L^1(I_j)}.
inline double weighted_green_sum(const GradedMesh& mesh, double alpha, double lambda, std::size_t m) {
  const auto G = green_diffusion(mesh, alpha, lambda, m);
  const RightDerivativeOfGreen g(mesh, G);
  const double expo = (mesh.sigma() - 1.0) * (1.0 - alpha);
  double total = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    const double gj = g.average(j);
    auto f = [&](double s) { return std::abs(g.from_right(s, j) - gj); };
    const double l1 = quad::graded_distance(f, mesh.step(j), -alpha);
    total += std::pow(static_cast<double>(m) / static_cast<double>(j), expo) * l1;
  }
  return total;
}

}  // namespace fracgal
