#pragma once

// Per-mode solvers for D^alpha (u - u0) + lambda u = 0.
//
// Testing the DG scheme with the indicator of (t_{m-1}, t_m) and using
//   int_{t_{m-1}}^{t_m} D^alpha v = (D^{alpha-1} v)(t_m) - (D^{alpha-1} v)(t_{m-1})
// gives one scalar equation per step, with d_{m,j} = w_{m-1,j} - w_{m,j}:
//
//   DG: (w_mm + lambda tau_m) U_m = w_mm u0 + sum_{j<m} d_{m,j} (U_j - u0)
//   PG: (w_mm/tau_m + lambda tau_m/2) U_m
//         = (w_mm/tau_m - lambda tau_m/2) U_{m-1} + sum_{j<m} d_{m,j} delta_j
//
// where delta_j = (U_j - U_{j-1}) / tau_j is the slope of the PG solution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "fracgal/errors.hpp"
#include "fracgal/frac_weights.hpp"
#include "fracgal/mittag_leffler.hpp"
#include "fracgal/report.hpp"
#include "fracgal/temporal_grid.hpp"

namespace fracgal {

class ScalarTrajectory {
 public:
  ScalarTrajectory(GradedMesh mesh, Scheme scheme, std::vector<double> values)
      : mesh_(std::move(mesh)), scheme_(scheme), values_(std::move(values)) {
    const std::size_t expected = mesh_.intervals() + (scheme_ == Scheme::PG ? 1 : 0);
    detail::require(values_.size() == expected, "trajectory value count does not match the mesh");
  }

  const GradedMesh& mesh() const noexcept { return mesh_; }
  Scheme scheme() const noexcept { return scheme_; }
  /// DG: U_1..U_J. PG: U_0..U_J.
  const std::vector<double>& values() const noexcept { return values_; }

  /// Value at t_m from the left; PG nodal value. m = 1..J (PG also m = 0).
  double at_node(std::size_t m) const {
    if (scheme_ == Scheme::DG) {
      detail::require(m >= 1 && m <= mesh_.intervals(), "DG node index out of range");
      return values_[m - 1];
    }
    detail::require(m <= mesh_.intervals(), "PG node index out of range");
    return values_[m];
  }

  /// Left-continuous evaluation for DG, linear interpolation for PG.
  double operator()(double t) const {
    if (scheme_ == Scheme::DG) return values_[mesh_.interval_left_limit(t) - 1];
    const std::size_t j = mesh_.interval_right_limit(t);
    const double w = (t - mesh_.node(j - 1)) / mesh_.step(j);
    return (1.0 - w) * values_[j - 1] + w * values_[j];
  }

 private:
  GradedMesh mesh_;
  Scheme scheme_;
  std::vector<double> values_;
};

inline ScalarTrajectory dg_scalar_solve(const GradedMesh& mesh, double alpha, double lambda, double u0) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and non-negative");
  const KernelOrder order(alpha, WeightKind::Diffusion);
  const std::size_t J = mesh.intervals();
  std::vector<double> U(J);
  std::vector<double> d(J);
  for (std::size_t m = 1; m <= J; ++m) {
    const double wmm = diagonal_weight(mesh, order, m);
    history_row(mesh, order, m, d);
    double rhs = 0.0;
    for (std::size_t j = 1; j < m; ++j) rhs += d[j - 1] * (U[j - 1] - u0);
    rhs += wmm * u0;
    U[m - 1] = rhs / (wmm + lambda * mesh.step(m));
  }
  return ScalarTrajectory(mesh, Scheme::DG, std::move(U));
}

inline ScalarTrajectory pg_scalar_solve(const GradedMesh& mesh, double alpha, double lambda, double u0) {
  detail::require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be finite and non-negative");
  const KernelOrder order(alpha, WeightKind::Wave);
  const std::size_t J = mesh.intervals();
  std::vector<double> U(J + 1);
  std::vector<double> slope(J);
  std::vector<double> d(J);
  U[0] = u0;
  for (std::size_t m = 1; m <= J; ++m) {
    const double tau = mesh.step(m);
    const double a = diagonal_weight(mesh, order, m) / tau;
    const double b = 0.5 * lambda * tau;
    history_row(mesh, order, m, d);
    double hist = 0.0;
    for (std::size_t j = 1; j < m; ++j) hist += d[j - 1] * slope[j - 1];
    U[m] = ((a - b) * U[m - 1] + hist) / (a + b);
    slope[m - 1] = (U[m] - U[m - 1]) / tau;
  }
  return ScalarTrajectory(mesh, Scheme::PG, std::move(U));
}

inline ScalarTrajectory scalar_solve(Scheme scheme, const GradedMesh& mesh, double alpha, double lambda, double u0) {
  return scheme == Scheme::DG ? dg_scalar_solve(mesh, alpha, lambda, u0) : pg_scalar_solve(mesh, alpha, lambda, u0);
}

enum class ScalarMetric { MaxNode, SupTime };

inline const char* to_string(ScalarMetric m) { return m == ScalarMetric::MaxNode ? "max-node" : "sup-time"; }

/// Interior samples per interval for ScalarMetric::SupTime.
inline constexpr int kSupTimeSamples = 8;

/// Error of one scalar trajectory against u0 E_{alpha,1}(-lambda t^alpha).
inline double scalar_error(const ScalarTrajectory& U, double alpha, double lambda, double u0, ScalarMetric metric) {
  const auto& mesh = U.mesh();
  auto exact = [&](double t) { return u0 * ml::mode_solution(lambda, alpha, t); };
  double err = 0.0;
  for (std::size_t m = 1; m <= mesh.intervals(); ++m) {
    const double b = mesh.node(m);
    err = std::max(err, std::abs(U.at_node(m) - exact(b)));
    if (metric == ScalarMetric::MaxNode) continue;
    const double a = mesh.node(m - 1);
    // right limit at t_{m-1}
    const double left_value = U.scheme() == Scheme::DG ? U.at_node(m) : U.at_node(m - 1);
    err = std::max(err, std::abs(left_value - exact(a)));
    for (int i = 1; i <= kSupTimeSamples; ++i) {
      const double t = a + (b - a) * i / (kSupTimeSamples + 1.0);
      err = std::max(err, std::abs(U(t) - exact(t)));
    }
  }
  return err;
}

/// Convergence study with u0 = 1 on meshes with T = 1. The scheme follows
/// from alpha: DG for 0 < alpha < 1, PG for 1 < alpha < 2.
inline ConvergenceReport scalar_error_study(double alpha, double lambda, double sigma,
                                            const std::vector<std::size_t>& J_list, ScalarMetric metric) {
  check_grid_list(J_list);
  detail::require((alpha > 0.0 && alpha < 1.0) || (alpha > 1.0 && alpha < 2.0), "alpha must lie in (0,1) or (1,2)");
  ConvergenceReport report;
  report.scheme = alpha < 1.0 ? Scheme::DG : Scheme::PG;
  report.alpha = alpha;
  report.sigma = sigma;
  report.metric = to_string(metric);
  for (std::size_t J : J_list) {
    const GradedMesh mesh(J, sigma, 1.0);
    const auto U = scalar_solve(report.scheme, mesh, alpha, lambda, 1.0);
    report.rows.push_back({J, scalar_error(U, alpha, lambda, 1.0, metric), std::nullopt});
  }
  fill_orders(report.rows);
  return report;
}

}  // namespace fracgal
