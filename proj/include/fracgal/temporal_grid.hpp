#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fracgal/errors.hpp"
#include "fracgal/quadrature.hpp"

namespace fracgal {

/// Temporal grid t_j = (j/J)^sigma T, j = 0..J. Immutable once built.
class GradedMesh {
 public:
  GradedMesh(std::size_t intervals, double sigma, double horizon) : J_(intervals), sigma_(sigma), T_(horizon) {
    detail::require(intervals >= 1, "mesh needs at least one interval (J >= 1)");
    detail::require(sigma >= 1.0 && std::isfinite(sigma), "grading exponent sigma must be >= 1");
    detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon T must be positive");
    nodes_.resize(J_ + 1);
    nodes_[0] = 0.0;
    const double Jd = static_cast<double>(J_);
    for (std::size_t j = 1; j < J_; ++j) {
      const double r = static_cast<double>(j) / Jd;
      nodes_[j] = (sigma_ == 1.0 ? r : std::exp(sigma_ * std::log(r))) * T_;
    }
    nodes_[J_] = T_;
    steps_.resize(J_);
    for (std::size_t j = 1; j <= J_; ++j) steps_[j - 1] = nodes_[j] - nodes_[j - 1];
  }

  std::size_t intervals() const noexcept { return J_; }
  double sigma() const noexcept { return sigma_; }
  double horizon() const noexcept { return T_; }

  /// t_j for j = 0..J
  double node(std::size_t j) const { return nodes_[j]; }
  /// tau_j = t_j - t_{j-1} for j = 1..J
  double step(std::size_t j) const { return steps_[j - 1]; }

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> steps() const noexcept { return steps_; }

  /// Index j of the interval (t_{j-1}, t_j] containing t, so that a piecewise
  /// constant function evaluated here returns its left limit at nodes.
  /// t = 0 maps to interval 1.
  std::size_t interval_left_limit(double t) const {
    check_time(t);
    if (t <= 0.0) return 1;
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin());
  }

  /// Index j with t_{j-1} <= t < t_j (interval J for t = T).
  std::size_t interval_right_limit(double t) const {
    check_time(t);
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    const auto j = static_cast<std::size_t>(it - nodes_.begin());
    return std::min(std::max<std::size_t>(j, 1), J_);
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= T_)) throw ValidationError("time " + std::to_string(t) + " outside [0, T]");
  }

 private:
  std::size_t J_;
  double sigma_;
  double T_;
  std::vector<double> nodes_;
  std::vector<double> steps_;
};

inline GradedMesh build_mesh(std::size_t J, double sigma, double T) { return GradedMesh(J, sigma, T); }

/// Interval averages of an already sampled piecewise-constant (or cellwise
/// integrated) input: identity apart from the length check.
inline std::vector<double> q_tau(std::span<const double> interval_values, const GradedMesh& mesh) {
  detail::require(interval_values.size() == mesh.intervals(), "q_tau: expected one value per interval");
  return {interval_values.begin(), interval_values.end()};
}

/// Options for projecting a function onto piecewise constants.
struct QTauOptions {
  /// Exponent gamma of a t^gamma-type endpoint singularity at t = 0; the
  /// first interval is then integrated with the graded composite rule.
  std::optional<double> singular_exponent_at_zero = -0.5;
  double tolerance = 1e-12;
};

/// (Q_tau v)_j = 1/tau_j * integral of v over (t_{j-1}, t_j).
template <class F>
  requires std::invocable<F&, double>
std::vector<double> q_tau(F&& v, const GradedMesh& mesh, const QTauOptions& opt = {}) {
  std::vector<double> out(mesh.intervals());
  for (std::size_t j = 1; j <= mesh.intervals(); ++j) {
    const double a = mesh.node(j - 1);
    const double b = mesh.node(j);
    double integral = 0.0;
    if (j == 1 && opt.singular_exponent_at_zero) {
      integral = quad::graded(v, a, b, true, *opt.singular_exponent_at_zero);
      if (!std::isfinite(integral)) throw NumericalError("q_tau: quadrature failed", j);
    } else {
      const auto r = quad::checked_gauss_legendre(v, a, b, opt.tolerance);
      if (!r) throw NumericalError("q_tau: quadrature did not converge", j);
      integral = *r;
    }
    out[j - 1] = integral / (b - a);
  }
  return out;
}

/// Continuous piecewise-linear interpolant of nodal values on a mesh.
class PiecewiseLinear {
 public:
  PiecewiseLinear(const GradedMesh& mesh, std::vector<double> nodal) : mesh_(&mesh), values_(std::move(nodal)) {
    detail::require(values_.size() == mesh.intervals() + 1, "i_tau: expected J+1 nodal values");
  }

  double operator()(double t) const {
    const std::size_t j = mesh_->interval_right_limit(t);
    const double a = mesh_->node(j - 1);
    const double b = mesh_->node(j);
    const double w = (t - a) / (b - a);
    return (1.0 - w) * values_[j - 1] + w * values_[j];
  }

  std::span<const double> values() const noexcept { return values_; }

 private:
  const GradedMesh* mesh_;
  std::vector<double> values_;
};

inline PiecewiseLinear i_tau(std::vector<double> nodal_values, const GradedMesh& mesh) {
  return PiecewiseLinear(mesh, std::move(nodal_values));
}

}  // namespace fracgal
