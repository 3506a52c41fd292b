#pragma once

// Discrete Riemann-Liouville history coefficients on a graded mesh.
//
//   w_{m,j} = [(t_m - t_{j-1})^p - (t_m - t_j)^p] / Gamma(p + 1),  1 <= j <= m
//
// with p = 1 - alpha (diffusion, 0 < alpha < 1) or p = 2 - alpha (wave,
// 1 < alpha < 2). The steppers only ever need the diagonal w_{m,m} and the
// history differences d_{m,j} = w_{m-1,j} - w_{m,j} (j < m); both are
// evaluated directly from the mesh rather than from rounded rows.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "fracgal/errors.hpp"
#include "fracgal/temporal_grid.hpp"

namespace fracgal {

enum class WeightKind { Diffusion, Wave };

inline const char* to_string(WeightKind k) { return k == WeightKind::Diffusion ? "diffusion" : "wave"; }

/// Kernel exponent p and 1/Gamma(p+1) for one (alpha, kind) pair.
struct KernelOrder {
  double alpha;
  WeightKind kind;
  double p;
  double inv_gamma;  // 1 / Gamma(p + 1)

  KernelOrder(double a, WeightKind k) : alpha(a), kind(k) {
    if (k == WeightKind::Diffusion)
      detail::require(a > 0.0 && a < 1.0, "diffusion weights need alpha in (0, 1)");
    else
      detail::require(a > 1.0 && a < 2.0, "wave weights need alpha in (1, 2)");
    p = (k == WeightKind::Diffusion ? 1.0 : 2.0) - a;
    inv_gamma = 1.0 / boost::math::tgamma(p + 1.0);
  }
};

namespace detail {

/// (1 + x)^p - 1 without cancellation for small x.
inline double pow1pm1(double p, double x) { return std::expm1(p * std::log1p(x)); }

/// (a + s)^p - a^p for a >= 0, s > 0.
inline double power_gap(double p, double a, double s) {
  if (a == 0.0) return std::pow(s, p);
  return std::pow(a, p) * pow1pm1(p, s / a);
}

/// (a+u)^p - a^p - (a+u+v)^p + (a+v)^p for a >= 0, u, v > 0: the unscaled
/// history difference with a = t_{m-1} - t_j, u = tau_j, v = tau_m.
inline double second_power_gap(double p, double a, double u_len, double v_len) {
  if (a <= 0.25 * std::min(u_len, v_len)) {
    // no small parameter: each term is of the size of the result
    return std::pow(a + u_len, p) - std::pow(a, p) - std::pow(a + u_len + v_len, p) + std::pow(a + v_len, p);
  }
  const double u = u_len / a;
  const double v = v_len / a;
  const double w = v / (1.0 + u);
  const double vw = v * u / (1.0 + u);  // v - w
  const double bracket = std::pow(1.0 + w, p) * pow1pm1(p, vw / (1.0 + w)) - pow1pm1(p, u) * pow1pm1(p, w);
  return std::pow(a, p) * bracket;
}

}  // namespace detail

/// w_{m,j}, 1 <= j <= m.
inline double weight(const GradedMesh& mesh, const KernelOrder& k, std::size_t m, std::size_t j) {
  const double a = mesh.node(m) - mesh.node(j);
  return detail::power_gap(k.p, a, mesh.step(j)) * k.inv_gamma;
}

/// w_{m,m} = tau_m^p / Gamma(p+1).
inline double diagonal_weight(const GradedMesh& mesh, const KernelOrder& k, std::size_t m) {
  return std::pow(mesh.step(m), k.p) * k.inv_gamma;
}

/// d_{m,j} = w_{m-1,j} - w_{m,j}, 1 <= j < m. Positive for 0 < p < 1.
inline double history_coefficient(const GradedMesh& mesh, const KernelOrder& k, std::size_t m, std::size_t j) {
  const double a = mesh.node(m - 1) - mesh.node(j);
  return detail::second_power_gap(k.p, a, mesh.step(j), mesh.step(m)) * k.inv_gamma;
}

/// Row-streaming access: fills out[j-1] = w_{m,j} for j = 1..m.
inline void weight_row(const GradedMesh& mesh, const KernelOrder& k, std::size_t m, std::span<double> out) {
  detail::require(m >= 1 && m <= mesh.intervals(), "weight_row: m out of range");
  detail::require(out.size() >= m, "weight_row: output too short");
  for (std::size_t j = 1; j < m; ++j) out[j - 1] = weight(mesh, k, m, j);
  out[m - 1] = diagonal_weight(mesh, k, m);
}

/// Row-streaming access: fills out[j-1] = d_{m,j} for j = 1..m-1.
inline void history_row(const GradedMesh& mesh, const KernelOrder& k, std::size_t m, std::span<double> out) {
  detail::require(m >= 1 && m <= mesh.intervals(), "history_row: m out of range");
  detail::require(out.size() + 1 >= m, "history_row: output too short");
  for (std::size_t j = 1; j < m; ++j) out[j - 1] = history_coefficient(mesh, k, m, j);
}

/// Dense lower-triangular table of w_{m,j}. O(J^2) storage; the steppers use
/// the streaming functions above instead.
class FracWeightTable {
 public:
  FracWeightTable(const GradedMesh& mesh, double alpha, WeightKind kind) : mesh_(&mesh), order_(alpha, kind) {
    const std::size_t J = mesh.intervals();
    offsets_.resize(J + 1);
    for (std::size_t m = 1; m <= J; ++m) offsets_[m] = offsets_[m - 1] + m;
    data_.resize(offsets_[J]);
    for (std::size_t m = 1; m <= J; ++m) weight_row(mesh, order_, m, std::span<double>(data_).subspan(offsets_[m - 1], m));
  }

  const GradedMesh& mesh() const noexcept { return *mesh_; }
  const KernelOrder& order() const noexcept { return order_; }
  WeightKind kind() const noexcept { return order_.kind; }
  double alpha() const noexcept { return order_.alpha; }
  double exponent() const noexcept { return order_.p; }

  /// w_{m,1..m}
  std::span<const double> row(std::size_t m) const {
    detail::require(m >= 1 && m <= mesh_->intervals(), "FracWeightTable: row index out of range");
    return std::span<const double>(data_).subspan(offsets_[m - 1], m);
  }

  double operator()(std::size_t m, std::size_t j) const {
    detail::require(j >= 1 && j <= m, "FracWeightTable: column index out of range");
    return row(m)[j - 1];
  }

 private:
  const GradedMesh* mesh_;
  KernelOrder order_;
  std::vector<std::size_t> offsets_;  // row m starts at offsets_[m-1]
  std::vector<double> data_;
};

inline FracWeightTable build_weights(const GradedMesh& mesh, double alpha, WeightKind kind) {
  return FracWeightTable(mesh, alpha, kind);
}

/// sum_{j=1}^m w_{m,j} v_j, accumulated in ascending j. V may be a scalar or
/// any vector type supporting `+=` and scalar multiplication.
template <class V>
V history_sum(const FracWeightTable& table, std::size_t m, std::span<const V> values) {
  const auto row = table.row(m);
  if (values.size() != m)
    throw ValidationError("history_sum: expected " + std::to_string(m) + " values, got " +
                          std::to_string(values.size()));
  V acc = row[0] * values[0];
  for (std::size_t j = 1; j < m; ++j) acc += row[j] * values[j];
  return acc;
}

template <class V>
V history_sum(const FracWeightTable& table, std::size_t m, const std::vector<V>& values) {
  return history_sum<V>(table, m, std::span<const V>(values));
}

}  // namespace fracgal
