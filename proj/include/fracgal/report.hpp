#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "fracgal/errors.hpp"

namespace fracgal {

enum class Scheme { DG, PG };

inline const char* to_string(Scheme s) { return s == Scheme::DG ? "DG" : "PG"; }

struct ConvergenceRow {
  std::size_t J;
  double error;
  std::optional<double> order;  // log2(E(J/2) / E(J)); absent on the first row
};

struct ReferenceDescriptor {
  std::size_t J = 0;
  double sigma = 0.0;
};

struct ConvergenceReport {
  Scheme scheme = Scheme::DG;
  double alpha = 0.0;
  double sigma = 0.0;
  std::string metric;
  std::optional<ReferenceDescriptor> reference;  // absent when the exact solution is the reference
  std::vector<ConvergenceRow> rows;

  /// Observed order between the last two rows.
  double last_order() const {
    if (rows.size() < 2 || !rows.back().order) throw ValidationError("report has fewer than two rows");
    return *rows.back().order;
  }

  /// Least-squares slope of -log2(error) against log2(J) over all rows.
  double fitted_order() const {
    if (rows.size() < 2) throw ValidationError("report has fewer than two rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    for (const auto& r : rows) {
      const double x = std::log2(static_cast<double>(r.J));
      const double y = -std::log2(r.error);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
};

/// Fills the order column from consecutive rows. Rows must be ascending in J.
inline void fill_orders(std::vector<ConvergenceRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0) {
      rows[i].order.reset();
      continue;
    }
    const double ratio = static_cast<double>(rows[i].J) / static_cast<double>(rows[i - 1].J);
    rows[i].order = std::log(rows[i - 1].error / rows[i].error) / std::log(ratio);
  }
}

inline void check_grid_list(const std::vector<std::size_t>& J_list, std::size_t minimum = 2) {
  detail::require(!J_list.empty(), "J list is empty");
  for (std::size_t i = 0; i < J_list.size(); ++i) {
    detail::require(J_list[i] >= minimum, "every J must be at least " + std::to_string(minimum));
    if (i > 0) detail::require(J_list[i] > J_list[i - 1], "J list must be strictly ascending (no duplicates)");
  }
}

}  // namespace fracgal
