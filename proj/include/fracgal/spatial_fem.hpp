#pragma once

// Conforming P1 elements on a uniform mesh of (0, 1) with homogeneous
// Dirichlet conditions. Interior nodes x_i = i h, i = 1..n-1.

#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracgal/errors.hpp"
#include "fracgal/quadrature.hpp"

namespace fracgal {

/// Symmetric tridiagonal matrix: diagonal d and off-diagonal e (size n-1).
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const noexcept { return diag.size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const {
    const Eigen::Index n = static_cast<Eigen::Index>(diag.size());
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      double s = diag[i] * x[i];
      if (i > 0) s += off[i - 1] * x[i - 1];
      if (i + 1 < n) s += off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  Eigen::MatrixXd dense() const {
    const Eigen::Index n = static_cast<Eigen::Index>(diag.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      A(i, i) = diag[i];
      if (i + 1 < n) A(i, i + 1) = A(i + 1, i) = off[i];
    }
    return A;
  }
};

/// Thomas algorithm for (a A + b B) x = r with A, B symmetric tridiagonal of
/// the same size. No pivoting: intended for the SPD pencils of this space.
inline void solve_tridiagonal(const SymTridiagonal& A, double a, const SymTridiagonal& B, double b,
                              const double* rhs, double* x, std::vector<double>& work) {
  const std::size_t n = A.size();
  work.resize(n);
  double denom = a * A.diag[0] + b * B.diag[0];
  if (!(denom > 0.0)) throw NumericalError("tridiagonal solve: non-positive pivot", 0);
  x[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < n; ++i) {
    const double e = a * A.off[i - 1] + b * B.off[i - 1];
    work[i - 1] = e / denom;
    denom = a * A.diag[i] + b * B.diag[i] - e * work[i - 1];
    if (!(denom > 0.0)) throw NumericalError("tridiagonal solve: non-positive pivot", i);
    x[i] = (rhs[i] - e * x[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] -= work[i] * x[i + 1];
}

struct EigenPairs {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // columns M-orthonormal
};

class FemSpace {
 public:
  explicit FemSpace(std::size_t n_cells) : n_(n_cells), state_(std::make_shared<Lazy>()) {
    detail::require(n_cells >= 2, "FEM space needs at least two cells");
    h_ = 1.0 / static_cast<double>(n_cells);
    const std::size_t dof = n_cells - 1;
    mass_.diag.assign(dof, 4.0 * h_ / 6.0);
    mass_.off.assign(dof - 1, h_ / 6.0);
    stiff_.diag.assign(dof, 2.0 / h_);
    stiff_.off.assign(dof - 1, -1.0 / h_);
  }

  std::size_t cells() const noexcept { return n_; }
  std::size_t dof() const noexcept { return n_ - 1; }
  double h() const noexcept { return h_; }
  const SymTridiagonal& mass() const noexcept { return mass_; }
  const SymTridiagonal& stiffness() const noexcept { return stiff_; }

  /// Uniform-mesh eigenvalue of K v = lambda M v for mode n = 1..dof.
  double closed_form_eigenvalue(std::size_t n) const {
    const double c = std::cos(static_cast<double>(n) * std::numbers::pi * h_);
    return 6.0 / (h_ * h_) * (1.0 - c) / (2.0 + c);
  }

  /// Generalized eigenpairs, computed on first use. Safe under concurrent
  /// first calls; copies of a space share the result.
  const EigenPairs& eigenpairs() const {
    std::call_once(state_->once, [this] {
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiff_.dense(), mass_.dense(),
                                                                       Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
      if (solver.info() != Eigen::Success) {
        state_->failure = "generalized eigensolver did not converge";
        return;
      }
      state_->pairs.emplace(EigenPairs{solver.eigenvalues(), solver.eigenvectors()});
      // fix the sign convention: first nonzero entry of each vector positive
      auto& V = state_->pairs->vectors;
      for (Eigen::Index k = 0; k < V.cols(); ++k) {
        Eigen::Index i = 0;
        while (i + 1 < V.rows() && std::abs(V(i, k)) < 1e-8) ++i;
        if (V(i, k) < 0.0) V.col(k) *= -1.0;
      }
    });
    if (!state_->pairs) throw NumericalError(state_->failure);
    return *state_->pairs;
  }

  double norm(const Eigen::VectorXd& c) const {
    detail::require(static_cast<std::size_t>(c.size()) == dof(), "coefficient vector has the wrong dimension");
    const double q = c.dot(mass_.apply(c));
    return std::sqrt(std::max(q, 0.0));
  }

 private:
  struct Lazy {
    std::once_flag once;
    std::optional<EigenPairs> pairs;
    std::string failure;
  };

  std::size_t n_;
  double h_;
  SymTridiagonal mass_;
  SymTridiagonal stiff_;
  std::shared_ptr<Lazy> state_;
};

inline FemSpace build_space(std::size_t n_cells) { return FemSpace(n_cells); }

inline const EigenPairs& eigen_decompose(const FemSpace& space) { return space.eigenpairs(); }

/// ||v||_{L^2(0,1)} = sqrt(c^T M c).
inline double l2_norm(const Eigen::VectorXd& c, const FemSpace& space) { return space.norm(c); }

/// L^2-orthogonal projection: M c = b with b_i = int f phi_i, per-cell
/// 8-point Gauss-Legendre. The two boundary cells use the graded composite
/// rule toward the boundary, where data such as x^0.51 are not smooth.
template <class F>
Eigen::VectorXd l2_project(F&& f, const FemSpace& space) {
  const std::size_t n = space.cells();
  const double h = space.h();
  const auto& rule = quad::gauss_legendre<8>();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dof()));
  for (std::size_t cell = 0; cell < n; ++cell) {
    const double x0 = static_cast<double>(cell) * h;
    double left = 0.0, right = 0.0;  // against the hats of nodes cell and cell+1
    if (cell == 0 || cell + 1 == n) {
      bool finite = true;
      auto checked = [&](double x) {
        const double fx = f(x);
        finite = finite && std::isfinite(fx);
        return fx;
      };
      if (cell == 0) right = quad::graded([&](double x) { return checked(x) * (x / h); }, 0.0, h, true, 0.0);
      if (cell + 1 == n && n > 1)
        left = quad::graded([&](double x) { return checked(x) * ((1.0 - x) / h); }, x0, 1.0, false, 0.0);
      if (!finite) throw NumericalError("l2_project: non-finite integrand", cell);
      if (cell >= 1) b[static_cast<Eigen::Index>(cell - 1)] += left;
      if (cell + 1 < n) b[static_cast<Eigen::Index>(cell)] += right;
      continue;
    }
    for (unsigned q = 0; q < rule.nodes.size(); ++q) {
      const double s = 0.5 * (1.0 + rule.nodes[q]);
      const double x = x0 + s * h;
      const double fx = f(x);
      if (!std::isfinite(fx)) throw NumericalError("l2_project: non-finite integrand", cell);
      const double w = 0.5 * h * rule.weights[q];
      left += w * fx * (1.0 - s);
      right += w * fx * s;
    }
    if (cell >= 1) b[static_cast<Eigen::Index>(cell - 1)] += left;
    if (cell + 1 < n) b[static_cast<Eigen::Index>(cell)] += right;
  }
  Eigen::VectorXd c(b.size());
  std::vector<double> work;
  solve_tridiagonal(space.mass(), 1.0, space.stiffness(), 0.0, b.data(), c.data(), work);
  return c;
}

}  // namespace fracgal
