#pragma once

// Full space-time discretizations on a FemSpace.
//
// Spectral backend: works on the coefficients c = V^T M u in the M-orthonormal
// eigenbasis, where every mode follows its scalar recurrence; nodal states
// are recovered at the end with one product by V.
// Direct backend: one tridiagonal solve per step with
//   DG: (w_mm M + tau_m K) U_m = M (w_mm u0 + h_m),  h_m = sum_{j<m} d_{m,j} (U_j - u0)
//   PG: (a M + tau_m/2 K) U_m = M (a U_{m-1} + h_m) - tau_m/2 K U_{m-1},
//       a = w_mm / tau_m,  h_m = sum_{j<m} d_{m,j} delta_j
// Both backends share HistoryKernel for h_m.

#include <algorithm>
#include <iterator>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fracgal/errors.hpp"
#include "fracgal/frac_weights.hpp"
#include "fracgal/history_kernel.hpp"
#include "fracgal/parallel.hpp"
#include "fracgal/report.hpp"
#include "fracgal/spatial_fem.hpp"
#include "fracgal/temporal_grid.hpp"

namespace fracgal {

enum class Backend { Spectral, Direct };

inline const char* to_string(Backend b) { return b == Backend::Spectral ? "spectral" : "direct"; }

struct SolveOptions {
  Backend backend = Backend::Spectral;
  /// Replaces the stiffness by zero (all modes lambda = 0); a test hook.
  bool zero_stiffness = false;
  std::size_t block = HistoryKernel::kDefaultBlock;
  unsigned workers = worker_count();
};

class FieldTrajectory {
 public:
  FieldTrajectory(GradedMesh mesh, FemSpace space, Scheme scheme, Eigen::MatrixXd states)
      : mesh_(std::move(mesh)), space_(std::move(space)), scheme_(scheme), states_(std::move(states)) {
    const auto expected = static_cast<Eigen::Index>(mesh_.intervals() + (scheme_ == Scheme::PG ? 1 : 0));
    detail::require(states_.cols() == expected, "trajectory state count does not match the mesh");
    detail::require(states_.rows() == static_cast<Eigen::Index>(space_.dof()), "state dimension does not match the space");
  }

  const GradedMesh& mesh() const noexcept { return mesh_; }
  const FemSpace& space() const noexcept { return space_; }
  Scheme scheme() const noexcept { return scheme_; }
  /// DG: columns U_1..U_J. PG: columns U_0..U_J.
  const Eigen::MatrixXd& states() const noexcept { return states_; }

  /// DG: U_m, the value on (t_{m-1}, t_m]. PG: nodal U_m (m may be 0).
  Eigen::VectorXd state(std::size_t m) const {
    if (scheme_ == Scheme::DG) {
      detail::require(m >= 1 && m <= mesh_.intervals(), "DG state index out of range");
      return states_.col(static_cast<Eigen::Index>(m - 1));
    }
    detail::require(m <= mesh_.intervals(), "PG state index out of range");
    return states_.col(static_cast<Eigen::Index>(m));
  }

  /// Left-continuous evaluation for DG; linear interpolation for PG.
  Eigen::VectorXd at(double t) const {
    if (scheme_ == Scheme::DG) return states_.col(static_cast<Eigen::Index>(mesh_.interval_left_limit(t) - 1));
    const std::size_t j = mesh_.interval_right_limit(t);
    const double w = (t - mesh_.node(j - 1)) / mesh_.step(j);
    return (1.0 - w) * states_.col(static_cast<Eigen::Index>(j - 1)) + w * states_.col(static_cast<Eigen::Index>(j));
  }

 private:
  GradedMesh mesh_;
  FemSpace space_;
  Scheme scheme_;
  Eigen::MatrixXd states_;
};

namespace detail {

inline void check_initial(const FemSpace& space, const Eigen::VectorXd& u0) {
  require(static_cast<std::size_t>(u0.size()) == space.dof(), "initial coefficients have the wrong dimension");
}

/// V * C column block by column block, overwriting C.
inline void to_nodal(const Eigen::MatrixXd& V, Eigen::MatrixXd& C, unsigned workers) {
  constexpr Eigen::Index kCols = 256;
  const Eigen::Index blocks = (C.cols() + kCols - 1) / kCols;
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const Eigen::Index c0 = static_cast<Eigen::Index>(b) * kCols;
    const Eigen::Index len = std::min(kCols, C.cols() - c0);
    Eigen::MatrixXd tmp = V * C.middleCols(c0, len);
    C.middleCols(c0, len) = tmp;
  }, workers);
}

inline Eigen::VectorXd mode_eigenvalues(const FemSpace& space, const SolveOptions& opt) {
  if (opt.zero_stiffness) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.dof()));
  return space.eigenpairs().values;
}

}  // namespace detail

inline FieldTrajectory solve_dg(const FemSpace& space, const GradedMesh& mesh, double alpha, const Eigen::VectorXd& u0,
                                const SolveOptions& opt = {}) {
  detail::check_initial(space, u0);
  const KernelOrder order(alpha, WeightKind::Diffusion);
  const std::size_t J = mesh.intervals();
  const auto n = static_cast<Eigen::Index>(space.dof());
  HistoryKernel kernel(mesh, order, n, opt.block, opt.workers);
  Eigen::VectorXd h(n), x(n);

  if (opt.backend == Backend::Spectral) {
    const Eigen::VectorXd lambda = detail::mode_eigenvalues(space, opt);
    const auto& V = space.eigenpairs().vectors;
    const Eigen::VectorXd c0 = V.transpose() * space.mass().apply(u0);
    for (std::size_t m = 1; m <= J; ++m) {
      const double w = diagonal_weight(mesh, order, m);
      const double tau = mesh.step(m);
      kernel.history(m, h);
      // x = c_m - c0
      x = ((w * c0 + h).array() / (w + lambda.array() * tau)).matrix() - c0;
      kernel.store(m, x);
    }
    Eigen::MatrixXd C = kernel.release();
    C.colwise() += c0;
    detail::to_nodal(V, C, opt.workers);
    return FieldTrajectory(mesh, space, Scheme::DG, std::move(C));
  }

  const SymTridiagonal& M = space.mass();
  const SymTridiagonal& K = space.stiffness();
  const double kscale = opt.zero_stiffness ? 0.0 : 1.0;
  std::vector<double> work;
  Eigen::VectorXd U(n);
  for (std::size_t m = 1; m <= J; ++m) {
    const double w = diagonal_weight(mesh, order, m);
    const double tau = mesh.step(m);
    kernel.history(m, h);
    const Eigen::VectorXd rhs = M.apply(w * u0 + h);
    solve_tridiagonal(M, w, K, kscale * tau, rhs.data(), U.data(), work);
    kernel.store(m, U - u0);
  }
  Eigen::MatrixXd S = kernel.release();
  S.colwise() += u0;
  return FieldTrajectory(mesh, space, Scheme::DG, std::move(S));
}

inline FieldTrajectory solve_pg(const FemSpace& space, const GradedMesh& mesh, double alpha, const Eigen::VectorXd& u0,
                                const SolveOptions& opt = {}) {
  detail::check_initial(space, u0);
  const KernelOrder order(alpha, WeightKind::Wave);
  const std::size_t J = mesh.intervals();
  const auto n = static_cast<Eigen::Index>(space.dof());
  HistoryKernel kernel(mesh, order, n, opt.block, opt.workers);
  Eigen::VectorXd h(n);
  Eigen::MatrixXd S(n, static_cast<Eigen::Index>(J + 1));

  if (opt.backend == Backend::Spectral) {
    const Eigen::VectorXd lambda = detail::mode_eigenvalues(space, opt);
    const auto& V = space.eigenpairs().vectors;
    S.col(0) = V.transpose() * space.mass().apply(u0);
    for (std::size_t m = 1; m <= J; ++m) {
      const double tau = mesh.step(m);
      const double a = diagonal_weight(mesh, order, m) / tau;
      kernel.history(m, h);
      const auto prev = S.col(static_cast<Eigen::Index>(m - 1));
      const Eigen::ArrayXd b = 0.5 * tau * lambda.array();
      S.col(static_cast<Eigen::Index>(m)) = (((a - b) * prev.array() + h.array()) / (a + b)).matrix();
      kernel.store(m, (S.col(static_cast<Eigen::Index>(m)) - prev) / tau);
    }
    detail::to_nodal(V, S, opt.workers);
    S.col(0) = u0;  // exact initial datum
    return FieldTrajectory(mesh, space, Scheme::PG, std::move(S));
  }

  const SymTridiagonal& M = space.mass();
  const SymTridiagonal& K = space.stiffness();
  const double kscale = opt.zero_stiffness ? 0.0 : 1.0;
  std::vector<double> work;
  Eigen::VectorXd U(n);
  S.col(0) = u0;
  for (std::size_t m = 1; m <= J; ++m) {
    const double tau = mesh.step(m);
    const double a = diagonal_weight(mesh, order, m) / tau;
    kernel.history(m, h);
    const Eigen::VectorXd prev = S.col(static_cast<Eigen::Index>(m - 1));
    const Eigen::VectorXd rhs = M.apply(a * prev + h) - (0.5 * tau * kscale) * K.apply(prev);
    solve_tridiagonal(M, a, K, 0.5 * tau * kscale, rhs.data(), U.data(), work);
    S.col(static_cast<Eigen::Index>(m)) = U;
    kernel.store(m, (U - prev) / tau);
  }
  return FieldTrajectory(mesh, space, Scheme::PG, std::move(S));
}

inline FieldTrajectory solve(Scheme scheme, const FemSpace& space, const GradedMesh& mesh, double alpha,
                             const Eigen::VectorXd& u0, const SolveOptions& opt = {}) {
  return scheme == Scheme::DG ? solve_dg(space, mesh, alpha, u0, opt) : solve_pg(space, mesh, alpha, u0, opt);
}

/// Interior samples per coarse interval for E1Sampling::Sampled, in addition
/// to the left limit at each coarse node.
inline constexpr int kE1InteriorSamples = 4;

/// How error_E1 discretizes the supremum in time.
///   Merged: both trajectories are piecewise constant, so the difference is
///     constant on every cell of the union of the two node sets; the maximum
///     over those cells is the supremum itself.
///   Sampled: coarse left limits plus kE1InteriorSamples interior points per
///     coarse interval. Misses the fine reference cells near t = 0, where the
///     reference still moves, and underestimates the supremum there.
enum class E1Sampling { Merged, Sampled };

inline const char* to_string(E1Sampling s) { return s == E1Sampling::Merged ? "merged-grid" : "sampled"; }

namespace detail {

inline void check_comparable(const FieldTrajectory& U, const FieldTrajectory& Ustar, Scheme scheme) {
  require(U.scheme() == scheme && Ustar.scheme() == scheme, std::string("metric expects ") + to_string(scheme) + " trajectories");
  require(U.space().cells() == Ustar.space().cells(), "trajectories live on different FEM spaces");
  require(U.mesh().horizon() == Ustar.mesh().horizon(), "trajectories have different horizons");
}

}  // namespace detail

/// sup_t ||U(t) - U*(t)||_{L^2} for two DG trajectories on the same space.
inline double error_E1(const FieldTrajectory& U, const FieldTrajectory& Ustar, E1Sampling sampling = E1Sampling::Merged) {
  detail::check_comparable(U, Ustar, Scheme::DG);
  const auto& mesh = U.mesh();
  const auto& space = U.space();
  double err = 0.0;
  if (sampling == E1Sampling::Merged) {
    const auto a = mesh.nodes();
    const auto b = Ustar.mesh().nodes();
    std::vector<double> cuts;
    cuts.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(cuts));
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::size_t i = 1, k = 1;  // current interval of U and of U*
    for (std::size_t c = 1; c < cuts.size(); ++c) {
      const double mid = 0.5 * (cuts[c - 1] + cuts[c]);
      while (mesh.node(i) < mid) ++i;
      while (Ustar.mesh().node(k) < mid) ++k;
      err = std::max(err, space.norm(U.states().col(static_cast<Eigen::Index>(i - 1)) -
                                     Ustar.states().col(static_cast<Eigen::Index>(k - 1))));
    }
    return err;
  }
  for (std::size_t m = 1; m <= mesh.intervals(); ++m) {
    const Eigen::VectorXd Um = U.state(m);
    const double a = mesh.node(m - 1);
    const double b = mesh.node(m);
    err = std::max(err, space.norm(Um - Ustar.at(b)));
    for (int i = 1; i <= kE1InteriorSamples; ++i) {
      const double t = a + (b - a) * i / (kE1InteriorSamples + 1.0);
      err = std::max(err, space.norm(Um - Ustar.at(t)));
    }
  }
  return err;
}

/// max_{1 <= j <= J} ||U(t_j) - U*(t_j)||_{L^2} over the coarse nodes, U*
/// interpolated linearly on its own mesh.
inline double error_E2(const FieldTrajectory& U, const FieldTrajectory& Ustar) {
  detail::check_comparable(U, Ustar, Scheme::PG);
  const auto& mesh = U.mesh();
  double err = 0.0;
  for (std::size_t m = 1; m <= mesh.intervals(); ++m)
    err = std::max(err, U.space().norm(U.state(m) - Ustar.at(mesh.node(m))));
  return err;
}

}  // namespace fracgal
