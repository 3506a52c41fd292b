#pragma once

// Blocked evaluation of the history sums h_m = sum_{j<m} d_{m,j} X_j for a
// sequence of vectors X_1, X_2, ... produced one step at a time.
//
// Steps are grouped into blocks of B. When a block [m0, m0+B) opens, the
// contribution of every completed step j < m0 to every step of the block is
// one matrix product X[:, <m0] * D, split into fixed row chunks that run in
// parallel. Steps inside the block add their in-block terms in ascending j.
// Chunk sizes never depend on the worker count, so results are identical for
// any number of threads.

#include <algorithm>
#include <cstddef>

#include <Eigen/Dense>

#include "fracgal/errors.hpp"
#include "fracgal/frac_weights.hpp"
#include "fracgal/parallel.hpp"
#include "fracgal/temporal_grid.hpp"

namespace fracgal {

class HistoryKernel {
 public:
  static constexpr std::size_t kDefaultBlock = 64;
  static constexpr Eigen::Index kRowChunk = 64;

  HistoryKernel(const GradedMesh& mesh, const KernelOrder& order, Eigen::Index rows,
                std::size_t block = kDefaultBlock, unsigned workers = worker_count())
      : mesh_(&mesh), order_(order), rows_(rows), block_(block), workers_(workers) {
    detail::require(rows >= 1, "history kernel needs at least one component");
    detail::require(block >= 1, "history block size must be positive");
    const auto J = static_cast<Eigen::Index>(mesh.intervals());
    X_.resize(rows, J);
    coeff_.resize(J, static_cast<Eigen::Index>(block));
    far_.resize(rows, static_cast<Eigen::Index>(block));
  }

  Eigen::Index rows() const noexcept { return rows_; }

  /// out = sum_{j<m} d_{m,j} X_j. Steps must be visited in order m = 1, 2, ...
  /// with store(m, .) called before history(m + 1, .).
  void history(std::size_t m, Eigen::Ref<Eigen::VectorXd> out) {
    detail::require(m == stored_ + 1, "history kernel: steps must be visited in order");
    if (m == 1 || m >= block_start_ + block_) open_block(m);
    const auto col = static_cast<Eigen::Index>(m - block_start_);
    out = far_.col(col);
    for (std::size_t j = block_start_; j < m; ++j)
      out.noalias() += coeff_(static_cast<Eigen::Index>(j - 1), col) * X_.col(static_cast<Eigen::Index>(j - 1));
  }

  void store(std::size_t m, const Eigen::Ref<const Eigen::VectorXd>& x) {
    detail::require(m == stored_ + 1, "history kernel: steps must be stored in order");
    X_.col(static_cast<Eigen::Index>(m - 1)) = x;
    stored_ = m;
  }

  /// X_1..X_J as columns.
  const Eigen::MatrixXd& stored() const noexcept { return X_; }
  Eigen::MatrixXd release() { return std::move(X_); }

 private:
  void open_block(std::size_t m0) {
    block_start_ = m0;
    const std::size_t J = mesh_->intervals();
    const std::size_t width = std::min(block_, J - m0 + 1);
    // coefficients d_{m,j} for m in the block and every j < m
    parallel_for(width, [&](std::size_t i) {
      const std::size_t m = m0 + i;
      auto column = coeff_.col(static_cast<Eigen::Index>(i));
      for (std::size_t j = 1; j < m; ++j) column[static_cast<Eigen::Index>(j - 1)] = history_coefficient(*mesh_, order_, m, j);
    }, workers_);
    const auto done = static_cast<Eigen::Index>(m0 - 1);
    const auto w = static_cast<Eigen::Index>(width);
    if (done == 0) {
      far_.leftCols(w).setZero();
      return;
    }
    const Eigen::Index chunks = (rows_ + kRowChunk - 1) / kRowChunk;
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t c) {
      const Eigen::Index r0 = static_cast<Eigen::Index>(c) * kRowChunk;
      const Eigen::Index len = std::min(kRowChunk, rows_ - r0);
      far_.block(r0, 0, len, w).noalias() = X_.block(r0, 0, len, done) * coeff_.block(0, 0, done, w);
    }, workers_);
  }

  const GradedMesh* mesh_;
  KernelOrder order_;
  Eigen::Index rows_;
  std::size_t block_;
  unsigned workers_;
  std::size_t block_start_ = 0;
  std::size_t stored_ = 0;
  Eigen::MatrixXd X_;      // rows x J
  Eigen::MatrixXd coeff_;  // J x block: d_{block_start+i, j+1}
  Eigen::MatrixXd far_;    // rows x block
};

}  // namespace fracgal
