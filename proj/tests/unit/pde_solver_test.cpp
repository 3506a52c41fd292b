#include <cmath>

#include <gtest/gtest.h>

#include "fracgal/pde_solver.hpp"
#include "fracgal/scalar_steppers.hpp"

using namespace fracgal;

namespace {

SolveOptions with(Backend b, unsigned workers = 1) {
  SolveOptions o;
  o.backend = b;
  o.workers = workers;
  return o;
}

Eigen::VectorXd rough_datum(const FemSpace& space) {
  return l2_project([](double x) { return std::pow(x, 0.51) * (1.0 - x); }, space);
}

double max_state_gap(const FieldTrajectory& a, const FieldTrajectory& b) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < a.states().cols(); ++c)
    worst = std::max(worst, a.space().norm(a.states().col(c) - b.states().col(c)));
  return worst;
}

}  // namespace

TEST(PdeSolver, ZeroDataGivesZero) {
  const FemSpace space(16);
  const GradedMesh mesh(20, 2.0, 1.0);
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(15);
  for (auto b : {Backend::Spectral, Backend::Direct}) {
    EXPECT_EQ(solve_dg(space, mesh, 0.5, zero, with(b)).states().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(solve_pg(space, mesh, 1.5, zero, with(b)).states().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(PdeSolver, EigenmodeFollowsScalarRecurrence) {
  const FemSpace space(32);
  const auto& ep = space.eigenpairs();
  const GradedMesh mesh(40, 3.0, 1.0);
  for (int k : {0, 5, 30}) {
    const Eigen::VectorXd phi = ep.vectors.col(k);
    const double lambda = ep.values[k];
    // the datum has unit norm, so the floor is an absolute rounding allowance
    for (auto b : {Backend::Spectral, Backend::Direct}) {
      const auto U = solve_dg(space, mesh, 0.6, phi, with(b));
      const auto s = dg_scalar_solve(mesh, 0.6, lambda, 1.0);
      for (std::size_t m = 1; m <= 40; ++m) {
        const double gap = space.norm(U.state(m) - s.at_node(m) * phi);
        EXPECT_LE(gap, 1e-13 * (1.0 + std::abs(s.at_node(m)))) << to_string(b) << " k " << k << " m " << m;
      }
      const auto W = solve_pg(space, mesh, 1.4, phi, with(b));
      const auto w = pg_scalar_solve(mesh, 1.4, lambda, 1.0);
      for (std::size_t m = 0; m <= 40; ++m) {
        const double gap = space.norm(W.state(m) - w.at_node(m) * phi);
        EXPECT_LE(gap, 1e-12 * (1.0 + std::abs(w.at_node(m)))) << to_string(b) << " k " << k << " m " << m;
      }
    }
  }
}

TEST(PdeSolver, BackendsAgree) {
  const FemSpace space(64);
  const GradedMesh mesh(128, 2.0, 1.0);
  const Eigen::VectorXd u0 = rough_datum(space);
  for (double a : {0.2, 0.5, 0.8}) {
    const auto s = solve_dg(space, mesh, a, u0, with(Backend::Spectral));
    const auto d = solve_dg(space, mesh, a, u0, with(Backend::Direct));
    EXPECT_LE(max_state_gap(s, d), 1e-10) << a;
  }
  for (double a : {1.2, 1.5, 1.8}) {
    const auto s = solve_pg(space, mesh, a, u0, with(Backend::Spectral));
    const auto d = solve_pg(space, mesh, a, u0, with(Backend::Direct));
    EXPECT_LE(max_state_gap(s, d), 1e-10) << a;
  }
}

TEST(PdeSolver, Linearity) {
  const FemSpace space(24);
  const GradedMesh mesh(30, 2.0, 1.0);
  const Eigen::VectorXd a = rough_datum(space);
  const Eigen::VectorXd b = Eigen::VectorXd::LinSpaced(23, -1.0, 1.0);
  for (auto scheme : {Scheme::DG, Scheme::PG}) {
    const double alpha = scheme == Scheme::DG ? 0.5 : 1.5;
    const auto Ua = solve(scheme, space, mesh, alpha, a, with(Backend::Direct));
    const auto Ub = solve(scheme, space, mesh, alpha, b, with(Backend::Direct));
    const auto Uab = solve(scheme, space, mesh, alpha, 2.0 * a - 3.0 * b, with(Backend::Direct));
    const Eigen::MatrixXd combo = 2.0 * Ua.states() - 3.0 * Ub.states();
    EXPECT_LE((Uab.states() - combo).cwiseAbs().maxCoeff(), 1e-12 * combo.cwiseAbs().maxCoeff());
  }
}

TEST(PdeSolver, ZeroStiffnessKeepsData) {
  const FemSpace space(16);
  const GradedMesh mesh(25, 2.5, 1.0);
  const Eigen::VectorXd u0 = rough_datum(space);
  for (auto b : {Backend::Spectral, Backend::Direct}) {
    SolveOptions o = with(b);
    o.zero_stiffness = true;
    for (auto scheme : {Scheme::DG, Scheme::PG}) {
      const auto U = solve(scheme, space, mesh, scheme == Scheme::DG ? 0.4 : 1.6, u0, o);
      for (Eigen::Index c = 0; c < U.states().cols(); ++c)
        EXPECT_LE((U.states().col(c) - u0).cwiseAbs().maxCoeff(), 1e-13) << to_string(b);
    }
  }
}

TEST(PdeSolver, PgStartsAtTheDatum) {
  const FemSpace space(16);
  const GradedMesh mesh(10, 2.0, 1.0);
  const Eigen::VectorXd u0 = rough_datum(space);
  EXPECT_EQ(solve_pg(space, mesh, 1.5, u0, with(Backend::Direct)).state(0), u0);
  EXPECT_LE((solve_pg(space, mesh, 1.5, u0, with(Backend::Spectral)).state(0) - u0).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(PdeSolver, RejectsWrongDimension) {
  const FemSpace space(8);
  const GradedMesh mesh(4, 1.0, 1.0);
  EXPECT_THROW(solve_dg(space, mesh, 0.5, Eigen::VectorXd::Zero(8)), ValidationError);
  EXPECT_THROW(solve_pg(space, mesh, 0.5, Eigen::VectorXd::Zero(7)), ValidationError);
}

TEST(PdeSolver, WorkerCountDoesNotChangeBits) {
  const FemSpace space(64);
  const GradedMesh mesh(300, 2.0, 1.0);
  const Eigen::VectorXd u0 = rough_datum(space);
  for (auto b : {Backend::Spectral, Backend::Direct}) {
    SolveOptions one = with(b, 1), four = with(b, 4);
    one.block = four.block = 32;
    EXPECT_EQ(solve_dg(space, mesh, 0.5, u0, one).states(), solve_dg(space, mesh, 0.5, u0, four).states());
    EXPECT_EQ(solve_pg(space, mesh, 1.5, u0, one).states(), solve_pg(space, mesh, 1.5, u0, four).states());
  }
}

TEST(PdeSolver, HistoryBlockSizeIsInvisible) {
  const FemSpace space(16);
  const GradedMesh mesh(90, 2.0, 1.0);
  const Eigen::VectorXd u0 = rough_datum(space);
  SolveOptions small = with(Backend::Spectral), large = with(Backend::Spectral);
  small.block = 7;
  large.block = 512;
  const auto a = solve_dg(space, mesh, 0.5, u0, small), b = solve_dg(space, mesh, 0.5, u0, large);
  EXPECT_LE((a.states() - b.states()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ErrorMetrics, IdenticalRunsAndBounds) {
  const FemSpace space(16);
  const Eigen::VectorXd u0 = rough_datum(space);
  const auto ref = solve_dg(space, GradedMesh(256, 4.0, 1.0), 0.5, u0);
  const auto U = solve_dg(space, GradedMesh(16, 4.0, 1.0), 0.5, u0);
  EXPECT_EQ(error_E1(ref, ref), 0.0);
  const double merged = error_E1(U, ref, E1Sampling::Merged);
  const double sampled = error_E1(U, ref, E1Sampling::Sampled);
  EXPECT_GT(merged, 0.0);
  EXPECT_LE(sampled, merged * (1.0 + 1e-15));
  // the supremum dominates the error at every coarse node
  for (std::size_t m = 1; m <= 16; ++m) EXPECT_LE(space.norm(U.state(m) - ref.at(U.mesh().node(m))), merged * (1.0 + 1e-15));

  const auto Wref = solve_pg(space, GradedMesh(128, 2.0, 1.0), 1.5, u0);
  EXPECT_EQ(error_E2(Wref, Wref), 0.0);
  EXPECT_GT(error_E2(solve_pg(space, GradedMesh(8, 2.0, 1.0), 1.5, u0), Wref), 0.0);
}

TEST(ErrorMetrics, RejectMismatchedTrajectories) {
  const FemSpace a(16), b(8);
  const GradedMesh mesh(8, 2.0, 1.0);
  const auto U = solve_dg(a, mesh, 0.5, Eigen::VectorXd::Ones(15));
  const auto V = solve_dg(b, mesh, 0.5, Eigen::VectorXd::Ones(7));
  const auto W = solve_pg(a, mesh, 1.5, Eigen::VectorXd::Ones(15));
  EXPECT_THROW(error_E1(U, V), ValidationError);
  EXPECT_THROW(error_E1(U, W), ValidationError);
  EXPECT_THROW(error_E2(U, W), ValidationError);
  const auto Wlong = solve_pg(a, GradedMesh(8, 2.0, 2.0), 1.5, Eigen::VectorXd::Ones(15));
  EXPECT_THROW(error_E2(W, Wlong), ValidationError);
}

TEST(FieldTrajectory, Evaluation) {
  const FemSpace space(4);
  const GradedMesh mesh(2, 1.0, 1.0);
  Eigen::MatrixXd S(3, 3);
  S << 0, 1, 2, 0, 2, 4, 0, 3, 6;
  const FieldTrajectory pg(mesh, space, Scheme::PG, S);
  EXPECT_DOUBLE_EQ(pg.at(0.25)[2], 1.5);
  EXPECT_EQ(pg.state(0), Eigen::VectorXd::Zero(3));
  const FieldTrajectory dg(mesh, space, Scheme::DG, S.rightCols(2));
  EXPECT_EQ(dg.at(0.5)[0], 1.0);
  EXPECT_EQ(dg.at(0.50001)[0], 2.0);
  EXPECT_THROW(dg.state(0), ValidationError);
  EXPECT_THROW(FieldTrajectory(mesh, space, Scheme::DG, S), ValidationError);
}
