// Decay of a single mode under the DG and PG schemes, against the exact
// Mittag-Leffler solution, on a uniform and a graded mesh.
//
//   mode_decay [alpha] [lambda] [J]

#include <cstdio>
#include <cstdlib>

#include "fracgal/fracgal.hpp"

int main(int argc, char** argv) {
  using namespace fracgal;
  const double alpha = argc > 1 ? std::atof(argv[1]) : 0.5;
  const double lambda = argc > 2 ? std::atof(argv[2]) : 1.0;
  const std::size_t J = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 64;
  const Scheme scheme = alpha < 1.0 ? Scheme::DG : Scheme::PG;
  const double graded = alpha < 1.0 ? 1.0 / alpha : 2.0 * (3.0 - alpha) / alpha;

  try {
    std::printf("%s scheme, alpha = %g, lambda = %g, J = %zu\n\n", to_string(scheme), alpha, lambda, J);
    std::printf("%10s %14s %14s %14s\n", "t", "exact", "uniform", "graded");
    const auto U1 = scalar_solve(scheme, GradedMesh(J, 1.0, 1.0), alpha, lambda, 1.0);
    const auto Ug = scalar_solve(scheme, GradedMesh(J, graded, 1.0), alpha, lambda, 1.0);
    for (double t : {1e-4, 1e-3, 1e-2, 0.1, 0.25, 0.5, 1.0})
      std::printf("%10.4g %14.8f %14.8f %14.8f\n", t, ml::mode_solution(lambda, alpha, t), U1(t), Ug(t));
    std::printf("\nmax nodal error: uniform %.3e, graded (sigma = %.3g) %.3e\n",
                scalar_error(U1, alpha, lambda, 1.0, ScalarMetric::MaxNode), graded,
                scalar_error(Ug, alpha, lambda, 1.0, ScalarMetric::MaxNode));
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
