// Prints the discrete Green function G^m of the diffusion scheme on a graded
// mesh together with the residual of its defining system.
//
//   green_profile [alpha] [lambda] [J] [sigma] [m]

#include <cstdio>
#include <cstdlib>

#include "fracgal/fracgal.hpp"

int main(int argc, char** argv) {
  using namespace fracgal;
  const double alpha = argc > 1 ? std::atof(argv[1]) : 0.5;
  const double lambda = argc > 2 ? std::atof(argv[2]) : 10.0;
  const std::size_t J = argc > 3 ? std::strtoul(argv[3], nullptr, 10) : 16;
  const double sigma = argc > 4 ? std::atof(argv[4]) : 2.0;
  const std::size_t m = argc > 5 ? std::strtoul(argv[5], nullptr, 10) : J;

  try {
    const GradedMesh mesh(J, sigma, 1.0);
    const auto G = green_diffusion(mesh, alpha, lambda, m);
    std::printf("G^%zu, alpha = %g, lambda = %g, J = %zu, sigma = %g\n\n", m, alpha, lambda, J, sigma);
    std::printf("%4s %12s %22s %12s\n", "k", "t_k", "G_k", "residual");
    for (std::size_t k = 1; k <= m; ++k)
      std::printf("%4zu %12.6g %22.15e %12.2e\n", k, mesh.node(k), G[k], green_residual(mesh, G, k));
    const auto id = telescoped_identity(mesh, G);
    std::printf("\ntelescoped identity: %.15g vs %.15g (relative gap %.2e)\n", id.lhs, id.rhs, id.relative_gap());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  }
  return 0;
}
