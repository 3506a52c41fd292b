// fracgal: convergence studies, artifact comparison and oracle fuzzing.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracgal/fracgal.hpp"

namespace ex = fracgal::experiments;

namespace {

struct RunFlags {
  std::string config, experiment, backend, profile, out, e1_sampling, scalar_metric;
  std::vector<double> sigma;
  std::vector<std::size_t> grid_J;
  double alpha = 0, ref_sigma = 0, lambda = 0, nu = 0;
  std::size_t ref_J = 0, cells = 0;
  std::uint64_t seed = 0;
  bool yes_full = false, any_J = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--config", f.config, "JSON settings file; flags override its fields")->check(CLI::ExistingFile);
  cmd->add_option("--experiment", f.experiment, "diffusion | wave | scalar-diffusion | scalar-wave | oracles");
  cmd->add_option("--alpha", f.alpha, "fractional order");
  cmd->add_option("--sigma", f.sigma, "grading exponents of the studied meshes")->delimiter(',');
  cmd->add_option("--grid-J", f.grid_J, "interval counts of the studied meshes")->delimiter(',');
  cmd->add_option("--ref-J", f.ref_J, "interval count J* of the reference mesh");
  cmd->add_option("--ref-sigma", f.ref_sigma, "grading exponent of the reference mesh");
  cmd->add_option("--cells", f.cells, "spatial cells");
  cmd->add_option("--backend", f.backend, "spectral | direct");
  cmd->add_option("--profile", f.profile, "ci | full");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--seed", f.seed, "oracle seed");
  cmd->add_option("--lambda", f.lambda, "mode eigenvalue of the scalar studies");
  cmd->add_option("--nu", f.nu, "regularity index used for the expected orders");
  cmd->add_option("--e1-sampling", f.e1_sampling, "merged-grid | sampled");
  cmd->add_option("--scalar-metric", f.scalar_metric, "max-node | sup-time");
  cmd->add_flag("--any-J", f.any_J, "allow interval counts that are not powers of two");
  cmd->add_flag("--yes-full", f.yes_full, "confirm a full-profile run");
}

ex::RunSettings settings_from(const CLI::App* cmd, const RunFlags& f) {
  ex::RunSettings s;
  if (!f.config.empty()) s = ex::load_settings(f.config);
  ex::RunSettings o;
  auto given = [&](const char* name) { return cmd->count(name) > 0; };
  if (given("--experiment")) o.experiment = ex::parse_experiment(f.experiment);
  if (given("--alpha")) o.alpha = f.alpha;
  if (given("--sigma")) o.sigma = f.sigma;
  if (given("--grid-J")) o.grid_J = f.grid_J;
  if (given("--ref-J")) o.ref_J = f.ref_J;
  if (given("--ref-sigma")) o.ref_sigma = f.ref_sigma;
  if (given("--cells")) o.n_cells = f.cells;
  if (given("--backend")) o.backend = ex::parse_backend(f.backend);
  if (given("--profile")) o.profile = ex::parse_profile(f.profile);
  if (given("--out")) o.out = f.out;
  if (given("--seed")) o.seed = f.seed;
  if (given("--lambda")) o.lambda = f.lambda;
  if (given("--nu")) o.nu = f.nu;
  if (given("--e1-sampling")) o.e1_sampling = ex::parse_e1_sampling(f.e1_sampling);
  if (given("--scalar-metric")) o.scalar_metric = ex::parse_scalar_metric(f.scalar_metric);
  if (f.any_J) o.any_J = true;
  if (f.yes_full) o.yes_full = true;
  s.merge(o);
  return s;
}

int do_run(const ex::RunSettings& s) {
  const auto config = ex::resolve(s);
  const auto result = ex::run(config);
  std::cout << result.markdown << "\n" << ex::summary(result);
  return result.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded-mesh solvers for time-fractional evolution equations"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "run a convergence study and write CSV and Markdown tables");
  add_run_flags(run_cmd, run_flags);

  std::string path_a, path_b;
  double tolerance = 1e-12;
  auto* compare_cmd = app.add_subcommand("compare", "compare two CSV artifacts cell by cell");
  compare_cmd->add_option("a", path_a, "first CSV")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("b", path_b, "second CSV")->required()->check(CLI::ExistingFile);
  compare_cmd->add_option("--tolerance", tolerance, "largest accepted relative difference");

  RunFlags oracle_flags;
  auto* oracle_cmd = app.add_subcommand("oracles", "run the inequality oracles");
  oracle_cmd->add_option("--seed", oracle_flags.seed, "seed");
  oracle_cmd->add_option("--out", oracle_flags.out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return do_run(settings_from(run_cmd, run_flags));
    if (*compare_cmd) {
      const auto result = ex::compare_reports(path_a, path_b, tolerance);
      std::cout << ex::describe(result);
      return result.ok() ? 0 : 1;
    }
    if (*oracle_cmd) {
      ex::RunSettings s;
      s.experiment = ex::Experiment::Oracles;
      if (oracle_cmd->count("--seed")) s.seed = oracle_flags.seed;
      if (oracle_cmd->count("--out")) s.out = oracle_flags.out;
      return do_run(s);
    }
  } catch (const ex::ProfileRefused& e) {
    std::cerr << "refused: " << e.what() << "\n";
    return 3;
  } catch (const fracgal::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
