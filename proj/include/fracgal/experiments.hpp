#pragma once

// Convergence studies at configurable scale, plus their CSV and Markdown
// artifacts.
//
// Settings arrive in two layers: a JSON document and command-line overrides,
// both parsed into RunSettings (every field optional). resolve() fills the
// profile- and experiment-dependent defaults and validates the result into a
// RunConfig, which is what run() consumes.

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "fracgal/analysis_oracles.hpp"
#include "fracgal/errors.hpp"
#include "fracgal/pde_solver.hpp"
#include "fracgal/report.hpp"
#include "fracgal/scalar_steppers.hpp"
#include "fracgal/spatial_fem.hpp"
#include "fracgal/temporal_grid.hpp"

namespace fracgal::experiments {

enum class Experiment { Diffusion, Wave, ScalarDiffusion, ScalarWave, Oracles };
enum class Profile { CI, Full };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::Diffusion: return "diffusion";
    case Experiment::Wave: return "wave";
    case Experiment::ScalarDiffusion: return "scalar-diffusion";
    case Experiment::ScalarWave: return "scalar-wave";
    case Experiment::Oracles: return "oracles";
  }
  return "?";
}

inline const char* to_string(Profile p) { return p == Profile::CI ? "ci" : "full"; }

inline Experiment parse_experiment(const std::string& s) {
  for (auto e : {Experiment::Diffusion, Experiment::Wave, Experiment::ScalarDiffusion, Experiment::ScalarWave,
                 Experiment::Oracles})
    if (s == to_string(e)) return e;
  throw ValidationError("unknown experiment '" + s + "' (diffusion, wave, scalar-diffusion, scalar-wave, oracles)");
}

inline Profile parse_profile(const std::string& s) {
  if (s == "ci") return Profile::CI;
  if (s == "full") return Profile::Full;
  throw ValidationError("unknown profile '" + s + "' (ci, full)");
}

inline Backend parse_backend(const std::string& s) {
  if (s == "spectral") return Backend::Spectral;
  if (s == "direct") return Backend::Direct;
  throw ValidationError("unknown backend '" + s + "' (spectral, direct)");
}

inline E1Sampling parse_e1_sampling(const std::string& s) {
  if (s == to_string(E1Sampling::Merged)) return E1Sampling::Merged;
  if (s == to_string(E1Sampling::Sampled)) return E1Sampling::Sampled;
  throw ValidationError("unknown E1 sampling '" + s + "' (merged-grid, sampled)");
}

inline ScalarMetric parse_scalar_metric(const std::string& s) {
  if (s == to_string(ScalarMetric::MaxNode)) return ScalarMetric::MaxNode;
  if (s == to_string(ScalarMetric::SupTime)) return ScalarMetric::SupTime;
  throw ValidationError("unknown scalar metric '" + s + "' (max-node, sup-time)");
}

/// Profile scales.
struct ProfileScale {
  std::size_t n_cells;
  std::size_t ref_J;
};

inline ProfileScale profile_scale(Profile p) { return p == Profile::CI ? ProfileScale{512, 8192} : ProfileScale{2048, 32768}; }

/// Unresolved settings; any field may be missing.
struct RunSettings {
  std::optional<Experiment> experiment;
  std::optional<double> alpha;
  std::optional<std::vector<double>> sigma;
  std::optional<std::vector<std::size_t>> grid_J;
  std::optional<std::size_t> ref_J;
  std::optional<double> ref_sigma;
  std::optional<std::size_t> n_cells;
  std::optional<Backend> backend;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<Profile> profile;
  std::optional<double> lambda;
  std::optional<double> nu;
  std::optional<E1Sampling> e1_sampling;
  std::optional<ScalarMetric> scalar_metric;
  std::optional<bool> any_J;
  std::optional<bool> yes_full;

  /// Fields set in `over` replace those here.
  void merge(const RunSettings& over) {
    auto take = [](auto& mine, const auto& theirs) {
      if (theirs) mine = theirs;
    };
    take(experiment, over.experiment);
    take(alpha, over.alpha);
    take(sigma, over.sigma);
    take(grid_J, over.grid_J);
    take(ref_J, over.ref_J);
    take(ref_sigma, over.ref_sigma);
    take(n_cells, over.n_cells);
    take(backend, over.backend);
    take(out, over.out);
    take(seed, over.seed);
    take(profile, over.profile);
    take(lambda, over.lambda);
    take(nu, over.nu);
    take(e1_sampling, over.e1_sampling);
    take(scalar_metric, over.scalar_metric);
    take(any_J, over.any_J);
    take(yes_full, over.yes_full);
  }
};

/// Reads a settings document. Unknown keys are rejected so that typos do not
/// silently fall back to defaults.
inline RunSettings settings_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  static const std::array<const char*, 17> known = {"experiment", "alpha", "sigma", "grid_J", "ref_J", "ref_sigma",
                                                    "cells", "backend", "out", "seed", "profile", "lambda",
                                                    "nu", "e1_sampling", "scalar_metric", "any_J", "yes_full"};
  for (const auto& item : j.items())
    if (std::find_if(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }) == known.end())
      throw ValidationError("unknown config key '" + item.key() + "'");
  RunSettings s;
  try {
    if (j.contains("experiment")) s.experiment = parse_experiment(j.at("experiment").get<std::string>());
    if (j.contains("alpha")) s.alpha = j.at("alpha").get<double>();
    if (j.contains("sigma")) s.sigma = j.at("sigma").get<std::vector<double>>();
    if (j.contains("grid_J")) s.grid_J = j.at("grid_J").get<std::vector<std::size_t>>();
    if (j.contains("ref_J")) s.ref_J = j.at("ref_J").get<std::size_t>();
    if (j.contains("ref_sigma")) s.ref_sigma = j.at("ref_sigma").get<double>();
    if (j.contains("cells")) s.n_cells = j.at("cells").get<std::size_t>();
    if (j.contains("backend")) s.backend = parse_backend(j.at("backend").get<std::string>());
    if (j.contains("out")) s.out = j.at("out").get<std::string>();
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("profile")) s.profile = parse_profile(j.at("profile").get<std::string>());
    if (j.contains("lambda")) s.lambda = j.at("lambda").get<double>();
    if (j.contains("nu")) s.nu = j.at("nu").get<double>();
    if (j.contains("e1_sampling")) s.e1_sampling = parse_e1_sampling(j.at("e1_sampling").get<std::string>());
    if (j.contains("scalar_metric")) s.scalar_metric = parse_scalar_metric(j.at("scalar_metric").get<std::string>());
    if (j.contains("any_J")) s.any_J = j.at("any_J").get<bool>();
    if (j.contains("yes_full")) s.yes_full = j.at("yes_full").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return s;
}

inline RunSettings load_settings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config " + path.string() + ": " + e.what());
  }
  return settings_from_json(j);
}

struct RunConfig {
  Experiment experiment = Experiment::Diffusion;
  double alpha = 0.5;
  std::vector<double> sigma;
  std::vector<std::size_t> grid_J;
  std::size_t ref_J = 0;
  double ref_sigma = 0.0;
  std::size_t n_cells = 0;
  Backend backend = Backend::Spectral;
  std::filesystem::path out = "fracgal-out";
  std::uint64_t seed = oracle::kRecordedSeed;
  Profile profile = Profile::CI;
  double lambda = 1.0;  // scalar experiments only
  double nu = 0.5;      // regularity index behind the expected orders
  E1Sampling e1_sampling = E1Sampling::Merged;
  ScalarMetric scalar_metric = ScalarMetric::MaxNode;
  bool any_J = false;
  bool yes_full = false;

  bool is_pde() const noexcept { return experiment == Experiment::Diffusion || experiment == Experiment::Wave; }
  bool is_diffusive() const noexcept {
    return experiment == Experiment::Diffusion || experiment == Experiment::ScalarDiffusion;
  }
};

/// The run was refused because the full profile needs explicit confirmation.
class ProfileRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::vector<std::size_t> powers_of_two(int from, int to) {
  std::vector<std::size_t> v;
  for (int e = from; e <= to; ++e) v.push_back(std::size_t{1} << e);
  return v;
}

/// Default grading exponents for the diffusive studies: 1, 1/alpha, 2/alpha.
inline std::vector<double> default_diffusive_sigmas(double alpha) {
  std::vector<double> s{1.0, 1.0 / alpha, 2.0 / alpha};
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

inline double wave_grading(double alpha) { return 2.0 * (3.0 - alpha) / alpha; }

/// Rough peak memory of a PDE run: reference states plus the history store.
inline double estimated_bytes(const RunConfig& c) {
  return 2.0 * 8.0 * static_cast<double>(c.n_cells - 1) * static_cast<double>(c.ref_J + 1);
}

inline RunConfig resolve(const RunSettings& s) {
  RunConfig c;
  c.experiment = s.experiment.value_or(Experiment::Diffusion);
  c.profile = s.profile.value_or(Profile::CI);
  const bool diffusive = c.is_diffusive();
  c.alpha = s.alpha.value_or(diffusive ? 0.5 : 1.5);
  if (c.experiment != Experiment::Oracles) {
    if (diffusive)
      detail::require(c.alpha > 0.0 && c.alpha < 1.0, "alpha must lie in (0,1) for this experiment");
    else
      detail::require(c.alpha > 1.0 && c.alpha < 2.0, "alpha must lie in (1,2) for this experiment");
  }
  const auto scale = profile_scale(c.profile);
  c.sigma = s.sigma.value_or(diffusive ? default_diffusive_sigmas(c.alpha) : std::vector<double>{wave_grading(c.alpha)});
  switch (c.experiment) {
    case Experiment::Diffusion: c.grid_J = s.grid_J.value_or(powers_of_two(7, 10)); break;
    case Experiment::Wave: c.grid_J = s.grid_J.value_or(powers_of_two(6, 9)); break;
    case Experiment::ScalarDiffusion: c.grid_J = s.grid_J.value_or(powers_of_two(6, 11)); break;
    case Experiment::ScalarWave: c.grid_J = s.grid_J.value_or(powers_of_two(6, 10)); break;
    case Experiment::Oracles: break;
  }
  c.ref_J = s.ref_J.value_or(scale.ref_J);
  c.ref_sigma = s.ref_sigma.value_or(diffusive ? 2.0 / c.alpha : wave_grading(c.alpha));
  c.n_cells = s.n_cells.value_or(scale.n_cells);
  c.backend = s.backend.value_or(Backend::Spectral);
  if (s.out) c.out = *s.out;
  c.seed = s.seed.value_or(oracle::kRecordedSeed);
  c.lambda = s.lambda.value_or(1.0);
  c.nu = s.nu.value_or(c.experiment == Experiment::Diffusion ? 0.5 : 1.0);
  c.e1_sampling = s.e1_sampling.value_or(E1Sampling::Merged);
  c.scalar_metric = s.scalar_metric.value_or(ScalarMetric::MaxNode);
  c.any_J = s.any_J.value_or(false);
  c.yes_full = s.yes_full.value_or(false);

  if (c.experiment == Experiment::Oracles) return c;
  check_grid_list(c.grid_J);
  detail::require(!c.sigma.empty(), "sigma list is empty");
  for (double sg : c.sigma) detail::require(sg >= 1.0 && std::isfinite(sg), "every sigma must be finite and >= 1");
  if (!c.any_J)
    for (std::size_t J : c.grid_J)
      detail::require(is_power_of_two(J), "J = " + std::to_string(J) + " is not a power of two (pass any_J to allow it)");
  detail::require(std::isfinite(c.lambda) && c.lambda >= 0.0, "lambda must be finite and non-negative");
  detail::require(c.nu > 0.0 && c.nu <= 1.0, "nu must lie in (0,1]");
  if (c.is_pde()) {
    detail::require(c.ref_J > c.grid_J.back(), "reference J* must exceed every J of the study");
    detail::require(c.ref_sigma >= 1.0 && std::isfinite(c.ref_sigma), "reference sigma must be finite and >= 1");
    detail::require(c.n_cells >= 2, "cells must be at least 2");
    if (c.profile == Profile::Full && !c.yes_full) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.1f GB", estimated_bytes(c) / 1e9);
      throw ProfileRefused(std::string("full profile needs about ") + buf +
                           " and hours of single-core time for the J* = " + std::to_string(c.ref_J) +
                           " reference; pass --yes-full to run it");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Formatting

/// Shortest decimal that reads back to the same double.
inline std::string shortest(double x) {
  std::array<char, 32> buf{};
  const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), r.ptr);
}

/// 1.36e-1 style: three significant digits, exponent without padding.
inline std::string sci3(double x) {
  if (x == 0.0) return "0.00e0";
  if (!std::isfinite(x)) return shortest(x);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  std::string s(buf);
  const auto e = s.find('e');
  const int exp = std::stoi(s.substr(e + 1));
  return s.substr(0, e) + "e" + std::to_string(exp);
}

inline std::string fixed2(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

inline std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Hash of every field that changes the numbers: not the output path, the
/// profile name (its effects are in n_cells and J*) or the confirmation flag.
inline std::string fingerprint(const RunConfig& c) {
  std::ostringstream s;
  s << "experiment=" << to_string(c.experiment) << ";alpha=" << shortest(c.alpha) << ";sigma=";
  for (double v : c.sigma) s << shortest(v) << ',';
  s << ";J=";
  for (auto J : c.grid_J) s << J << ',';
  s << ";seed=" << c.seed;
  switch (c.experiment) {
    case Experiment::Diffusion:
    case Experiment::Wave:
      s << ";ref_J=" << c.ref_J << ";ref_sigma=" << shortest(c.ref_sigma) << ";cells=" << c.n_cells
        << ";backend=" << to_string(c.backend);
      if (c.experiment == Experiment::Diffusion) s << ";e1=" << to_string(c.e1_sampling);
      break;
    case Experiment::ScalarDiffusion:
    case Experiment::ScalarWave:
      s << ";lambda=" << shortest(c.lambda) << ";metric=" << to_string(c.scalar_metric);
      break;
    case Experiment::Oracles: break;
  }
  return fnv1a_hex(s.str());
}

inline std::string metric_name(const RunConfig& c) {
  switch (c.experiment) {
    case Experiment::Diffusion: return "E1";
    case Experiment::Wave: return "E2";
    default: return std::string("scalar-") + to_string(c.scalar_metric);
  }
}

/// Order the theory predicts for one study, if it predicts one.
inline std::optional<double> expected_order(const RunConfig& c, double sigma) {
  switch (c.experiment) {
    case Experiment::Diffusion: return std::min(sigma * c.nu * c.alpha, 1.0);
    case Experiment::ScalarDiffusion: return std::min(sigma * c.alpha, 1.0);
    case Experiment::Wave:
    case Experiment::ScalarWave:
      if (c.nu > 0.5 && sigma * (1.0 + 1e-12) >= (3.0 - c.alpha) / (c.alpha * (c.nu - 0.5))) return 3.0 - c.alpha;
      return std::nullopt;
    case Experiment::Oracles: return std::nullopt;
  }
  return std::nullopt;
}

inline constexpr double kOrderTolerance = 0.15;

inline std::string csv_table(const RunConfig& c, const std::vector<ConvergenceReport>& reports) {
  const std::string fp = fingerprint(c);
  std::string out = "sigma,J,error,order,metric,fingerprint\r\n";
  for (const auto& r : reports)
    for (const auto& row : r.rows) {
      out += csv_field(shortest(r.sigma)) + ',' + std::to_string(row.J) + ',' + csv_field(shortest(row.error)) + ',' +
             (row.order ? csv_field(shortest(*row.order)) : std::string()) + ',' + csv_field(r.metric) + ',' +
             csv_field(fp) + "\r\n";
    }
  return out;
}

inline std::string oracle_csv(const RunConfig& c, const std::vector<oracle::OracleOutcome>& outcomes) {
  const std::string fp = fingerprint(c);
  std::string out = "check,samples,redrawn,violations,worst_margin,passed,seed,fingerprint\r\n";
  for (const auto& o : outcomes)
    out += csv_field(o.check) + ',' + std::to_string(o.samples) + ',' + std::to_string(o.redrawn) + ',' +
           std::to_string(o.violations) + ',' + shortest(o.worst_margin) + ',' + (o.passed() ? "true" : "false") +
           ',' + std::to_string(o.seed) + ',' + fp + "\r\n";
  return out;
}

inline std::string header_lines(const RunConfig& c) {
  std::ostringstream s;
  s << "<!-- fingerprint " << fingerprint(c) << " -->\n\n";
  s << "- experiment: " << to_string(c.experiment) << ", alpha = " << shortest(c.alpha) << "\n";
  if (c.is_pde()) {
    s << "- reference: J* = " << c.ref_J << ", sigma* = " << shortest(c.ref_sigma) << ", cells = " << c.n_cells
      << ", backend = " << to_string(c.backend) << "\n";
    if (c.experiment == Experiment::Diffusion)
      s << "- E1 time sampling: " << to_string(c.e1_sampling)
        << (c.e1_sampling == E1Sampling::Merged ? " (exact supremum over the union of coarse and reference nodes)"
                                                : " (coarse left limits plus interior samples)")
        << "\n";
    else
      s << "- E2: coarse nodes, reference interpolated linearly\n";
  } else if (c.experiment != Experiment::Oracles) {
    s << "- lambda = " << shortest(c.lambda) << ", exact Mittag-Leffler reference, metric " << to_string(c.scalar_metric)
      << "\n";
  }
  return s.str();
}

/// One column pair per report, one line per J, as in a printed convergence
/// table. Reports must share their J list.
inline std::string markdown_table(const RunConfig& c, const std::vector<ConvergenceReport>& reports) {
  std::ostringstream s;
  s << header_lines(c) << "\n";
  const std::string metric = metric_name(c);
  s << "| J |";
  for (const auto& r : reports) s << " " << metric << " (sigma=" << shortest(r.sigma) << ") | Order |";
  s << "\n|---|";
  for (std::size_t i = 0; i < reports.size(); ++i) s << "---|---|";
  s << "\n";
  if (!reports.empty())
    for (std::size_t i = 0; i < reports.front().rows.size(); ++i) {
      const std::size_t J = reports.front().rows[i].J;
      s << "| " << (is_power_of_two(J) ? "2^" + std::to_string(std::countr_zero(J)) : std::to_string(J)) << " |";
      for (const auto& r : reports) {
        const auto& row = r.rows[i];
        s << " " << sci3(row.error) << " | " << (row.order ? fixed2(*row.order) : std::string("--")) << " |";
      }
      s << "\n";
    }
  return s.str();
}

inline std::string oracle_markdown(const RunConfig& c, const std::vector<oracle::OracleOutcome>& outcomes) {
  std::ostringstream s;
  s << header_lines(c) << "- seed: " << c.seed << "\n\n";
  s << "| Check | Samples | Redrawn | Violations | Worst margin | Result |\n|---|---|---|---|---|---|\n";
  for (const auto& o : outcomes)
    s << "| " << o.check << " | " << o.samples << " | " << o.redrawn << " | " << o.violations << " | "
      << sci3(o.worst_margin) << " | " << (o.passed() ? "pass" : "FAIL") << " |\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Running

inline Eigen::VectorXd initial_data(const RunConfig& c, const FemSpace& space) {
  if (c.experiment == Experiment::Diffusion)
    return l2_project([](double x) { return std::pow(x, 0.51) * (1.0 - x); }, space);
  return l2_project([](double x) { return std::pow(x, 1.51) * (1.0 - x) * (1.0 - x); }, space);
}

struct StudyCheck {
  double sigma;
  double observed;
  std::optional<double> expected;
  bool passed() const { return !expected || std::abs(observed - *expected) <= kOrderTolerance; }
};

struct RunResult {
  RunConfig config;
  std::vector<ConvergenceReport> reports;
  std::vector<oracle::OracleOutcome> oracles;
  std::vector<StudyCheck> checks;
  std::string csv;
  std::string markdown;
  std::filesystem::path csv_path, markdown_path;

  bool passed() const {
    for (const auto& ch : checks)
      if (!ch.passed()) return false;
    for (const auto& o : oracles)
      if (!o.passed()) return false;
    return true;
  }
};

/// The convergence reports of one configuration, without touching the disk.
inline std::vector<ConvergenceReport> compute_reports(const RunConfig& c) {
  std::vector<ConvergenceReport> reports;
  if (c.experiment == Experiment::ScalarDiffusion || c.experiment == Experiment::ScalarWave) {
    for (double sg : c.sigma) reports.push_back(scalar_error_study(c.alpha, c.lambda, sg, c.grid_J, c.scalar_metric));
    return reports;
  }
  const Scheme scheme = c.experiment == Experiment::Diffusion ? Scheme::DG : Scheme::PG;
  const FemSpace space(c.n_cells);
  const Eigen::VectorXd u0 = initial_data(c, space);
  SolveOptions opt;
  opt.backend = c.backend;
  const FieldTrajectory ref = solve(scheme, space, GradedMesh(c.ref_J, c.ref_sigma, 1.0), c.alpha, u0, opt);
  for (double sg : c.sigma) {
    ConvergenceReport r;
    r.scheme = scheme;
    r.alpha = c.alpha;
    r.sigma = sg;
    r.metric = metric_name(c);
    r.reference = ReferenceDescriptor{c.ref_J, c.ref_sigma};
    for (std::size_t J : c.grid_J) {
      const FieldTrajectory U = solve(scheme, space, GradedMesh(J, sg, 1.0), c.alpha, u0, opt);
      const double e = scheme == Scheme::DG ? error_E1(U, ref, c.e1_sampling) : error_E2(U, ref);
      r.rows.push_back({J, e, std::nullopt});
    }
    fill_orders(r.rows);
    reports.push_back(std::move(r));
  }
  return reports;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

/// Runs the experiment and writes <out>/<experiment>.csv and .md.
inline RunResult run(const RunConfig& c) {
  RunResult res;
  res.config = c;
  if (c.experiment == Experiment::Oracles) {
    res.oracles = oracle::check_all(c.seed);
    res.csv = oracle_csv(c, res.oracles);
    res.markdown = oracle_markdown(c, res.oracles);
  } else {
    res.reports = compute_reports(c);
    for (const auto& r : res.reports) res.checks.push_back({r.sigma, r.last_order(), expected_order(c, r.sigma)});
    res.csv = csv_table(c, res.reports);
    res.markdown = markdown_table(c, res.reports);
  }
  std::error_code ec;
  std::filesystem::create_directories(c.out, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + c.out.string() + ": " + ec.message());
  res.csv_path = c.out / (std::string(to_string(c.experiment)) + ".csv");
  res.markdown_path = c.out / (std::string(to_string(c.experiment)) + ".md");
  write_file(res.csv_path, res.csv);
  write_file(res.markdown_path, res.markdown);
  return res;
}

/// Human-readable summary of a finished run.
inline std::string summary(const RunResult& res) {
  std::ostringstream s;
  for (const auto& ch : res.checks) {
    s << to_string(res.config.experiment) << " sigma=" << shortest(ch.sigma) << ": last order " << fixed2(ch.observed);
    if (ch.expected)
      s << ", expected " << fixed2(*ch.expected) << " +- " << fixed2(kOrderTolerance) << "  "
        << (ch.passed() ? "PASS" : "FAIL");
    else
      s << " (no predicted order)";
    s << "\n";
  }
  for (const auto& o : res.oracles) {
    s << o.check << ": " << o.samples << " samples, worst margin " << sci3(o.worst_margin) << "  "
      << (o.passed() ? "PASS" : "FAIL");
    if (!o.passed()) {
      s << "  witness:";
      for (const auto& [k, v] : o.witness) s << ' ' << k << '=' << shortest(v);
    }
    s << "\n";
  }
  s << "wrote " << res.csv_path.string() << " and " << res.markdown_path.string() << "\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// Comparing artifacts

/// RFC-4180 records; both CRLF and LF line ends are accepted.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = any = true;
    } else if (ch == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (ch == '\r' || ch == '\n') {
      if (ch == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += ch;
      any = true;
    }
  }
  if (quoted) throw ValidationError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct CellDiff {
  std::size_t row;  // 1-based data row
  std::string column;
  std::string a, b;
  double relative;
};

struct CompareResult {
  double tolerance = 0.0;
  double max_relative = 0.0;
  std::size_t cells = 0;
  std::vector<CellDiff> beyond;  // cells whose relative difference exceeds the tolerance

  bool ok() const noexcept { return beyond.empty(); }
};

inline CompareResult compare_csv(const std::string& text_a, const std::string& text_b, double tolerance) {
  detail::require(tolerance >= 0.0, "tolerance must be non-negative");
  const auto A = parse_csv(text_a), B = parse_csv(text_b);
  detail::require(!A.empty() && !B.empty(), "csv: empty file");
  detail::require(A.front() == B.front(), "csv: headers differ");
  const auto& header = A.front();
  const auto fp_col = std::find(header.begin(), header.end(), "fingerprint");
  detail::require(fp_col != header.end(), "csv: no fingerprint column");
  const auto fp_index = static_cast<std::size_t>(fp_col - header.begin());
  auto fingerprints = [&](const auto& rows) {
    std::vector<std::string> f;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      detail::require(rows[i].size() == header.size(), "csv: row " + std::to_string(i) + " has the wrong field count");
      f.push_back(rows[i][fp_index]);
    }
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    return f;
  };
  if (fingerprints(A) != fingerprints(B)) throw ValidationError("csv: config fingerprints differ");
  detail::require(A.size() == B.size(), "csv: row counts differ");

  CompareResult res;
  res.tolerance = tolerance;
  for (std::size_t i = 1; i < A.size(); ++i)
    for (std::size_t k = 0; k < header.size(); ++k) {
      const std::string& x = A[i][k];
      const std::string& y = B[i][k];
      ++res.cells;
      double rel = 0.0;
      if (x != y) {
        double u = 0.0, v = 0.0;
        const auto rx = std::from_chars(x.data(), x.data() + x.size(), u);
        const auto ry = std::from_chars(y.data(), y.data() + y.size(), v);
        const bool numeric = rx.ec == std::errc{} && rx.ptr == x.data() + x.size() && ry.ec == std::errc{} &&
                             ry.ptr == y.data() + y.size();
        if (!numeric) {
          rel = std::numeric_limits<double>::infinity();
        } else {
          const double scale = std::max(std::abs(u), std::abs(v));
          rel = scale > 0.0 ? std::abs(u - v) / scale : 0.0;
        }
      }
      res.max_relative = std::max(res.max_relative, rel);
      if (rel > tolerance) res.beyond.push_back({i, header[k], x, y, rel});
    }
  return res;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

inline CompareResult compare_reports(const std::filesystem::path& a, const std::filesystem::path& b, double tolerance) {
  return compare_csv(read_file(a), read_file(b), tolerance);
}

inline std::string describe(const CompareResult& r) {
  std::ostringstream s;
  s << r.cells << " cells compared, max relative difference " << sci3(r.max_relative) << ", tolerance "
    << sci3(r.tolerance) << "\n";
  for (const auto& d : r.beyond)
    s << "  row " << d.row << " column " << d.column << ": " << d.a << " vs " << d.b << " (relative " << sci3(d.relative)
      << ")\n";
  s << (r.ok() ? "OK" : "DIFFER") << "\n";
  return s.str();
}

}  // namespace fracgal::experiments
