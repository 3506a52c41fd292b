#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "fracgal/experiments.hpp"

using namespace fracgal;
using namespace fracgal::experiments;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("fracgal-test-" + name);
  std::filesystem::remove_all(p);
  return p;
}

RunSettings scalar_settings() {
  RunSettings s;
  s.experiment = Experiment::ScalarDiffusion;
  s.alpha = 0.5;
  s.sigma = std::vector<double>{2.0};
  s.grid_J = std::vector<std::size_t>{64, 128, 256, 512};
  return s;
}

std::string replace_first(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  if (pos != std::string::npos) text.replace(pos, from.size(), to);
  return text;
}

}  // namespace

TEST(Parsers, NamesRoundTrip) {
  for (auto e : {Experiment::Diffusion, Experiment::Wave, Experiment::ScalarDiffusion, Experiment::ScalarWave,
                 Experiment::Oracles})
    EXPECT_EQ(parse_experiment(to_string(e)), e);
  EXPECT_EQ(parse_profile("full"), Profile::Full);
  EXPECT_EQ(parse_backend("direct"), Backend::Direct);
  EXPECT_EQ(parse_e1_sampling("sampled"), E1Sampling::Sampled);
  EXPECT_EQ(parse_scalar_metric("sup-time"), ScalarMetric::SupTime);
  EXPECT_THROW(parse_experiment("heat"), ValidationError);
  EXPECT_THROW(parse_profile("CI"), ValidationError);
  EXPECT_THROW(parse_backend("lu"), ValidationError);
}

TEST(Settings, JsonDocument) {
  const auto s = settings_from_json(nlohmann::json::parse(
      R"({"experiment": "wave", "alpha": 1.3, "sigma": [4.0], "grid_J": [8, 16], "cells": 32, "backend": "direct"})"));
  EXPECT_EQ(*s.experiment, Experiment::Wave);
  EXPECT_EQ(*s.alpha, 1.3);
  EXPECT_EQ(s.grid_J->size(), 2u);
  EXPECT_EQ(*s.n_cells, 32u);
  EXPECT_FALSE(s.ref_J.has_value());
  EXPECT_THROW(settings_from_json(nlohmann::json::parse(R"({"alpah": 0.5})")), ValidationError);
  EXPECT_THROW(settings_from_json(nlohmann::json::parse(R"({"alpha": "half"})")), ValidationError);
  EXPECT_THROW(settings_from_json(nlohmann::json::parse("[1, 2]")), ValidationError);
}

TEST(Settings, MergeOverrides) {
  RunSettings base = scalar_settings(), over;
  over.alpha = 0.7;
  base.merge(over);
  EXPECT_EQ(*base.alpha, 0.7);
  EXPECT_EQ(*base.experiment, Experiment::ScalarDiffusion);
}

TEST(Resolve, Defaults) {
  const auto d = resolve(RunSettings{});
  EXPECT_EQ(d.experiment, Experiment::Diffusion);
  EXPECT_EQ(d.alpha, 0.5);
  EXPECT_EQ(d.sigma, (std::vector<double>{1.0, 2.0, 4.0}));
  EXPECT_EQ(d.grid_J, powers_of_two(7, 10));
  EXPECT_EQ(d.n_cells, 512u);
  EXPECT_EQ(d.ref_J, 8192u);
  EXPECT_EQ(d.ref_sigma, 4.0);

  RunSettings w;
  w.experiment = Experiment::Wave;
  const auto c = resolve(w);
  EXPECT_EQ(c.alpha, 1.5);
  ASSERT_EQ(c.sigma.size(), 1u);
  EXPECT_DOUBLE_EQ(c.sigma[0], 2.0);
  EXPECT_EQ(c.grid_J, powers_of_two(6, 9));
}

TEST(Resolve, Validation) {
  auto bad = [](auto mutate) {
    RunSettings s = scalar_settings();
    mutate(s);
    return s;
  };
  EXPECT_THROW(resolve(bad([](RunSettings& s) { s.alpha = 1.5; })), ValidationError);
  EXPECT_THROW(resolve(bad([](RunSettings& s) { s.sigma = std::vector<double>{0.5}; })), ValidationError);
  EXPECT_THROW(resolve(bad([](RunSettings& s) { s.grid_J = std::vector<std::size_t>{64, 100}; })), ValidationError);
  EXPECT_NO_THROW(resolve(bad([](RunSettings& s) {
    s.grid_J = std::vector<std::size_t>{64, 100};
    s.any_J = true;
  })));
  EXPECT_THROW(resolve(bad([](RunSettings& s) { s.grid_J = std::vector<std::size_t>{128, 64}; })), ValidationError);
  EXPECT_THROW(resolve(bad([](RunSettings& s) { s.lambda = -1.0; })), ValidationError);
  RunSettings pde;
  pde.ref_J = 512;
  pde.grid_J = std::vector<std::size_t>{256, 512};
  EXPECT_THROW(resolve(pde), ValidationError);
  RunSettings wave;
  wave.experiment = Experiment::Wave;
  wave.alpha = 0.5;
  EXPECT_THROW(resolve(wave), ValidationError);
}

TEST(Resolve, FullProfileNeedsConfirmation) {
  RunSettings s;
  s.profile = Profile::Full;
  EXPECT_THROW(resolve(s), ProfileRefused);
  s.yes_full = true;
  const auto c = resolve(s);
  EXPECT_EQ(c.n_cells, 2048u);
  EXPECT_EQ(c.ref_J, 32768u);
  RunSettings scalar = scalar_settings();
  scalar.profile = Profile::Full;
  EXPECT_NO_THROW(resolve(scalar));
}

TEST(Fingerprint, TracksNumbersOnly) {
  RunSettings s = scalar_settings();
  const auto base = fingerprint(resolve(s));
  s.out = "/somewhere/else";
  EXPECT_EQ(fingerprint(resolve(s)), base);
  s.lambda = 2.0;
  EXPECT_NE(fingerprint(resolve(s)), base);
  EXPECT_EQ(base.size(), 16u);
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
}

TEST(Formatting, Numbers) {
  EXPECT_EQ(sci3(0.136), "1.36e-1");
  EXPECT_EQ(sci3(1.06e-2), "1.06e-2");
  EXPECT_EQ(sci3(12345.0), "1.23e4");
  EXPECT_EQ(sci3(0.0), "0.00e0");
  EXPECT_EQ(fixed2(1.046), "1.05");
  EXPECT_EQ(shortest(0.1), "0.1");
  EXPECT_EQ(std::stod(shortest(1.0 / 3.0)), 1.0 / 3.0);
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
}

TEST(Csv, ParseQuotedAndLineEnds) {
  const auto rows = parse_csv("a,b\r\n\"x,y\",\"q\"\"q\"\n1,\n");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "x,y");
  EXPECT_EQ(rows[1][1], "q\"q");
  EXPECT_EQ(rows[2][1], "");
  EXPECT_THROW(parse_csv("\"open"), ValidationError);
}

TEST(ScalarRun, WritesArtifactsAndMeetsOrder) {
  RunSettings s = scalar_settings();
  s.grid_J = std::vector<std::size_t>{64, 128, 256, 512, 1024, 2048};
  s.out = scratch("scalar").string();
  const auto res = run(resolve(s));
  ASSERT_EQ(res.reports.size(), 1u);
  EXPECT_NEAR(res.reports[0].last_order(), 1.0, 0.1);
  EXPECT_TRUE(res.passed());
  EXPECT_TRUE(std::filesystem::exists(res.csv_path));
  EXPECT_TRUE(std::filesystem::exists(res.markdown_path));
  EXPECT_EQ(read_file(res.csv_path), res.csv);
  EXPECT_EQ(res.csv.rfind("sigma,J,error,order,metric,fingerprint\r\n", 0), 0u);
  const auto rows = parse_csv(res.csv);
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[1][3], "");
  EXPECT_EQ(rows[1][4], "max-node");
  EXPECT_NE(res.markdown.find("| 2^6 |"), std::string::npos);
  EXPECT_NE(res.markdown.find("| -- |"), std::string::npos);
  EXPECT_NE(summary(res).find("PASS"), std::string::npos);
}

TEST(Compare, Examples) {
  RunSettings s = scalar_settings();
  s.out = scratch("compare").string();
  const auto res = run(resolve(s));
  const auto same = compare_csv(res.csv, res.csv, 0.0);
  EXPECT_TRUE(same.ok());
  EXPECT_EQ(same.max_relative, 0.0);

  const auto rows = parse_csv(res.csv);
  const std::string err = rows[2][2];
  const std::string bumped = shortest(std::stod(err) * (1.0 + 1e-3));
  const std::string perturbed = replace_first(res.csv, "," + err + ",", "," + bumped + ",");
  ASSERT_NE(perturbed, res.csv);
  const auto tight = compare_csv(res.csv, perturbed, 1e-6);
  EXPECT_FALSE(tight.ok());
  EXPECT_EQ(tight.beyond.front().column, "error");
  EXPECT_TRUE(compare_csv(res.csv, perturbed, 1e-2).ok());
  EXPECT_NE(describe(tight).find("DIFFER"), std::string::npos);

  RunSettings other = scalar_settings();
  other.lambda = 3.0;
  other.out = scratch("compare-other").string();
  const auto res2 = run(resolve(other));
  EXPECT_THROW(compare_csv(res.csv, res2.csv, 1.0), ValidationError);
  EXPECT_THROW(compare_csv(res.csv, "x,y\r\n1,2\r\n", 1.0), ValidationError);
}

TEST(OracleRun, Artifacts) {
  RunSettings s;
  s.experiment = Experiment::Oracles;
  s.out = scratch("oracles").string();
  const auto c = resolve(s);
  const std::vector<oracle::OracleOutcome> few{oracle::check_lem31(500), oracle::check_coercivity(500)};
  const auto csv = oracle_csv(c, few);
  const auto rows = parse_csv(csv);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][0], "check");
  EXPECT_EQ(rows[1][5], "true");
  EXPECT_EQ(rows[1][6], "7");
  EXPECT_NE(oracle_markdown(c, few).find("| gap-ratio |"), std::string::npos);
}

TEST(PdeRun, TinyDiffusionStudy) {
  RunSettings s;
  s.sigma = std::vector<double>{4.0};
  s.grid_J = std::vector<std::size_t>{8, 16, 32};
  s.ref_J = 256;
  s.n_cells = 16;
  s.out = scratch("pde").string();
  const auto res = run(resolve(s));
  ASSERT_EQ(res.reports.size(), 1u);
  const auto& rows = res.reports[0].rows;
  EXPECT_GT(rows[0].error, rows[2].error);
  EXPECT_EQ(res.reports[0].metric, "E1");
  ASSERT_TRUE(res.reports[0].reference.has_value());
  EXPECT_EQ(res.reports[0].reference->J, 256u);
}
