#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "rim/commands.hpp"
#include "rim/config.hpp"
#include "rim/errors.hpp"

using namespace rim;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("rim_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

json read_json(const std::filesystem::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  const RunConfig c = RunConfig::from_json(json::object());
  EXPECT_EQ(c.model.eigenvalues, (std::vector<double>{2.0, 0.0}));
  EXPECT_EQ(c.noise.t_trunc, 40.0);
  EXPECT_EQ(c.transform.time_nodes, 64);
  EXPECT_EQ(c.pullback.tol, 1e-4);
  const RunConfig d = RunConfig::from_json(c.to_json());
  EXPECT_EQ(d.to_json(), c.to_json());
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, RejectsUnknownKeysAndTypes) {
  EXPECT_THROW(RunConfig::from_json(json{{"sed", 1}}), ValidationError);
  EXPECT_THROW(RunConfig::from_json(json{{"graph", {{"nodes", 3}}}}), ValidationError);
  EXPECT_THROW(RunConfig::from_json(json{{"seed", "x"}}), ValidationError);
  EXPECT_THROW(RunConfig::from_json(json::array()), ValidationError);
  EXPECT_THROW(RunConfig::load("/nonexistent/rim.json"), ValidationError);
}

TEST(Config, ValidationMessages) {
  auto bad = [](json j, const std::string& needle) {
    try {
      RunConfig::from_json(j).validate();
      ADD_FAILURE() << "accepted " << j.dump();
    } catch (const ValidationError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  bad(json{{"noise", {{"t_min", -20.0}}}}, "t_trunc");
  bad(json{{"graph", {{"nodes_per_axis", 4}}}}, "odd");
  bad(json{{"noise", {{"kind", "pink"}}}}, "noise.kind");
  bad(json{{"model", {{"eigenvalues", {0.0, 1.0}}}}}, "decreasing");
}

TEST(Config, BuildsSaturatedFromL) {
  json j = {{"model", {{"eigenvalues", {1.5, -0.5, -1.5, -3.0}}, {"unstable_count", 1}}},
            {"nonlinearity", {{"kind", "saturated"}, {"L", 0.25}, {"P_seed", 3}}}};
  const RunConfig c = RunConfig::from_json(j);
  const System sys = c.build_system();
  EXPECT_NEAR(sys.L(), 0.25, 1e-12);
  EXPECT_EQ(c.build_grid()->dim(), 1);
  j["nonlinearity"]["epsilon"] = 0.1;
  EXPECT_NEAR(RunConfig::from_json(j).build_system().L(), 0.1, 1e-12);
}

TEST(Config, DirichletPreset) {
  const RunConfig c = RunConfig::from_json(
      json{{"model", {{"preset", "dirichlet"}, {"modes", 3}, {"unstable_count", 1}, {"shift", 12.0}}}});
  const SpectralModel m = c.build_model();
  EXPECT_EQ(m.dim(), 3);
  EXPECT_NEAR(m.eigenvalue(0), 12.0 - M_PI * M_PI, 1e-12);
}

TEST(Commands, GapReport) {
  RunConfig c = RunConfig::from_json(json{{"noise", {{"kind", "zero"}}}});
  c.output_dir = scratch("gap").string();
  EXPECT_EQ(cmd_gap(c), kExitOk);
  const json j = read_json(std::filesystem::path(c.output_dir) / "gap.json");
  EXPECT_NEAR(j["eigen"]["lambda_plus"].get<double>(), 1.707107, 1e-6);
  EXPECT_NEAR(j["eigen"]["kappa"].get<double>(), 0.171573, 1e-6);
  EXPECT_EQ(j["config"], c.echo());
  EXPECT_FALSE(j["config"].contains("output_dir"));

  c.nonlinearity.L = 0.6;
  EXPECT_EQ(cmd_gap(c), kExitValidation);
}

TEST(Commands, ExitCodes) {
  EXPECT_EQ(exit_code_for(ValidationError("x")), kExitValidation);
  EXPECT_EQ(exit_code_for(GapViolation("x", -1.0)), kExitValidation);
  EXPECT_EQ(exit_code_for(OutOfWindow("x")), kExitValidation);
  EXPECT_EQ(exit_code_for(ConvergenceError("x")), kExitConvergence);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), kExitFailure);
}

TEST(Commands, ManifoldWithoutCouplingIsZero) {
  RunConfig c = RunConfig::from_json(
      json{{"noise", {{"t_min", -75.0}, {"t_max", 4.0}, {"dt", 1.0 / 64}}},
           {"nonlinearity", {{"kind", "zero"}}},
           {"graph", {{"nodes_per_axis", 11}}}});
  c.output_dir = scratch("manifold").string();
  EXPECT_EQ(cmd_manifold(c), kExitOk);
  const json j = read_json(std::filesystem::path(c.output_dir) / "manifold.json");
  for (const auto& v : j["gamma_star"]["values"]) {
    for (const auto& x : v) EXPECT_EQ(x.get<double>(), 0.0);
  }
}
