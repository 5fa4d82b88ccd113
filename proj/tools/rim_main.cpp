// rim: random invariant manifolds from a JSON run configuration.
//
//   rim <noise|gap|manifold|verify|conjugacy> --config run.json [--seed N]
//       [--out DIR] [--workers N] [--result manifold.json]
//
// RIM_OUTPUT_DIR overrides the configured output directory; --out overrides
// both.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rim/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random invariant manifolds for SPDEs with multiplicative noise"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string result_path;
  std::uint64_t seed = 0;
  int workers = -1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override the noise seed");
    sub->add_option("-o,--out", out_dir, "output directory");
    sub->add_option("-w,--workers", workers, "cap on OpenMP workers (0 = runtime default)");
  };
  auto* noise = app.add_subcommand("noise", "sample the path and OU process, write diagnostics");
  auto* gap = app.add_subcommand("gap", "comparison-matrix spectrum and gap threshold sweep");
  auto* manifold = app.add_subcommand("manifold", "pullback fixed point gamma*");
  auto* verify = app.add_subcommand("verify", "fixed-point, invariance, contraction and decay checks");
  auto* conjugacy = app.add_subcommand("conjugacy", "transformed cocycle against the direct SPDE");
  for (auto* sub : {noise, gap, manifold, verify, conjugacy}) add_common(sub);
  verify->add_option("--result", result_path, "manifold.json from a previous manifold run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : rim::kExitValidation;
  }

  try {
    rim::RunConfig cfg = rim::RunConfig::load(config_path);
    if (noise->count("--seed") || gap->count("--seed") || manifold->count("--seed") ||
        verify->count("--seed") || conjugacy->count("--seed")) {
      cfg.seed = seed;
    }
    if (const char* env = std::getenv("RIM_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (workers >= 0) cfg.workers = workers;

    if (*noise) return rim::cmd_noise(cfg);
    if (*gap) return rim::cmd_gap(cfg);
    if (*manifold) return rim::cmd_manifold(cfg);
    if (*verify) return rim::cmd_verify(cfg, result_path);
    return rim::cmd_conjugacy(cfg);
  } catch (const std::exception& e) {
    std::cerr << "rim: " << e.what() << '\n';
    return rim::exit_code_for(e);
  }
}
