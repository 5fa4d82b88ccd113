#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "rim/manifold.hpp"

namespace rim {

struct NoiseConfig {
  std::string kind = "sampled";  ///< sampled | zero
  double t_min = -80.0;
  double t_max = 10.0;
  double dt = 1.0 / 256.0;
  double t_trunc = 40.0;
};

struct ModelConfig {
  std::string preset = "explicit";  ///< explicit | dirichlet
  std::vector<double> eigenvalues{2.0, 0.0};
  int unstable_count = 1;
  int modes = 4;       ///< dirichlet
  double shift = 0.0;  ///< dirichlet
};

struct NonlinearityConfig {
  std::string kind = "linear_coupling";  ///< zero | linear_coupling | saturated
  double L = 0.25;                       ///< linear_coupling; saturated when epsilon is absent
  double epsilon = -1.0;                 ///< saturated; negative means derive from L
  std::vector<std::vector<double>> P;    ///< saturated mixing; empty means P_seed
  unsigned P_seed = 1;
};

struct GraphConfig {
  double radius = 1.0;
  int nodes_per_axis = 21;
};

struct GapConfig {
  std::vector<double> L_values;
  bool run_manifold = true;
};

struct VerifyConfig {
  double fixed_point_T = 1.0;
  double invariance_t = 1.0;
  int invariance_points = 10;
  double integrator_dt = 1e-3;
  int contraction_pairs = 20;
  int decay_t_max = 5;
};

struct ConjugacyConfig {
  double T = 1.0;
  std::vector<double> dt_values{1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  int seeds = 40;
  std::vector<double> x{0.5, 0.25};
};

struct RunConfig {
  std::uint64_t seed = 1;
  NoiseConfig noise;
  ModelConfig model;
  NonlinearityConfig nonlinearity;
  double z_cap = kDefaultZCap;
  GraphConfig graph;
  TransformSettings transform;
  PullbackSettings pullback;
  GapConfig gap;
  VerifyConfig verify;
  ConjugacyConfig conjugacy;
  int workers = 0;
  std::string output_dir = "rim_out";

  /// Parses with defaults for absent keys; unknown keys are rejected.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
  /// to_json without output_dir and workers, which do not change results;
  /// embedded in every artifact.
  nlohmann::json echo() const;

  /// Structural checks that need no computation.
  void validate() const;

  SpectralModel build_model() const;
  Nonlinearity build_nonlinearity() const;
  System build_system() const;
  std::shared_ptr<const GraphGrid> build_grid() const;
  /// Fiber at omega for the configured seed (or the zero path).
  Fiber build_fiber(Execution exec = Execution::parallel) const;
};

}  // namespace rim
