#include "rim/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

#include "rim/errors.hpp"

namespace rim {

namespace {

using nlohmann::json;

void allow_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ValidationError(where + " must be a JSON object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw ValidationError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(where + "." + key + " has the wrong type");
  }
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  allow_keys(j, "config",
             {"seed", "noise", "model", "nonlinearity", "z_cap", "graph", "transform", "pullback",
              "gap", "verify", "conjugacy", "workers", "output_dir"});
  read(j, "seed", c.seed, "config");
  read(j, "z_cap", c.z_cap, "config");
  read(j, "workers", c.workers, "config");
  read(j, "output_dir", c.output_dir, "config");

  if (j.contains("noise")) {
    const auto& n = j["noise"];
    allow_keys(n, "noise", {"kind", "t_min", "t_max", "dt", "t_trunc"});
    read(n, "kind", c.noise.kind, "noise");
    read(n, "t_min", c.noise.t_min, "noise");
    read(n, "t_max", c.noise.t_max, "noise");
    read(n, "dt", c.noise.dt, "noise");
    read(n, "t_trunc", c.noise.t_trunc, "noise");
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    allow_keys(m, "model", {"preset", "eigenvalues", "unstable_count", "modes", "shift"});
    read(m, "preset", c.model.preset, "model");
    read(m, "eigenvalues", c.model.eigenvalues, "model");
    read(m, "unstable_count", c.model.unstable_count, "model");
    read(m, "modes", c.model.modes, "model");
    read(m, "shift", c.model.shift, "model");
  }
  if (j.contains("nonlinearity")) {
    const auto& f = j["nonlinearity"];
    allow_keys(f, "nonlinearity", {"kind", "L", "epsilon", "P", "P_seed"});
    read(f, "kind", c.nonlinearity.kind, "nonlinearity");
    read(f, "L", c.nonlinearity.L, "nonlinearity");
    read(f, "epsilon", c.nonlinearity.epsilon, "nonlinearity");
    read(f, "P", c.nonlinearity.P, "nonlinearity");
    read(f, "P_seed", c.nonlinearity.P_seed, "nonlinearity");
  }
  if (j.contains("graph")) {
    const auto& g = j["graph"];
    allow_keys(g, "graph", {"radius", "nodes_per_axis"});
    read(g, "radius", c.graph.radius, "graph");
    read(g, "nodes_per_axis", c.graph.nodes_per_axis, "graph");
  }
  if (j.contains("transform")) {
    const auto& t = j["transform"];
    allow_keys(t, "transform", {"time_nodes", "tol", "max_iter", "t_max"});
    read(t, "time_nodes", c.transform.time_nodes, "transform");
    read(t, "tol", c.transform.tol, "transform");
    read(t, "max_iter", c.transform.max_iter, "transform");
    read(t, "t_max", c.transform.t_max, "transform");
  }
  if (j.contains("pullback")) {
    const auto& p = j["pullback"];
    allow_keys(p, "pullback", {"depth", "tol", "burn_in"});
    read(p, "depth", c.pullback.depth, "pullback");
    read(p, "tol", c.pullback.tol, "pullback");
    read(p, "burn_in", c.pullback.burn_in, "pullback");
  }
  if (j.contains("gap")) {
    const auto& g = j["gap"];
    allow_keys(g, "gap", {"L_values", "run_manifold"});
    read(g, "L_values", c.gap.L_values, "gap");
    read(g, "run_manifold", c.gap.run_manifold, "gap");
  }
  if (j.contains("verify")) {
    const auto& v = j["verify"];
    allow_keys(v, "verify",
               {"fixed_point_T", "invariance_t", "invariance_points", "integrator_dt",
                "contraction_pairs", "decay_t_max"});
    read(v, "fixed_point_T", c.verify.fixed_point_T, "verify");
    read(v, "invariance_t", c.verify.invariance_t, "verify");
    read(v, "invariance_points", c.verify.invariance_points, "verify");
    read(v, "integrator_dt", c.verify.integrator_dt, "verify");
    read(v, "contraction_pairs", c.verify.contraction_pairs, "verify");
    read(v, "decay_t_max", c.verify.decay_t_max, "verify");
  }
  if (j.contains("conjugacy")) {
    const auto& q = j["conjugacy"];
    allow_keys(q, "conjugacy", {"T", "dt_values", "seeds", "x"});
    read(q, "T", c.conjugacy.T, "conjugacy");
    read(q, "dt_values", c.conjugacy.dt_values, "conjugacy");
    read(q, "seeds", c.conjugacy.seeds, "conjugacy");
    read(q, "x", c.conjugacy.x, "conjugacy");
  }
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  json nl = {{"kind", nonlinearity.kind}, {"L", nonlinearity.L}};
  if (nonlinearity.kind == "saturated") {
    if (nonlinearity.epsilon >= 0.0) nl["epsilon"] = nonlinearity.epsilon;
    if (nonlinearity.P.empty()) {
      nl["P_seed"] = nonlinearity.P_seed;
    } else {
      nl["P"] = nonlinearity.P;
    }
  }
  json model_j = {{"preset", model.preset}, {"unstable_count", model.unstable_count}};
  if (model.preset == "dirichlet") {
    model_j["modes"] = model.modes;
    model_j["shift"] = model.shift;
  } else {
    model_j["eigenvalues"] = model.eigenvalues;
  }
  return {
      {"seed", seed},
      {"noise",
       {{"kind", noise.kind},
        {"t_min", noise.t_min},
        {"t_max", noise.t_max},
        {"dt", noise.dt},
        {"t_trunc", noise.t_trunc}}},
      {"model", model_j},
      {"nonlinearity", nl},
      {"z_cap", z_cap},
      {"graph", {{"radius", graph.radius}, {"nodes_per_axis", graph.nodes_per_axis}}},
      {"transform",
       {{"time_nodes", transform.time_nodes},
        {"tol", transform.tol},
        {"max_iter", transform.max_iter},
        {"t_max", transform.t_max}}},
      {"pullback",
       {{"depth", pullback.depth}, {"tol", pullback.tol}, {"burn_in", pullback.burn_in}}},
      {"gap", {{"L_values", gap.L_values}, {"run_manifold", gap.run_manifold}}},
      {"verify",
       {{"fixed_point_T", verify.fixed_point_T},
        {"invariance_t", verify.invariance_t},
        {"invariance_points", verify.invariance_points},
        {"integrator_dt", verify.integrator_dt},
        {"contraction_pairs", verify.contraction_pairs},
        {"decay_t_max", verify.decay_t_max}}},
      {"conjugacy",
       {{"T", conjugacy.T},
        {"dt_values", conjugacy.dt_values},
        {"seeds", conjugacy.seeds},
        {"x", conjugacy.x}}},
      {"workers", workers},
      {"output_dir", output_dir},
  };
}

json RunConfig::echo() const {
  json j = to_json();
  j.erase("output_dir");
  j.erase("workers");
  return j;
}

void RunConfig::validate() const {
  require(noise.kind == "sampled" || noise.kind == "zero",
          "noise.kind must be 'sampled' or 'zero'");
  require(noise.dt > 0.0, "noise.dt must be positive");
  require(noise.t_min < 0.0 && noise.t_max > 0.0, "noise window must satisfy t_min < 0 < t_max");
  require(noise.t_trunc > 0.0, "noise.t_trunc must be positive");
  require(noise.t_min + noise.t_trunc < 0.0,
          "noise window too short: t_min + t_trunc must be < 0 (extend t_min)");
  require(z_cap > 0.0, "z_cap must be positive");
  require(model.preset == "explicit" || model.preset == "dirichlet",
          "model.preset must be 'explicit' or 'dirichlet'");
  require(nonlinearity.kind == "zero" || nonlinearity.kind == "linear_coupling" ||
              nonlinearity.kind == "saturated",
          "nonlinearity.kind must be 'zero', 'linear_coupling' or 'saturated'");
  require(nonlinearity.L >= 0.0, "nonlinearity.L must be >= 0");
  require(graph.radius > 0.0, "graph.radius must be positive");
  require(graph.nodes_per_axis >= 3 && graph.nodes_per_axis % 2 == 1,
          "graph.nodes_per_axis must be odd and >= 3");
  require(transform.time_nodes >= 1, "transform.time_nodes must be >= 1");
  require(transform.tol > 0.0, "transform.tol must be positive");
  require(transform.max_iter >= 1, "transform.max_iter must be >= 1");
  require(transform.t_max > 0.0, "transform.t_max must be positive");
  require(pullback.depth >= 1, "pullback.depth must be >= 1");
  require(pullback.tol > 0.0, "pullback.tol must be positive");
  require(pullback.burn_in >= 0, "pullback.burn_in must be >= 0");
  require(verify.integrator_dt > 0.0, "verify.integrator_dt must be positive");
  require(verify.fixed_point_T > 0.0 && verify.invariance_t > 0.0,
          "verify times must be positive");
  require(verify.decay_t_max >= 1, "verify.decay_t_max must be >= 1");
  require(conjugacy.T > 0.0, "conjugacy.T must be positive");
  require(conjugacy.seeds >= 1, "conjugacy.seeds must be >= 1");
  for (double dt : conjugacy.dt_values) require(dt > 0.0, "conjugacy.dt_values must be positive");
  require(workers >= 0, "workers must be >= 0");
  build_system();
}

SpectralModel RunConfig::build_model() const {
  if (model.preset == "dirichlet") {
    return SpectralModel::dirichlet_laplacian(model.modes, model.unstable_count, model.shift);
  }
  return SpectralModel(model.eigenvalues, model.unstable_count);
}

Nonlinearity RunConfig::build_nonlinearity() const {
  if (nonlinearity.kind == "zero") return Nonlinearity::zero();
  if (nonlinearity.kind == "linear_coupling") return Nonlinearity::linear_coupling(nonlinearity.L);
  const int n = build_model().dim();
  Eigen::MatrixXd P;
  if (nonlinearity.P.empty()) {
    P = random_mixing(n, nonlinearity.P_seed);
  } else {
    require(static_cast<int>(nonlinearity.P.size()) == n, "nonlinearity.P must be n x n");
    P.resize(n, n);
    for (int r = 0; r < n; ++r) {
      require(static_cast<int>(nonlinearity.P[static_cast<std::size_t>(r)].size()) == n,
              "nonlinearity.P must be n x n");
      for (int k = 0; k < n; ++k) P(r, k) = nonlinearity.P[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
    }
  }
  double eps = nonlinearity.epsilon;
  if (eps < 0.0) {
    const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(P).singularValues()(0);
    require(norm > 0.0, "nonlinearity.P must be nonzero");
    eps = nonlinearity.L / norm;
  }
  return Nonlinearity::saturated(eps, P);
}

System RunConfig::build_system() const {
  return System{build_model(), build_nonlinearity(), z_cap};
}

std::shared_ptr<const GraphGrid> RunConfig::build_grid() const {
  return std::make_shared<const GraphGrid>(build_model().unstable_count(), graph.nodes_per_axis,
                                           graph.radius);
}

Fiber RunConfig::build_fiber(Execution exec) const {
  const WienerPath path = noise.kind == "zero"
                              ? WienerPath::zero(noise.t_min, noise.t_max, noise.dt)
                              : WienerPath::sample(seed, noise.t_min, noise.t_max, noise.dt);
  return Fiber(std::make_shared<const OUCache>(path, noise.t_trunc, exec));
}

}  // namespace rim
