#include "rim/commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <random>

#include "rim/errors.hpp"

namespace rim {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  const fs::path path = fs::path(cfg.output_dir) / name;
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

void write_json(const RunConfig& cfg, const std::string& name, const json& j) {
  auto out = open_output(cfg, name);
  out << j.dump(2) << '\n';
}

std::ofstream open_csv(const RunConfig& cfg, const std::string& name) {
  auto out = open_output(cfg, name);
  out << "# config " << cfg.echo().dump() << '\n';
  return out;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(); }

void check_back_window(const RunConfig& cfg, double back, const std::string& what) {
  const double need = -back - cfg.noise.t_trunc;
  if (cfg.noise.t_min > need + 1e-9) {
    throw ValidationError(what + " needs noise.t_min <= " + std::to_string(need) +
                          " (pullback window plus t_trunc); got " +
                          std::to_string(cfg.noise.t_min));
  }
}

void check_forward_window(const RunConfig& cfg, double forward, const std::string& what) {
  if (cfg.noise.t_max < forward - 1e-9) {
    throw ValidationError(what + " needs noise.t_max >= " + std::to_string(forward) + "; got " +
                          std::to_string(cfg.noise.t_max));
  }
}

TransformSettings transform_settings(const RunConfig& cfg) {
  TransformSettings s = cfg.transform;
  s.exec = Execution::parallel;
  return s;
}

ManifoldResult run_pullback(const RunConfig& cfg, const System& sys, const Fiber& fiber) {
  const EigenData eig = eigen(sys.model.lambda_hat(), sys.model.lambda_check(), sys.L());
  const LipschitzGraph gamma0 =
      LipschitzGraph::zero(cfg.build_grid(), sys.model.stable_count(), eig.kappa);
  return pullback_fixed_point(sys, fiber, gamma0, cfg.pullback, transform_settings(cfg));
}

json decay_to_json(const DecayReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"t", e.t},
                       {"psi_norm", e.psi_norm},
                       {"bound", e.bound},
                       {"holds", e.holds},
                       {"graph_norm", e.graph_norm},
                       {"graph_bound_holds", e.graph_bound_holds}});
  }
  return {{"x_plus", std::vector<double>(r.x_plus.data(), r.x_plus.data() + r.x_plus.size())},
          {"entries", entries},
          {"decay_exponent", finite_or_null(r.decay_exponent)},
          {"all_hold", r.all_hold}};
}

}  // namespace

int cmd_noise(const RunConfig& cfg) {
  cfg.validate();
  const Fiber fiber = cfg.build_fiber();
  const OUCache& cache = fiber.cache();
  {
    auto out = open_csv(cfg, "noise.csv");
    write_noise_csv(out, cache);
  }
  const SublinearReport rep = sublinear_diagnostic(cache.path(), cache);
  write_json(cfg, "noise.json",
             {{"schema", "rim.noise/1"},
              {"config", cfg.echo()},
              {"metadata", noise_metadata(cache)},
              {"sublinear",
               {{"max_path_ratio", rep.max_path_ratio},
                {"max_ou_ratio", rep.max_ou_ratio},
                {"mean_ou_average", rep.mean_ou_average},
                {"truncation_bound", rep.truncation_bound}}}});
  return kExitOk;
}

int cmd_gap(const RunConfig& cfg) {
  cfg.validate();
  const System sys = cfg.build_system();
  const double lh = sys.model.lambda_hat();
  const double lc = sys.model.lambda_check();
  json report = {{"schema", "rim.gap/1"},
                 {"config", cfg.echo()},
                 {"lambda_hat", lh},
                 {"lambda_check", lc},
                 {"L", sys.L()},
                 {"threshold_L", (lh - lc) / 4.0},
                 {"discriminant", characteristic_discriminant(lh, lc, sys.L())}};
  bool ok = true;
  try {
    report["eigen"] = eigen_to_json(eigen(lh, lc, sys.L()));
    report["gap_ok"] = true;
  } catch (const GapViolation& e) {
    ok = false;
    report["gap_ok"] = false;
    report["error"] = e.what();
  }

  if (!cfg.gap.L_values.empty()) {
    json sweep = json::array();
    if (cfg.gap.run_manifold) {
      check_back_window(cfg, cfg.pullback.depth + 1.0, "gap sweep");
      const Fiber fiber = cfg.build_fiber();
      const auto grid = std::make_shared<const GraphGrid>(1, cfg.graph.nodes_per_axis,
                                                          cfg.graph.radius);
      for (const auto& e : gap_sharpness_sweep(lh, lc, cfg.gap.L_values, fiber, grid,
                                               cfg.pullback, transform_settings(cfg))) {
        json row = {{"L", e.L},
                    {"discriminant", e.discriminant},
                    {"gap_ok", e.gap_ok},
                    {"message", e.message}};
        if (e.eig) row["eigen"] = eigen_to_json(*e.eig);
        if (e.slope) {
          row["slope"] = e.slope->mean;
          row["slope_max_deviation"] = e.slope->max_deviation;
          row["slope_error"] = std::abs(e.slope->mean - e.eig->e_minus);
          row["depth"] = e.depth;
        }
        sweep.push_back(row);
      }
    } else {
      for (double L : cfg.gap.L_values) {
        json row = {{"L", L}, {"discriminant", characteristic_discriminant(lh, lc, L)}};
        try {
          row["eigen"] = eigen_to_json(eigen(lh, lc, L));
          row["gap_ok"] = true;
        } catch (const GapViolation& e) {
          row["gap_ok"] = false;
          row["message"] = e.what();
        }
        sweep.push_back(row);
      }
    }
    report["sweep"] = sweep;
  }
  write_json(cfg, "gap.json", report);
  return ok ? kExitOk : kExitValidation;
}

int cmd_manifold(const RunConfig& cfg) {
  cfg.validate();
  check_back_window(cfg, cfg.pullback.depth + 1.0, "manifold");
  check_forward_window(cfg, 1.0, "manifold step diagnostics");
  const System sys = cfg.build_system();
  eigen(sys.model.lambda_hat(), sys.model.lambda_check(), sys.L());
  set_worker_count(cfg.workers);
  const Fiber fiber = cfg.build_fiber();

  std::optional<ManifoldResult> found;
  try {
    found = run_pullback(cfg, sys, fiber);
  } catch (const ConvergenceError& e) {
    {
      auto out = open_csv(cfg, "trace.csv");
      write_trace_csv(out, e.trace());
    }
    write_json(cfg, "manifold.json",
               {{"schema", "rim.manifold/1"},
                {"config", cfg.echo()},
                {"converged", false},
                {"error", e.what()},
                {"trace", e.trace()}});
    return kExitConvergence;
  }
  const ManifoldResult& r = *found;

  TransformRecord record;
  transform(sys, r.gamma_star, fiber, 1.0, transform_settings(cfg), &record);
  {
    auto out = open_csv(cfg, "trace.csv");
    write_trace_csv(out, r.trace);
  }
  {
    auto out = open_csv(cfg, "steps.csv");
    write_step_diagnostics(out, record);
  }
  json j = manifold_to_json(r);
  j["config"] = cfg.echo();
  j["converged"] = true;
  write_json(cfg, "manifold.json", j);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg, const std::string& result_path) {
  cfg.validate();
  const auto& v = cfg.verify;
  const System sys = cfg.build_system();
  const EigenData eig = eigen(sys.model.lambda_hat(), sys.model.lambda_check(), sys.L());
  const bool decay_applies = eig.lambda_plus > 0.0;
  check_back_window(cfg, cfg.pullback.depth + 1.0 + (decay_applies ? v.decay_t_max : 0),
                    "verify");
  check_forward_window(cfg, std::max(v.fixed_point_T, v.invariance_t) + 1e-9, "verify");
  set_worker_count(cfg.workers);
  const TransformSettings ts = transform_settings(cfg);
  const Fiber fiber = cfg.build_fiber();

  auto load = [&]() -> ManifoldResult {
    if (result_path.empty()) return run_pullback(cfg, sys, fiber);
    std::ifstream in(result_path);
    if (!in) throw ValidationError("cannot open manifold result '" + result_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw ValidationError("manifold result is not valid JSON: " + std::string(e.what()));
    }
    if (!j.value("converged", false) || !j.contains("gamma_star")) {
      throw ValidationError("manifold result holds no converged gamma*");
    }
    LipschitzGraph g = graph_from_json(j["gamma_star"]);
    if (!(g.grid() == *cfg.build_grid()) || g.value_dim() != sys.model.stable_count()) {
      throw ValidationError("manifold result does not match the configured grid and model");
    }
    if (g.omega().seed != fiber.cache().path().seed()) {
      throw ValidationError("manifold result was computed for a different noise seed");
    }
    return ManifoldResult{std::move(g),
                          fiber,
                          eig,
                          j.value("depth", 0),
                          j.value("trace", std::vector<double>{}),
                          std::numeric_limits<double>::quiet_NaN(),
                          eig.lambda_minus - eig.lambda_plus,
                          "loaded from " + result_path,
                          j.value("excursions", 0)};
  };
  const ManifoldResult r = load();

  json report = {{"schema", "rim.verify/1"}, {"config", cfg.echo()}};

  const ManifoldResult shifted_fp = run_pullback(cfg, sys, fiber.shifted(v.fixed_point_T));
  report["fixed_point_residual"] = fixed_point_residual(sys, r, shifted_fp, v.fixed_point_T, ts);

  const ManifoldResult shifted_inv = v.invariance_t == v.fixed_point_T
                                         ? shifted_fp
                                         : run_pullback(cfg, sys, fiber.shifted(v.invariance_t));
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.2, 1.0);
  // Keep evolved points inside the grid ball where gamma* is interpolated.
  const double reach = 0.9 * cfg.graph.radius * std::exp(-std::max(eig.lambda_plus, 0.0) * v.invariance_t);
  std::vector<Eigen::VectorXd> points;
  for (int i = 0; i < v.invariance_points; ++i) {
    Eigen::VectorXd d(sys.model.unstable_count());
    for (int k = 0; k < d.size(); ++k) d[k] = normal(rng);
    points.push_back(d.normalized() * (reach * unit(rng)));
  }
  const InvarianceReport inv = invariance_check(sys, r, shifted_inv, v.invariance_t, points,
                                                v.integrator_dt);
  json inv_points = json::array();
  for (const auto& p : inv.points) {
    inv_points.push_back({{"x_plus", std::vector<double>(p.x_plus.data(), p.x_plus.data() + p.x_plus.size())},
                          {"residual", p.residual},
                          {"relative_residual", p.relative_residual}});
  }
  report["invariance"] = {{"t", inv.t}, {"points", inv_points}, {"max_relative", inv.max_relative}};

  if (eig.kappa > 0.0 && v.contraction_pairs > 0) {
    double worst = 0.0;
    json ratios = json::array();
    for (int i = 0; i < v.contraction_pairs; ++i) {
      const auto g1 = random_kappa_graph(cfg.build_grid(), sys.model.stable_count(), eig.kappa,
                                         cfg.seed * 1000 + 2 * static_cast<std::uint64_t>(i));
      const auto g2 = random_kappa_graph(cfg.build_grid(), sys.model.stable_count(), eig.kappa,
                                         cfg.seed * 1000 + 2 * static_cast<std::uint64_t>(i) + 1);
      const double ratio = contraction_ratio(sys, fiber, g1, g2, 1.0, ts);
      worst = std::max(worst, ratio);
      ratios.push_back(ratio);
    }
    report["contraction"] = {{"ratios", ratios},
                             {"max_ratio", worst},
                             {"theory_rate", eig.rate},
                             {"within_bound", worst <= eig.rate * 1.05}};
  }
  report["trace_rate_fit"] = finite_or_null(fit_log_slope(r.trace, cfg.pullback.burn_in));
  report["expected_rate"] = eig.lambda_minus - eig.lambda_plus;

  if (decay_applies) {
    Eigen::VectorXd xp = Eigen::VectorXd::Zero(sys.model.unstable_count());
    xp[0] = 0.5 * cfg.graph.radius;
    const LipschitzGraph gamma0 =
        LipschitzGraph::zero(cfg.build_grid(), sys.model.stable_count(), eig.kappa);
    report["unstable_decay"] =
        decay_to_json(unstable_decay_check(sys, fiber, gamma0, xp, v.decay_t_max, cfg.pullback, ts));
  } else {
    report["unstable_decay"] = "not applicable: lambda_plus <= 0";
  }

  if (sys.model.unstable_count() == 1 && sys.model.stable_count() == 1) {
    const SlopeFit fit = fit_slope(r.gamma_star);
    report["slope"] = {{"mean", fit.mean}, {"max_deviation", fit.max_deviation}};
    if (sys.nl.kind() == Nonlinearity::Kind::linear_coupling) {
      report["slope"]["expected"] = eig.e_minus;
      report["slope"]["error"] = std::abs(fit.mean - eig.e_minus);
    }
  }
  write_json(cfg, "verify.json", report);
  return kExitOk;
}

int cmd_conjugacy(const RunConfig& cfg) {
  cfg.validate();
  const auto& q = cfg.conjugacy;
  const System sys = cfg.build_system();
  if (static_cast<int>(q.x.size()) != sys.model.dim()) {
    throw ValidationError("conjugacy.x must have one entry per mode");
  }
  for (double dt : q.dt_values) {
    if (dt < cfg.noise.dt * (1.0 - 1e-12)) {
      throw ValidationError("conjugacy dt values must not be finer than noise.dt");
    }
  }
  if (q.dt_values.empty()) throw ValidationError("conjugacy.dt_values is empty");
  set_worker_count(cfg.workers);

  Eigen::VectorXd xv(sys.model.dim());
  for (int i = 0; i < xv.size(); ++i) xv[i] = q.x[static_cast<std::size_t>(i)];
  const StateVector x = StateVector::from_full(xv, sys.model.unstable_count());

  std::vector<Fiber> fibers(static_cast<std::size_t>(q.seeds));
  for_each_index(fibers.size(), Execution::parallel, [&](std::size_t i) {
    const WienerPath path = WienerPath::sample(cfg.seed + i, -(cfg.noise.t_trunc + 1.0), q.T + 1.0,
                                               cfg.noise.dt);
    fibers[i] = Fiber(std::make_shared<const OUCache>(path, cfg.noise.t_trunc, Execution::serial));
  });

  std::vector<double> rms;
  for (double dt : q.dt_values) {
    std::vector<double> err(fibers.size());
    for_each_index(fibers.size(), Execution::parallel, [&](std::size_t i) {
      const Fiber& f = fibers[i];
      const StateVector conj = transform_T_inv(
          f.z(q.T), evolve(sys, f, transform_T(f.z(0.0), x, sys.z_cap), q.T, dt), sys.z_cap);
      const StateVector direct = evolve_spde(sys, f.path(), x, q.T, dt);
      const Eigen::VectorXd d = conj.full() - direct.full();
      err[i] = d.squaredNorm();
    });
    double sum = 0.0;
    for (double e : err) sum += e;
    rms.push_back(std::sqrt(sum / static_cast<double>(err.size())));
  }

  json table = json::array();
  {
    auto out = open_csv(cfg, "conjugacy.csv");
    out << "dt,rms_error,ratio\n" << std::setprecision(17);
    for (std::size_t k = 0; k < rms.size(); ++k) {
      const double ratio = k + 1 < rms.size() ? rms[k] / rms[k + 1]
                                              : std::numeric_limits<double>::quiet_NaN();
      out << q.dt_values[k] << ',' << rms[k] << ',';
      if (std::isfinite(ratio)) out << ratio;
      out << '\n';
      table.push_back({{"dt", q.dt_values[k]}, {"rms_error", rms[k]}, {"ratio", finite_or_null(ratio)}});
    }
  }
  {
    auto out = open_csv(cfg, "trajectory.csv");
    const Fiber& f = fibers.front();
    write_trajectory_csv(
        out, evolve_trajectory(sys, f, transform_T(f.z(0.0), x, sys.z_cap), q.T, q.dt_values.back()));
  }
  write_json(cfg, "conjugacy.json",
             {{"schema", "rim.conjugacy/1"},
              {"config", cfg.echo()},
              {"table", table},
              {"expected_ratio", std::sqrt(2.0)}});
  return kExitOk;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConvergenceError*>(&e)) return kExitConvergence;
  if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const GapViolation*>(&e) ||
      dynamic_cast<const OutOfWindow*>(&e) || dynamic_cast<const CapExceeded*>(&e)) {
    return kExitValidation;
  }
  return kExitFailure;
}

}  // namespace rim
