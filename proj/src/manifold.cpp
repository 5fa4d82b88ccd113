#include "rim/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <random>

#include "rim/errors.hpp"

namespace rim {

LipschitzGraph pullback_sweep(const System& sys, const Fiber& fiber, const LipschitzGraph& gamma0,
                              int k, const TransformSettings& settings, int* excursions) {
  if (k < 1) throw ValidationError("pullback depth must be >= 1");
  LipschitzGraph gamma = gamma0;
  for (int j = k; j >= 1; --j) {
    TransformRecord record;
    gamma = transform(sys, gamma, fiber.shifted(-static_cast<double>(j)), 1.0, settings,
                      excursions ? &record : nullptr);
    if (excursions) *excursions += record.excursions();
  }
  return gamma;
}

double fit_log_slope(const std::vector<double>& trace, int burn_in) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t i = static_cast<std::size_t>(std::max(burn_in, 0)); i < trace.size(); ++i) {
    if (!(trace[i] > 0.0)) continue;
    const double x = static_cast<double>(i + 1);
    const double y = std::log(trace[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ManifoldResult pullback_fixed_point(const System& sys, const Fiber& fiber,
                                    const LipschitzGraph& gamma0, const PullbackSettings& pullback,
                                    const TransformSettings& settings) {
  if (pullback.depth < 1) throw ValidationError("pullback depth must be >= 1");
  if (!(pullback.tol > 0.0)) throw ValidationError("pullback tolerance must be positive");
  const EigenData eig = eigen(sys.model.lambda_hat(), sys.model.lambda_check(), sys.L());
  if (!fiber.covers(-(pullback.depth + 1.0), 0.0)) {
    throw OutOfWindow("noise window does not cover the pullback depth " +
                      std::to_string(pullback.depth + 1));
  }
  if (lip_norm(gamma0, settings.exec) > eig.kappa * (1.0 + kGridSlack) + 1e-12) {
    throw ValidationError("initial graph is not in the kappa-ball");
  }

  ManifoldResult result{gamma0, fiber, eig, 0, {}, 0.0, eig.lambda_minus - eig.lambda_plus, "", 0};
  const double diam = 2.0 * eig.kappa;
  LipschitzGraph current = pullback_sweep(sys, fiber, gamma0, 1, settings, &result.excursions);
  for (int k = 1; k <= pullback.depth; ++k) {
    LipschitzGraph next = pullback_sweep(sys, fiber, gamma0, k + 1, settings, &result.excursions);
    result.trace.push_back(metric(next, current));
    result.depth = k;
    current = std::move(next);
    if (result.trace.back() <= pullback.tol) {
      result.stop_reason = "distance below tolerance";
    } else if (std::exp(result.expected_rate * (k + 1)) * diam <= pullback.tol) {
      result.stop_reason = "a priori bound below tolerance";
    } else {
      continue;
    }
    result.gamma_star = std::move(current);
    result.rate_fit = fit_log_slope(result.trace, pullback.burn_in);
    return result;
  }
  throw ConvergenceError("pullback did not converge within depth " +
                             std::to_string(pullback.depth) + " (last distance " +
                             std::to_string(result.trace.back()) + ")",
                         result.trace);
}

double fixed_point_residual(const System& sys, const ManifoldResult& result,
                            const ManifoldResult& shifted, double T,
                            const TransformSettings& settings) {
  const LipschitzGraph image = transform(sys, result.gamma_star, result.fiber, T, settings);
  return metric(image, shifted.gamma_star);
}

InvarianceReport invariance_check(const System& sys, const ManifoldResult& result,
                                  const ManifoldResult& shifted, double t,
                                  const std::vector<Eigen::VectorXd>& x_plus, double dt) {
  InvarianceReport report;
  report.t = t;
  for (const auto& xp : x_plus) {
    InvariancePoint p;
    p.x_plus = xp;
    const StateVector x{xp, result.gamma_star.evaluate(xp)};
    p.state_norm = x.norm();
    const StateVector phi = evolve(sys, result.fiber, x, t, dt);
    p.residual = (phi.minus - shifted.gamma_star.evaluate(phi.plus)).norm();
    p.relative_residual = p.state_norm > 0.0 ? p.residual / p.state_norm : 0.0;
    report.max_relative = std::max(report.max_relative, p.relative_residual);
    report.points.push_back(std::move(p));
  }
  return report;
}

DecayReport unstable_decay_check(const System& sys, const Fiber& fiber,
                                 const LipschitzGraph& gamma0, const Eigen::VectorXd& x_plus,
                                 int t_max, const PullbackSettings& pullback,
                                 const TransformSettings& settings) {
  if (t_max < 1) throw ValidationError("decay check needs t_max >= 1");
  if (x_plus.size() != sys.model.unstable_count()) throw ValidationError("x+ must lie in H+");
  const EigenData eig = eigen(sys.model.lambda_hat(), sys.model.lambda_check(), sys.L());
  if (!(eig.lambda_plus > 0.0)) {
    throw ValidationError("unstable decay check requires lambda_plus > 0");
  }

  // graphs[j] = gamma* at theta_{-j} omega; records[j] = unit step from there.
  std::vector<LipschitzGraph> graphs(static_cast<std::size_t>(t_max) + 1, gamma0);
  std::vector<TransformRecord> records(static_cast<std::size_t>(t_max) + 1);
  const auto top = static_cast<std::size_t>(t_max);
  graphs[top] = pullback_fixed_point(sys, fiber.shifted(-static_cast<double>(t_max)), gamma0,
                                     pullback, settings)
                    .gamma_star;
  for (std::size_t j = top; j >= 1; --j) {
    const LipschitzGraph next = transform(sys, graphs[j], fiber.shifted(-static_cast<double>(j)),
                                          1.0, settings, &records[j]);
    graphs[j - 1] = next;
  }

  DecayReport report;
  report.x_plus = x_plus;
  report.all_hold = true;
  const double x_norm = x_plus.norm();
  Eigen::VectorXd y = x_plus;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (std::size_t t = 1; t <= top; ++t) {
    y = backward_map(sys, records[t], y, settings);
    DecayEntry e;
    e.t = static_cast<int>(t);
    e.psi_norm = y.norm();
    const double td = static_cast<double>(t);
    e.bound = std::exp(-eig.lambda_plus * td - fiber.z_integral(-td, 0.0)) * x_norm;
    e.holds = e.psi_norm <= e.bound * (1.0 + kDecaySlack);
    e.graph_norm = graphs[t].evaluate(y).norm();
    e.graph_bound_holds = e.graph_norm <= eig.kappa * (1.0 + kGridSlack) * e.psi_norm;
    report.all_hold = report.all_hold && e.holds && e.graph_bound_holds;
    if (e.psi_norm > 0.0) {
      const double ly = -std::log(e.psi_norm);
      sx += td;
      sy += ly;
      sxx += td * td;
      sxy += td * ly;
      ++n;
    }
    report.entries.push_back(e);
  }
  report.decay_exponent = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx)
                                 : std::numeric_limits<double>::quiet_NaN();
  return report;
}

LipschitzGraph spde_manifold(const LipschitzGraph& gamma_star, double z, double cap) {
  check_z_cap(z, cap);
  const double up = std::exp(z);
  const double down = std::exp(-z);
  LipschitzGraph out = LipschitzGraph::from_function(
      gamma_star.grid_ptr(), gamma_star.value_dim(), gamma_star.kappa_bound(),
      [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return up * gamma_star.evaluate(down * y);
      });
  out.set_omega(gamma_star.omega());
  return out;
}

double contraction_ratio(const System& sys, const Fiber& fiber, const LipschitzGraph& g1,
                         const LipschitzGraph& g2, double T, const TransformSettings& settings) {
  const double before = metric(g1, g2);
  if (!(before > 0.0)) throw ValidationError("contraction ratio needs two distinct graphs");
  const LipschitzGraph a = transform(sys, g1, fiber, T, settings);
  const LipschitzGraph b = transform(sys, g2, fiber, T, settings);
  return metric(a, b) / before;
}

LipschitzGraph random_kappa_graph(std::shared_ptr<const GraphGrid> grid, int value_dim,
                                  double kappa, std::uint64_t seed) {
  const int dim = grid->dim();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> freq(0.5, 3.0);
  std::uniform_real_distribution<double> scale_dist(0.2, 1.0);
  Eigen::MatrixXd a(value_dim, dim), b(value_dim, dim), c(value_dim, dim);
  for (int j = 0; j < value_dim; ++j) {
    for (int d = 0; d < dim; ++d) {
      a(j, d) = unit(rng);
      b(j, d) = freq(rng);
      c(j, d) = 3.0 * unit(rng);
    }
  }
  const double scale = scale_dist(rng);
  LipschitzGraph g = LipschitzGraph::from_function(
      grid, value_dim, kappa, [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(value_dim);
        for (int j = 0; j < value_dim; ++j) {
          for (int d = 0; d < dim; ++d) {
            v[j] += a(j, d) * (std::sin(b(j, d) * y[d] + c(j, d)) - std::sin(c(j, d)));
          }
        }
        return v;
      });
  const double lip = lip_norm(g, Execution::serial);
  if (lip > 0.0) {
    LipschitzGraph scaled(grid, value_dim, kappa);
    for (std::size_t i = 0; i < grid->node_count(); ++i) {
      scaled.set_node_value(i, g.node_value(i) * (scale * kappa / lip));
    }
    return scaled;
  }
  return g;
}

LipschitzGraph linear_graph(std::shared_ptr<const GraphGrid> grid, int value_dim, double slope,
                            double kappa_bound) {
  const int m = std::min(grid->dim(), value_dim);
  return LipschitzGraph::from_function(grid, value_dim, kappa_bound,
                                       [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
                                         Eigen::VectorXd v = Eigen::VectorXd::Zero(value_dim);
                                         v.head(m) = slope * y.head(m);
                                         return v;
                                       });
}

SlopeFit fit_slope(const LipschitzGraph& g) {
  if (g.grid().dim() != 1 || g.value_dim() != 1) {
    throw ValidationError("slope fit needs a one-dimensional graph");
  }
  std::vector<double> slopes;
  for (std::size_t i = 0; i < g.grid().node_count(); ++i) {
    if (i == g.grid().origin()) continue;
    slopes.push_back(g.values()(0, static_cast<Eigen::Index>(i)) / g.grid().node(i)[0]);
  }
  SlopeFit fit;
  for (double s : slopes) fit.mean += s;
  fit.mean /= static_cast<double>(slopes.size());
  for (double s : slopes) fit.max_deviation = std::max(fit.max_deviation, std::abs(s - fit.mean));
  return fit;
}

std::vector<GapSweepEntry> gap_sharpness_sweep(double lambda_hat, double lambda_check,
                                               const std::vector<double>& L_values,
                                               const Fiber& fiber,
                                               std::shared_ptr<const GraphGrid> grid,
                                               const PullbackSettings& pullback,
                                               const TransformSettings& settings) {
  if (grid->dim() != 1) throw ValidationError("gap sweep runs on a one-dimensional H+");
  std::vector<GapSweepEntry> out;
  for (double L : L_values) {
    GapSweepEntry entry;
    entry.L = L;
    entry.discriminant = characteristic_discriminant(lambda_hat, lambda_check, L);
    try {
      const EigenData eig = eigen(lambda_hat, lambda_check, L);
      entry.gap_ok = true;
      entry.eig = eig;
      const System sys{SpectralModel({lambda_hat, lambda_check}, 1),
                       Nonlinearity::linear_coupling(L), kDefaultZCap};
      const ManifoldResult r = pullback_fixed_point(
          sys, fiber, LipschitzGraph::zero(grid, 1, eig.kappa), pullback, settings);
      entry.slope = fit_slope(r.gamma_star);
      entry.depth = r.depth;
      entry.message = "manifold computed";
    } catch (const GapViolation& e) {
      entry.gap_ok = false;
      entry.message = e.what();
    } catch (const ConvergenceError& e) {
      entry.message = e.what();
    }
    out.push_back(std::move(entry));
  }
  return out;
}

nlohmann::json eigen_to_json(const EigenData& e) {
  return {
      {"lambda_hat", e.lambda_hat},
      {"lambda_check", e.lambda_check},
      {"L", e.L},
      {"discriminant", e.discriminant},
      {"lambda_plus", e.lambda_plus},
      {"lambda_minus", e.lambda_minus},
      {"e_plus", std::isfinite(e.e_plus) ? nlohmann::json(e.e_plus) : nlohmann::json("inf")},
      {"e_minus", e.e_minus},
      {"kappa", e.kappa},
      {"rate", e.rate},
      {"eigvec_plus", {e.plus_w(), e.plus_v()}},
      {"eigvec_minus", {e.minus_w(), e.minus_v()}},
  };
}

nlohmann::json manifold_to_json(const ManifoldResult& r) {
  auto finite_or_null = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(); };
  return {
      {"schema", "rim.manifold/1"},
      {"gamma_star", graph_to_json(r.gamma_star)},
      {"fiber_shift", r.fiber.shift()},
      {"eigen", eigen_to_json(r.eig)},
      {"depth", r.depth},
      {"trace", r.trace},
      {"rate_fit", finite_or_null(r.rate_fit)},
      {"expected_rate", r.expected_rate},
      {"stop_reason", r.stop_reason},
      {"excursions", r.excursions},
  };
}

void write_trace_csv(std::ostream& out, const std::vector<double>& trace) {
  out << "k,distance\n" << std::setprecision(17);
  for (std::size_t k = 0; k < trace.size(); ++k) out << k + 1 << ',' << trace[k] << '\n';
}

}  // namespace rim
