#include "rim/graph_transform.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "rim/errors.hpp"

namespace rim {

// Taylor series near zero where the closed forms cancel.
double phi1(double x) {
  if (std::abs(x) < 0.1) {
    double term = 1.0, sum = 1.0;
    for (int k = 1; k <= 10; ++k) {
      term *= x / (k + 1);
      sum += term;
    }
    return sum;
  }
  return std::expm1(x) / x;
}

double phi2(double x) {
  if (std::abs(x) < 0.1) {
    double term = 0.5, sum = 0.5;
    for (int k = 1; k <= 10; ++k) {
      term *= x / (k + 2);
      sum += term;
    }
    return sum;
  }
  return (std::expm1(x) - x) / (x * x);
}

namespace {

void check_shapes(const System& sys, const LipschitzGraph& gamma) {
  if (gamma.grid().dim() != sys.model.unstable_count() ||
      gamma.value_dim() != sys.model.stable_count()) {
    throw ValidationError("graph dimensions do not match the spectral splitting");
  }
}

}  // namespace

double contraction_K(const Fiber& fiber, double T, double L_gamma, double L, double lambda_hat,
                     double lambda_check) {
  if (!(T >= 0.0)) throw ValidationError("contraction_K requires T >= 0");
  const double a = fiber.abs_z_integral(0.0, T);
  return L * T *
         ((L_gamma + 1.0) * std::exp(a + std::abs(lambda_hat) * T) +
          std::exp(a + std::abs(lambda_check) * T));
}

StepSize step_size(const Fiber& fiber, double kappa, double L, double lambda_hat,
                   double lambda_check, double max_step) {
  if (!(max_step > 0.0)) throw ValidationError("maximum step must be positive");
  if (L == 0.0) return {max_step, false};

  const double horizon = fiber.cache().t_max() - fiber.shift();
  if (!(horizon > 0.0)) throw OutOfWindow("fiber has no forward horizon for step control");
  auto K = [&](double T) { return contraction_K(fiber, T, kappa, L, lambda_hat, lambda_check); };

  double lo = 0.0;
  double hi = std::min(1.0, horizon);
  while (K(hi) < 1.0) {
    if (hi >= horizon) return {0.5 * horizon, true};
    lo = hi;
    hi = std::min(2.0 * hi, horizon);
  }
  while (hi - lo > 1e-6 * hi) {
    const double mid = 0.5 * (lo + hi);
    (K(mid) >= 1.0 ? hi : lo) = mid;
  }
  return {0.5 * lo, false};
}

StepKernel::StepKernel(const System& sys, const Fiber& fiber, double T_, int intervals_)
    : T(T_), intervals(intervals_) {
  if (!(T > 0.0)) throw ValidationError("step length must be positive");
  if (intervals < 1) throw ValidationError("a step needs at least one time interval");
  if (!fiber.covers(0.0, T)) throw OutOfWindow("step leaves the cached noise window");

  const int n = sys.model.dim();
  const int u = sys.model.unstable_count();
  const double h = T / intervals;
  times.resize(static_cast<std::size_t>(intervals) + 1);
  z.resize(times.size());
  std::vector<double> Z(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    times[k] = h * static_cast<double>(k);
    z[k] = fiber.z(times[k]);
    check_z_cap(z[k], sys.z_cap);
    Z[k] = fiber.z_integral(0.0, times[k]);
  }
  times.back() = T;

  decay.resize(n, intervals);
  near.resize(n, intervals);
  far.resize(n, intervals);
  for (int k = 0; k < intervals; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double zbar = (Z[ku + 1] - Z[ku]) / h;
    for (int i = 0; i < n; ++i) {
      const double c = sys.model.eigenvalue(i) + zbar;
      // H+ modes are integrated backward from the right end, H- forward.
      const double x = i < u ? -c * h : c * h;
      const double p1 = phi1(x);
      const double p2 = phi2(x);
      decay(i, k) = std::exp(x);
      near(i, k) = h * p2;
      far(i, k) = h * (p1 - p2);
    }
  }
}

TrajectoryPair picard_solve(const System& sys, const StepKernel& kernel,
                            const Eigen::VectorXd& y_plus, const LipschitzGraph& gamma,
                            const TransformSettings& settings) {
  const int u = sys.model.unstable_count();
  const int s = sys.model.stable_count();
  const int n = sys.model.dim();
  const int N = kernel.intervals;
  if (y_plus.size() != u) throw ValidationError("base point must lie in H+");

  TrajectoryPair out;
  out.times = kernel.times;
  out.y_plus = y_plus;

  const auto dp = kernel.decay.topRows(u);
  const auto dm = kernel.decay.bottomRows(s);
  const auto np = kernel.near.topRows(u);
  const auto nm = kernel.near.bottomRows(s);
  const auto fp = kernel.far.topRows(u);
  const auto fm = kernel.far.bottomRows(s);

  Eigen::MatrixXd w(u, N + 1), v(s, N + 1);
  Eigen::VectorXd gv(s);

  // Linear flow as the starting iterate: exact when G vanishes.
  w.col(N) = y_plus;
  for (int k = N - 1; k >= 0; --k) w.col(k) = dp.col(k).cwiseProduct(w.col(k + 1));
  out.excursion = gamma.evaluate_into(w.col(0), gv);
  v.col(0) = gv;
  for (int k = 0; k < N; ++k) v.col(k + 1) = dm.col(k).cwiseProduct(v.col(k));

  const double scale = y_plus.norm();
  if (scale == 0.0) {
    out.w = std::move(w);
    out.v = std::move(v);
    return out;
  }

  Eigen::MatrixXd w2(u, N + 1), v2(s, N + 1), G(n, N + 1);
  Eigen::VectorXd x(n), g(n);
  std::vector<double> trace;
  double prev = -1.0;
  for (int it = 1; it <= settings.max_iter; ++it) {
    for (int k = 0; k <= N; ++k) {
      x.head(u) = w.col(k);
      x.tail(s) = v.col(k);
      sys.nl.apply_transformed(kernel.z[static_cast<std::size_t>(k)], x, u, g, sys.z_cap);
      G.col(k) = g;
    }
    const auto Gp = G.topRows(u);
    const auto Gm = G.bottomRows(s);

    w2.col(N) = y_plus;
    for (int k = N - 1; k >= 0; --k) {
      w2.col(k) = dp.col(k).cwiseProduct(w2.col(k + 1)) - np.col(k).cwiseProduct(Gp.col(k)) -
                  fp.col(k).cwiseProduct(Gp.col(k + 1));
    }
    const bool excursion = gamma.evaluate_into(w2.col(0), gv);
    v2.col(0) = gv;
    for (int k = 0; k < N; ++k) {
      v2.col(k + 1) = dm.col(k).cwiseProduct(v2.col(k)) + fm.col(k).cwiseProduct(Gm.col(k)) +
                      nm.col(k).cwiseProduct(Gm.col(k + 1));
    }

    const double res = (w2 - w).colwise().norm().maxCoeff() + (v2 - v).colwise().norm().maxCoeff();
    if (prev > 1e-13 * scale) out.observed_ratio = std::max(out.observed_ratio, res / prev);
    prev = res;
    trace.push_back(res / scale);
    w.swap(w2);
    v.swap(v2);
    out.iterations = it;
    out.residual = res / scale;
    out.excursion = excursion;
    if (res <= settings.tol * scale) {
      out.w = std::move(w);
      out.v = std::move(v);
      return out;
    }
  }
  throw ConvergenceError("Picard iteration did not reach tolerance " +
                             std::to_string(settings.tol) + " in " +
                             std::to_string(settings.max_iter) + " iterations",
                         std::move(trace));
}

TrajectoryPair picard_solve(const System& sys, const Eigen::VectorXd& y_plus,
                            const LipschitzGraph& gamma, const Fiber& fiber, double T,
                            const TransformSettings& settings) {
  check_shapes(sys, gamma);
  const double K = contraction_K(fiber, T, lip_norm(gamma, settings.exec), sys.L(),
                                 sys.model.lambda_hat(), sys.model.lambda_check());
  if (sys.L() > 0.0 && !(K < 1.0)) {
    throw ValidationError("step too long for a contraction (K = " + std::to_string(K) + ")");
  }
  const StepKernel kernel(sys, fiber, T, settings.time_nodes);
  return picard_solve(sys, kernel, y_plus, gamma, settings);
}

namespace {

TransformStep step_with_lip(const System& sys, const LipschitzGraph& gamma, const Fiber& fiber,
                            double T, const TransformSettings& settings, double lip) {
  check_shapes(sys, gamma);
  const double K = contraction_K(fiber, T, lip, sys.L(), sys.model.lambda_hat(),
                                 sys.model.lambda_check());
  if (sys.L() > 0.0 && !(K < 1.0)) {
    throw ValidationError("step too long for a contraction (K = " + std::to_string(K) + ")");
  }
  const StepKernel kernel(sys, fiber, T, settings.time_nodes);

  const std::size_t count = gamma.grid().node_count();
  TransformStep step{fiber, T, K, gamma, gamma, {}, {}, 0, 0.0};
  step.psi.resize(count);
  step.nodes.resize(count);
  std::vector<Eigen::VectorXd> phi(count);
  for_each_index(count, settings.exec, [&](std::size_t i) {
    const TrajectoryPair sol = picard_solve(sys, kernel, gamma.grid().node(i), gamma, settings);
    step.psi[i] = sol.psi();
    phi[i] = sol.phi();
    step.nodes[i] = {sol.iterations, sol.residual, sol.excursion};
  });
  for (std::size_t i = 0; i < count; ++i) {
    step.output.set_node_value(i, phi[i]);
    step.excursions += step.nodes[i].excursion ? 1 : 0;
    step.max_psi_norm = std::max(step.max_psi_norm, step.psi[i].norm());
  }
  step.output.set_omega({fiber.cache().path().seed(), fiber.shift() + T});
  return step;
}

}  // namespace

TransformStep transform_step(const System& sys, const LipschitzGraph& gamma, const Fiber& fiber,
                             double T, const TransformSettings& settings) {
  return step_with_lip(sys, gamma, fiber, T, settings, lip_norm(gamma, settings.exec));
}

int TransformRecord::excursions() const {
  int total = 0;
  for (const auto& s : steps) total += s.excursions;
  return total;
}

LipschitzGraph transform(const System& sys, const LipschitzGraph& gamma, const Fiber& fiber,
                         double T_total, const TransformSettings& settings,
                         TransformRecord* record) {
  if (!(T_total >= 0.0)) throw ValidationError("transform time must be >= 0");
  LipschitzGraph current = gamma;
  if (T_total == 0.0) return current;
  double t = 0.0;
  while (T_total - t > 1e-12) {
    const Fiber f = fiber.shifted(t);
    const double lip = lip_norm(current, settings.exec);
    const double kappa = std::max(current.kappa_bound(), lip);
    const StepSize ss = step_size(f, kappa, sys.L(), sys.model.lambda_hat(),
                                  sys.model.lambda_check(), settings.t_max);
    double T = std::min({ss.T, settings.t_max, T_total - t});
    // Avoid a sliver step at the end.
    if (T_total - t - T < 1e-9) T = T_total - t;
    TransformStep step = step_with_lip(sys, current, f, T, settings, lip);
    current = step.output;
    t += T;
    if (record) record->steps.push_back(std::move(step));
  }
  current.set_omega({fiber.cache().path().seed(), fiber.shift() + T_total});
  return current;
}

Eigen::VectorXd backward_map(const System& sys, const TransformRecord& record,
                             const Eigen::VectorXd& y_plus, const TransformSettings& settings) {
  Eigen::VectorXd y = y_plus;
  for (auto it = record.steps.rbegin(); it != record.steps.rend(); ++it) {
    const StepKernel kernel(sys, it->fiber, it->T, settings.time_nodes);
    y = picard_solve(sys, kernel, y, it->input, settings).psi();
  }
  return y;
}

void write_step_diagnostics(std::ostream& out, const TransformRecord& record) {
  out << "step,node,iterations,residual,K,excursion\n";
  out << std::setprecision(17);
  for (std::size_t j = 0; j < record.steps.size(); ++j) {
    const auto& s = record.steps[j];
    for (std::size_t i = 0; i < s.nodes.size(); ++i) {
      out << j << ',' << i << ',' << s.nodes[i].iterations << ',' << s.nodes[i].residual << ','
          << s.K << ',' << (s.nodes[i].excursion ? 1 : 0) << '\n';
    }
  }
}

}  // namespace rim
