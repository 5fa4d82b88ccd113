#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rim/cocycle.hpp"
#include "rim/comparison.hpp"
#include "rim/graph_transform.hpp"

namespace rim {

struct PullbackSettings {
  int depth = 30;     ///< largest pullback depth N
  double tol = 1e-4;  ///< stop once d(gamma_k, gamma_{k+1}) <= tol
  int burn_in = 2;    ///< leading trace entries excluded from the rate fit
};

struct ManifoldResult {
  LipschitzGraph gamma_star;
  Fiber fiber;
  EigenData eig;
  int depth = 0;              ///< k with gamma_star = Phi(k + 1, theta_{-k-1} omega, gamma0)
  std::vector<double> trace;  ///< trace[k-1] = d(sweep(k), sweep(k + 1))
  double rate_fit = 0.0;      ///< least-squares slope of log trace after burn-in (NaN if undefined)
  double expected_rate = 0.0; ///< lambda_minus - lambda_plus
  std::string stop_reason;
  int excursions = 0;
};

/// Phi(k, theta_{-k} omega, gamma0) by unit strides
/// gamma <- Phi(1, theta_{-j} omega, gamma) for j = k..1.
LipschitzGraph pullback_sweep(const System& sys, const Fiber& fiber, const LipschitzGraph& gamma0,
                              int k, const TransformSettings& settings, int* excursions = nullptr);

/// Generalized fixed point gamma*(omega) by pullback. Throws GapViolation when
/// the gap condition fails and ConvergenceError (with the trace) when depth N
/// is reached without meeting tol.
ManifoldResult pullback_fixed_point(const System& sys, const Fiber& fiber,
                                    const LipschitzGraph& gamma0, const PullbackSettings& pullback,
                                    const TransformSettings& settings);

/// Least-squares slope of log(trace[k]) against k over entries k >= burn_in
/// that are positive. NaN with fewer than two usable entries.
double fit_log_slope(const std::vector<double>& trace, int burn_in);

/// d(Phi(T, omega, gamma*(omega)), gamma*(theta_T omega)); `shifted` must be
/// an independent pullback result at theta_T omega.
double fixed_point_residual(const System& sys, const ManifoldResult& result,
                            const ManifoldResult& shifted, double T,
                            const TransformSettings& settings);

struct InvariancePoint {
  Eigen::VectorXd x_plus;
  double state_norm = 0.0;
  double residual = 0.0;           ///< |pi- phi - gamma*(theta_t omega, pi+ phi)|
  double relative_residual = 0.0;  ///< residual / |x|
};

struct InvarianceReport {
  double t = 0.0;
  std::vector<InvariancePoint> points;
  double max_relative = 0.0;
};

/// Evolves points x+ + gamma*(omega, x+) with the cocycle for time t and
/// measures their distance from the graph of gamma*(theta_t omega).
InvarianceReport invariance_check(const System& sys, const ManifoldResult& result,
                                  const ManifoldResult& shifted, double t,
                                  const std::vector<Eigen::VectorXd>& x_plus, double dt);

inline constexpr double kDecaySlack = 1e-5;

struct DecayEntry {
  int t = 0;
  double psi_norm = 0.0;
  double bound = 0.0;  ///< e^{-lambda_plus t - int_{-t}^0 z} |x+|
  bool holds = false;
  double graph_norm = 0.0;  ///< |gamma*(theta_{-t} omega, Psi)|
  bool graph_bound_holds = false;
};

struct DecayReport {
  Eigen::VectorXd x_plus;
  std::vector<DecayEntry> entries;
  double decay_exponent = 0.0;  ///< fitted -d/dt log |Psi(t)|
  bool all_hold = false;
};

/// Backward values Psi(t) of a point x+ on the graph at omega along the
/// fibers theta_{-t} omega, t = 1..t_max, with gamma* obtained by pullback at
/// theta_{-t_max} omega from gamma0 and carried forward in unit strides.
/// Requires lambda_plus > 0. An entry holds when |Psi| <= bound (1 + kDecaySlack);
/// the bound is attained in the linear case, so the slack covers the O(h^2)
/// quadrature error of the default step grid.
DecayReport unstable_decay_check(const System& sys, const Fiber& fiber,
                                 const LipschitzGraph& gamma0, const Eigen::VectorXd& x_plus,
                                 int t_max,
                                 const PullbackSettings& pullback,
                                 const TransformSettings& settings);

/// gamma_hat(y+) = e^{z} gamma*(e^{-z} y+) resampled on the grid of gamma*.
LipschitzGraph spde_manifold(const LipschitzGraph& gamma_star, double z,
                             double cap = kDefaultZCap);

/// d(Phi(T, omega, g1), Phi(T, omega, g2)) / d(g1, g2).
double contraction_ratio(const System& sys, const Fiber& fiber, const LipschitzGraph& g1,
                         const LipschitzGraph& g2, double T, const TransformSettings& settings);

/// Deterministic smooth graph with gamma(0) = 0 and node Lipschitz constant
/// exactly scale * kappa, scale drawn from [0.2, 1].
LipschitzGraph random_kappa_graph(std::shared_ptr<const GraphGrid> grid, int value_dim,
                                  double kappa, std::uint64_t seed);

/// Linear graph gamma(y)_j = slope * y_j for j < min(u, n - u), other
/// components zero; its Lipschitz constant is |slope|.
LipschitzGraph linear_graph(std::shared_ptr<const GraphGrid> grid, int value_dim, double slope,
                            double kappa_bound);

struct SlopeFit {
  double mean = 0.0;
  double max_deviation = 0.0;  ///< max over nonzero nodes of |gamma(y)/y - mean|
};

/// Node-wise slope gamma(y) / y of a graph over a one-dimensional H+ with
/// one-dimensional H-.
SlopeFit fit_slope(const LipschitzGraph& g);

struct GapSweepEntry {
  double L = 0.0;
  double discriminant = 0.0;
  bool gap_ok = false;
  std::string message;
  std::optional<EigenData> eig;
  std::optional<SlopeFit> slope;
  int depth = 0;
};

/// Runs the two-mode linear-coupling pipeline (eigenvalues lambda_hat,
/// lambda_check) for each L: GapViolation below the threshold, a pullback
/// manifold and its slope above it.
std::vector<GapSweepEntry> gap_sharpness_sweep(double lambda_hat, double lambda_check,
                                               const std::vector<double>& L_values,
                                               const Fiber& fiber,
                                               std::shared_ptr<const GraphGrid> grid,
                                               const PullbackSettings& pullback,
                                               const TransformSettings& settings);

nlohmann::json eigen_to_json(const EigenData& e);
nlohmann::json manifold_to_json(const ManifoldResult& r);
/// CSV rows (k, distance).
void write_trace_csv(std::ostream& out, const std::vector<double>& trace);

}  // namespace rim
