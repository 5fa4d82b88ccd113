#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rim/graph.hpp"
#include "rim/noise.hpp"
#include "rim/parallel.hpp"
#include "rim/spectral_model.hpp"

namespace rim {

/// The transformed random equation u' = Au + G(theta_t omega, u) + z u.
struct System {
  SpectralModel model;
  Nonlinearity nl;
  double z_cap = kDefaultZCap;

  double L() const { return nl.lipschitz(); }
};

struct TransformSettings {
  int time_nodes = 64;      ///< uniform intervals per step
  double tol = 1e-10;       ///< Picard stop: sup-norm change relative to |y+|
  int max_iter = 200;
  double t_max = 0.25;      ///< upper bound on any single step
  Execution exec = Execution::parallel;
};

/// (e^x - 1) / x and (e^x - 1 - x) / x^2, continuous through x = 0.
double phi1(double x);
double phi2(double x);

/// Picard contraction constant
/// K = L T ((L_gamma + 1) e^{int_0^T |z| + |lambda_hat|} + e^{int_0^T |z| + |lambda_check|}).
double contraction_K(const Fiber& fiber, double T, double L_gamma, double L,
                     double lambda_hat, double lambda_check);

struct StepSize {
  double T = 0.0;
  bool window_limited = false;  ///< K stayed below 1 up to the end of the fiber
};

/// T_kappa = 1/2 inf{T > 0 : K(T, kappa) >= 1}, located by bisection to 1e-6.
/// Returns max_step when L = 0.
StepSize step_size(const Fiber& fiber, double kappa, double L, double lambda_hat,
                   double lambda_check, double max_step);

/// Solution (w, v) of the forward/backward integral system on [0, T] for one
/// base point y+.
struct TrajectoryPair {
  std::vector<double> times;
  Eigen::MatrixXd w;  ///< u x (N+1)
  Eigen::MatrixXd v;  ///< (n-u) x (N+1)
  Eigen::VectorXd y_plus;
  int iterations = 0;
  double residual = 0.0;
  double observed_ratio = 0.0;  ///< largest ratio of successive Picard changes
  bool excursion = false;       ///< w(0) left the graph ball

  Eigen::VectorXd psi() const { return w.col(0); }
  Eigen::VectorXd phi() const { return v.col(v.cols() - 1); }
};

/// Exponential weights for one step: per mode and interval, the decay factor
/// and the two trapezoid weights of the exactly integrated linear interpolant.
struct StepKernel {
  double T = 0.0;
  int intervals = 0;
  std::vector<double> times;
  std::vector<double> z;      ///< z at the nodes
  Eigen::MatrixXd decay;      ///< n x N
  Eigen::MatrixXd near;       ///< weight on the endpoint where the value is formed
  Eigen::MatrixXd far;

  StepKernel(const System& sys, const Fiber& fiber, double T, int intervals);
};

/// Picard iteration of the integral system. Requires K(T, lip_norm(gamma)) < 1.
TrajectoryPair picard_solve(const System& sys, const Eigen::VectorXd& y_plus,
                            const LipschitzGraph& gamma, const Fiber& fiber, double T,
                            const TransformSettings& settings);

/// Same iteration on a precomputed kernel; no precondition check.
TrajectoryPair picard_solve(const System& sys, const StepKernel& kernel,
                            const Eigen::VectorXd& y_plus, const LipschitzGraph& gamma,
                            const TransformSettings& settings);

struct NodeDiagnostics {
  int iterations = 0;
  double residual = 0.0;
  bool excursion = false;
};

/// One graph-transform step gamma -> Phi(T, omega, gamma), with the backward
/// values Psi = w(0) recorded at the step's start fiber.
struct TransformStep {
  Fiber fiber;
  double T = 0.0;
  double K = 0.0;
  LipschitzGraph input;
  LipschitzGraph output;
  std::vector<Eigen::VectorXd> psi;
  std::vector<NodeDiagnostics> nodes;
  int excursions = 0;
  double max_psi_norm = 0.0;
};

TransformStep transform_step(const System& sys, const LipschitzGraph& gamma, const Fiber& fiber,
                             double T, const TransformSettings& settings);

struct TransformRecord {
  std::vector<TransformStep> steps;
  int excursions() const;
};

/// Phi(T_total, omega, gamma) composed from steps bounded by
/// min(T_kappa, t_max) at the successive shifted fibers.
LipschitzGraph transform(const System& sys, const LipschitzGraph& gamma, const Fiber& fiber,
                         double T_total, const TransformSettings& settings,
                         TransformRecord* record = nullptr);

/// Psi(T_total) at an arbitrary y+: the composition of the per-step backward
/// maps, last step first.
Eigen::VectorXd backward_map(const System& sys, const TransformRecord& record,
                             const Eigen::VectorXd& y_plus, const TransformSettings& settings);

/// CSV rows (step, node, iterations, residual, K, excursion).
void write_step_diagnostics(std::ostream& out, const TransformRecord& record);

}  // namespace rim
