#include "rim/cocycle.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "rim/errors.hpp"

namespace rim {

namespace {

int step_count(double T, double dt) {
  if (!(T >= 0.0)) throw ValidationError("integration time must be >= 0");
  if (!(dt > 0.0)) throw ValidationError("integrator dt must be positive");
  return T == 0.0 ? 0 : std::max(1, static_cast<int>(std::ceil(T / dt - 1e-9)));
}

void check_state(const System& sys, const StateVector& x) {
  if (x.plus.size() != sys.model.unstable_count() || x.minus.size() != sys.model.stable_count()) {
    throw ValidationError("state does not match the spectral splitting");
  }
}

// Exponential Euler over [0, T] in n steps; calls visit(k, t_k, z_k, x_k) at
// every node including the last.
template <class Visit>
Eigen::VectorXd integrate(const System& sys, const Fiber& fiber, Eigen::VectorXd x, double T,
                          int steps, Visit&& visit) {
  const int n = sys.model.dim();
  const int u = sys.model.unstable_count();
  if (steps > 0 && !fiber.covers(0.0, T)) {
    throw OutOfWindow("integration leaves the cached noise window");
  }
  const double h = steps > 0 ? T / steps : 0.0;
  Eigen::VectorXd g(n);
  double t = 0.0;
  double z = fiber.z(0.0);
  double Z = 0.0;
  for (int k = 0; k < steps; ++k) {
    check_z_cap(z, sys.z_cap);
    visit(k, t, z, x);
    const double t_next = k + 1 == steps ? T : h * (k + 1);
    const double Z_next = fiber.z_integral(0.0, t_next);
    const double zbar = (Z_next - Z) / h;
    sys.nl.apply_transformed(z, x, u, g, sys.z_cap);
    for (int i = 0; i < n; ++i) {
      const double a = (sys.model.eigenvalue(i) + zbar) * h;
      x[i] = std::exp(a) * x[i] + h * phi1(a) * g[i];
    }
    t = t_next;
    Z = Z_next;
    z = fiber.z(t);
  }
  visit(steps, t, z, x);
  return x;
}

}  // namespace

StateVector evolve(const System& sys, const Fiber& fiber, const StateVector& x, double T,
                   double dt) {
  check_state(sys, x);
  const int steps = step_count(T, dt);
  if (steps == 0) return x;
  const Eigen::VectorXd end =
      integrate(sys, fiber, x.full(), T, steps, [](int, double, double, const Eigen::VectorXd&) {});
  return StateVector::from_full(end, sys.model.unstable_count());
}

CocycleRun evolve_trajectory(const System& sys, const Fiber& fiber, const StateVector& x,
                             double T, double dt) {
  check_state(sys, x);
  CocycleRun run;
  run.initial = x;
  run.base_shift = fiber.shift();
  run.dt = dt;
  const int steps = step_count(T, dt);
  const int u = sys.model.unstable_count();
  integrate(sys, fiber, x.full(), T, steps,
            [&](int k, double t, double z, const Eigen::VectorXd& state) {
              run.times.push_back(t);
              run.z.push_back(z);
              run.states.push_back(k == 0 ? x : StateVector::from_full(state, u));
            });
  return run;
}

StateVector transform_T(double z, const StateVector& x, double cap) {
  check_z_cap(z, cap);
  const double s = std::exp(-z);
  return {x.plus * s, x.minus * s};
}

StateVector transform_T_inv(double z, const StateVector& x, double cap) {
  check_z_cap(z, cap);
  const double s = std::exp(z);
  return {x.plus * s, x.minus * s};
}

StateVector evolve_spde(const System& sys, const WienerPath& path, const StateVector& x,
                        double T, double dt) {
  check_state(sys, x);
  const int steps = step_count(T, dt);
  if (steps == 0) return x;
  if (!path.contains(0.0) || !path.contains(T)) {
    throw OutOfWindow("SPDE integration leaves the sampled path window");
  }
  const int n = sys.model.dim();
  const int u = sys.model.unstable_count();
  const double h = T / steps;
  Eigen::VectorXd state = x.full();
  Eigen::VectorXd f(n);
  double w = path(0.0);
  for (int k = 0; k < steps; ++k) {
    const double t_next = k + 1 == steps ? T : h * (k + 1);
    const double w_next = path(t_next);
    const double dW = w_next - w;
    sys.nl.apply(state, u, f);
    for (int i = 0; i < n; ++i) {
      const double drift = sys.model.eigenvalue(i) * state[i] + f[i] + 0.5 * state[i];
      state[i] += drift * h + state[i] * dW;
    }
    w = w_next;
  }
  return StateVector::from_full(state, u);
}

void write_trajectory_csv(std::ostream& out, const CocycleRun& run) {
  const int n = static_cast<int>(run.initial.plus.size() + run.initial.minus.size());
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  out << ",z\n" << std::setprecision(17);
  for (std::size_t k = 0; k < run.times.size(); ++k) {
    out << run.times[k];
    const Eigen::VectorXd x = run.states[k].full();
    for (int i = 0; i < n; ++i) out << ',' << x[i];
    out << ',' << run.z[k] << '\n';
  }
}

}  // namespace rim
