#pragma once

#include <iosfwd>
#include <vector>

#include "rim/graph_transform.hpp"

namespace rim {

/// One integrated trajectory of the transformed equation.
struct CocycleRun {
  StateVector initial;
  double base_shift = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<StateVector> states;  ///< states[0] == initial
  std::vector<double> z;            ///< z(theta_t omega) at each time
};

/// phi(T, omega, x) of the transformed equation in mild form, by left-endpoint
/// exponential Euler with n = ceil(T / dt) uniform steps. The linear part and
/// the z-growth over each step are exact.
StateVector evolve(const System& sys, const Fiber& fiber, const StateVector& x, double T,
                   double dt);

CocycleRun evolve_trajectory(const System& sys, const Fiber& fiber, const StateVector& x,
                             double T, double dt);

/// T(omega, x) = x e^{-z}.
StateVector transform_T(double z, const StateVector& x, double cap = kDefaultZCap);
/// T^{-1}(omega, x) = x e^{z}.
StateVector transform_T_inv(double z, const StateVector& x, double cap = kDefaultZCap);

/// Euler-Maruyama on the Ito form d phi = (A phi + F(phi) + phi / 2) dt + phi dW
/// of the Stratonovich equation, driven by the increments of `path` starting
/// at its t = 0.
StateVector evolve_spde(const System& sys, const WienerPath& path, const StateVector& x,
                        double T, double dt);

/// CSV rows (t, x_1..x_n, z).
void write_trajectory_csv(std::ostream& out, const CocycleRun& run);

}  // namespace rim
