#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

#include "json.hpp"

#include "rim/parallel.hpp"

namespace rim {

/// A sampled two-sided Brownian trajectory omega on a uniform grid, seen
/// through the Wiener shift theta_s omega = omega(. + s) - omega(s).
///
/// The samples live on one immutable global grid shared between all shifted
/// copies. A shifted path evaluates raw(t + s) - raw(s); evaluation between
/// nodes is piecewise linear and evaluation outside the sampled window throws
/// OutOfWindow.
class WienerPath {
 public:
  /// Independent N(0, dt) increments generated outward from t = 0. The
  /// negative and positive half-lines use separate streams derived from the
  /// seed, so enlarging either end keeps the old values.
  static WienerPath sample(std::uint64_t seed, double t_min, double t_max, double dt);

  static WienerPath zero(double t_min, double t_max, double dt);

  /// Synthetic path from f on the grid. Requires f(0) == 0.
  static WienerPath from_function(const std::function<double(double)>& f, double t_min,
                                  double t_max, double dt);

  /// Domain of this (possibly shifted) path.
  double t_min() const;
  double t_max() const;
  double dt() const { return data_->dt; }
  std::uint64_t seed() const { return data_->seed; }
  double base_shift() const { return shift_; }

  bool contains(double t) const;
  double operator()(double t) const;

  /// theta_t applied to this path. Throws OutOfWindow if t leaves the window.
  WienerPath shift(double t) const;

  /// Raw samples on the global grid, independent of the shift.
  const std::vector<double>& raw_values() const { return data_->values; }
  double raw_t0() const { return data_->t0; }

  /// Node j of the global grid in this path's coordinates.
  std::size_t node_count() const { return data_->values.size(); }
  double node_time(std::size_t j) const;
  double node_value(std::size_t j) const { return data_->values[j] - offset_; }

 private:
  struct Samples {
    double t0 = 0.0;
    double dt = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> values;
  };

  WienerPath(std::shared_ptr<const Samples> data, double shift);
  double raw_eval(double t) const;

  std::shared_ptr<const Samples> data_;
  double shift_ = 0.0;
  double offset_ = 0.0;
};

/// z(theta_t omega) = -int_{-T}^0 e^tau omega(tau + t) dtau + omega(t), by the
/// trapezoid rule on the path grid. Direct quadrature of one value.
double ou_value(const WienerPath& path, double t, double t_trunc);

/// Stationary Ornstein-Uhlenbeck values on every admissible node of a path
/// plus cumulative integrals of z and |z|.
///
/// Node j is admissible once [t_j - t_trunc, t_j] lies in the window. Between
/// nodes z is linear; the cumulative integral is the exact integral of that
/// interpolant, so interval integrals are additive to rounding.
class OUCache {
 public:
  explicit OUCache(WienerPath path, double t_trunc = 40.0,
                   Execution exec = Execution::parallel);

  const WienerPath& path() const { return path_; }
  double t_trunc() const { return t_trunc_; }
  /// Cached range in the path's coordinates.
  double t_min() const { return t_lo_; }
  double t_max() const { return t_hi_; }
  bool covers(double a, double b) const;

  double z(double t) const;
  /// Signed integral of z over [a, b]; antisymmetric in (a, b).
  double integral(double a, double b) const;
  /// Integral of |z| over [a, b] (a <= b) from the trapezoid of node values.
  double abs_integral(double a, double b) const;

  const std::vector<double>& z_values() const { return z_; }
  std::size_t first_node() const { return first_; }

  /// e^{-t_trunc} max|omega| over the window: size of the omitted tail, assuming
  /// the path stays bounded by its observed maximum beyond the window.
  double truncation_bound() const;

 private:
  std::size_t locate(double t, double& frac) const;
  double cumulative(double t) const;
  double abs_cumulative(double t) const;

  WienerPath path_;
  double t_trunc_;
  std::size_t first_ = 0;
  double t_lo_ = 0.0;
  double t_hi_ = 0.0;
  std::vector<double> z_;
  std::vector<double> cum_;
  std::vector<double> abs_cum_;
};

/// z-values by direct quadrature at every admissible node. Serial reference
/// for the sliding-window kernel inside OUCache.
std::vector<double> ou_values_reference(const WienerPath& path, double t_trunc);

/// A fiber theta_s omega of the noise: a view of a cached OU process at a
/// fixed offset s. Copies are cheap and share the cache.
class Fiber {
 public:
  Fiber() = default;
  explicit Fiber(std::shared_ptr<const OUCache> cache, double shift = 0.0);

  /// Fiber over a zero path covering [t_min, t_max]; z is identically zero.
  static Fiber zero(double t_min, double t_max, double dt = 0.01);

  Fiber shifted(double t) const { return Fiber(cache_, shift_ + t); }
  double shift() const { return shift_; }
  const OUCache& cache() const { return *cache_; }
  const std::shared_ptr<const OUCache>& cache_ptr() const { return cache_; }

  /// z(theta_t theta_s omega).
  double z(double t) const { return cache_->z(t + shift_); }
  double z_integral(double a, double b) const {
    return cache_->integral(a + shift_, b + shift_);
  }
  double abs_z_integral(double a, double b) const {
    return cache_->abs_integral(a + shift_, b + shift_);
  }
  bool covers(double a, double b) const { return cache_->covers(a + shift_, b + shift_); }
  /// Brownian path of this fiber, theta_s omega.
  WienerPath path() const { return cache_->path().shift(shift_); }

 private:
  std::shared_ptr<const OUCache> cache_;
  double shift_ = 0.0;
};

struct SublinearReport {
  double max_path_ratio = 0.0;  ///< max |omega(t)| / (1 + |t|)
  double max_ou_ratio = 0.0;    ///< max |z(theta_t omega)| / (1 + |t|)
  double mean_ou_average = 0.0; ///< (1/t) int_0^t z for the largest cached t > 0
  double truncation_bound = 0.0;
};

SublinearReport sublinear_diagnostic(const WienerPath& path, const OUCache& cache);

/// CSV rows (t, omega, z) over the cached range, with a header row.
void write_noise_csv(std::ostream& out, const OUCache& cache);
nlohmann::json noise_metadata(const OUCache& cache);

}  // namespace rim
