#include "rim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "rim/errors.hpp"

namespace rim {

namespace {

constexpr double kSnap = 1e-9;

long grid_steps(double length, double dt, const char* what) {
  const double steps = length / dt;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6 * std::max(1.0, steps)) {
    throw ValidationError(std::string(what) + " is not an integer multiple of dt");
  }
  return static_cast<long>(rounded);
}

void check_window(double t_min, double t_max, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("dt must be positive");
  if (!(t_min < 0.0 && 0.0 < t_max)) {
    throw ValidationError("window must satisfy t_min < 0 < t_max");
  }
}

void format_row(std::ostream& out, double a, double b, double c) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", a, b, c);
  out << buf;
}

// Exact integral over a segment of length h of |linear| with end values a, b.
double abs_segment(double a, double b, double h) {
  if ((a >= 0.0 && b >= 0.0) || (a <= 0.0 && b <= 0.0)) return 0.5 * h * (std::abs(a) + std::abs(b));
  return 0.5 * h * (a * a + b * b) / (std::abs(a) + std::abs(b));
}

}  // namespace

// ---------------------------------------------------------------------------
// WienerPath
// ---------------------------------------------------------------------------

WienerPath::WienerPath(std::shared_ptr<const Samples> data, double shift)
    : data_(std::move(data)), shift_(shift) {
  offset_ = raw_eval(shift_);
}

WienerPath WienerPath::sample(std::uint64_t seed, double t_min, double t_max, double dt) {
  check_window(t_min, t_max, dt);
  const long neg = grid_steps(-t_min, dt, "t_min");
  const long pos = grid_steps(t_max, dt, "t_max");

  auto data = std::make_shared<Samples>();
  data->t0 = -static_cast<double>(neg) * dt;
  data->dt = dt;
  data->seed = seed;
  data->values.assign(static_cast<std::size_t>(neg + pos + 1), 0.0);

  const auto lo = static_cast<std::uint32_t>(seed & 0xffffffffu);
  const auto hi = static_cast<std::uint32_t>(seed >> 32);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));

  std::seed_seq seq_neg{lo, hi, 0u};
  std::mt19937_64 gen_neg(seq_neg);
  for (long k = 1; k <= neg; ++k) {
    const auto j = static_cast<std::size_t>(neg - k);
    data->values[j] = data->values[j + 1] + normal(gen_neg);
  }

  normal.reset();
  std::seed_seq seq_pos{lo, hi, 1u};
  std::mt19937_64 gen_pos(seq_pos);
  for (long k = 1; k <= pos; ++k) {
    const auto j = static_cast<std::size_t>(neg + k);
    data->values[j] = data->values[j - 1] + normal(gen_pos);
  }
  return WienerPath(std::move(data), 0.0);
}

WienerPath WienerPath::zero(double t_min, double t_max, double dt) {
  return from_function([](double) { return 0.0; }, t_min, t_max, dt);
}

WienerPath WienerPath::from_function(const std::function<double(double)>& f, double t_min,
                                     double t_max, double dt) {
  check_window(t_min, t_max, dt);
  if (f(0.0) != 0.0) throw ValidationError("a path must vanish at t = 0");
  const long neg = grid_steps(-t_min, dt, "t_min");
  const long pos = grid_steps(t_max, dt, "t_max");
  auto data = std::make_shared<Samples>();
  data->t0 = -static_cast<double>(neg) * dt;
  data->dt = dt;
  data->values.resize(static_cast<std::size_t>(neg + pos + 1));
  for (long j = 0; j <= neg + pos; ++j) {
    data->values[static_cast<std::size_t>(j)] = f(static_cast<double>(j - neg) * dt);
  }
  data->values[static_cast<std::size_t>(neg)] = 0.0;
  return WienerPath(std::move(data), 0.0);
}

double WienerPath::t_min() const { return data_->t0 - shift_; }

double WienerPath::t_max() const {
  return data_->t0 + static_cast<double>(data_->values.size() - 1) * data_->dt - shift_;
}

double WienerPath::node_time(std::size_t j) const {
  return data_->t0 + static_cast<double>(j) * data_->dt - shift_;
}

bool WienerPath::contains(double t) const {
  const double p = (t + shift_ - data_->t0) / data_->dt;
  return p >= -kSnap && p <= static_cast<double>(data_->values.size() - 1) + kSnap;
}

double WienerPath::raw_eval(double t) const {
  const double p = (t - data_->t0) / data_->dt;
  const double last = static_cast<double>(data_->values.size() - 1);
  if (!(p >= -kSnap && p <= last + kSnap)) {
    throw OutOfWindow("path evaluated at t = " + std::to_string(t - shift_) +
                      " outside its sampled window");
  }
  double j = std::floor(p);
  double frac = p - j;
  if (frac > 1.0 - kSnap) {
    j += 1.0;
    frac = 0.0;
  } else if (frac < kSnap) {
    frac = 0.0;
  }
  j = std::clamp(j, 0.0, last);
  const auto idx = static_cast<std::size_t>(j);
  if (frac == 0.0 || idx + 1 >= data_->values.size()) return data_->values[idx];
  return (1.0 - frac) * data_->values[idx] + frac * data_->values[idx + 1];
}

double WienerPath::operator()(double t) const { return raw_eval(t + shift_) - offset_; }

WienerPath WienerPath::shift(double t) const {
  if (!contains(t)) {
    throw OutOfWindow("shift by " + std::to_string(t) + " leaves the sampled window");
  }
  return WienerPath(data_, shift_ + t);
}

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck process
// ---------------------------------------------------------------------------

double ou_value(const WienerPath& path, double t, double t_trunc) {
  const double dt = path.dt();
  const long m = static_cast<long>(std::ceil(t_trunc / dt - kSnap));
  if (!path.contains(t) || !path.contains(t - static_cast<double>(m) * dt)) {
    throw OutOfWindow("window too short for the OU truncation horizon at t = " +
                      std::to_string(t));
  }
  double sum = 0.5 * (path(t) + std::exp(-static_cast<double>(m) * dt) *
                                    path(t - static_cast<double>(m) * dt));
  for (long k = 1; k < m; ++k) {
    const double tau = -static_cast<double>(k) * dt;
    sum += std::exp(tau) * path(t + tau);
  }
  return path(t) - dt * sum;
}

std::vector<double> ou_values_reference(const WienerPath& path, double t_trunc) {
  const double dt = path.dt();
  const auto m = static_cast<std::size_t>(std::ceil(t_trunc / dt - kSnap));
  const std::size_t n = path.node_count();
  if (m >= n) throw OutOfWindow("window too short for the OU truncation horizon");
  std::vector<double> z(n - m);
  const double tail = std::exp(-static_cast<double>(m) * dt);
  for (std::size_t j = m; j < n; ++j) {
    double sum = 0.5 * (path.node_value(j) + tail * path.node_value(j - m));
    for (std::size_t k = 1; k < m; ++k) {
      sum += std::exp(-static_cast<double>(k) * dt) * path.node_value(j - k);
    }
    z[j - m] = path.node_value(j) - dt * sum;
  }
  return z;
}

namespace {

// Sliding exponential window: S_j = sum_{k=j-m}^{j} e^{(k-j)dt} omega_k.
// Each chunk seeds S by direct summation and then recurses.
std::vector<double> ou_values_sliding(const WienerPath& path, std::size_t m, Execution exec) {
  const double dt = path.dt();
  const std::size_t n = path.node_count();
  std::vector<double> z(n - m);
  const double decay = std::exp(-dt);
  const double drop = std::exp(-static_cast<double>(m + 1) * dt);
  const double tail = std::exp(-static_cast<double>(m) * dt);
  constexpr std::size_t kChunk = 4096;
  const std::size_t count = n - m;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;

  for_each_index(chunks, exec, [&](std::size_t c) {
    const std::size_t begin = m + c * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    double s = 0.0;
    for (std::size_t k = 0; k <= m; ++k) {
      s += std::exp(-static_cast<double>(k) * dt) * path.node_value(begin - k);
    }
    for (std::size_t j = begin; j < end; ++j) {
      if (j > begin) s = decay * s + path.node_value(j) - drop * path.node_value(j - m - 1);
      const double trap = s - 0.5 * tail * path.node_value(j - m) - 0.5 * path.node_value(j);
      z[j - m] = path.node_value(j) - dt * trap;
    }
  });
  return z;
}

}  // namespace

OUCache::OUCache(WienerPath path, double t_trunc, Execution exec)
    : path_(std::move(path)), t_trunc_(t_trunc) {
  if (!(t_trunc > 0.0)) throw ValidationError("OU truncation horizon must be positive");
  const double dt = path_.dt();
  const auto m = static_cast<std::size_t>(std::ceil(t_trunc / dt - kSnap));
  if (m + 1 >= path_.node_count()) {
    throw OutOfWindow("window too short for the OU truncation horizon");
  }
  first_ = m;
  z_ = ou_values_sliding(path_, m, exec);
  t_lo_ = path_.node_time(first_);
  t_hi_ = path_.node_time(path_.node_count() - 1);

  cum_.assign(z_.size(), 0.0);
  abs_cum_.assign(z_.size(), 0.0);
  for (std::size_t j = 1; j < z_.size(); ++j) {
    cum_[j] = cum_[j - 1] + 0.5 * dt * (z_[j - 1] + z_[j]);
    abs_cum_[j] = abs_cum_[j - 1] + abs_segment(z_[j - 1], z_[j], dt);
  }
}

bool OUCache::covers(double a, double b) const {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  const double slack = kSnap * path_.dt();
  return lo >= t_lo_ - slack && hi <= t_hi_ + slack;
}

std::size_t OUCache::locate(double t, double& frac) const {
  const double dt = path_.dt();
  const double p = (t - t_lo_) / dt;
  const double last = static_cast<double>(z_.size() - 1);
  if (!(p >= -kSnap && p <= last + kSnap)) {
    throw OutOfWindow("OU process requested at t = " + std::to_string(t) +
                      " outside the cached range [" + std::to_string(t_lo_) + ", " +
                      std::to_string(t_hi_) + "]");
  }
  double j = std::floor(p);
  frac = p - j;
  if (frac > 1.0 - kSnap) {
    j += 1.0;
    frac = 0.0;
  } else if (frac < kSnap) {
    frac = 0.0;
  }
  j = std::clamp(j, 0.0, last);
  auto idx = static_cast<std::size_t>(j);
  if (idx + 1 >= z_.size()) {
    frac = 0.0;
    idx = z_.size() - 1;
  }
  return idx;
}

double OUCache::z(double t) const {
  double frac = 0.0;
  const std::size_t j = locate(t, frac);
  if (frac == 0.0) return z_[j];
  return (1.0 - frac) * z_[j] + frac * z_[j + 1];
}

double OUCache::cumulative(double t) const {
  double frac = 0.0;
  const std::size_t j = locate(t, frac);
  if (frac == 0.0) return cum_[j];
  const double s = frac * path_.dt();
  return cum_[j] + s * z_[j] + 0.5 * s * frac * (z_[j + 1] - z_[j]);
}

double OUCache::abs_cumulative(double t) const {
  double frac = 0.0;
  const std::size_t j = locate(t, frac);
  if (frac == 0.0) return abs_cum_[j];
  const double end = (1.0 - frac) * z_[j] + frac * z_[j + 1];
  return abs_cum_[j] + abs_segment(z_[j], end, frac * path_.dt());
}

double OUCache::integral(double a, double b) const {
  if (a == b) {
    double frac = 0.0;
    locate(a, frac);
    return 0.0;
  }
  return cumulative(b) - cumulative(a);
}

double OUCache::abs_integral(double a, double b) const {
  return abs_cumulative(b) - abs_cumulative(a);
}

double OUCache::truncation_bound() const {
  double peak = 0.0;
  for (std::size_t j = 0; j < path_.node_count(); ++j) {
    peak = std::max(peak, std::abs(path_.node_value(j)));
  }
  return std::exp(-t_trunc_) * peak;
}

// ---------------------------------------------------------------------------
// Fiber
// ---------------------------------------------------------------------------

Fiber::Fiber(std::shared_ptr<const OUCache> cache, double shift)
    : cache_(std::move(cache)), shift_(shift) {
  if (!cache_) throw ValidationError("fiber requires an OU cache");
}

Fiber Fiber::zero(double t_min, double t_max, double dt) {
  // The OU cache needs a truncation history before t_min; z is zero either way.
  const double horizon = 1.0;
  const double lo = -dt * std::ceil((horizon - t_min) / dt);
  const double hi = dt * std::ceil(std::max(t_max, dt) / dt);
  auto cache = std::make_shared<const OUCache>(WienerPath::zero(lo, hi, dt), horizon);
  return Fiber(std::move(cache), 0.0);
}

// ---------------------------------------------------------------------------
// Diagnostics and export
// ---------------------------------------------------------------------------

SublinearReport sublinear_diagnostic(const WienerPath& path, const OUCache& cache) {
  SublinearReport report;
  for (std::size_t j = 0; j < path.node_count(); ++j) {
    const double t = path.node_time(j);
    report.max_path_ratio =
        std::max(report.max_path_ratio, std::abs(path.node_value(j)) / (1.0 + std::abs(t)));
  }
  const auto& z = cache.z_values();
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double t = cache.path().node_time(cache.first_node() + j);
    report.max_ou_ratio = std::max(report.max_ou_ratio, std::abs(z[j]) / (1.0 + std::abs(t)));
  }
  if (cache.covers(0.0, cache.t_max()) && cache.t_max() > 0.0) {
    report.mean_ou_average = cache.integral(0.0, cache.t_max()) / cache.t_max();
  }
  report.truncation_bound = cache.truncation_bound();
  return report;
}

void write_noise_csv(std::ostream& out, const OUCache& cache) {
  out << "t,omega,z\n";
  const auto& z = cache.z_values();
  for (std::size_t j = 0; j < z.size(); ++j) {
    const std::size_t node = cache.first_node() + j;
    format_row(out, cache.path().node_time(node), cache.path().node_value(node), z[j]);
  }
}

nlohmann::json noise_metadata(const OUCache& cache) {
  const auto& path = cache.path();
  return {
      {"seed", path.seed()},
      {"t_min", path.t_min()},
      {"t_max", path.t_max()},
      {"dt", path.dt()},
      {"base_shift", path.base_shift()},
      {"t_trunc", cache.t_trunc()},
      {"cached_range", {cache.t_min(), cache.t_max()}},
  };
}

}  // namespace rim
