#include "rim/comparison.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "rim/errors.hpp"

namespace rim {

double EigenData::plus_w() const { return L > 0.0 ? e_plus : 1.0; }
double EigenData::plus_v() const { return L > 0.0 ? 1.0 : 0.0; }
double EigenData::minus_w() const { return L > 0.0 ? e_minus : 0.0; }
double EigenData::minus_v() const { return 1.0; }

double characteristic_discriminant(double lambda_hat, double lambda_check, double L) {
  const double trace = lambda_hat + lambda_check;
  const double det = (lambda_hat - L) * (lambda_check + L) + L * L;
  return trace * trace - 4.0 * det;
}

EigenData eigen(double lambda_hat, double lambda_check, double L) {
  if (!(L >= 0.0) || !std::isfinite(L)) throw ValidationError("L must be >= 0");
  EigenData e;
  e.lambda_hat = lambda_hat;
  e.lambda_check = lambda_check;
  e.L = L;
  e.discriminant = characteristic_discriminant(lambda_hat, lambda_check, L);
  if (!(lambda_hat - lambda_check > 4.0 * L) || !(e.discriminant > 0.0)) {
    throw GapViolation("gap condition lambda_hat - lambda_check > 4L violated (lambda_hat = " +
                           std::to_string(lambda_hat) +
                           ", lambda_check = " + std::to_string(lambda_check) +
                           ", L = " + std::to_string(L) +
                           ", discriminant = " + std::to_string(e.discriminant) + ")",
                       e.discriminant);
  }

  if (L == 0.0) {
    e.lambda_plus = lambda_hat;
    e.lambda_minus = lambda_check;
    e.e_plus = std::numeric_limits<double>::infinity();
    e.e_minus = 0.0;
    e.kappa = 0.0;
    e.rate = std::exp(lambda_check - lambda_hat);
    return e;
  }

  // Larger-magnitude root first, the other from Vieta to avoid cancellation.
  const double mean = 0.5 * (lambda_hat + lambda_check);
  const double half = 0.5 * std::sqrt(e.discriminant);
  const double det = (lambda_hat - L) * (lambda_check + L) + L * L;
  if (mean >= 0.0) {
    e.lambda_plus = mean + half;
    e.lambda_minus = det / e.lambda_plus;
  } else {
    e.lambda_minus = mean - half;
    e.lambda_plus = det / e.lambda_minus;
  }

  // Second row of B for lambda+, first row for lambda-: both well conditioned.
  e.e_plus = (e.lambda_plus - lambda_check - L) / L;
  e.e_minus = L / (lambda_hat - L - e.lambda_minus);
  e.kappa = 1.0 / e.e_plus;
  e.rate = std::exp(e.lambda_minus - e.lambda_plus);
  return e;
}

ComparisonSolution::ComparisonSolution(const EigenData& eig, Fiber fiber, double T, double gamma,
                                       double c, double y, int grid_intervals)
    : eig_(eig), fiber_(std::move(fiber)), T_(T), gamma_(gamma), c_(c), y_(y) {
  if (!(T > 0.0)) throw ValidationError("comparison horizon T must be positive");
  if (gamma < 0.0 || c < 0.0 || y < 0.0) {
    throw ValidationError("comparison data Gamma, C, Y must be >= 0");
  }
  if (grid_intervals < 1) throw ValidationError("comparison grid needs at least one interval");

  const double growth = std::exp(fiber_.z_integral(0.0, T));
  const double a11 = growth * eig_.plus_w() * std::exp(eig_.lambda_plus * T);
  const double a12 = growth * eig_.minus_w() * std::exp(eig_.lambda_minus * T);
  const double a21 = eig_.plus_v() - gamma * eig_.plus_w();
  const double a22 = eig_.minus_v() - gamma * eig_.minus_w();
  const double det = a11 * a22 - a12 * a21;
  const double scale = std::abs(a11 * a22) + std::abs(a12 * a21);
  if (!(std::abs(det) > 1e-14 * scale) || !std::isfinite(det)) {
    throw Error("comparison boundary system is singular");
  }
  c1_ = (y * a22 - a12 * c) / det;
  c2_ = (a11 * c - a21 * y) / det;

  times_.resize(static_cast<std::size_t>(grid_intervals) + 1);
  w_.resize(times_.size());
  v_.resize(times_.size());
  for (std::size_t k = 0; k < times_.size(); ++k) {
    times_[k] = T * static_cast<double>(k) / grid_intervals;
    w_[k] = W(times_[k]);
    v_[k] = V(times_[k]);
  }
}

double ComparisonSolution::W(double t) const {
  const double growth = std::exp(fiber_.z_integral(0.0, t));
  return growth * (c1_ * eig_.plus_w() * std::exp(eig_.lambda_plus * t) +
                   c2_ * eig_.minus_w() * std::exp(eig_.lambda_minus * t));
}

double ComparisonSolution::V(double t) const {
  const double growth = std::exp(fiber_.z_integral(0.0, t));
  return growth * (c1_ * eig_.plus_v() * std::exp(eig_.lambda_plus * t) +
                   c2_ * eig_.minus_v() * std::exp(eig_.lambda_minus * t));
}

ComparisonSolution solve_comparison(const EigenData& eig, const Fiber& fiber, double T,
                                    double gamma, double c, double y, int grid_intervals) {
  return ComparisonSolution(eig, fiber, T, gamma, c, y, grid_intervals);
}

bool monotonicity_check(const ComparisonSolution& lower, const ComparisonSolution& upper) {
  const auto& wl = lower.W_values();
  const auto& wu = upper.W_values();
  const auto& vl = lower.V_values();
  const auto& vu = upper.V_values();
  if (wl.size() != wu.size()) throw ValidationError("comparison grids differ");
  auto below = [](double a, double b) { return a <= b + 1e-12 * std::max(1.0, std::abs(b)); };
  for (std::size_t k = 0; k < wl.size(); ++k) {
    if (!below(wl[k], wu[k]) || !below(vl[k], vu[k])) return false;
  }
  return true;
}

}  // namespace rim
