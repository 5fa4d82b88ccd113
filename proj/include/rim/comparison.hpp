#pragma once

#include <vector>

#include "rim/noise.hpp"

namespace rim {

/// Spectral data of the comparison matrix
///
///     B = [ lambda_hat - L      -L          ]
///         [ L              lambda_check + L ]
///
/// whose eigenvalues are real and distinct iff lambda_hat - lambda_check > 4L.
/// For L > 0 the eigenvectors are normalised as (e+-, 1). For L = 0 they are
/// the coordinate axes and kappa = 0.
struct EigenData {
  double lambda_hat = 0.0;
  double lambda_check = 0.0;
  double L = 0.0;
  double discriminant = 0.0;  ///< tr(B)^2 - 4 det(B)
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  double e_plus = 0.0;   ///< +inf when L == 0
  double e_minus = 0.0;
  double kappa = 0.0;    ///< 1 / e_plus
  double rate = 0.0;     ///< e^{lambda_minus - lambda_plus}

  /// (W, V) components of the two eigenvectors.
  double plus_w() const;
  double plus_v() const;
  double minus_w() const;
  double minus_v() const;
};

/// Throws GapViolation (carrying the discriminant) unless the strict gap
/// condition holds.
EigenData eigen(double lambda_hat, double lambda_check, double L);

/// Discriminant of the characteristic polynomial of B.
double characteristic_discriminant(double lambda_hat, double lambda_check, double L);

/// Exact solution of the comparison system
///
///     W' = (lambda_hat - L) W + z W - L V
///     V' = (lambda_check + L) V + z V + L W
///     W(T) = Y,   V(0) = Gamma W(0) + C
///
/// as c1 p+ e^{lambda+ t + int_0^t z} + c2 p- e^{lambda- t + int_0^t z}.
class ComparisonSolution {
 public:
  ComparisonSolution(const EigenData& eig, Fiber fiber, double T, double gamma, double c,
                     double y, int grid_intervals = 64);

  double W(double t) const;
  double V(double t) const;

  double c1() const { return c1_; }
  double c2() const { return c2_; }
  double T() const { return T_; }
  double gamma() const { return gamma_; }
  double c() const { return c_; }
  double y() const { return y_; }
  const EigenData& eigen_data() const { return eig_; }

  const std::vector<double>& times() const { return times_; }
  const std::vector<double>& W_values() const { return w_; }
  const std::vector<double>& V_values() const { return v_; }

 private:
  EigenData eig_;
  Fiber fiber_;
  double T_, gamma_, c_, y_;
  double c1_ = 0.0, c2_ = 0.0;
  std::vector<double> times_, w_, v_;
};

ComparisonSolution solve_comparison(const EigenData& eig, const Fiber& fiber, double T,
                                    double gamma, double c, double y,
                                    int grid_intervals = 64);

/// True iff lower <= upper for both W and V at every grid node, within 1e-12
/// relative to the upper value.
bool monotonicity_check(const ComparisonSolution& lower, const ComparisonSolution& upper);

}  // namespace rim
