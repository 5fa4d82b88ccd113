#pragma once

#include <vector>

#include <Eigen/Dense>

namespace rim {

/// Default cap on |z| before e^{z} is considered an overflow hazard.
inline constexpr double kDefaultZCap = 30.0;

/// Element of H = H+ (+) H- in spectral coordinates. The norm is the
/// Euclidean norm of the concatenation.
struct StateVector {
  Eigen::VectorXd plus;
  Eigen::VectorXd minus;

  static StateVector from_full(const Eigen::VectorXd& x, int unstable_count);
  Eigen::VectorXd full() const;
  double norm() const { return std::sqrt(plus.squaredNorm() + minus.squaredNorm()); }
};

enum class Side { plus, minus, both };

/// Diagonal truncation of A: strictly decreasing eigenvalues with the first
/// `unstable_count` modes spanning H+. With an orthonormal eigenbasis the
/// dichotomy holds with M = 1, lambda_hat = lambda_u and lambda_check =
/// lambda_{u+1}.
class SpectralModel {
 public:
  SpectralModel(std::vector<double> eigenvalues, int unstable_count);

  /// lambda_i = -(i pi)^2 + shift for i = 1..n.
  static SpectralModel dirichlet_laplacian(int modes, int unstable_count, double shift);

  int dim() const { return static_cast<int>(eigenvalues_.size()); }
  int unstable_count() const { return unstable_; }
  int stable_count() const { return dim() - unstable_; }
  double eigenvalue(int i) const { return eigenvalues_[static_cast<std::size_t>(i)]; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  double lambda_hat() const { return eigenvalues_[static_cast<std::size_t>(unstable_ - 1)]; }
  double lambda_check() const { return eigenvalues_[static_cast<std::size_t>(unstable_)]; }

  /// pi S(t) pi x on the selected side(s); the other side is zeroed. Negative
  /// t is allowed on H+ only.
  StateVector semigroup_apply(double t, const StateVector& x, Side side) const;

 private:
  std::vector<double> eigenvalues_;
  int unstable_;
};

/// Lipschitz nonlinearity F with F(0) = 0 and per-projection constant L:
/// |pi+- (F(x1) - F(x2))| <= L (|pi+ (x1 - x2)| + |pi- (x1 - x2)|).
class Nonlinearity {
 public:
  enum class Kind { zero, linear_coupling, saturated };

  static Nonlinearity zero();
  /// F(w, v) = (-L(w + v), L(w + v)), pairing unstable mode k with stable
  /// mode k; unpaired modes get zero. With u = n - u = 1 the system
  /// x' = Ax + F(x) is x' = Bx for the comparison matrix B.
  static Nonlinearity linear_coupling(double L);
  /// F(x) = epsilon tanh(P x) componentwise; L = epsilon |P|_2.
  static Nonlinearity saturated(double epsilon, Eigen::MatrixXd mixing);

  Kind kind() const { return kind_; }
  double lipschitz() const { return lipschitz_; }
  double epsilon() const { return epsilon_; }
  const Eigen::MatrixXd& mixing() const { return mixing_; }
  bool is_linear() const { return kind_ != Kind::saturated; }

  /// out = F(x) on the full coordinate vector. `out` must not alias `x`.
  void apply(const Eigen::Ref<const Eigen::VectorXd>& x, int unstable_count,
             Eigen::Ref<Eigen::VectorXd> out) const;
  /// out = G(z, x) = e^{-z} F(e^{z} x). Throws CapExceeded when |z| > cap.
  void apply_transformed(double z, const Eigen::Ref<const Eigen::VectorXd>& x,
                         int unstable_count, Eigen::Ref<Eigen::VectorXd> out,
                         double cap = kDefaultZCap) const;

  StateVector eval_F(const StateVector& x) const;
  StateVector eval_G(double z, const StateVector& x, double cap = kDefaultZCap) const;

 private:
  Kind kind_ = Kind::zero;
  double lipschitz_ = 0.0;
  double epsilon_ = 0.0;
  Eigen::MatrixXd mixing_;
};

/// Strict gap condition lambda_hat - lambda_check > 4 L.
bool gap_check(const SpectralModel& model, double L);

/// Deterministic mixing matrix with unit spectral norm.
Eigen::MatrixXd random_mixing(int dim, unsigned seed);

/// Throws CapExceeded when |z| > cap.
void check_z_cap(double z, double cap);

}  // namespace rim
