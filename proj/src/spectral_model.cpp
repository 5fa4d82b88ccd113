#include "rim/spectral_model.hpp"

#include <cmath>
#include <random>
#include <string>

#include <numbers>

#include "rim/errors.hpp"

namespace rim {

StateVector StateVector::from_full(const Eigen::VectorXd& x, int unstable_count) {
  StateVector s;
  s.plus = x.head(unstable_count);
  s.minus = x.tail(x.size() - unstable_count);
  return s;
}

Eigen::VectorXd StateVector::full() const {
  Eigen::VectorXd x(plus.size() + minus.size());
  x << plus, minus;
  return x;
}

SpectralModel::SpectralModel(std::vector<double> eigenvalues, int unstable_count)
    : eigenvalues_(std::move(eigenvalues)), unstable_(unstable_count) {
  const int n = dim();
  if (n < 2) throw ValidationError("spectral model needs at least two modes");
  if (unstable_ < 1 || unstable_ >= n) {
    throw ValidationError("unstable_count must satisfy 1 <= u < n");
  }
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(eigenvalues_[static_cast<std::size_t>(i)])) {
      throw ValidationError("eigenvalues must be finite");
    }
    if (i > 0 && !(eigenvalues_[static_cast<std::size_t>(i - 1)] >
                   eigenvalues_[static_cast<std::size_t>(i)])) {
      throw ValidationError("eigenvalues must be strictly decreasing");
    }
  }
}

SpectralModel SpectralModel::dirichlet_laplacian(int modes, int unstable_count, double shift) {
  std::vector<double> ev(static_cast<std::size_t>(std::max(modes, 0)));
  for (int i = 1; i <= modes; ++i) {
    const double k = static_cast<double>(i) * std::numbers::pi;
    ev[static_cast<std::size_t>(i - 1)] = -k * k + shift;
  }
  return SpectralModel(std::move(ev), unstable_count);
}

StateVector SpectralModel::semigroup_apply(double t, const StateVector& x, Side side) const {
  if (x.plus.size() != unstable_ || x.minus.size() != stable_count()) {
    throw ValidationError("state vector does not match the model split");
  }
  if (t < 0.0 && side != Side::plus) {
    throw ValidationError("S(t) for t < 0 exists on H+ only");
  }
  StateVector out{Eigen::VectorXd::Zero(unstable_), Eigen::VectorXd::Zero(stable_count())};
  if (side != Side::minus) {
    for (int i = 0; i < unstable_; ++i) out.plus[i] = std::exp(eigenvalue(i) * t) * x.plus[i];
  }
  if (side != Side::plus) {
    for (int i = 0; i < stable_count(); ++i) {
      out.minus[i] = std::exp(eigenvalue(unstable_ + i) * t) * x.minus[i];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Nonlinearity Nonlinearity::zero() { return Nonlinearity{}; }

Nonlinearity Nonlinearity::linear_coupling(double L) {
  if (!(L >= 0.0) || !std::isfinite(L)) throw ValidationError("coupling L must be >= 0");
  Nonlinearity nl;
  nl.kind_ = Kind::linear_coupling;
  nl.lipschitz_ = L;
  return nl;
}

Nonlinearity Nonlinearity::saturated(double epsilon, Eigen::MatrixXd mixing) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw ValidationError("saturation epsilon must be >= 0");
  }
  if (mixing.rows() != mixing.cols() || mixing.rows() == 0) {
    throw ValidationError("mixing matrix must be square and non-empty");
  }
  Nonlinearity nl;
  nl.kind_ = Kind::saturated;
  nl.epsilon_ = epsilon;
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(mixing).singularValues()(0);
  nl.mixing_ = std::move(mixing);
  nl.lipschitz_ = epsilon * norm;
  return nl;
}

void Nonlinearity::apply(const Eigen::Ref<const Eigen::VectorXd>& x, int unstable_count,
                         Eigen::Ref<Eigen::VectorXd> out) const {
  switch (kind_) {
    case Kind::zero:
      out.setZero();
      return;
    case Kind::linear_coupling: {
      out.setZero();
      const int n = static_cast<int>(x.size());
      const int pairs = std::min(unstable_count, n - unstable_count);
      for (int k = 0; k < pairs; ++k) {
        const double s = lipschitz_ * (x[k] + x[unstable_count + k]);
        out[k] = -s;
        out[unstable_count + k] = s;
      }
      return;
    }
    case Kind::saturated:
      if (mixing_.cols() != x.size()) {
        throw ValidationError("mixing matrix does not match the state dimension");
      }
      out.noalias() = mixing_ * x;
      for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = epsilon_ * std::tanh(out[i]);
      return;
  }
}

void Nonlinearity::apply_transformed(double z, const Eigen::Ref<const Eigen::VectorXd>& x,
                                     int unstable_count, Eigen::Ref<Eigen::VectorXd> out,
                                     double cap) const {
  check_z_cap(z, cap);
  if (kind_ != Kind::saturated) {
    apply(x, unstable_count, out);  // linear maps commute with the scaling
    return;
  }
  const double up = std::exp(z);
  out.noalias() = mixing_ * x;
  const double down = std::exp(-z);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = down * epsilon_ * std::tanh(up * out[i]);
  }
}

StateVector Nonlinearity::eval_F(const StateVector& x) const {
  const Eigen::VectorXd full = x.full();
  Eigen::VectorXd out(full.size());
  apply(full, static_cast<int>(x.plus.size()), out);
  return StateVector::from_full(out, static_cast<int>(x.plus.size()));
}

StateVector Nonlinearity::eval_G(double z, const StateVector& x, double cap) const {
  const Eigen::VectorXd full = x.full();
  Eigen::VectorXd out(full.size());
  apply_transformed(z, full, static_cast<int>(x.plus.size()), out, cap);
  return StateVector::from_full(out, static_cast<int>(x.plus.size()));
}

// ---------------------------------------------------------------------------

bool gap_check(const SpectralModel& model, double L) {
  if (!(L >= 0.0)) throw ValidationError("Lipschitz constant must be >= 0");
  return model.lambda_hat() - model.lambda_check() > 4.0 * L;
}

Eigen::MatrixXd random_mixing(int dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd p(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) p(i, j) = unif(gen);
  const double norm = Eigen::JacobiSVD<Eigen::MatrixXd>(p).singularValues()(0);
  return p / norm;
}

void check_z_cap(double z, double cap) {
  if (!std::isfinite(z) || std::abs(z) > cap) {
    throw CapExceeded("|z| = " + std::to_string(std::abs(z)) + " exceeds the cap " +
                          std::to_string(cap) + "; check the noise configuration",
                      z, cap);
  }
}

}  // namespace rim
