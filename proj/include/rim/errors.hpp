#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rim {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or configuration detected before any computation.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Evaluation requested outside the sampled noise window.
class OutOfWindow : public Error {
 public:
  using Error::Error;
};

/// |z| exceeded the configured overflow cap.
class CapExceeded : public Error {
 public:
  CapExceeded(const std::string& what, double z, double cap)
      : Error(what), z_(z), cap_(cap) {}
  double z() const { return z_; }
  double cap() const { return cap_; }

 private:
  double z_;
  double cap_;
};

/// The spectral gap condition lambda_hat - lambda_check > 4 L does not hold.
class GapViolation : public Error {
 public:
  GapViolation(const std::string& what, double discriminant)
      : Error(what), discriminant_(discriminant) {}
  double discriminant() const { return discriminant_; }

 private:
  double discriminant_;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace = {})
      : Error(what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace rim
