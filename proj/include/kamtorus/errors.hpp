#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kamtorus {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible dimensions, ranges or boxes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the requested band limit, or spectral energy leaking
/// past the working truncation.
class AliasingError : public Error {
 public:
  using Error::Error;
};

/// A numerical self-check failed (non-Hermitian data, imaginary residue).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// |h|_{1,inf} > 1/2: the map is not covered by the change-of-variable lemma.
class DiffeoError : public Error {
 public:
  DiffeoError(const std::string& what, double c1_norm)
      : Error(what), c1_norm_(c1_norm) {}
  double c1_norm() const noexcept { return c1_norm_; }

 private:
  double c1_norm_;
};

/// Fixed-point iteration did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A divisor fell below the diophantine threshold.
class SmallDivisorError : public Error {
 public:
  SmallDivisorError(const std::string& what, std::vector<int> mode, double divisor)
      : Error(what), mode_(std::move(mode)), divisor_(divisor) {}
  const std::vector<int>& mode() const noexcept { return mode_; }
  double divisor() const noexcept { return divisor_; }

 private:
  std::vector<int> mode_;
  double divisor_;
};

/// Invalid experiment or scheme configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A smallness hypothesis was enforced and failed.
class SmallnessError : public Error {
 public:
  using Error::Error;
};

/// The iteration stopped without converging; carries delta_n(s0) per step.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::vector<double> delta_log)
      : Error(what), delta_log_(std::move(delta_log)) {}
  const std::vector<double>& delta_log() const noexcept { return delta_log_; }

 private:
  std::vector<double> delta_log_;
};

}  // namespace kamtorus
