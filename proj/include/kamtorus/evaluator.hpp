#pragma once

#include <span>
#include <vector>

#include "kamtorus/fourier.hpp"

namespace kamtorus {

/// Point evaluation of a fixed real field by direct summation over the
/// Hermitian half of its modes. Fields with few nonzero modes are summed
/// mode by mode; dense fields use separable per-axis exponential tables.
/// Immutable after construction and safe to share across threads.
class FieldEvaluator {
 public:
  explicit FieldEvaluator(const FourierField& u);

  int dim() const noexcept { return field_.dim(); }
  int range() const noexcept { return field_.range(); }
  bool sparse() const noexcept { return sparse_; }

  /// out[c] = u_c(theta)
  void operator()(std::span<const double> theta, std::span<double> out) const;

  /// Point-major values for point-major coordinates.
  std::vector<double> evaluate_many(std::span<const double> points) const;

 private:
  struct SparseMode {
    std::vector<int> k;
    std::vector<Complex> c;  // one entry per component
  };

  void evaluate_dense(std::span<const double> theta, std::span<double> out) const;
  void evaluate_sparse(std::span<const double> theta, std::span<double> out) const;

  FourierField field_;
  bool sparse_ = false;
  std::vector<double> constant_;
  std::vector<SparseMode> modes_;
  std::vector<std::size_t> strides_;
};

}  // namespace kamtorus
