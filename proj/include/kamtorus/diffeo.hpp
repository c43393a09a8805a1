#pragma once

// Torus maps theta -> theta + h(theta) close to the identity.

#include <optional>
#include <vector>

#include "kamtorus/fourier.hpp"

namespace kamtorus {

struct DiffeoSettings {
  double inverse_tol = 1e-12;  // sup residual of the inverse on its grid
  int max_iters = 200;
  double alias_tol = 1e-10;  // admissible energy fraction past the output box
};

/// |h|_inf + |Dh|_inf on a grid oversampled four times past the box.
/// Pointwise norms are Euclidean (Frobenius for Dh).
double c1_norm(const FourierField& h);

class TorusDiffeo {
 public:
  TorusDiffeo() = default;

  /// Throws DiffeoError when |h|_{1,inf} > 1/2.
  explicit TorusDiffeo(FourierField displacement);

  static TorusDiffeo identity(int dim, int kbox = 0);

  int dim() const noexcept { return h_.dim(); }
  int kbox() const noexcept { return h_.kbox(); }
  const FourierField& displacement() const noexcept { return h_; }
  double c1() const noexcept { return c1_; }

  bool has_inverse() const noexcept { return inverse_.has_value(); }
  /// Throws ConsistencyError when no inverse has been computed.
  const FourierField& inverse_displacement() const;

  /// The inverse map, carrying this map as its own cached inverse.
  TorusDiffeo inverse() const;

 private:
  friend TorusDiffeo invert(const TorusDiffeo&, const DiffeoSettings&);
  TorusDiffeo(FourierField h, double c1, std::optional<FourierField> inverse)
      : h_(std::move(h)), c1_(c1), inverse_(std::move(inverse)) {}

  FourierField h_;
  double c1_ = 0.0;
  std::optional<FourierField> inverse_;
};

/// Solves q(y) = -h(y + q(y)) by fixed-point iteration on a grid and caches
/// q truncated to the box of h. Throws ConvergenceError when the iteration or
/// the truncated residual misses settings.inverse_tol.
TorusDiffeo invert(const TorusDiffeo& d, const DiffeoSettings& settings = {});

/// theta -> u(theta + p(theta)) truncated to kbox_out (negative: u's box).
/// Throws AliasingError when more than alias_tol of the energy lies past
/// kbox_out even after one doubling of the grid.
FourierField compose_function(const FourierField& u, const FourierField& p, int kbox_out = -1,
                              const DiffeoSettings& settings = {});
FourierField compose_function(const FourierField& u, const TorusDiffeo& d, int kbox_out = -1,
                              const DiffeoSettings& settings = {});

/// outer o inner, with displacement h_in + h_out o (Id + h_in). The box is
/// the larger of the two.
TorusDiffeo compose_diffeos(const TorusDiffeo& outer, const TorusDiffeo& inner,
                            const DiffeoSettings& settings = {});

/// The field (alpha + f(theta)) d/dtheta.
struct VectorFieldOnTorus {
  std::vector<double> alpha;
  FourierField f;

  int dim() const noexcept { return static_cast<int>(alpha.size()); }
  /// alpha + f as one Fourier field.
  FourierField combined() const;
};

/// Phi_* X = (DPhi X) o Phi^{-1}. The mean of the result becomes the constant
/// part. Requires a cached inverse.
VectorFieldOnTorus pushforward(const VectorFieldOnTorus& x, const TorusDiffeo& d, int kbox_out = -1,
                               const DiffeoSettings& settings = {});

/// sup |f(theta) - f(-theta)| over a symmetric grid.
double parity_defect_even(const FourierField& f);
/// sup |h(theta) + h(-theta)| over a symmetric grid.
double parity_defect_odd(const FourierField& h);

bool is_reversible(const VectorFieldOnTorus& x, double tol = 1e-10);
bool is_reversibility_preserving(const TorusDiffeo& d, double tol = 1e-10);

}  // namespace kamtorus
