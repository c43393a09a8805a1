#pragma once

// Truncated Fourier series of real-valued maps T^N -> R^m.
//
// Coefficients are stored densely over the l-infinity box |k_i| <= K_box,
// one contiguous block per range component, with the last axis varying
// fastest. Hermitian symmetry c(-k) = conj(c(k)) is maintained by every
// operation. Angles are radians on [0, 2*pi)^N with basis exp(i k.theta).

#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace kamtorus {

using Complex = std::complex<double>;
using MultiIndex = std::vector<int>;

/// |k|_1
int l1_norm(std::span<const int> k) noexcept;

/// <k> = max(1, |k|_1)
double mode_weight(std::span<const int> k) noexcept;

/// True when the first nonzero entry of k is positive, or k = 0.
bool lex_nonnegative(std::span<const int> k) noexcept;

class FourierField {
 public:
  FourierField() = default;
  /// Zero field T^dim -> R^range truncated to the box of radius kbox.
  FourierField(int dim, int range, int kbox);

  static FourierField constant(int dim, std::span<const double> value, int kbox = 0);

  int dim() const noexcept { return dim_; }
  int range() const noexcept { return range_; }
  int kbox() const noexcept { return kbox_; }
  std::size_t side() const noexcept { return static_cast<std::size_t>(2 * kbox_ + 1); }
  std::size_t mode_count() const noexcept { return modes_; }

  bool in_box(std::span<const int> k) const noexcept;
  std::size_t index_of(std::span<const int> k) const;
  void mode_at(std::size_t index, std::span<int> k) const;
  MultiIndex mode_at(std::size_t index) const;
  std::size_t zero_index() const noexcept { return modes_ / 2; }

  /// Coefficient of mode k in component comp; zero outside the box.
  Complex coeff(int comp, std::span<const int> k) const;

  /// Sets mode k and its Hermitian partner -k. For k = 0 only the real
  /// part is kept.
  void set_mode(int comp, std::span<const int> k, Complex value);

  /// Adds amplitude * cos(k.theta) to component comp.
  void add_cos(int comp, std::span<const int> k, double amplitude);
  /// Adds amplitude * sin(k.theta) to component comp.
  void add_sin(int comp, std::span<const int> k, double amplitude);

  std::span<const Complex> coefficients(int comp) const;
  std::span<Complex> coefficients(int comp);
  std::span<const Complex> all_coefficients() const { return coeffs_; }

  /// Same field in a different box; modes outside the new box are dropped.
  FourierField with_kbox(int kbox) const;

  /// Scalar field holding one range component.
  FourierField component(int comp) const;

  /// Stacks scalar fields into a vector-valued one (common kbox = max).
  static FourierField stack(std::span<const FourierField> parts);

  /// Replaces c(k), c(-k) by their Hermitian average.
  void symmetrize();

  /// max |c(-k) - conj(c(k))|
  double hermitian_defect() const;

  bool is_zero() const noexcept;

  FourierField& operator+=(const FourierField& other);
  FourierField& operator-=(const FourierField& other);
  FourierField& operator*=(double factor);

 private:
  int dim_ = 0;
  int range_ = 0;
  int kbox_ = 0;
  std::size_t modes_ = 0;
  std::vector<Complex> coeffs_;
};

FourierField operator+(FourierField a, const FourierField& b);
FourierField operator-(FourierField a, const FourierField& b);
FourierField operator*(double factor, FourierField a);

/// Samples on the uniform grid theta_j = 2*pi*j/M per axis, component-major,
/// last axis fastest.
struct GridSamples {
  int dim = 0;
  int range = 0;
  std::vector<int> resolution;
  std::vector<double> values;

  std::size_t point_count() const noexcept;
  double& at(int comp, std::size_t point) { return values[comp * point_count() + point]; }
  double at(int comp, std::size_t point) const { return values[comp * point_count() + point]; }
  /// Coordinates of grid node `point`.
  std::vector<double> node(std::size_t point) const;
};

/// Grid coordinates for the given resolution (point-major, dim entries each).
std::vector<double> grid_nodes(std::span<const int> resolution);

// -- norms ------------------------------------------------------------------

/// sqrt(sum_k <k>^{2s} |u_k|^2), summed over the range components.
double sobolev_norm(const FourierField& u, double s);

struct LipschitzNorm {
  double sup_part = 0.0;
  double lip_part = 0.0;
  double gamma = 0.0;
  double value() const noexcept { return sup_part + gamma * lip_part; }
};

/// Parameter-family norm over finite samples: sup of ||u||_s plus gamma times
/// the largest pairwise quotient ||u(a) - u(b)||_{s-1} / |a - b|.
LipschitzNorm lipschitz_norm(std::span<const std::pair<std::vector<double>, FourierField>> samples,
                             double s, double gamma);

// -- linear operations ------------------------------------------------------

/// Keeps modes with |k|_1 <= K.
FourierField project(const FourierField& u, int K);
/// u - project(u, K)
FourierField project_complement(const FourierField& u, int K);

/// d/dtheta_axis
FourierField differentiate(const FourierField& u, int axis);

/// Mean value, one entry per range component.
std::vector<double> average(const FourierField& u);

/// Removes the mean.
FourierField remove_average(const FourierField& u);

// -- products ---------------------------------------------------------------

/// Pointwise product. Either one operand is scalar (broadcast) or both have
/// the same range (componentwise). Exact: the result box is K_u + K_v.
/// Computed by transform on an anti-aliased grid.
FourierField multiply(const FourierField& u, const FourierField& v);

/// Same product by direct discrete convolution. Reference path.
FourierField multiply_direct(const FourierField& u, const FourierField& v);

/// sum_j v_j * d_j u  for a vector field v with range == dim.
FourierField directional_derivative(const FourierField& u, const FourierField& v);

// -- transforms -------------------------------------------------------------

/// Values on the uniform grid. Requires M_i >= 2*K_box + 2.
GridSamples synthesize(const FourierField& u, std::span<const int> resolution);
GridSamples synthesize(const FourierField& u, int resolution);

/// Discrete Fourier analysis truncated to kbox. Requires M_i >= 2*kbox + 2.
FourierField analyze(const GridSamples& g, int kbox);

/// Direct summation at arbitrary points (point-major, dim entries each).
/// Returns point-major values, range entries each.
std::vector<double> evaluate_at(const FourierField& u, std::span<const double> points);

/// Fraction of energy sum |c_k|^2 in modes with |k|_inf > kbox.
double tail_energy_ratio(const FourierField& u, int kbox);

}  // namespace kamtorus
