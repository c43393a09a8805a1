#include "kamtorus/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "kamtorus/errors.hpp"
#include "kamtorus/evaluator.hpp"

namespace kamtorus {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

// Calls fn(index, k) for every mode of the box in storage order.
template <class Fn>
void for_each_mode(int dim, int kbox, Fn&& fn) {
  MultiIndex k(dim, -kbox);
  const std::size_t total = ipow(static_cast<std::size_t>(2 * kbox + 1), dim);
  for (std::size_t idx = 0; idx < total; ++idx) {
    fn(idx, std::span<const int>(k));
    for (int a = dim - 1; a >= 0; --a) {
      if (++k[a] <= kbox) break;
      k[a] = -kbox;
    }
  }
}

void require_same_domain(const FourierField& a, const FourierField& b, const char* op) {
  if (a.dim() != b.dim())
    throw ShapeError(std::string(op) + ": domain dimensions differ (" + std::to_string(a.dim()) +
                     " vs " + std::to_string(b.dim()) + ")");
}

void require_resolution(std::span<const int> resolution, int dim, int kbox, const char* op) {
  if (static_cast<int>(resolution.size()) != dim)
    throw ShapeError(std::string(op) + ": resolution rank does not match domain dimension");
  for (int m : resolution) {
    if (m < 2 * kbox + 2)
      throw AliasingError(std::string(op) + ": resolution " + std::to_string(m) +
                          " below 2*K_box+2 = " + std::to_string(2 * kbox + 2));
  }
}

// Product range: scalar broadcast or componentwise.
int product_range(const FourierField& u, const FourierField& v) {
  if (u.range() == v.range()) return u.range();
  if (u.range() == 1) return v.range();
  if (v.range() == 1) return u.range();
  throw ShapeError("multiply: ranges " + std::to_string(u.range()) + " and " +
                   std::to_string(v.range()) + " are not compatible");
}

#ifndef NDEBUG
void debug_check_hermitian(const FourierField& u) {
  double scale = 0.0;
  for (auto c : u.all_coefficients()) scale = std::max(scale, std::abs(c));
  if (u.hermitian_defect() > 1e-13 * std::max(scale, 1e-300))
    throw ConsistencyError("Hermitian symmetry lost");
}
#else
void debug_check_hermitian(const FourierField&) {}
#endif

}  // namespace

int l1_norm(std::span<const int> k) noexcept {
  int s = 0;
  for (int v : k) s += std::abs(v);
  return s;
}

double mode_weight(std::span<const int> k) noexcept {
  return std::max(1.0, static_cast<double>(l1_norm(k)));
}

bool lex_nonnegative(std::span<const int> k) noexcept {
  for (int v : k) {
    if (v != 0) return v > 0;
  }
  return true;
}

// -- FourierField -------------------------------------------------------------

FourierField::FourierField(int dim, int range, int kbox)
    : dim_(dim), range_(range), kbox_(kbox) {
  if (dim < 1 || range < 1 || kbox < 0)
    throw ShapeError("FourierField: need dim >= 1, range >= 1, kbox >= 0");
  modes_ = ipow(static_cast<std::size_t>(2 * kbox + 1), dim);
  coeffs_.assign(modes_ * static_cast<std::size_t>(range), Complex{});
}

FourierField FourierField::constant(int dim, std::span<const double> value, int kbox) {
  FourierField f(dim, static_cast<int>(value.size()), kbox);
  for (int c = 0; c < f.range_; ++c) f.coefficients(c)[f.zero_index()] = value[c];
  return f;
}

bool FourierField::in_box(std::span<const int> k) const noexcept {
  if (static_cast<int>(k.size()) != dim_) return false;
  return std::all_of(k.begin(), k.end(), [&](int v) { return std::abs(v) <= kbox_; });
}

std::size_t FourierField::index_of(std::span<const int> k) const {
  if (!in_box(k)) throw ShapeError("FourierField: mode outside truncation box");
  std::size_t idx = 0;
  for (int v : k) idx = idx * side() + static_cast<std::size_t>(v + kbox_);
  return idx;
}

void FourierField::mode_at(std::size_t index, std::span<int> k) const {
  for (int a = dim_ - 1; a >= 0; --a) {
    k[a] = static_cast<int>(index % side()) - kbox_;
    index /= side();
  }
}

MultiIndex FourierField::mode_at(std::size_t index) const {
  MultiIndex k(dim_);
  mode_at(index, k);
  return k;
}

Complex FourierField::coeff(int comp, std::span<const int> k) const {
  if (!in_box(k)) return {};
  return coeffs_[comp * modes_ + index_of(k)];
}

void FourierField::set_mode(int comp, std::span<const int> k, Complex value) {
  const std::size_t idx = index_of(k);
  const std::size_t partner = modes_ - 1 - idx;
  auto block = coefficients(comp);
  if (idx == partner) {
    block[idx] = value.real();
  } else {
    block[idx] = value;
    block[partner] = std::conj(value);
  }
}

void FourierField::add_cos(int comp, std::span<const int> k, double amplitude) {
  const std::size_t idx = index_of(k);
  const std::size_t partner = modes_ - 1 - idx;
  auto block = coefficients(comp);
  if (idx == partner) {
    block[idx] += amplitude;
  } else {
    block[idx] += 0.5 * amplitude;
    block[partner] += 0.5 * amplitude;
  }
}

void FourierField::add_sin(int comp, std::span<const int> k, double amplitude) {
  const std::size_t idx = index_of(k);
  const std::size_t partner = modes_ - 1 - idx;
  if (idx == partner) return;  // sin(0) = 0
  auto block = coefficients(comp);
  block[idx] += Complex(0.0, -0.5 * amplitude);
  block[partner] += Complex(0.0, 0.5 * amplitude);
}

std::span<const Complex> FourierField::coefficients(int comp) const {
  return std::span<const Complex>(coeffs_).subspan(comp * modes_, modes_);
}

std::span<Complex> FourierField::coefficients(int comp) {
  return std::span<Complex>(coeffs_).subspan(comp * modes_, modes_);
}

FourierField FourierField::with_kbox(int kbox) const {
  if (kbox == kbox_) return *this;
  FourierField out(dim_, range_, kbox);
  const int common = std::min(kbox, kbox_);
  for_each_mode(dim_, common, [&](std::size_t, std::span<const int> k) {
    const std::size_t from = index_of(k);
    const std::size_t to = out.index_of(k);
    for (int c = 0; c < range_; ++c) out.coeffs_[c * out.modes_ + to] = coeffs_[c * modes_ + from];
  });
  return out;
}

FourierField FourierField::component(int comp) const {
  if (comp < 0 || comp >= range_) throw ShapeError("component index out of range");
  FourierField out(dim_, 1, kbox_);
  std::copy_n(coeffs_.begin() + comp * modes_, modes_, out.coeffs_.begin());
  return out;
}

FourierField FourierField::stack(std::span<const FourierField> parts) {
  if (parts.empty()) throw ShapeError("stack: no components");
  int kbox = 0;
  int range = 0;
  for (const auto& p : parts) {
    require_same_domain(parts.front(), p, "stack");
    kbox = std::max(kbox, p.kbox());
    range += p.range();
  }
  FourierField out(parts.front().dim(), range, kbox);
  int offset = 0;
  for (const auto& p : parts) {
    const FourierField q = p.with_kbox(kbox);
    std::copy(q.coeffs_.begin(), q.coeffs_.end(), out.coeffs_.begin() + offset * out.modes_);
    offset += p.range();
  }
  return out;
}

void FourierField::symmetrize() {
  for (int c = 0; c < range_; ++c) {
    auto block = coefficients(c);
    for (std::size_t i = 0; i < modes_ / 2; ++i) {
      const std::size_t j = modes_ - 1 - i;
      const Complex avg = 0.5 * (block[i] + std::conj(block[j]));
      block[i] = avg;
      block[j] = std::conj(avg);
    }
    block[modes_ / 2] = block[modes_ / 2].real();
  }
}

double FourierField::hermitian_defect() const {
  double defect = 0.0;
  for (int c = 0; c < range_; ++c) {
    auto block = coefficients(c);
    for (std::size_t i = 0; i <= modes_ / 2; ++i)
      defect = std::max(defect, std::abs(block[modes_ - 1 - i] - std::conj(block[i])));
  }
  return defect;
}

bool FourierField::is_zero() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](Complex c) { return c == Complex{}; });
}

FourierField& FourierField::operator+=(const FourierField& other) {
  require_same_domain(*this, other, "add");
  if (range_ != other.range_) throw ShapeError("add: ranges differ");
  if (other.kbox_ > kbox_) *this = with_kbox(other.kbox_);
  const FourierField rhs = other.with_kbox(kbox_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

FourierField& FourierField::operator-=(const FourierField& other) {
  FourierField neg = other;
  neg *= -1.0;
  return *this += neg;
}

FourierField& FourierField::operator*=(double factor) {
  for (auto& c : coeffs_) c *= factor;
  return *this;
}

FourierField operator+(FourierField a, const FourierField& b) { return a += b; }
FourierField operator-(FourierField a, const FourierField& b) { return a -= b; }
FourierField operator*(double factor, FourierField a) { return a *= factor; }

// -- GridSamples --------------------------------------------------------------

std::size_t GridSamples::point_count() const noexcept {
  std::size_t n = 1;
  for (int m : resolution) n *= static_cast<std::size_t>(m);
  return n;
}

std::vector<double> GridSamples::node(std::size_t point) const {
  std::vector<double> theta(dim);
  for (int a = dim - 1; a >= 0; --a) {
    const auto m = static_cast<std::size_t>(resolution[a]);
    theta[a] = kTwoPi * static_cast<double>(point % m) / static_cast<double>(m);
    point /= m;
  }
  return theta;
}

std::vector<double> grid_nodes(std::span<const int> resolution) {
  const int dim = static_cast<int>(resolution.size());
  std::size_t total = 1;
  for (int m : resolution) total *= static_cast<std::size_t>(m);
  std::vector<double> nodes(total * dim);
  std::vector<int> j(dim, 0);
  for (std::size_t p = 0; p < total; ++p) {
    for (int a = 0; a < dim; ++a)
      nodes[p * dim + a] = kTwoPi * static_cast<double>(j[a]) / static_cast<double>(resolution[a]);
    for (int a = dim - 1; a >= 0; --a) {
      if (++j[a] < resolution[a]) break;
      j[a] = 0;
    }
  }
  return nodes;
}

// -- norms --------------------------------------------------------------------

double sobolev_norm(const FourierField& u, double s) {
  if (u.mode_count() == 0) return 0.0;
  // Scale by the largest active weight so that high s does not overflow.
  std::vector<double> weights(u.mode_count());
  std::vector<double> energy(u.mode_count(), 0.0);
  double wmax = 0.0;
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t idx, std::span<const int> k) {
    weights[idx] = mode_weight(k);
    for (int c = 0; c < u.range(); ++c) energy[idx] += std::norm(u.coefficients(c)[idx]);
    if (energy[idx] > 0.0) wmax = std::max(wmax, weights[idx]);
  });
  if (wmax == 0.0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < energy.size(); ++i) {
    if (energy[i] > 0.0) sum += std::pow(weights[i] / wmax, 2.0 * s) * energy[i];
  }
  return std::pow(wmax, s) * std::sqrt(sum);
}

LipschitzNorm lipschitz_norm(std::span<const std::pair<std::vector<double>, FourierField>> samples,
                             double s, double gamma) {
  if (samples.empty()) throw ShapeError("lipschitz_norm: no samples");
  LipschitzNorm out;
  out.gamma = gamma;
  for (const auto& [xi, u] : samples) {
    if (u.dim() != samples.front().second.dim() || u.range() != samples.front().second.range())
      throw ShapeError("lipschitz_norm: samples have different shapes");
    out.sup_part = std::max(out.sup_part, sobolev_norm(u, s));
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const auto& [xa, ua] = samples[i];
      const auto& [xb, ub] = samples[j];
      double dist2 = 0.0;
      for (std::size_t a = 0; a < xa.size(); ++a) dist2 += (xa[a] - xb[a]) * (xa[a] - xb[a]);
      const double diff = sobolev_norm(ua - ub, s - 1.0);
      if (dist2 == 0.0) {
        if (diff > 0.0) throw ShapeError("lipschitz_norm: duplicate parameter with distinct fields");
        continue;
      }
      out.lip_part = std::max(out.lip_part, diff / std::sqrt(dist2));
    }
  }
  return out;
}

// -- linear operations --------------------------------------------------------

FourierField project(const FourierField& u, int K) {
  FourierField out(u.dim(), u.range(), u.kbox());
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t idx, std::span<const int> k) {
    if (l1_norm(k) > K) return;
    for (int c = 0; c < u.range(); ++c) out.coefficients(c)[idx] = u.coefficients(c)[idx];
  });
  return out;
}

FourierField project_complement(const FourierField& u, int K) {
  FourierField out(u.dim(), u.range(), u.kbox());
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t idx, std::span<const int> k) {
    if (l1_norm(k) <= K) return;
    for (int c = 0; c < u.range(); ++c) out.coefficients(c)[idx] = u.coefficients(c)[idx];
  });
  return out;
}

FourierField differentiate(const FourierField& u, int axis) {
  if (axis < 0 || axis >= u.dim()) throw ShapeError("differentiate: axis out of range");
  FourierField out(u.dim(), u.range(), u.kbox());
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t idx, std::span<const int> k) {
    const Complex factor(0.0, static_cast<double>(k[axis]));
    for (int c = 0; c < u.range(); ++c) out.coefficients(c)[idx] = factor * u.coefficients(c)[idx];
  });
  return out;
}

std::vector<double> average(const FourierField& u) {
  std::vector<double> mean(u.range());
  for (int c = 0; c < u.range(); ++c) {
    const Complex c0 = u.coefficients(c)[u.zero_index()];
    if (std::abs(c0.imag()) >= 1e-13 * std::max(1.0, std::abs(c0.real())))
      throw ConsistencyError("average: imaginary mean");
    mean[c] = c0.real();
  }
  return mean;
}

FourierField remove_average(const FourierField& u) {
  FourierField out = u;
  for (int c = 0; c < u.range(); ++c) out.coefficients(c)[u.zero_index()] = 0.0;
  return out;
}

// -- products -----------------------------------------------------------------

FourierField multiply(const FourierField& u, const FourierField& v) {
  require_same_domain(u, v, "multiply");
  const int range = product_range(u, v);
  const int kbox = u.kbox() + v.kbox();
  const std::vector<int> res(u.dim(), 2 * kbox + 2);
  const GridSamples gu = synthesize(u, res);
  const GridSamples gv = synthesize(v, res);
  GridSamples prod{u.dim(), range, res, std::vector<double>(gu.point_count() * range)};
  for (int c = 0; c < range; ++c) {
    const int cu = u.range() == 1 ? 0 : c;
    const int cv = v.range() == 1 ? 0 : c;
    for (std::size_t p = 0; p < prod.point_count(); ++p) prod.at(c, p) = gu.at(cu, p) * gv.at(cv, p);
  }
  FourierField out = analyze(prod, kbox);
  debug_check_hermitian(out);
  return out;
}

FourierField multiply_direct(const FourierField& u, const FourierField& v) {
  require_same_domain(u, v, "multiply");
  const int range = product_range(u, v);
  FourierField out(u.dim(), range, u.kbox() + v.kbox());
  MultiIndex sum(u.dim());
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t iu, std::span<const int> ku) {
    for_each_mode(v.dim(), v.kbox(), [&](std::size_t iv, std::span<const int> kv) {
      for (int a = 0; a < u.dim(); ++a) sum[a] = ku[a] + kv[a];
      const std::size_t io = out.index_of(sum);
      for (int c = 0; c < range; ++c) {
        const Complex a = u.coefficients(u.range() == 1 ? 0 : c)[iu];
        const Complex b = v.coefficients(v.range() == 1 ? 0 : c)[iv];
        out.coefficients(c)[io] += a * b;
      }
    });
  });
  return out;
}

FourierField directional_derivative(const FourierField& u, const FourierField& v) {
  require_same_domain(u, v, "directional_derivative");
  if (v.range() != v.dim()) throw ShapeError("directional_derivative: direction must be a vector field");
  const int kbox = u.kbox() + v.kbox();
  const std::vector<int> res(u.dim(), 2 * kbox + 2);
  const GridSamples gv = synthesize(v, res);
  GridSamples acc{u.dim(), u.range(), res, std::vector<double>(gv.point_count() * u.range(), 0.0)};
  for (int j = 0; j < u.dim(); ++j) {
    const GridSamples du = synthesize(differentiate(u, j), res);
    for (int c = 0; c < u.range(); ++c)
      for (std::size_t p = 0; p < acc.point_count(); ++p) acc.at(c, p) += gv.at(j, p) * du.at(c, p);
  }
  return analyze(acc, kbox);
}

// -- transforms ---------------------------------------------------------------

GridSamples synthesize(const FourierField& u, std::span<const int> resolution) {
  require_resolution(resolution, u.dim(), u.kbox(), "synthesize");
  GridSamples g{u.dim(), u.range(), std::vector<int>(resolution.begin(), resolution.end()), {}};
  const std::size_t points = g.point_count();
  g.values.assign(points * u.range(), 0.0);

  // Position of each mode in the FFT buffer.
  std::vector<std::size_t> slot(u.mode_count());
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t idx, std::span<const int> k) {
    std::size_t pos = 0;
    for (int a = 0; a < u.dim(); ++a) {
      const int m = resolution[a];
      pos = pos * static_cast<std::size_t>(m) + static_cast<std::size_t>(((k[a] % m) + m) % m);
    }
    slot[idx] = pos;
  });

  std::vector<Complex> buf(points);
  for (int c = 0; c < u.range(); ++c) {
    std::fill(buf.begin(), buf.end(), Complex{});
    auto block = u.coefficients(c);
    for (std::size_t i = 0; i < block.size(); ++i) buf[slot[i]] = block[i];
    detail::fft_inplace(buf, resolution, detail::FftDirection::kBackward);
    for (std::size_t p = 0; p < points; ++p) g.at(c, p) = buf[p].real();
  }
  return g;
}

GridSamples synthesize(const FourierField& u, int resolution) {
  const std::vector<int> res(u.dim(), resolution);
  return synthesize(u, res);
}

FourierField analyze(const GridSamples& g, int kbox) {
  require_resolution(g.resolution, g.dim, kbox, "analyze");
  FourierField out(g.dim, g.range, kbox);
  const std::size_t points = g.point_count();
  const double scale = 1.0 / static_cast<double>(points);

  std::vector<std::size_t> slot(out.mode_count());
  for_each_mode(g.dim, kbox, [&](std::size_t idx, std::span<const int> k) {
    std::size_t pos = 0;
    for (int a = 0; a < g.dim; ++a) {
      const int m = g.resolution[a];
      pos = pos * static_cast<std::size_t>(m) + static_cast<std::size_t>(((k[a] % m) + m) % m);
    }
    slot[idx] = pos;
  });

  std::vector<Complex> buf(points);
  for (int c = 0; c < g.range; ++c) {
    for (std::size_t p = 0; p < points; ++p) buf[p] = g.at(c, p);
    detail::fft_inplace(buf, g.resolution, detail::FftDirection::kForward);
    auto block = out.coefficients(c);
    for (std::size_t i = 0; i < block.size(); ++i) block[i] = buf[slot[i]] * scale;
  }
  out.symmetrize();
  return out;
}

std::vector<double> evaluate_at(const FourierField& u, std::span<const double> points) {
  if (points.size() % static_cast<std::size_t>(u.dim()) != 0)
    throw ShapeError("evaluate_at: point array is not a multiple of the dimension");
  // Summation runs over the Hermitian half, so the imaginary residue of the
  // full sum is bounded by the symmetry defect.
  const double defect = u.hermitian_defect();
  if (defect > 1e-12 * sobolev_norm(u, 0.0) && defect > 0.0)
    throw ConsistencyError("evaluate_at: imaginary residue " + std::to_string(defect) +
                           " exceeds threshold");
  return FieldEvaluator(u).evaluate_many(points);
}

double tail_energy_ratio(const FourierField& u, int kbox) {
  double total = 0.0;
  double tail = 0.0;
  for_each_mode(u.dim(), u.kbox(), [&](std::size_t idx, std::span<const int> k) {
    double e = 0.0;
    for (int c = 0; c < u.range(); ++c) e += std::norm(u.coefficients(c)[idx]);
    total += e;
    for (int v : k) {
      if (std::abs(v) > kbox) {
        tail += e;
        break;
      }
    }
  });
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace kamtorus
