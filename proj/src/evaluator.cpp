#include "kamtorus/evaluator.hpp"

#include <cmath>

#include "kamtorus/errors.hpp"

namespace kamtorus {
namespace {

// Sums over every mode of the axes >= axis (coefficients start at `base`).
Complex full_sum(const Complex* base, int axis, int dim, std::size_t side,
                 const std::vector<std::size_t>& strides, const std::vector<Complex>& tables) {
  const Complex* e = tables.data() + axis * side;
  if (axis == dim - 1) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t t = 0; t < side; ++t) {
      const double cr = base[t].real();
      const double ci = base[t].imag();
      const double er = e[t].real();
      const double ei = e[t].imag();
      re += cr * er - ci * ei;
      im += cr * ei + ci * er;
    }
    return {re, im};
  }
  Complex acc{};
  for (std::size_t t = 0; t < side; ++t)
    acc += e[t] * full_sum(base + t * strides[axis], axis + 1, dim, side, strides, tables);
  return acc;
}

// Sums over modes of the axes >= axis whose first nonzero entry is positive.
Complex half_sum(const Complex* base, int axis, int dim, std::size_t side, int kbox,
                 const std::vector<std::size_t>& strides, const std::vector<Complex>& tables) {
  const Complex* e = tables.data() + axis * side;
  const auto mid = static_cast<std::size_t>(kbox);
  if (axis == dim - 1) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t t = mid + 1; t < side; ++t) {
      const double cr = base[t].real();
      const double ci = base[t].imag();
      const double er = e[t].real();
      const double ei = e[t].imag();
      re += cr * er - ci * ei;
      im += cr * ei + ci * er;
    }
    return {re, im};
  }
  Complex acc{};
  for (std::size_t t = mid + 1; t < side; ++t)
    acc += e[t] * full_sum(base + t * strides[axis], axis + 1, dim, side, strides, tables);
  acc += half_sum(base + mid * strides[axis], axis + 1, dim, side, kbox, strides, tables);
  return acc;
}

}  // namespace

FieldEvaluator::FieldEvaluator(const FourierField& u) : field_(u) {
  const int dim = u.dim();
  strides_.assign(dim, 1);
  for (int a = dim - 2; a >= 0; --a) strides_[a] = strides_[a + 1] * u.side();

  constant_.resize(u.range());
  for (int c = 0; c < u.range(); ++c) constant_[c] = u.coefficients(c)[u.zero_index()].real();

  std::size_t nonzero = 0;
  for (std::size_t idx = u.zero_index() + 1; idx < u.mode_count(); ++idx) {
    bool active = false;
    for (int c = 0; c < u.range(); ++c) active = active || u.coefficients(c)[idx] != Complex{};
    if (active) ++nonzero;
  }
  const std::size_t half = u.mode_count() / 2;
  sparse_ = nonzero * 8 <= half || u.kbox() == 0;
  if (sparse_) {
    for (std::size_t idx = u.zero_index() + 1; idx < u.mode_count(); ++idx) {
      SparseMode mode{u.mode_at(idx), std::vector<Complex>(u.range())};
      bool active = false;
      for (int c = 0; c < u.range(); ++c) {
        mode.c[c] = u.coefficients(c)[idx];
        active = active || mode.c[c] != Complex{};
      }
      if (active) modes_.push_back(std::move(mode));
    }
  }
}

void FieldEvaluator::operator()(std::span<const double> theta, std::span<double> out) const {
  if (sparse_)
    evaluate_sparse(theta, out);
  else
    evaluate_dense(theta, out);
}

void FieldEvaluator::evaluate_sparse(std::span<const double> theta, std::span<double> out) const {
  const int dim = field_.dim();
  for (int c = 0; c < field_.range(); ++c) out[c] = constant_[c];
  for (const auto& m : modes_) {
    double phase = 0.0;
    for (int a = 0; a < dim; ++a) phase += m.k[a] * theta[a];
    const double cs = std::cos(phase);
    const double sn = std::sin(phase);
    for (int c = 0; c < field_.range(); ++c)
      out[c] += 2.0 * (m.c[c].real() * cs - m.c[c].imag() * sn);
  }
}

void FieldEvaluator::evaluate_dense(std::span<const double> theta, std::span<double> out) const {
  const int dim = field_.dim();
  const int kbox = field_.kbox();
  const std::size_t side = field_.side();
  thread_local std::vector<Complex> tables;
  tables.resize(dim * side);
  for (int a = 0; a < dim; ++a) {
    Complex* e = tables.data() + a * side;
    e[kbox] = 1.0;
    const Complex step(std::cos(theta[a]), std::sin(theta[a]));
    for (int j = 1; j <= kbox; ++j) {
      // Exact restart every 16 powers bounds recurrence drift.
      e[kbox + j] = (j % 16 == 0) ? Complex(std::cos(j * theta[a]), std::sin(j * theta[a]))
                                  : e[kbox + j - 1] * step;
      e[kbox - j] = std::conj(e[kbox + j]);
    }
  }
  for (int c = 0; c < field_.range(); ++c) {
    const Complex* base = field_.coefficients(c).data();
    const Complex h = half_sum(base, 0, dim, side, kbox, strides_, tables);
    out[c] = constant_[c] + 2.0 * h.real();
  }
}

std::vector<double> FieldEvaluator::evaluate_many(std::span<const double> points) const {
  const auto dim = static_cast<std::size_t>(field_.dim());
  const auto range = static_cast<std::size_t>(field_.range());
  if (points.size() % dim != 0) throw ShapeError("evaluate_many: ragged point array");
  const std::size_t n = points.size() / dim;
  std::vector<double> out(n * range);
  for (std::size_t p = 0; p < n; ++p)
    (*this)(points.subspan(p * dim, dim), std::span<double>(out).subspan(p * range, range));
  return out;
}

}  // namespace kamtorus
