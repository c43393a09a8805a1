#include "kamtorus/diffeo.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kamtorus/errors.hpp"
#include "kamtorus/evaluator.hpp"
#include "text.hpp"

namespace kamtorus {
namespace {

using detail::num;

void require_vector_field(const FourierField& h, const char* op) {
  if (h.dim() != h.range())
    throw ShapeError(std::string(op) + ": displacement must map T^N to R^N");
}

// Values of p at the nodes of `res`, component-major.
std::vector<double> values_on_grid(const FourierField& p, const std::vector<int>& res) {
  bool fits = true;
  for (int m : res) fits = fits && m >= 2 * p.kbox() + 2;
  if (fits) return synthesize(p, res).values;

  const auto nodes = grid_nodes(res);
  const auto pm = FieldEvaluator(p).evaluate_many(nodes);
  const std::size_t n = nodes.size() / res.size();
  std::vector<double> out(pm.size());
  for (std::size_t q = 0; q < n; ++q)
    for (int c = 0; c < p.range(); ++c) out[c * n + q] = pm[q * p.range() + c];
  return out;
}

GridSamples point_major_to_grid(const std::vector<double>& pm, int dim, int range,
                                const std::vector<int>& res) {
  GridSamples g{dim, range, res, std::vector<double>(pm.size())};
  const std::size_t n = g.point_count();
  for (std::size_t q = 0; q < n; ++q)
    for (int c = 0; c < range; ++c) g.values[c * n + q] = pm[q * range + c];
  return g;
}

// Index of the node at -theta for every node of the grid.
std::vector<std::size_t> reflected_nodes(int dim, int m) {
  std::size_t n = 1;
  for (int a = 0; a < dim; ++a) n *= static_cast<std::size_t>(m);
  std::vector<std::size_t> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t rest = p;
    std::size_t mirror = 0;
    std::size_t stride = 1;
    for (int a = dim - 1; a >= 0; --a) {
      const std::size_t j = rest % m;
      rest /= m;
      mirror += ((m - j) % m) * stride;
      stride *= m;
    }
    out[p] = mirror;
  }
  return out;
}

// sup |f(theta) + sign * f(-theta)|
double parity_defect(const FourierField& f, double sign) {
  if (f.is_zero()) return 0.0;
  const int m = 2 * f.kbox() + 2;
  const auto g = synthesize(f, m);
  const auto mirror = reflected_nodes(f.dim(), m);
  double worst = 0.0;
  for (int c = 0; c < f.range(); ++c)
    for (std::size_t p = 0; p < mirror.size(); ++p)
      worst = std::max(worst, std::abs(g.at(c, p) + sign * g.at(c, mirror[p])));
  return worst;
}

}  // namespace

double c1_norm(const FourierField& h) {
  if (h.is_zero()) return 0.0;
  const int dim = h.dim();
  const int m = std::max({4 * h.kbox(), 2 * h.kbox() + 2, 8});
  const auto values = synthesize(h, m);
  std::vector<GridSamples> grads;
  grads.reserve(dim);
  for (int a = 0; a < dim; ++a) grads.push_back(synthesize(differentiate(h, a), m));

  double sup = 0.0;
  double dsup = 0.0;
  for (std::size_t p = 0; p < values.point_count(); ++p) {
    double v2 = 0.0;
    double d2 = 0.0;
    for (int c = 0; c < h.range(); ++c) {
      v2 += values.at(c, p) * values.at(c, p);
      for (int a = 0; a < dim; ++a) d2 += grads[a].at(c, p) * grads[a].at(c, p);
    }
    sup = std::max(sup, v2);
    dsup = std::max(dsup, d2);
  }
  return std::sqrt(sup) + std::sqrt(dsup);
}

TorusDiffeo::TorusDiffeo(FourierField displacement) : h_(std::move(displacement)) {
  require_vector_field(h_, "TorusDiffeo");
  c1_ = c1_norm(h_);
  if (c1_ > 0.5)
    throw DiffeoError("|h|_{1,inf} = " + num(c1_) + " exceeds 1/2", c1_);
}

TorusDiffeo TorusDiffeo::identity(int dim, int kbox) {
  return TorusDiffeo(FourierField(dim, dim, kbox), 0.0, FourierField(dim, dim, kbox));
}

const FourierField& TorusDiffeo::inverse_displacement() const {
  if (!inverse_) throw ConsistencyError("inverse displacement requested before invert()");
  return *inverse_;
}

TorusDiffeo TorusDiffeo::inverse() const {
  const auto& q = inverse_displacement();
  return TorusDiffeo(q, c1_norm(q), h_);
}

TorusDiffeo invert(const TorusDiffeo& d, const DiffeoSettings& settings) {
  if (d.has_inverse()) return d;
  const FourierField& h = d.displacement();
  const int dim = h.dim();
  const int K = h.kbox();
  if (h.is_zero()) return TorusDiffeo(h, 0.0, h);
  if (K == 0) return TorusDiffeo(h, d.c1(), -1.0 * h);

  const FieldEvaluator eval(h);
  auto solve_on = [&](int m) {
    std::vector<int> res(dim, m);
    const auto nodes = grid_nodes(res);
    // q = -h(y) to start, point-major.
    std::vector<double> q = eval.evaluate_many(nodes);
    for (double& v : q) v = -v;
    std::vector<double> pts(nodes.size());
    double change = 0.0;
    int it = 0;
    for (; it < settings.max_iters; ++it) {
      for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = nodes[i] + q[i];
      auto next = eval.evaluate_many(pts);
      change = 0.0;
      for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = -next[i];
        change = std::max(change, std::abs(next[i] - q[i]));
      }
      q.swap(next);
      if (change <= 0.25 * settings.inverse_tol) break;
    }
    if (it == settings.max_iters)
      throw ConvergenceError("inverse fixed point stalled after " + std::to_string(it) +
                                 " iterations",
                             change);
    return point_major_to_grid(q, dim, dim, res);
  };

  FourierField wide = analyze(solve_on(4 * K + 2), 2 * K);
  if (tail_energy_ratio(wide, K) > settings.alias_tol) {
    wide = analyze(solve_on(8 * K + 2), 4 * K);
    const double ratio = tail_energy_ratio(wide, K);
    if (ratio > settings.alias_tol)
      throw AliasingError("inverse displacement has energy fraction " + num(ratio) +
                          " past K_box = " + std::to_string(K));
  }
  FourierField q = wide.with_kbox(K);

  // Residual q(y) + h(y + q(y)) of the truncated inverse.
  std::vector<int> res(dim, 4 * K + 2);
  const auto nodes = grid_nodes(res);
  auto qv = FieldEvaluator(q).evaluate_many(nodes);
  std::vector<double> pts(nodes.size());
  for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = nodes[i] + qv[i];
  const auto hv = eval.evaluate_many(pts);
  double residual = 0.0;
  for (std::size_t i = 0; i < hv.size(); ++i) residual = std::max(residual, std::abs(qv[i] + hv[i]));
  if (residual > settings.inverse_tol)
    throw ConvergenceError("truncated inverse misses tolerance: residual " +
                               num(residual),
                           residual);
  return TorusDiffeo(h, d.c1(), std::move(q));
}

FourierField compose_function(const FourierField& u, const FourierField& p, int kbox_out,
                              const DiffeoSettings& settings) {
  if (u.dim() != p.dim()) throw ShapeError("compose_function: domain dimensions differ");
  require_vector_field(p, "compose_function");
  const int K = kbox_out < 0 ? u.kbox() : kbox_out;
  if (p.is_zero()) return u.with_kbox(K);

  const int dim = u.dim();
  const FieldEvaluator eval(u);
  const int base = std::max(K, 1);
  auto attempt = [&](int m, int kan) {
    std::vector<int> res(dim, m);
    auto pts = grid_nodes(res);
    const auto disp = values_on_grid(p, res);
    const std::size_t n = pts.size() / dim;
    for (std::size_t q = 0; q < n; ++q)
      for (int a = 0; a < dim; ++a) pts[q * dim + a] += disp[a * n + q];
    return analyze(point_major_to_grid(eval.evaluate_many(pts), dim, u.range(), res), kan);
  };

  FourierField wide = attempt(4 * base + 2, 2 * base);
  if (tail_energy_ratio(wide, K) > settings.alias_tol) {
    wide = attempt(8 * base + 2, 4 * base);
    const double ratio = tail_energy_ratio(wide, K);
    if (ratio > settings.alias_tol)
      throw AliasingError("composition has energy fraction " + num(ratio) +
                          " past K_box = " + std::to_string(K));
  }
  return wide.with_kbox(K);
}

FourierField compose_function(const FourierField& u, const TorusDiffeo& d, int kbox_out,
                              const DiffeoSettings& settings) {
  return compose_function(u, d.displacement(), kbox_out, settings);
}

TorusDiffeo compose_diffeos(const TorusDiffeo& outer, const TorusDiffeo& inner,
                            const DiffeoSettings& settings) {
  if (outer.dim() != inner.dim()) throw ShapeError("compose_diffeos: dimensions differ");
  const int K = std::max(outer.kbox(), inner.kbox());
  FourierField h = inner.displacement().with_kbox(K);
  h += compose_function(outer.displacement(), inner.displacement(), K, settings);
  return TorusDiffeo(std::move(h));
}

FourierField VectorFieldOnTorus::combined() const {
  if (f.dim() != dim() || f.range() != dim())
    throw ShapeError("VectorFieldOnTorus: periodic part must map T^N to R^N");
  return FourierField::constant(dim(), alpha, f.kbox()) + f;
}

VectorFieldOnTorus pushforward(const VectorFieldOnTorus& x, const TorusDiffeo& d, int kbox_out,
                               const DiffeoSettings& settings) {
  if (x.dim() != d.dim()) throw ShapeError("pushforward: dimensions differ");
  const FourierField& q = d.inverse_displacement();
  const int K = kbox_out < 0 ? std::max(x.f.kbox(), d.kbox()) : kbox_out;

  const FourierField& g = d.displacement();
  FourierField lifted = directional_derivative(g, x.combined());
  lifted += x.f.with_kbox(lifted.kbox());
  FourierField moved = compose_function(lifted, q, K, settings);

  VectorFieldOnTorus out{x.alpha, {}};
  const auto mean = average(moved);
  for (int a = 0; a < x.dim(); ++a) out.alpha[a] += mean[a];
  out.f = remove_average(moved);
  return out;
}

double parity_defect_even(const FourierField& f) { return parity_defect(f, -1.0); }

double parity_defect_odd(const FourierField& h) { return parity_defect(h, 1.0); }

bool is_reversible(const VectorFieldOnTorus& x, double tol) {
  return parity_defect_even(x.f) < tol;
}

bool is_reversibility_preserving(const TorusDiffeo& d, double tol) {
  return parity_defect_odd(d.displacement()) < tol;
}

}  // namespace kamtorus
