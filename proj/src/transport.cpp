#include "kamtorus/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "kamtorus/errors.hpp"
#include "kamtorus/evaluator.hpp"
#include "text.hpp"

namespace kamtorus {

namespace {

constexpr double kStructuralTol = 1e-12;

// Upper bound for the sup norm of components [0, count).
double leading_components_bound(const FourierField& u, int count) {
  double worst = 0.0;
  for (int a = 0; a < std::min(count, u.range()); ++a) {
    double s = 0.0;
    for (const Complex& z : u.coefficients(a)) s += std::abs(z);
    worst = std::max(worst, s);
  }
  return worst;
}

// Runs body(i) for i in [0, n) on up to `threads` workers, in contiguous chunks.
template <class Body>
void parallel_for(std::size_t n, int threads, const Body& body) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w * chunk; i < std::min(n, (w + 1) * chunk); ++i) body(i);
    });
  for (auto& t : pool) t.join();
}

std::vector<int> uniform_resolution(int d, int m) { return std::vector<int>(d, m); }

double step_size(const TransportOperator& op, double max_step) {
  double zmax = 0.0;
  for (double z : op.zeta) zmax = std::max(zmax, std::abs(z));
  return std::min(2 * std::numbers::pi / (8 * zmax + 1), max_step);
}

// Backward RK4 from (t, x) to s = 0 along dx/ds = zeta + a0(omega s, x).
void trace_back(const TransportOperator& op, const FieldEvaluator& a0, double t, double h_max,
                std::span<double> x) {
  if (!std::isfinite(t) || t < 0) throw ConfigError("characteristics: time must be finite and >= 0");
  if (t == 0) return;
  const int n = static_cast<int>(std::ceil(t / h_max - 1e-12));
  const double h = t / n;
  if (!(h > 0) || !std::isfinite(h)) throw ConvergenceError("characteristics: step size underflow", h);

  const int nu = op.nu, d = op.d;
  std::vector<double> theta(nu + d), v(d), k1(d), k2(d), k3(d), k4(d), y(d);
  auto rhs = [&](double s, std::span<const double> pos, std::vector<double>& out) {
    for (int i = 0; i < nu; ++i) theta[i] = op.omega[i] * s;
    for (int j = 0; j < d; ++j) theta[nu + j] = pos[j];
    a0(theta, v);
    for (int j = 0; j < d; ++j) out[j] = op.zeta[j] + v[j];
  };
  double s = t;
  for (int step = 0; step < n; ++step) {
    rhs(s, x, k1);
    for (int j = 0; j < d; ++j) y[j] = x[j] - 0.5 * h * k1[j];
    rhs(s - 0.5 * h, y, k2);
    for (int j = 0; j < d; ++j) y[j] = x[j] - 0.5 * h * k2[j];
    rhs(s - 0.5 * h, y, k3);
    for (int j = 0; j < d; ++j) y[j] = x[j] - h * k3[j];
    rhs(s - h, y, k4);
    for (int j = 0; j < d; ++j) x[j] -= h / 6 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    s = t - (step + 1) * h;
  }
}

std::vector<double> norms_of_samples(const GridSamples& g, std::span<const double> s_list) {
  const FourierField u = analyze(g, g.resolution[0] / 2 - 1);
  std::vector<double> out;
  out.reserve(s_list.size());
  for (double s : s_list) out.push_back(sobolev_norm(u, s));
  return out;
}

void check_u0(const TransportOperator& op, const FourierField& u0) {
  if (u0.dim() != op.d || u0.range() != 1)
    throw ShapeError("transport: u0 must be a scalar field on T^d");
}

}  // namespace

std::vector<double> TransportOperator::xi() const {
  std::vector<double> out(omega);
  out.insert(out.end(), zeta.begin(), zeta.end());
  return out;
}

void TransportOperator::validate() const {
  if (nu < 1 || d < 1) throw ShapeError("transport: nu and d must be positive");
  if (static_cast<int>(omega.size()) != nu || static_cast<int>(zeta.size()) != d)
    throw ShapeError("transport: omega must have nu entries and zeta d entries");
  if (a0.dim() != N() || a0.range() != d)
    throw ShapeError("transport: a0 must map T^(nu+d) to R^d");
}

FourierField TransportOperator::embedded(int kbox) const {
  std::vector<FourierField> parts;
  for (int i = 0; i < nu; ++i) parts.emplace_back(N(), 1, kbox);
  for (int j = 0; j < d; ++j) parts.push_back(a0.component(j).with_kbox(kbox));
  return FourierField::stack(parts);
}

ReducedTransport reduce(const TransportOperator& op, SchemeConstants c) {
  op.validate();
  c.weight_split = op.nu;
  if (op.a0.kbox() > c.kbox) throw ShapeError("reduce: a0 does not fit in the working box");

  const FourierField f0 = op.embedded(c.kbox);
  const auto xi = op.xi();
  ReducedTransport out;
  auto observer = [&](const KamState& st) {
    for (const FourierField* u : {&st.f, &st.g, &st.h}) {
      if (u->range() == 0) continue;
      const double defect = leading_components_bound(*u, op.nu);
      out.structural_defect = std::max(out.structural_defect, defect);
      if (defect >= kStructuralTol)
        throw ConsistencyError("reduce: phi-component " + detail::num(defect) + " at step " +
                               std::to_string(st.n));
    }
  };
  out.kam = kam_iterate(xi, f0, c, observer);
  if (!out.kam.converged()) return out;

  const auto& alpha = out.kam.alpha_inf;
  for (int i = 0; i < op.nu; ++i)
    if (alpha[i] != op.omega[i]) throw ConsistencyError("reduce: omega moved during the iteration");
  out.m_inf.assign(alpha.begin() + op.nu, alpha.end());

  const FourierField& h = out.kam.beta();
  std::vector<FourierField> xs;
  for (int j = 0; j < op.d; ++j) xs.push_back(h.component(op.nu + j));
  out.beta = FourierField::stack(xs);
  out.reduction_residual = conjugacy_residual(xi, f0, h, alpha);
  return out;
}

double NormHistory::slope(std::size_t s_index) const {
  const std::size_t n = times.size();
  if (n < 2) return 0.0;
  double mt = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mt += times[i];
    my += norms[i][s_index];
  }
  mt /= n;
  my /= n;
  double num = 0, den = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (times[i] - mt) * (norms[i][s_index] - my);
    den += (times[i] - mt) * (times[i] - mt);
  }
  return den > 0 ? num / den : 0.0;
}

double NormHistory::spread(std::size_t s_index) const {
  if (norms.empty()) return 0.0;
  double lo = norms[0][s_index], hi = lo;
  for (const auto& row : norms) {
    lo = std::min(lo, row[s_index]);
    hi = std::max(hi, row[s_index]);
  }
  return hi - lo;
}

std::vector<double> transport_solution(const TransportOperator& op, const FourierField& u0,
                                       double t, std::span<const double> points,
                                       const CharacteristicsSettings& settings) {
  op.validate();
  check_u0(op, u0);
  const int d = op.d;
  const std::size_t count = points.size() / d;
  const FieldEvaluator a0(op.a0);
  const double h = step_size(op, settings.max_step);
  std::vector<double> feet(points.begin(), points.end());
  parallel_for(count, settings.threads, [&](std::size_t p) {
    trace_back(op, a0, t, h, std::span<double>(feet).subspan(p * d, d));
  });
  return FieldEvaluator(u0).evaluate_many(feet);
}

NormHistory evolve_characteristics(const TransportOperator& op, const FourierField& u0,
                                   std::span<const double> t_grid, std::span<const double> s_list,
                                   const CharacteristicsSettings& settings) {
  const auto res = uniform_resolution(op.d, settings.resolution);
  const auto nodes = grid_nodes(res);
  NormHistory out{{t_grid.begin(), t_grid.end()}, {s_list.begin(), s_list.end()}, {}};
  for (double t : t_grid) {
    GridSamples g{op.d, 1, res, transport_solution(op, u0, t, nodes, settings)};
    out.norms.push_back(norms_of_samples(g, s_list));
  }
  return out;
}

NormHistory evolve_reduced(const TransportOperator& op, const ReducedTransport& red,
                           const FourierField& u0, std::span<const double> t_grid,
                           std::span<const double> s_list,
                           const CharacteristicsSettings& settings, const DiffeoSettings& diffeo) {
  if (red.excluded()) throw ConsistencyError("evolve_reduced: the reduction did not converge");
  const TorusDiffeo inv = invert(red.kam.psi, diffeo);
  const FieldEvaluator q(inv.inverse_displacement());

  const int nu = op.nu, d = op.d;
  const auto res = uniform_resolution(d, settings.resolution);
  const auto nodes = grid_nodes(res);
  const std::size_t count = nodes.size() / d;
  NormHistory out{{t_grid.begin(), t_grid.end()}, {s_list.begin(), s_list.end()}, {}};
  std::vector<double> theta(nu + d), shift(nu + d);
  for (double t : t_grid) {
    // x = y + q(omega t, y): the physical point above the reduced point y.
    std::vector<double> points(nodes);
    for (std::size_t p = 0; p < count; ++p) {
      for (int i = 0; i < nu; ++i) theta[i] = op.omega[i] * t;
      for (int j = 0; j < d; ++j) theta[nu + j] = nodes[p * d + j];
      q(theta, shift);
      for (int j = 0; j < d; ++j) points[p * d + j] += shift[nu + j];
    }
    GridSamples g{d, 1, res, transport_solution(op, u0, t, points, settings)};
    out.norms.push_back(norms_of_samples(g, s_list));
  }
  return out;
}

double forced_residual(const TransportOperator& op, const FourierField& f, const FourierField& b,
                       double c) {
  const int K = std::max({f.kbox(), b.kbox(), op.a0.kbox()});
  const VectorFieldOnTorus x{op.xi(), op.embedded(K)};
  FourierField r = directional_derivative(b, x.combined());
  r += f.with_kbox(r.kbox());
  const std::vector<double> cv{c};
  r -= FourierField::constant(op.N(), cv, r.kbox());
  const auto g = synthesize(r, 4 * r.kbox() + 2);
  double worst = 0.0;
  for (double v : g.values) worst = std::max(worst, std::abs(v));
  return worst;
}

ForcedSolution forced_solve(const TransportOperator& op, const FourierField& f,
                            const ReducedTransport& red, const SchemeConstants& c) {
  op.validate();
  if (f.dim() != op.N() || f.range() != 1)
    throw ShapeError("forced_solve: f must be a scalar field on T^(nu+d)");
  if (red.excluded()) throw ConsistencyError("forced_solve: the reduction did not converge");

  // Psi straightens the field: d/dt Psi(theta(t)) = (omega, m_inf). With
  // b = w o Psi the equation becomes L_inf w = c - f o Psi^-1,
  // L_inf = omega . d_phi + m_inf . d_x.
  const TorusDiffeo& psi = red.kam.psi;
  const bool trivial = psi.displacement().is_zero();
  const int K = f.kbox() + (trivial ? 0 : psi.kbox());
  FourierField moved;
  if (trivial) {
    moved = f.with_kbox(K);
  } else {
    const TorusDiffeo inv = invert(psi, c.diffeo);
    moved = compose_function(f, inv.inverse_displacement(), K, c.diffeo);
  }

  ForcedSolution out;
  out.c = average(moved)[0];
  FourierField w(op.N(), 1, K);
  const auto g = moved.coefficients(0);
  auto wc = w.coefficients(0);
  const int nu = op.nu;
  MultiIndex k(op.N());
  for (std::size_t idx = 0; idx < w.mode_count(); ++idx) {
    if (idx == w.zero_index() || g[idx] == Complex{}) continue;
    w.mode_at(idx, k);
    double div = 0.0;
    for (int i = 0; i < nu; ++i) div += op.omega[i] * k[i];
    for (int j = 0; j < op.d; ++j) div += red.m_inf[j] * k[nu + j];
    const double threshold = 2 * c.gamma / std::pow(diophantine_weight(k, nu), c.tau);
    if (std::abs(div) <= threshold)
      throw SmallDivisorError("forced_solve: divisor " + detail::num(std::abs(div)) +
                                  " below threshold " + detail::num(threshold),
                              k, div);
    // L_inf w = -(g - c): the mean is excluded above.
    wc[idx] = -g[idx] / (Complex(0, 1) * div);
  }

  if (trivial) {
    out.b = std::move(w);
  } else {
    out.b = compose_function(w, psi.displacement(), K + psi.kbox(), c.diffeo);
  }
  out.residual = forced_residual(op, f, out.b, out.c);
  return out;
}

}  // namespace kamtorus
