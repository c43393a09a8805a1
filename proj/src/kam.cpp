#include "kamtorus/kam.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <string>

#include "kamtorus/errors.hpp"
#include "text.hpp"

namespace kamtorus {
namespace {

using detail::num;

// Visits every k with 0 < |k|_1 <= K whose first nonzero entry is positive,
// passing alpha.k along. Stops when fn returns true.
template <class Fn>
bool scan_half_ball(std::span<const double> alpha, int K, Fn&& fn) {
  const int dim = static_cast<int>(alpha.size());
  MultiIndex k(dim, 0);
  // positive: whether an earlier entry is already nonzero (then any sign is allowed).
  auto rec = [&](auto&& self, int axis, int budget, double dot, bool positive) -> bool {
    if (axis == dim) return positive && fn(std::span<const int>(k), dot);
    const int lo = positive ? -budget : 0;
    for (int v = lo; v <= budget; ++v) {
      k[axis] = v;
      if (self(self, axis + 1, budget - std::abs(v), dot + alpha[axis] * v, positive || v != 0))
        return true;
    }
    k[axis] = 0;
    return false;
  };
  return rec(rec, 0, K, 0.0, false);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("scheme constants violate " + what);
}

}  // namespace

SchemeConstants SchemeConstants::defaults(int N) {
  SchemeConstants c;
  c.N = N;
  c.tau = N + 2;
  c.s0 = N / 2 + 3;
  c.mu = 4 * c.tau + 2 * c.s0 + 5;
  c.rho = 2 * c.tau + 2 * c.s0 + 2;
  c.kappa = 8 * c.tau + 2 * c.s0 + 5;
  c.b = c.mu * c.chi + c.kappa + 1.5;
  c.s1 = std::floor(c.b + 2 * c.tau + 3 * c.s0 + 2) + 1;
  c.kbox = 4 * c.K0;
  return c;
}

void SchemeConstants::validate() const {
  require(N >= 1, "N >= 1");
  require(tau == N + 2, "tau = N + 2");
  require(s0 >= N / 2 + 3, "s0 >= floor(N/2) + 3");
  require(gamma > 0 && gamma < 1, "0 < gamma < 1");
  require(K0 >= 2, "K0 >= 2");
  require(chi > 1, "chi > 1");
  require(mu > 4 * tau + 2 * s0 + 4, "mu > 4 tau + 2 s0 + 4");
  require(rho > 2 * tau + 2 * s0 + 1, "rho > 2 tau + 2 s0 + 1");
  require(s1 > chi * mu + s0, "s1 > chi mu + s0");
  require(kappa > 8 * tau + 2 * s0 + 4, "kappa > 8 tau + 2 s0 + 4");
  require(b > mu * chi + kappa + 1, "b > mu chi + kappa + 1");
  require(s1 >= s0 + 2 * tau + 4, "s1 >= s0 + 2 tau + 4");
  require(s0 + b < s1, "s0 + b < s1");
  require(b + 2 * tau + 3 * s0 + 2 < s1, "b + 2 tau + 3 s0 + 2 < s1");
  require(kbox >= 1, "kbox >= 1");
  require(max_steps >= 1, "max_steps >= 1");
  require(convergence_tol > 0, "convergence_tol > 0");
  require(divergence_guard > 1, "divergence_guard > 1");
  require(weight_split >= 0 && weight_split < N, "0 <= weight_split < N");
}

double diophantine_weight(std::span<const int> k, int split) noexcept {
  if (split <= 0) return mode_weight(k);
  const int l = l1_norm(k.first(split));
  const int j = l1_norm(k.subspan(split));
  return std::max({1, l, j});
}

int truncation_schedule(const SchemeConstants& c, int n) {
  const double v = std::pow(static_cast<double>(c.K0), std::pow(c.chi, n));
  constexpr double cap = INT_MAX / 4;
  return v >= cap ? static_cast<int>(cap) : static_cast<int>(std::ceil(v - 1e-9));
}

std::optional<Resonance> first_resonance(std::span<const double> alpha, double gamma, double tau,
                                         int K, int split) {
  std::optional<Resonance> hit;
  scan_half_ball(alpha, K, [&](std::span<const int> k, double dot) {
    const double threshold = gamma / std::pow(diophantine_weight(k, split), tau);
    if (std::abs(dot) > threshold) return false;
    hit = Resonance{MultiIndex(k.begin(), k.end()), std::abs(dot), threshold};
    return true;
  });
  return hit;
}

bool diophantine_ok(std::span<const double> alpha, double gamma, double tau, int K, int split) {
  return !first_resonance(alpha, gamma, tau, K, split).has_value();
}

FourierField solve_homological(const FourierField& f, std::span<const double> alpha, int K,
                               double gamma, double tau, int split) {
  if (static_cast<int>(alpha.size()) != f.dim())
    throw ShapeError("solve_homological: frequency length differs from the domain dimension");
  FourierField g(f.dim(), f.range(), f.kbox());
  MultiIndex k(f.dim());
  const std::size_t last = f.mode_count() - 1;
  for (std::size_t idx = f.zero_index() + 1; idx < f.mode_count(); ++idx) {
    f.mode_at(idx, k);
    if (l1_norm(k) > K) continue;
    double dot = 0.0;
    for (int a = 0; a < f.dim(); ++a) dot += alpha[a] * k[a];
    const double threshold = gamma / std::pow(diophantine_weight(k, split), tau);
    if (std::abs(dot) <= threshold)
      throw SmallDivisorError("small divisor " + num(std::abs(dot)) + " <= " + num(threshold), k,
                              std::abs(dot));
    for (int c = 0; c < f.range(); ++c) {
      const Complex fk = f.coefficients(c)[idx];
      const Complex gk(-fk.imag() / dot, fk.real() / dot);  // i f_k / (alpha.k)
      g.coefficients(c)[idx] = gk;
      g.coefficients(c)[last - idx] = std::conj(gk);
    }
  }
  return g;
}

double homological_residual(const FourierField& f, const FourierField& g,
                            std::span<const double> alpha, int K) {
  FourierField r = project(f, K);
  for (int a = 0; a < g.dim(); ++a) r += alpha[a] * differentiate(g, a);
  return sobolev_norm(remove_average(r), 0.0);
}

KamStepResult kam_step(std::span<const double> alpha, const FourierField& f,
                       const SchemeConstants& c, int K) {
  KamStepResult out;
  auto& diag = out.diag;
  diag.smallness = std::pow(static_cast<double>(K), 2 * c.tau + 2 * c.s0 + 1) *
                   sobolev_norm(f, c.s0) / c.gamma;
  diag.smallness_ok = diag.smallness <= c.delta_step;
  if (c.enforce_smallness && !diag.smallness_ok)
    throw SmallnessError("KAM step smallness " + num(diag.smallness) + " exceeds " +
                         num(c.delta_step));

  const FourierField g = solve_homological(f, alpha, K, c.gamma, c.tau, c.weight_split);
  diag.homological_residual = homological_residual(f, g, alpha, K);
  out.phi = invert(TorusDiffeo(g), c.diffeo);
  diag.g_c1 = out.phi.c1();

  out.alpha_plus.assign(alpha.begin(), alpha.end());
  const auto mean = average(f);
  for (std::size_t a = 0; a < out.alpha_plus.size(); ++a) out.alpha_plus[a] += mean[a];

  // g lives in |k|_1 <= K, so a box of radius K holds it exactly.
  const FourierField g_tight = g.with_kbox(std::min(K, g.kbox()));
  FourierField F = directional_derivative(g_tight, f);
  F += project_complement(f, K).with_kbox(F.kbox());
  out.f_plus = compose_function(F, out.phi.inverse_displacement(), c.kbox, c.diffeo);
  diag.norm_plus_s0 = sobolev_norm(out.f_plus, c.s0);
  diag.norm_plus_s1 = sobolev_norm(out.f_plus, c.s1);
  return out;
}

StraighteningResult kam_iterate(std::span<const double> xi, const FourierField& f0,
                                const SchemeConstants& c, const KamObserver& observer) {
  const int N = static_cast<int>(xi.size());
  if (f0.dim() != N || f0.range() != N)
    throw ShapeError("kam_iterate: perturbation must map T^N to R^N with N = len(xi)");
  if (f0.kbox() > c.kbox && tail_energy_ratio(f0, c.kbox) > 0.0)
    throw ShapeError("kam_iterate: perturbation has modes past the working box");

  StraighteningResult res;
  res.xi.assign(xi.begin(), xi.end());
  res.initial_smallness = sobolev_norm(f0, c.s1) / c.gamma;
  res.initial_smallness_ok = res.initial_smallness <= c.eta_star;
  if (c.enforce_smallness && !res.initial_smallness_ok)
    throw SmallnessError("gamma^-1 ||f0||_s1 = " + num(res.initial_smallness) + " exceeds eta_star");

  KamState st;
  st.alpha = res.xi;
  st.f = f0.with_kbox(c.kbox);
  st.g = FourierField(N, N, c.kbox);
  TorusDiffeo psi = TorusDiffeo::identity(N, c.kbox);
  std::vector<double> delta_log;
  double delta0 = 0.0;

  for (int n = 0;; ++n) {
    st.n = n;
    st.h = psi.displacement();
    st.K = truncation_schedule(c, n);
    st.K_eff = std::min(st.K, N * c.kbox);
    st.delta_s0 = sobolev_norm(st.f, c.s0) / c.gamma;
    st.delta_s1 = sobolev_norm(st.f, c.s1) / c.gamma;
    delta_log.push_back(st.delta_s0);
    if (n == 0) delta0 = st.delta_s0;

    StepRecord rec{n, st.K, st.K_eff, st.alpha, st.delta_s0, st.delta_s1};
    const bool done = st.delta_s0 < c.convergence_tol;
    if (!done) {
      if (!std::isfinite(st.delta_s0) || st.delta_s0 > c.divergence_guard * delta0)
        throw DivergenceError("delta_n(s0) grew to " + num(st.delta_s0) + " at step " +
                                  std::to_string(n),
                              delta_log);
      if (n >= c.max_steps)
        throw DivergenceError("no convergence within " + std::to_string(c.max_steps) + " steps",
                              delta_log);
      auto hit = first_resonance(st.alpha, c.gamma, c.tau, st.K_eff, c.weight_split);
      st.survived = !hit.has_value();
      if (hit) {
        if (observer) observer(st);
        res.steps.push_back(rec);
        res.status = KamStatus::kExcluded;
        res.resonance = std::move(hit);
        res.excluded_step = n;
        res.alpha_inf = st.alpha;
        res.psi = psi;
        res.iterations = n;
        res.final_delta = st.delta_s0;
        return res;
      }
    }
    if (observer) observer(st);
    if (done) {
      res.steps.push_back(rec);
      res.status = KamStatus::kConverged;
      res.alpha_inf = st.alpha;
      res.psi = std::move(psi);
      res.iterations = n;
      res.final_delta = st.delta_s0;
      return res;
    }

    KamStepResult step;
    try {
      step = kam_step(st.alpha, st.f, c, st.K_eff);
      psi = compose_diffeos(step.phi, psi, c.diffeo);
    } catch (const DiffeoError& e) {
      throw DivergenceError(std::string("change of variables left the admissible range: ") +
                                e.what(),
                            delta_log);
    }
    rec.smallness = step.diag.smallness;
    rec.g_c1 = step.diag.g_c1;
    rec.homological_residual = step.diag.homological_residual;
    res.steps.push_back(rec);
    res.max_K_eff = std::max(res.max_K_eff, st.K_eff);

    st.alpha = std::move(step.alpha_plus);
    st.f = std::move(step.f_plus);
    st.g = step.phi.displacement();
  }
}

bool check_final_set(std::span<const double> alpha_inf, const SchemeConstants& c, int K_check) {
  return diophantine_ok(alpha_inf, 2 * c.gamma, c.tau, K_check, c.weight_split);
}

double conjugacy_residual(std::span<const double> xi, const FourierField& f0,
                          const FourierField& beta, std::span<const double> alpha_inf) {
  const int N = static_cast<int>(xi.size());
  const int K = std::max(f0.kbox(), beta.kbox());
  const VectorFieldOnTorus x{std::vector<double>(xi.begin(), xi.end()), f0.with_kbox(K)};
  const FourierField v = x.combined();
  FourierField r = directional_derivative(beta, v);
  r += v.with_kbox(r.kbox());
  const std::vector<double> target(alpha_inf.begin(), alpha_inf.end());
  r -= FourierField::constant(N, target, r.kbox());
  const auto g = synthesize(r, 4 * r.kbox() + 2);
  double worst = 0.0;
  for (std::size_t p = 0; p < g.point_count(); ++p) {
    double s = 0.0;
    for (int a = 0; a < N; ++a) s += g.at(a, p) * g.at(a, p);
    worst = std::max(worst, std::sqrt(s));
  }
  return worst;
}

}  // namespace kamtorus
