#include "kamtorus/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kamtorus/errors.hpp"
#include "kamtorus/evaluator.hpp"
#include "text.hpp"

namespace kamtorus {

namespace {

class Rk4 {
 public:
  explicit Rk4(const VectorFieldOnTorus& x)
      : alpha_(x.alpha), field_(x.f), n_(x.dim()), k1_(n_), k2_(n_), k3_(n_), k4_(n_), y_(n_) {}

  void step(std::vector<double>& th, double h) {
    rhs(th, k1_);
    shifted(th, k1_, h / 2);
    rhs(y_, k2_);
    shifted(th, k2_, h / 2);
    rhs(y_, k3_);
    shifted(th, k3_, h);
    rhs(y_, k4_);
    for (int a = 0; a < n_; ++a) th[a] += h / 6 * (k1_[a] + 2 * k2_[a] + 2 * k3_[a] + k4_[a]);
  }

 private:
  void rhs(std::span<const double> th, std::vector<double>& out) {
    field_(th, out);
    for (int a = 0; a < n_; ++a) out[a] += alpha_[a];
  }
  void shifted(const std::vector<double>& th, const std::vector<double>& k, double h) {
    for (int a = 0; a < n_; ++a) y_[a] = th[a] + h * k[a];
  }

  std::vector<double> alpha_;
  FieldEvaluator field_;
  int n_;
  std::vector<double> k1_, k2_, k3_, k4_, y_;
};

double wrapped(double d) {
  const double two_pi = 2 * std::numbers::pi;
  d = std::fmod(d, two_pi);
  if (d < 0) d += two_pi;
  return std::min(d, two_pi - d);
}

}  // namespace

FlowTrace flow(const VectorFieldOnTorus& x, std::span<const double> theta0, double T, double dt,
               int sample_every) {
  const int N = x.dim();
  if (static_cast<int>(theta0.size()) != N || x.f.dim() != N || x.f.range() != N)
    throw ShapeError("flow: field and initial point disagree in dimension");
  if (!(dt > 0) || !std::isfinite(T)) throw ConfigError("flow: dt must be positive and T finite");
  sample_every = std::max(sample_every, 1);

  const long n = std::max(1L, std::lround(std::ceil(std::abs(T) / dt - 1e-9)));
  const double h = T / static_cast<double>(n);
  FlowTrace out;
  out.theta0.assign(theta0.begin(), theta0.end());
  out.step = std::abs(h);
  out.times.push_back(0.0);
  out.trajectory = out.theta0;

  Rk4 rk(x);
  std::vector<double> th(out.theta0), a(N), b(N);
  for (long s = 1; s <= n; ++s) {
    const bool record = s % sample_every == 0 || s == n;
    if (record) {
      // step doubling: one step of h against two of h/2
      a = th;
      b = th;
      rk.step(a, h);
      rk.step(b, h / 2);
      rk.step(b, h / 2);
      double e = 0.0;
      for (int i = 0; i < N; ++i) e = std::max(e, std::abs(a[i] - b[i]) * 16.0 / 15.0);
      out.max_local_error = std::max(out.max_local_error, e);
      th = a;
    } else {
      rk.step(th, h);
    }
    for (double v : th)
      if (!std::isfinite(v)) throw ConsistencyError("flow: non-finite value at t = " + detail::num(s * h));
    if (record) {
      out.times.push_back(static_cast<double>(s) * h);
      out.trajectory.insert(out.trajectory.end(), th.begin(), th.end());
    }
  }
  return out;
}

std::vector<double> rotation_vector(const VectorFieldOnTorus& x, std::span<const double> theta0,
                                    double T, double dt) {
  const auto trace = flow(x, theta0, T, dt, std::numeric_limits<int>::max());
  std::vector<double> out(x.dim());
  const auto end = trace.last();
  for (int a = 0; a < x.dim(); ++a) out[a] = (end[a] - theta0[a]) / T;
  return out;
}

double torus_distance(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, wrapped(a[i] - b[i]));
  return worst;
}

double conjugacy_flow_check(const StraighteningResult& result, const VectorFieldOnTorus& x0,
                            std::span<const double> theta0, double T, double dt, int sample_every) {
  if (!result.converged()) throw ConsistencyError("conjugacy_flow_check: result is not converged");
  const int N = x0.dim();
  const auto trace = flow(x0, theta0, T, dt, sample_every);
  const FieldEvaluator beta(result.beta());
  std::vector<double> b(N), start(N), image(N), line(N);
  beta(theta0, b);
  for (int a = 0; a < N; ++a) start[a] = theta0[a] + b[a];

  double worst = 0.0;
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    const auto th = trace.at(i);
    beta(th, b);
    for (int a = 0; a < N; ++a) {
      image[a] = th[a] + b[a];
      line[a] = start[a] + result.alpha_inf[a] * trace.times[i];
    }
    worst = std::max(worst, torus_distance(image, line));
  }
  return worst;
}

TameAudit tame_audit(std::span<const double> xi, const FourierField& f0, const SchemeConstants& c,
                     std::span<const double> eps_list, std::span<const double> s_list) {
  TameAudit out;
  const double shift = 2 * c.tau + 4;
  for (double eps : eps_list) {
    const FourierField f = eps * f0;
    bool ok = false;
    StraighteningResult r;
    try {
      r = kam_iterate(xi, f, c);
      ok = r.converged();
    } catch (const Error&) {
    }
    if (!ok) {
      out.failed_eps.push_back(eps);
      continue;
    }
    for (double s : s_list) {
      TameRow row{eps, s, sobolev_norm(r.beta(), s), sobolev_norm(f, s + shift), 0.0};
      if (row.f0_norm == 0.0) continue;  // 0/0: skipped
      row.ratio = row.beta_norm * c.gamma / row.f0_norm;
      out.rows.push_back(row);
    }
  }
  for (double s : s_list) {
    double lo = INFINITY, hi = 0.0;
    for (const auto& row : out.rows)
      if (row.s == s) {
        lo = std::min(lo, row.ratio);
        hi = std::max(hi, row.ratio);
      }
    if (hi == 0.0) continue;
    out.max_ratio = std::max(out.max_ratio, hi);
    out.stability = std::max(out.stability, lo > 0 ? hi / lo : INFINITY);
  }
  out.stable = out.failed_eps.empty() && out.stability <= 10.0;
  return out;
}

LipschitzReport lipschitz_audit(std::span<const double> xi, const FourierField& f0_a,
                                const FourierField& f0_b, const SchemeConstants& c) {
  LipschitzReport out;
  StraighteningResult ra, rb;
  try {
    ra = kam_iterate(xi, f0_a, c);
    rb = kam_iterate(xi, f0_b, c);
  } catch (const Error& e) {
    out.comparable = false;
    out.note = std::string("not comparable at this xi: ") + e.what();
    return out;
  }
  if (!ra.converged() || !rb.converged()) {
    out.comparable = false;
    out.note = "not comparable at this xi: excluded";
    return out;
  }
  const auto ma = average(f0_a), mb = average(f0_b);
  for (std::size_t a = 0; a < xi.size(); ++a) {
    out.d_alpha = std::max(out.d_alpha, std::abs(ra.alpha_inf[a] - rb.alpha_inf[a]));
    out.d_mean = std::max(out.d_mean, std::abs(ma[a] - mb[a]));
  }
  out.alpha_bound = 2 * out.d_mean + 1e-9;
  out.alpha_ok = out.d_alpha <= out.alpha_bound;

  const int K = std::max(ra.beta().kbox(), rb.beta().kbox());
  out.d_beta = sobolev_norm(ra.beta().with_kbox(K) - rb.beta().with_kbox(K), c.s0 - 1);
  const int Kf = std::max(f0_a.kbox(), f0_b.kbox());
  out.d_f0 = sobolev_norm(f0_a.with_kbox(Kf) - f0_b.with_kbox(Kf), c.s0 + c.b);
  out.constant = out.d_f0 > 0 ? out.d_beta * c.gamma / out.d_f0 : 0.0;
  return out;
}

LipschitzLadder lipschitz_ladder(std::span<const double> xi, const FourierField& f0,
                                 const FourierField& direction, const SchemeConstants& c,
                                 std::span<const double> amplitudes, double threshold) {
  LipschitzLadder out;
  out.amplitudes.assign(amplitudes.begin(), amplitudes.end());
  out.ok = !amplitudes.empty();
  double lo = INFINITY, hi = 0.0;
  const int K = std::max(f0.kbox(), direction.kbox());
  for (double a : amplitudes) {
    FourierField fb = f0.with_kbox(K);
    fb += a * direction.with_kbox(K);
    auto rep = lipschitz_audit(xi, f0, fb, c);
    out.ok = out.ok && rep.comparable && rep.alpha_ok;
    if (rep.comparable) {
      lo = std::min(lo, rep.constant);
      hi = std::max(hi, rep.constant);
    }
    out.reports.push_back(std::move(rep));
  }
  out.stability = (lo > 0 && hi > 0) ? hi / lo : INFINITY;
  out.ok = out.ok && out.stability <= threshold;
  return out;
}

}  // namespace kamtorus
