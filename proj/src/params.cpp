#include "kamtorus/params.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include "kamtorus/errors.hpp"

namespace kamtorus {
namespace {

double frac(double x) { return x - std::floor(x); }

// Root of x^(d+1) = x + 1; d = 1 is the golden ratio.
double generalized_golden(int d) {
  double x = 2.0;
  for (int i = 0; i < 60; ++i) x = std::pow(1.0 + x, 1.0 / (d + 1));
  return x;
}

double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

double norm2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

PointResult run_point(std::span<const double> xi, const PerturbationBuilder& f0,
                      const SchemeConstants& c, int K_check) {
  PointResult out;
  out.xi.assign(xi.begin(), xi.end());
  try {
    const auto r = kam_iterate(xi, f0(xi), c);
    out.iterations = r.iterations;
    if (r.converged()) {
      out.outcome = Outcome::kConverged;
      out.alpha_inf = r.alpha_inf;
      out.K_check = K_check > 0 ? K_check : 4 * std::max(r.max_K_eff, c.K0);
      out.in_final_set = check_final_set(r.alpha_inf, c, out.K_check);
    } else {
      out.outcome = Outcome::kExcluded;
      out.excluded_step = r.excluded_step;
    }
  } catch (const DivergenceError&) {
    out.outcome = Outcome::kDiverged;
  } catch (const ConvergenceError&) {
    out.outcome = Outcome::kDiverged;
  } catch (const AliasingError&) {
    out.outcome = Outcome::kDiverged;
  }
  return out;
}

}  // namespace

double Box::volume() const noexcept {
  double v = 1.0;
  for (const auto& [lo, hi] : axes) v *= hi - lo;
  return v;
}

bool Box::contains(std::span<const double> x) const noexcept {
  for (std::size_t a = 0; a < axes.size(); ++a)
    if (x[a] < axes[a].first || x[a] > axes[a].second) return false;
  return true;
}

SamplingKind parse_sampling(const std::string& name) {
  if (name == "uniform") return SamplingKind::kUniform;
  if (name == "lattice") return SamplingKind::kLattice;
  if (name == "halton") return SamplingKind::kHalton;
  if (name == "random") return SamplingKind::kRandom;
  throw ConfigError("unknown sampling kind '" + name + "'");
}

std::string to_string(SamplingKind kind) {
  switch (kind) {
    case SamplingKind::kUniform: return "uniform";
    case SamplingKind::kLattice: return "lattice";
    case SamplingKind::kHalton: return "halton";
    case SamplingKind::kRandom: return "random";
  }
  return "unknown";
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::kConverged: return "converged";
    case Outcome::kExcluded: return "excluded";
    case Outcome::kDiverged: return "diverged";
  }
  return "unknown";
}

std::vector<std::vector<double>> sample_box(const Box& box, SamplingKind kind, std::size_t count,
                                            std::uint64_t seed) {
  const int dim = box.dim();
  if (dim == 0 || count == 0) throw ShapeError("sample_box: empty box or zero count");
  std::vector<std::vector<double>> unit(count, std::vector<double>(dim));

  switch (kind) {
    case SamplingKind::kUniform: {
      const auto side = static_cast<std::size_t>(std::llround(std::pow(count, 1.0 / dim)));
      std::size_t total = 1;
      for (int a = 0; a < dim; ++a) total *= side;
      if (total != count)
        throw ConfigError("uniform sampling needs a perfect power count, got " + std::to_string(count));
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t rest = i;
        for (int a = dim - 1; a >= 0; --a) {
          unit[i][a] = (static_cast<double>(rest % side) + 0.5) / side;
          rest /= side;
        }
      }
      break;
    }
    case SamplingKind::kLattice: {
      // First axis stratified, the others follow the R_{N-1} Kronecker sequence.
      const double g = generalized_golden(std::max(dim - 1, 1));
      for (std::size_t i = 0; i < count; ++i) {
        unit[i][0] = (static_cast<double>(i) + 0.5) / count;
        for (int a = 1; a < dim; ++a) unit[i][a] = frac(0.5 + i * std::pow(g, -a));
      }
      break;
    }
    case SamplingKind::kHalton: {
      if (dim > static_cast<int>(std::size(kPrimes))) throw ShapeError("halton: dimension too large");
      for (std::size_t i = 0; i < count; ++i)
        for (int a = 0; a < dim; ++a) unit[i][a] = radical_inverse(i + 1, kPrimes[a]);
      break;
    }
    case SamplingKind::kRandom: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (auto& p : unit)
        for (double& v : p) v = u(rng);
      break;
    }
  }

  for (auto& p : unit)
    for (int a = 0; a < dim; ++a) p[a] = box.axes[a].first + p[a] * (box.axes[a].second - box.axes[a].first);
  return unit;
}

ParamGrid ParamGrid::make(const Box& box, SamplingKind kind, std::size_t count, std::uint64_t seed) {
  ParamGrid g;
  g.box = box;
  g.kind = kind;
  g.samples = sample_box(box, kind, count, seed);
  return g;
}

void sweep(ParamGrid& grid, const PerturbationBuilder& f0, const SchemeConstants& c,
           const SweepOptions& options) {
  const std::size_t n = grid.samples.size();
  grid.gamma = c.gamma;
  grid.results.assign(n, PointResult{});
  const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n)));

  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) grid.results[i] = run_point(grid.samples[i], f0, c, options.K_check);
    return;
  }
  // Each worker claims indices from a shared counter and writes only its own
  // slots, so the output order never depends on scheduling.
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < n; i = next++)
          grid.results[i] = run_point(grid.samples[i], f0, c, options.K_check);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

MeasureEstimate measure_excluded(const ParamGrid& grid) {
  if (grid.results.empty()) throw ShapeError("measure_excluded: grid has no sweep results");
  MeasureEstimate m;
  m.samples = grid.results.size();
  for (const auto& r : grid.results)
    if (!r.in_final_set) ++m.excluded;
  const double n = static_cast<double>(m.samples);
  const double vol = grid.box.volume();
  m.fraction = m.excluded / n;
  m.measure = m.fraction * vol;
  m.half_width = 1.96 * std::sqrt(m.fraction * (1 - m.fraction) / n) * vol;
  return m;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

GammaLadder gamma_ladder(const ParamGrid& grid, const PerturbationBuilder& f0,
                         const SchemeConstants& c, std::span<const double> gammas,
                         const SweepOptions& options) {
  GammaLadder out;
  std::vector<double> xs;
  std::vector<double> ys;
  for (double gamma : gammas) {
    ParamGrid g = grid;
    auto cg = c;
    cg.gamma = gamma;
    sweep(g, f0, cg, options);
    out.rows.push_back({gamma, measure_excluded(g)});
    xs.push_back(gamma);
    ys.push_back(out.rows.back().estimate.fraction);
  }
  // Sort by gamma descending to check monotonicity.
  std::vector<std::size_t> order(out.rows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out.rows[a].gamma > out.rows[b].gamma; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (out.rows[order[i]].estimate.fraction > out.rows[order[i - 1]].estimate.fraction)
      out.monotone = false;
  bool positive = true;
  for (double y : ys) positive = positive && y > 0;
  out.slope = positive ? loglog_slope(xs, ys) : std::numeric_limits<double>::quiet_NaN();
  return out;
}

FrequencyMapCheck check_frequency_map(const FrequencyMap& m,
                                      const std::vector<std::vector<double>>& omegas) {
  FrequencyMapCheck out;
  out.inf_norm = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> values;
  values.reserve(omegas.size());
  for (const auto& w : omegas) {
    values.push_back(m.m0(w));
    double s = 0.0;
    for (double v : values.back()) s += v * v;
    s = std::sqrt(s);
    out.inf_norm = std::min(out.inf_norm, s);
    out.sup_norm = std::max(out.sup_norm, s);
  }
  for (std::size_t i = 0; i < omegas.size(); ++i)
    for (std::size_t j = i + 1; j < omegas.size(); ++j) {
      const double d = norm2(omegas[i], omegas[j]);
      if (d > 0) out.lip = std::max(out.lip, norm2(values[i], values[j]) / d);
    }
  out.ok = out.inf_norm >= m.c_lower && out.lip <= m.C_upper * out.sup_norm;
  return out;
}

ParamGrid restrict_to_curve(const ParamGrid& omega_grid, const FrequencyMap& m) {
  ParamGrid g;
  g.box = omega_grid.box;
  g.kind = omega_grid.kind;
  g.warnings = omega_grid.warnings;
  const auto check = check_frequency_map(m, omega_grid.samples);
  if (!check.ok)
    g.warnings.push_back("frequency map violates inf|m0| >= c or |m0|^lip <= C|m0|^sup; "
                         "the measure estimate is not guaranteed");
  for (const auto& w : omega_grid.samples) {
    std::vector<double> xi = w;
    for (double v : m.m0(w)) xi.push_back(v);
    g.samples.push_back(std::move(xi));
  }
  return g;
}

double resonant_width(const ParamGrid& grid, std::span<const int> k, double gamma, double tau,
                      int split) {
  if (grid.results.empty()) throw ShapeError("resonant_width: grid has no sweep results");
  const double threshold = 2 * gamma / std::pow(diophantine_weight(k, split), tau);
  std::size_t hits = 0;
  for (const auto& r : grid.results) {
    if (r.outcome != Outcome::kConverged) continue;
    double dot = 0.0;
    for (std::size_t a = 0; a < k.size(); ++a) dot += r.alpha_inf[a] * k[a];
    if (std::abs(dot) <= threshold) ++hits;
  }
  return grid.box.volume() * static_cast<double>(hits) / static_cast<double>(grid.results.size());
}

double alpha_lipschitz(const ParamGrid& grid) {
  std::vector<const PointResult*> conv;
  for (const auto& r : grid.results)
    if (r.outcome == Outcome::kConverged) conv.push_back(&r);
  double lip = 0.0;
  for (std::size_t i = 0; i < conv.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = i;
    for (std::size_t j = 0; j < conv.size(); ++j) {
      if (j == i) continue;
      const double d = norm2(conv[i]->xi, conv[j]->xi);
      if (d > 0 && d < best) {
        best = d;
        arg = j;
      }
    }
    if (arg != i) lip = std::max(lip, norm2(conv[i]->alpha_inf, conv[arg]->alpha_inf) / best);
  }
  return lip;
}

}  // namespace kamtorus
