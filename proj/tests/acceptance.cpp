// Acceptance gates. One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kamtorus/errors.hpp"
#include "kamtorus/evaluator.hpp"
#include "kamtorus/experiment.hpp"
#include "kamtorus/io.hpp"
#include "kamtorus/kam.hpp"
#include "kamtorus/transport.hpp"
#include "kamtorus/verify.hpp"
#include "test_support.hpp"

using namespace kamtorus;
namespace fs = std::filesystem;
using testing::golden_perturbation;
using testing::kGolden;

namespace {

const std::vector<double> kXi{1.0, kGolden};
const fs::path kConfigs = KAMTORUS_CONFIG_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void gate(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += "; over the " + num(budget_s) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", id, name,
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

double sup_on_grid(const FourierField& u) {
  const auto g = synthesize(u, 4 * u.kbox() + 2);
  double m = 0;
  for (double v : g.values) m = std::max(m, std::abs(v));
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_config(const std::string& name, const fs::path& out, int threads) {
  const auto cfg = io::read_json(kConfigs / (name + ".json"));
  cli::RunOptions opt;
  opt.out = out;
  opt.threads = threads;
  std::ostringstream log;
  return cli::run_command(cfg.at("command").get<std::string>(), cfg, opt, log);
}

const fs::path kWork = fs::temp_directory_path() / "kamtorus_acceptance";

// ---------------------------------------------------------------------------

Outcome homological_identity() {
  std::mt19937_64 rng(2024);
  const int K = 16;
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const FourierField f = testing::random_field(rng, 2, 2, K);
    const FourierField g = solve_homological(f, kXi, K, 1e-2, 4);
    FourierField lhs = kXi[0] * differentiate(g, 0) + kXi[1] * differentiate(g, 1);
    lhs += project(f, K);
    lhs -= FourierField::constant(2, average(f), K);
    worst = std::max(worst, sup_on_grid(lhs) / sup_on_grid(f));
  }
  return {worst < 1e-12, "max ||a.dg + P_K f - <f>||_0 / ||f||_0 = " + num(worst) + " (limit 1e-12)"};
}

struct GoldenRun {
  SchemeConstants c = SchemeConstants::defaults(2);
  FourierField f0;
  StraighteningResult r;
};

const GoldenRun& golden(bool even = false) {
  static GoldenRun odd_run, even_run;
  GoldenRun& g = even ? even_run : odd_run;
  if (g.f0.range() == 0) {
    g.f0 = golden_perturbation(g.c.kbox, 1e-3, even);
    g.r = kam_iterate(kXi, g.f0, g.c);
  }
  return g;
}

Outcome quadratic_convergence() {
  const auto& g = golden();
  if (!g.r.converged()) return {false, "golden2d did not converge"};
  bool rate = true;
  std::string seq;
  int reached = -1;
  for (std::size_t n = 0; n < g.r.steps.size(); ++n) {
    const double d = g.r.steps[n].delta_s0;
    seq += (n ? ", " : "") + num(d);
    if (reached < 0 && d < 1e-11) reached = static_cast<int>(n);
    if (n + 1 < g.r.steps.size() && d < 1e-4)
      rate = rate && g.r.steps[n + 1].delta_s0 <= std::pow(d, 1.3);
  }
  const bool ok = reached >= 0 && reached <= 8 && rate;
  return {ok, "delta_n(s0) = " + seq + "; below 1e-11 at step " + std::to_string(reached) +
                  (rate ? "; rate 1.3 holds" : "; rate 1.3 violated")};
}

Outcome frequency_correctness() {
  const auto& g = golden();
  if (!g.r.converged()) return {false, "golden2d did not converge"};
  const auto rot = rotation_vector({kXi, g.f0}, std::vector<double>{0.3, 1.7}, 1e4, 1e-2);
  const double err = std::max(std::abs(rot[0] - g.r.alpha_inf[0]), std::abs(rot[1] - g.r.alpha_inf[1]));
  const double shift = std::hypot(g.r.alpha_inf[0] - kXi[0], g.r.alpha_inf[1] - kXi[1]);
  const double bound = g.c.gamma * sobolev_norm(g.f0, g.c.s1) / g.c.gamma;
  return {err < 1e-6 && shift <= bound,
          "|alpha_inf - rotation| = " + num(err) + " (limit 1e-6); |alpha_inf - xi| = " + num(shift) +
              " <= gamma delta = " + num(bound)};
}

Outcome flow_conjugacy() {
  const auto& g = golden();
  if (!g.r.converged()) return {false, "golden2d did not converge"};
  const double dev = conjugacy_flow_check(g.r, {kXi, g.f0}, std::vector<double>{0.3, 1.7}, 100.0);
  const double res = conjugacy_residual(kXi, g.f0, g.r.beta(), g.r.alpha_inf);
  return {dev < 1e-6 && res < 1e-8,
          "flow deviation " + num(dev) + " (limit 1e-6); pointwise residual " + num(res) + " (limit 1e-8)"};
}

Outcome reversibility() {
  const auto& g = golden(true);
  if (!g.r.converged()) return {false, "even fixture did not converge"};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 2 * std::numbers::pi);
  const FieldEvaluator beta(g.r.beta());
  std::vector<double> a(2), b(2);
  double worst = 0;
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> th{u(rng), u(rng)};
    const std::vector<double> neg{-th[0], -th[1]};
    beta(th, a);
    beta(neg, b);
    worst = std::max({worst, std::abs(a[0] + b[0]), std::abs(a[1] + b[1])});
  }
  return {worst < 1e-10, "sup |beta(theta) + beta(-theta)| = " + num(worst) + " over 2000 points (limit 1e-10)"};
}

Outcome measure_scaling() {
  const fs::path out = kWork / "sweep2d_a";
  if (run_config("sweep2d", out, 1) != 0) return {false, "sweep2d run failed"};
  std::ifstream in(out / "measure.csv");
  std::string line;
  std::getline(in, line);
  std::vector<double> gam, frac;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    gam.push_back(std::stod(cells[0]));
    frac.push_back(std::stod(cells[3]));
  }
  if (gam.size() != 3) return {false, "expected three ladder rows"};
  bool monotone = true;
  for (std::size_t i = 1; i < frac.size(); ++i) monotone = monotone && frac[i] <= frac[i - 1];
  // least squares in log-log, computed here
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    mx += std::log(gam[i]) / 3;
    my += std::log(frac[i]) / 3;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sxy += (std::log(gam[i]) - mx) * (std::log(frac[i]) - my);
    sxx += (std::log(gam[i]) - mx) * (std::log(gam[i]) - mx);
  }
  const double slope = sxy / sxx;
  return {std::abs(slope - 1) <= 0.5 && monotone,
          "41x41 = 1681 lattice samples; fractions " + num(frac[0]) + ", " + num(frac[1]) + ", " +
              num(frac[2]) + "; slope " + num(slope) + (monotone ? "; monotone" : "; not monotone")};
}

Outcome transport_no_growth() {
  TransportOperator op{1, 1, {1.0}, {kGolden}, FourierField(2, 1, 4)};
  op.a0.add_cos(0, MultiIndex{1, 1}, 1e-3);
  const auto red = reduce(op, SchemeConstants::defaults(2));
  if (red.excluded()) return {false, "golden transport excluded"};
  FourierField u0(1, 1, 4);
  u0.add_cos(0, MultiIndex{1}, 1.0);
  u0.add_sin(0, MultiIndex{2}, 0.5);
  u0.add_cos(0, MultiIndex{3}, 0.1);
  std::vector<double> times;
  for (int i = 0; i <= 40; ++i) times.push_back(2.5 * i);
  const std::vector<double> s{2};
  const auto hu = evolve_characteristics(op, u0, times, s);
  const auto hv = evolve_reduced(op, red, u0, times, s);
  double mt = 0, my = 0;
  const double n = static_cast<double>(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    mt += times[i] / n;
    my += hu.norms[i][0] / n;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    sxy += (times[i] - mt) * (hu.norms[i][0] - my);
    sxx += (times[i] - mt) * (times[i] - mt);
  }
  const double slope = sxy / sxx;
  double lo = INFINITY, hi = 0;
  for (const auto& row : hv.norms) {
    lo = std::min(lo, row[0]);
    hi = std::max(hi, row[0]);
  }
  return {std::abs(slope) <= 1e-4 && hi - lo <= 1e-6,
          "slope of ||u(t)||_2 on [0,100] = " + num(slope) + " (limit 1e-4); reduced spread " +
              num(hi - lo) + " (limit 1e-6); m_inf = " + num(red.m_inf[0])};
}

Outcome forced_solve_gate() {
  const fs::path o1 = kWork / "forced1d_gate", o2 = kWork / "forced_golden_gate";
  if (run_config("forced1d", o1, 1) != 0) return {false, "forced1d run failed"};
  if (run_config("forced_golden", o2, 1) != 0) return {false, "forced_golden run failed"};
  const auto a1 = io::read_json(o1 / "audit.json");
  const auto a2 = io::read_json(o2 / "audit.json");
  const double r1 = a1["residual"], r2 = a2["residual"], C = a2["c_constant"];
  double worst_sample = 0;
  for (const auto& s : a2["samples"]) worst_sample = std::max(worst_sample, s["residual"].get<double>());
  const bool ok = r1 < 1e-8 && r2 < 1e-8 && worst_sample < 1e-8 && C < 5;
  return {ok, "residual single-mode " + num(r1) + ", golden " + num(r2) + ", random samples " +
                  num(worst_sample) + " (limit 1e-8); |c| / ||f||_s0 <= " + num(C) + " (limit 5)"};
}

Outcome tame_gate() {
  const auto c = SchemeConstants::defaults(2);
  std::vector<double> s_list;
  for (int i = 0; i <= 6; ++i) s_list.push_back(c.s0 + i);
  const std::vector<double> eps{1e-3, 1e-4, 1e-5};
  const auto a = tame_audit(kXi, golden_perturbation(c.kbox, 1.0, false), c, eps, s_list);
  const bool ok = a.stable && a.rows.size() == eps.size() * s_list.size();
  return {ok, "max/min ratio across eps = " + num(a.stability) + " (limit 10); max ratio " + num(a.max_ratio)};
}

Outcome lipschitz_gate() {
  const auto c = SchemeConstants::defaults(2);
  FourierField dir(2, 2, c.kbox);
  dir.add_cos(0, MultiIndex{0, 1}, 1.0);
  const std::vector<double> amps{1e-6, 1e-7, 1e-8};
  const auto l = lipschitz_ladder(kXi, golden_perturbation(c.kbox, 1e-3, false), dir, c, amps, 2.0);
  std::string cs, da;
  for (const auto& r : l.reports) {
    cs += (cs.empty() ? "" : ", ") + num(r.constant);
    da += (da.empty() ? "" : ", ") + num(r.d_alpha);
  }
  return {l.ok, "C = " + cs + " (max/min " + num(l.stability) + ", limit 2); |d alpha| = " + da +
                    " (limit 2|d<f0>| + 1e-9)"};
}

Outcome determinism() {
  const std::vector<std::string> names{"golden2d",      "golden2d_even", "zero2d",    "sweep_zero",
                                       "sweep2d",       "transport1d",   "transport_free",
                                       "forced1d",      "forced_golden", "verify2d"};
  std::string bad;
  std::size_t files = 0;
  for (const auto& name : names) {
    const fs::path a = kWork / (name + "_a"), b = kWork / (name + "_b");
    // sweep2d_a is left by criterion 6
    if (!(name == "sweep2d" && fs::exists(a / "measure.csv"))) {
      fs::remove_all(a);
      run_config(name, a, 1);
    }
    fs::remove_all(b);
    run_config(name, b, 2);
    for (const auto& entry : fs::directory_iterator(a)) {
      ++files;
      const auto other = b / entry.path().filename();
      if (!fs::exists(other) || slurp(entry.path()) != slurp(other))
        bad += " " + name + "/" + entry.path().filename().string();
    }
    for (const auto& entry : fs::directory_iterator(b))
      if (!fs::exists(a / entry.path().filename())) bad += " " + name + "/" + entry.path().filename().string();
  }
  return {bad.empty() && files > 0, std::to_string(names.size()) + " fixtures, " + std::to_string(files) +
                                        " files compared (1 vs 2 threads)" +
                                        (bad.empty() ? "" : "; differing:" + bad)};
}

}  // namespace

int main() {
  fs::create_directories(kWork);
  gate(1, "homological identity", 5, homological_identity);
  gate(2, "quadratic convergence", 30, quadratic_convergence);
  gate(3, "frequency correctness", 60, frequency_correctness);
  gate(4, "conjugacy at flow level", 0, flow_conjugacy);
  gate(5, "reversibility", 0, reversibility);
  gate(6, "measure scaling", 600, measure_scaling);
  gate(7, "transport no-growth", 120, transport_no_growth);
  gate(8, "forced solve", 0, forced_solve_gate);
  gate(9, "tame-estimate audit", 0, tame_gate);
  gate(10, "Lipschitz audit", 0, lipschitz_gate);
  gate(11, "determinism", 0, determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
