#include "kamtorus/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <ostream>
#include <random>

#include "kamtorus/errors.hpp"
#include "kamtorus/params.hpp"
#include "kamtorus/transport.hpp"
#include "kamtorus/verify.hpp"

namespace kamtorus::cli {

namespace {

using io::format_double;
using io::Json;
namespace fs = std::filesystem;

const Json kNull = nullptr;

const Json& section(const Json& cfg, const char* key) {
  return cfg.contains(key) ? cfg.at(key) : kNull;
}

template <class T>
T value_or(const Json& j, const char* key, T fallback) {
  if (j.is_null() || !j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad '") + key + "': " + e.what());
  }
}

template <class T>
T required(const Json& j, const char* key) {
  if (j.is_null() || !j.contains(key)) throw ConfigError(std::string("config: missing '") + key + "'");
  return value_or<T>(j, key, T{});
}

std::uint64_t seed_of(const Json& cfg, const RunOptions& opt) {
  return opt.seed ? *opt.seed : value_or<std::uint64_t>(cfg, "seed", 0);
}

// Perturbation spec: {"modes": [...]}, {"field": {...}}, {"golden": {"eps", "even"}} or null.
FourierField perturbation(const Json& j, int dim, int range, int kbox) {
  if (j.is_null()) return FourierField(dim, range, kbox);
  if (j.contains("golden")) {
    if (dim != 2 || range != 2) throw ConfigError("config: the golden perturbation lives on T^2");
    const auto& g = j["golden"];
    const double eps = value_or<double>(g, "eps", 1e-3);
    FourierField f(2, 2, kbox);
    if (value_or<bool>(g, "even", false))
      f.add_cos(0, MultiIndex{1, 1}, eps);
    else
      f.add_sin(0, MultiIndex{1, 1}, eps);
    f.add_cos(1, MultiIndex{1, 0}, eps);
    return f;
  }
  if (j.contains("field")) {
    FourierField f = io::field_from_json(j["field"]);
    if (f.dim() != dim || f.range() != range) throw ConfigError("config: field has the wrong shape");
    if (f.kbox() > kbox && tail_energy_ratio(f, kbox) > 0)
      throw ConfigError("config: field content exceeds the working box");
    return f.with_kbox(kbox);
  }
  if (j.contains("modes")) return io::field_from_modes(j["modes"], dim, range, kbox);
  throw ConfigError("config: perturbation needs 'modes', 'field' or 'golden'");
}

SchemeConstants scheme(const Json& cfg, int N) {
  SchemeConstants c = io::constants_from_json(section(cfg, "scheme"), N);
  c.validate();
  return c;
}

std::vector<double> doubles(const Json& j, const char* key) {
  return required<std::vector<double>>(j, key);
}

std::string join(const std::vector<std::string>& parts) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? " " : "") + parts[i];
  return s;
}

std::string vec_text(std::span<const double> v) {
  std::vector<std::string> parts;
  for (double x : v) parts.push_back(format_double(x));
  return "(" + join(parts) + ")";
}

std::string steps_csv(const StraighteningResult& r, int N) {
  std::vector<std::string> head{"n", "K", "K_eff"};
  for (int a = 0; a < N; ++a) head.push_back("alpha_" + std::to_string(a));
  for (const char* h : {"delta_s0", "delta_s1", "smallness", "g_c1", "homological_residual"})
    head.push_back(h);
  io::CsvWriter csv(head);
  for (const auto& s : r.steps) {
    std::vector<std::string> row{std::to_string(s.n), std::to_string(s.K), std::to_string(s.K_eff)};
    for (double a : s.alpha) row.push_back(format_double(a));
    for (double v : {s.delta_s0, s.delta_s1, s.smallness, s.g_c1, s.homological_residual})
      row.push_back(format_double(v));
    csv.row(row);
  }
  return csv.str();
}

Json result_json(const StraighteningResult& r) {
  Json j;
  j["status"] = r.converged() ? "converged" : "excluded";
  j["xi"] = r.xi;
  j["alpha_inf"] = r.alpha_inf;
  j["iterations"] = r.iterations;
  j["final_delta"] = r.final_delta;
  j["max_K_eff"] = r.max_K_eff;
  j["initial_smallness"] = r.initial_smallness;
  j["initial_smallness_ok"] = r.initial_smallness_ok;
  j["excluded_step"] = r.excluded_step;
  j["resonance"] = r.resonance ? Json{{"k", r.resonance->k},
                                      {"divisor", r.resonance->divisor},
                                      {"threshold", r.resonance->threshold}}
                               : Json(nullptr);
  j["steps"] = Json::array();
  for (const auto& s : r.steps) j["steps"].push_back(io::to_json(s));
  return j;
}

Json diverged_json(const char* command, const DivergenceError& e) {
  return Json{{"command", command}, {"status", "diverged"}, {"message", e.what()},
              {"delta_log", e.delta_log()}};
}

// ---- straighten -------------------------------------------------------------

struct Problem {
  std::vector<double> xi;
  FourierField f0;
  SchemeConstants c;
};

Problem straighten_problem(const Json& cfg, double scale = 1.0) {
  const auto& p = section(cfg, "problem");
  Problem out;
  out.xi = doubles(p, "xi");
  const int N = static_cast<int>(out.xi.size());
  if (N < 1) throw ConfigError("config: xi must be non-empty");
  out.c = scheme(cfg, N);
  out.f0 = scale * perturbation(section(p, "perturbation"), N, N, out.c.kbox);
  return out;
}

}  // namespace

fs::path output_dir(const Json& config, const RunOptions& options) {
  if (options.out) return *options.out;
  if (const char* env = std::getenv("KAMTORUS_OUT"); env && *env) return env;
  return value_or<std::string>(config, "output", "out");
}

int cmd_straighten(const Json& cfg, const RunOptions& opt, std::ostream& log) {
  const fs::path out = output_dir(cfg, opt);
  const Problem pb = straighten_problem(cfg);
  const int N = static_cast<int>(pb.xi.size());

  StraighteningResult r;
  try {
    r = kam_iterate(pb.xi, pb.f0, pb.c);
  } catch (const DivergenceError& e) {
    io::write_json(out / "run.json", diverged_json("straighten", e));
    log << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  }

  Json run{{"command", "straighten"}, {"scheme", io::to_json(pb.c)}};
  run.update(result_json(r));
  run["psi"] = io::to_json(r.psi);
  io::write_json(out / "run.json", run);
  io::write_text(out / "steps.csv", steps_csv(r, N));

  if (!r.converged()) {
    log << "excluded at step " << r.excluded_step << "\n";
    return kExitExcluded;
  }

  const auto& oracle = section(cfg, "oracle");
  const auto theta0 = value_or<std::vector<double>>(oracle, "theta0", std::vector<double>(N, 0.3));
  const double rot_T = value_or<double>(oracle, "rotation_T", 1e4);
  const double dt = value_or<double>(oracle, "dt", 1e-2);
  const double flow_T = value_or<double>(oracle, "flow_T", 100.0);
  if (static_cast<int>(theta0.size()) != N) throw ConfigError("config: theta0 has the wrong length");

  const VectorFieldOnTorus x0{pb.xi, pb.f0};
  const auto rot = rotation_vector(x0, theta0, rot_T, dt);
  double rot_err = 0.0, shift = 0.0;
  for (int a = 0; a < N; ++a) {
    rot_err = std::max(rot_err, std::abs(rot[a] - r.alpha_inf[a]));
    shift += (r.alpha_inf[a] - pb.xi[a]) * (r.alpha_inf[a] - pb.xi[a]);
  }
  shift = std::sqrt(shift);
  const double delta0 = sobolev_norm(pb.f0, pb.c.s1) / pb.c.gamma;
  const double residual = conjugacy_residual(pb.xi, pb.f0, r.beta(), r.alpha_inf);
  const double flow_dev = conjugacy_flow_check(r, x0, theta0, flow_T, dt);
  const int K_check = 4 * std::max(r.max_K_eff, pb.c.K0);
  const bool even = parity_defect_even(pb.f0) == 0.0;

  Json audit{{"command", "straighten"},
             {"rotation", {{"theta0", theta0}, {"T", rot_T}, {"dt", dt}, {"vector", rot},
                           {"max_error", rot_err}, {"ok", rot_err < 1e-6}}},
             {"frequency_shift", {{"shift", shift}, {"bound", pb.c.gamma * delta0},
                                  {"ok", shift <= pb.c.gamma * delta0}}},
             {"conjugacy_residual", {{"value", residual}, {"ok", residual < 1e-8}}},
             {"flow_check", {{"form", "Psi(theta(t)) vs Psi(theta0) + alpha_inf t"},
                             {"T", flow_T}, {"deviation", flow_dev}, {"ok", flow_dev < 1e-6}}},
             {"final_set", {{"K_check", K_check},
                            {"ok", check_final_set(r.alpha_inf, pb.c, K_check)}}},
             {"reversibility", {{"f0_even", even},
                                {"beta_odd_defect", even ? Json(parity_defect_odd(r.beta()))
                                                         : Json(nullptr)}}}};
  io::write_json(out / "audit.json", audit);
  log << "converged in " << r.iterations << " steps, alpha_inf = " << vec_text(r.alpha_inf) << "\n";
  return kExitOk;
}

// ---- sweep ------------------------------------------------------------------

namespace {

Box parse_box(const Json& j) {
  Box b;
  for (const auto& axis : j) {
    const auto v = axis.get<std::vector<double>>();
    if (v.size() != 2 || !(v[0] < v[1])) throw ConfigError("config: box axes must be [lo, hi]");
    b.axes.emplace_back(v[0], v[1]);
  }
  if (b.axes.empty()) throw ConfigError("config: empty box");
  return b;
}

}  // namespace

int cmd_sweep(const Json& cfg, const RunOptions& opt, std::ostream& log) {
  const fs::path out = output_dir(cfg, opt);
  const auto& g = section(cfg, "grid");
  const Box box = parse_box(required<Json>(g, "box"));
  const auto kind = parse_sampling(value_or<std::string>(g, "sampling", "lattice"));
  const auto count = required<std::size_t>(g, "count");
  const std::uint64_t seed = seed_of(cfg, opt);

  ParamGrid grid = ParamGrid::make(box, kind, count, seed);
  int N = box.dim();
  const auto& curve = section(g, "curve");
  if (!curve.is_null()) {
    const auto offset = doubles(curve, "offset");
    const auto slope = value_or<std::vector<double>>(curve, "slope", std::vector<double>(offset.size(), 0.0));
    if (slope.size() != offset.size()) throw ConfigError("config: curve offset and slope differ in length");
    FrequencyMap m{[=](std::span<const double> w) {
                     std::vector<double> v(offset);
                     for (std::size_t j = 0; j < v.size(); ++j) v[j] += slope[j] * w[0];
                     return v;
                   },
                   value_or<double>(curve, "c_lower", 0.0), value_or<double>(curve, "C_upper", 1.0)};
    grid = restrict_to_curve(grid, m);
    N += static_cast<int>(offset.size());
  }

  SchemeConstants c = scheme(cfg, N);
  const auto& p = section(cfg, "problem");
  const FourierField f0 = perturbation(section(p, "perturbation"), N, N, c.kbox);
  const PerturbationBuilder build = [&](std::span<const double>) { return f0; };
  const auto gammas = value_or<std::vector<double>>(g, "gammas", std::vector<double>{c.gamma});
  const SweepOptions so{opt.threads, value_or<int>(g, "K_check", 0)};
  const GammaLadder ladder = gamma_ladder(grid, build, c, gammas, so);

  io::CsvWriter csv({"gamma", "samples", "excluded", "fraction", "measure", "half_width"});
  Json rows = Json::array();
  for (const auto& row : ladder.rows) {
    const auto& e = row.estimate;
    csv.row({format_double(row.gamma), std::to_string(e.samples), std::to_string(e.excluded),
             format_double(e.fraction), format_double(e.measure), format_double(e.half_width)});
    rows.push_back(Json{{"gamma", row.gamma}, {"excluded", e.excluded}, {"fraction", e.fraction}});
  }
  io::write_text(out / "measure.csv", csv.str());

  Json boxj = Json::array();
  for (const auto& [lo, hi] : box.axes) boxj.push_back({lo, hi});
  Json run{{"command", "sweep"},
           {"scheme", io::to_json(c)},
           {"box", boxj},
           {"sampling", to_string(kind)},
           {"count", count},
           {"seed", seed},
           {"curve", !curve.is_null()},
           {"warnings", grid.warnings},
           {"ladder", rows},
           {"slope", ladder.slope},
           {"monotone", ladder.monotone}};
  io::write_json(out / "run.json", run);
  log << "slope " << format_double(ladder.slope) << (ladder.monotone ? ", monotone" : ", not monotone")
      << "\n";
  return kExitOk;
}

// ---- transport and forced ---------------------------------------------------

namespace {

struct TransportSetup {
  TransportOperator op;
  SchemeConstants c;
};

TransportSetup transport_setup(const Json& cfg) {
  const auto& t = section(cfg, "transport");
  TransportSetup s;
  s.op.omega = doubles(t, "omega");
  s.op.zeta = doubles(t, "zeta");
  s.op.nu = static_cast<int>(s.op.omega.size());
  s.op.d = static_cast<int>(s.op.zeta.size());
  if (s.op.nu < 1 || s.op.d < 1) throw ConfigError("config: omega and zeta must be non-empty");
  s.c = scheme(cfg, s.op.N());
  s.op.a0 = perturbation(section(t, "a0"), s.op.N(), s.op.d, s.c.kbox);
  return s;
}

Json reduction_json(const ReducedTransport& red) {
  Json j = result_json(red.kam);
  j["m_inf"] = red.m_inf;
  j["structural_defect"] = red.structural_defect;
  j["reduction_residual"] = red.reduction_residual;
  j["beta"] = red.excluded() ? Json(nullptr) : io::to_json(red.beta);
  return j;
}

std::vector<double> time_grid(const Json& j) {
  if (j.is_array()) return j.get<std::vector<double>>();
  const double start = value_or<double>(j, "start", 0.0);
  const double stop = value_or<double>(j, "stop", 100.0);
  const int count = value_or<int>(j, "count", 41);
  if (count < 1) throw ConfigError("config: times.count must be positive");
  std::vector<double> t;
  for (int i = 0; i < count; ++i) t.push_back(count == 1 ? start : start + (stop - start) * i / (count - 1));
  return t;
}

}  // namespace

int cmd_transport(const Json& cfg, const RunOptions& opt, std::ostream& log) {
  const fs::path out = output_dir(cfg, opt);
  const auto setup = transport_setup(cfg);
  const auto& op = setup.op;
  const auto& t = section(cfg, "transport");
  const FourierField u0 = io::field_from_modes(required<Json>(t, "u0"), op.d, 1,
                                               value_or<int>(t, "u0_kbox", 8));
  const auto times = time_grid(section(t, "times"));
  const auto s_list = value_or<std::vector<double>>(t, "s_list", {0.0, 1.0, 2.0});
  CharacteristicsSettings cs;
  cs.resolution = value_or<int>(t, "resolution", 64);
  cs.threads = opt.threads;

  ReducedTransport red;
  try {
    red = reduce(op, setup.c);
  } catch (const DivergenceError& e) {
    io::write_json(out / "run.json", diverged_json("transport", e));
    log << "diverged: " << e.what() << "\n";
    return kExitDiverged;
  }

  Json run{{"command", "transport"}, {"scheme", io::to_json(setup.c)},
           {"omega", op.omega}, {"zeta", op.zeta}};
  run["reduction"] = reduction_json(red);
  io::write_json(out / "run.json", run);
  io::write_text(out / "steps.csv", steps_csv(red.kam, op.N()));

  const NormHistory hu = evolve_characteristics(op, u0, times, s_list, cs);
  std::optional<NormHistory> hv;
  if (!red.excluded()) hv = evolve_reduced(op, red, u0, times, s_list, cs, setup.c.diffeo);

  io::CsvWriter csv({"t", "s", "norm", "variable"});
  const NormHistory* histories[] = {&hu, hv ? &*hv : nullptr};
  for (const NormHistory* h : histories) {
    if (!h) continue;
    for (std::size_t i = 0; i < h->times.size(); ++i)
      for (std::size_t k = 0; k < s_list.size(); ++k)
        csv.row({format_double(h->times[i]), format_double(s_list[k]), format_double(h->norms[i][k]),
                 std::string(h == &hu ? "u" : "v")});
  }
  io::write_text(out / "norms.csv", csv.str());

  Json per_s = Json::array();
  bool growth_ok = true, reduced_ok = hv.has_value();
  for (std::size_t k = 0; k < s_list.size(); ++k) {
    const double slope = hu.slope(k);
    growth_ok = growth_ok && std::abs(slope) <= 1e-4;
    Json row{{"s", s_list[k]}, {"slope", slope}, {"spread", hu.spread(k)},
             {"initial", hu.norms[0][k]}};
    if (hv) {
      row["reduced_spread"] = hv->spread(k);
      reduced_ok = reduced_ok && hv->spread(k) <= 1e-6;
    }
    per_s.push_back(row);
  }
  Json audit{{"command", "transport"},
             {"norms", per_s},
             {"no_growth_ok", growth_ok},
             {"reduced_constant_ok", reduced_ok},
             {"reduction_residual_ok", !red.excluded() && red.reduction_residual < 1e-8}};
  io::write_json(out / "audit.json", audit);

  if (red.excluded()) {
    log << "drift excluded at step " << red.kam.excluded_step << "\n";
    return kExitExcluded;
  }
  log << "m_inf = " << vec_text(red.m_inf) << ", residual " << format_double(red.reduction_residual)
      << "\n";
  return kExitOk;
}

int cmd_forced(const Json& cfg, const RunOptions& opt, std::ostream& log) {
  const fs::path out = output_dir(cfg, opt);
  const auto setup = transport_setup(cfg);
  const auto& op = setup.op;
  const auto& c = setup.c;
  const auto& fj = section(cfg, "forced");
  const FourierField f = io::field_from_modes(required<Json>(fj, "f"), op.N(), 1,
                                              value_or<int>(fj, "f_kbox", 4));

  ReducedTransport red;
  try {
    red = reduce(op, c);
  } catch (const DivergenceError& e) {
    io::write_json(out / "run.json", diverged_json("forced", e));
    return kExitDiverged;
  }
  Json run{{"command", "forced"}, {"scheme", io::to_json(c)}, {"omega", op.omega}, {"zeta", op.zeta}};
  run["reduction"] = reduction_json(red);
  if (red.excluded()) {
    run["status"] = "excluded";
    io::write_json(out / "run.json", run);
    log << "drift excluded\n";
    return kExitExcluded;
  }

  ForcedSolution sol;
  try {
    sol = forced_solve(op, f, red, c);
  } catch (const SmallDivisorError& e) {
    run["status"] = "refused";
    run["mode"] = e.mode();
    run["divisor"] = e.divisor();
    io::write_json(out / "run.json", run);
    log << e.what() << "\n";
    return kExitExcluded;
  }
  run["status"] = "solved";
  run["c"] = sol.c;
  run["residual"] = sol.residual;
  run["b"] = io::to_json(sol.b);
  io::write_json(out / "run.json", run);

  // Estimate audit on seeded random right-hand sides.
  const auto& aj = section(fj, "audit");
  const int samples = value_or<int>(aj, "samples", 5);
  const int akbox = value_or<int>(aj, "kbox", 3);
  const double sigma = 2 * c.tau + 4;
  const auto s_list = value_or<std::vector<double>>(aj, "s_list", {c.s0, c.s0 + 2});
  std::mt19937_64 rng(seed_of(cfg, opt));
  std::normal_distribution<double> normal;

  const double c_ratio_fixture = std::abs(sol.c) / sobolev_norm(f, c.s0);
  double c_ratio_max = c_ratio_fixture;
  std::vector<double> lo(s_list.size(), INFINITY), hi(s_list.size(), 0.0);
  Json rows = Json::array();
  for (int n = 0; n < samples; ++n) {
    FourierField g(op.N(), 1, akbox);
    for (std::size_t idx = g.zero_index(); idx < g.mode_count(); ++idx) {
      const MultiIndex k = g.mode_at(idx);
      const double scale = std::exp(-0.5 * l1_norm(k));
      g.set_mode(0, k, scale * Complex(normal(rng), normal(rng)));
    }
    const auto s = forced_solve(op, g, red, c);
    const double cr = std::abs(s.c) / sobolev_norm(g, c.s0);
    c_ratio_max = std::max(c_ratio_max, cr);
    Json row{{"sample", n}, {"c", s.c}, {"c_ratio", cr}, {"residual", s.residual}};
    Json ratios = Json::array();
    for (std::size_t k = 0; k < s_list.size(); ++k) {
      const double sv = s_list[k];
      const double rhs = sobolev_norm(g, sv + sigma) +
                         sobolev_norm(op.a0, sv + sigma) * sobolev_norm(g, c.s0 + sigma);
      const double ratio = sobolev_norm(s.b, sv) * c.gamma / rhs;
      lo[k] = std::min(lo[k], ratio);
      hi[k] = std::max(hi[k], ratio);
      ratios.push_back(ratio);
    }
    row["b_ratios"] = ratios;
    rows.push_back(row);
  }
  Json b_summary = Json::array();
  for (std::size_t k = 0; k < s_list.size(); ++k)
    b_summary.push_back(Json{{"s", s_list[k]}, {"max_ratio", samples ? hi[k] : 0.0},
                             {"min_ratio", samples ? lo[k] : 0.0}});
  Json audit{{"command", "forced"},
             {"residual", sol.residual},
             {"residual_ok", sol.residual < 1e-8},
             {"sigma", sigma},
             {"c_over_f_s0", c_ratio_fixture},
             {"c_constant", c_ratio_max},
             {"c_ok", c_ratio_max < 5},
             {"b_estimate", b_summary},
             {"samples", rows}};
  io::write_json(out / "audit.json", audit);
  log << "c = " << format_double(sol.c) << ", residual " << format_double(sol.residual) << "\n";
  return kExitOk;
}

// ---- verify -----------------------------------------------------------------

int cmd_verify(const Json& cfg, const RunOptions& opt, std::ostream& log) {
  const fs::path out = output_dir(cfg, opt);
  const Problem shape = straighten_problem(cfg);
  const int N = static_cast<int>(shape.xi.size());
  const auto& c = shape.c;
  const auto& v = section(cfg, "verify");

  std::vector<double> s_default;
  for (int i = 0; i <= 6; ++i) s_default.push_back(c.s0 + i);
  const auto eps = value_or<std::vector<double>>(v, "eps", {1e-3, 1e-4, 1e-5});
  const auto s_list = value_or<std::vector<double>>(v, "s_list", s_default);
  const TameAudit tame = tame_audit(shape.xi, shape.f0, c, eps, s_list);

  Json tame_rows = Json::array();
  for (const auto& r : tame.rows)
    tame_rows.push_back(Json{{"eps", r.eps}, {"s", r.s}, {"beta_norm", r.beta_norm},
                             {"f0_norm", r.f0_norm}, {"ratio", r.ratio}});
  {
    io::CsvWriter csv({"eps", "s", "beta_norm", "f0_norm", "ratio"});
    for (const auto& r : tame.rows)
      csv.row({format_double(r.eps), format_double(r.s), format_double(r.beta_norm),
               format_double(r.f0_norm), format_double(r.ratio)});
    io::write_text(out / "tame.csv", csv.str());
  }

  const auto& lj = section(v, "lipschitz");
  const double base_eps = value_or<double>(lj, "base_eps", 1e-3);
  const FourierField f0 = base_eps * shape.f0;
  FourierField dir(N, N, c.kbox);
  if (!lj.is_null() && lj.contains("direction")) {
    dir = perturbation(lj["direction"], N, N, c.kbox);
  } else {
    // cos(theta_last) e_1: mean-free, so alpha_inf should not move
    MultiIndex k(N, 0);
    k[N - 1] = 1;
    dir.add_cos(0, k, 1.0);
  }
  const auto amps = value_or<std::vector<double>>(lj, "amplitudes", {1e-6, 1e-7, 1e-8});
  const double threshold = value_or<double>(lj, "threshold", 2.0);
  const LipschitzLadder lip = lipschitz_ladder(shape.xi, f0, dir, c, amps, threshold);
  Json lip_rows = Json::array();
  for (std::size_t i = 0; i < lip.reports.size(); ++i) {
    const auto& r = lip.reports[i];
    lip_rows.push_back(Json{{"amplitude", lip.amplitudes[i]}, {"comparable", r.comparable},
                            {"note", r.note}, {"d_alpha", r.d_alpha}, {"d_mean", r.d_mean},
                            {"alpha_bound", r.alpha_bound}, {"alpha_ok", r.alpha_ok},
                            {"d_beta", r.d_beta}, {"d_f0", r.d_f0}, {"constant", r.constant}});
  }

  Json audit{{"command", "verify"},
             {"tame", {{"sigma", 2 * c.tau + 4}, {"rows", tame_rows}, {"failed_eps", tame.failed_eps},
                       {"max_ratio", tame.max_ratio}, {"stability", tame.stability},
                       {"stable", tame.stable}}},
             {"lipschitz", {{"base_eps", base_eps}, {"rows", lip_rows}, {"stability", lip.stability},
                            {"threshold", threshold}, {"ok", lip.ok}}}};
  io::write_json(out / "audit.json", audit);
  Json run{{"command", "verify"}, {"scheme", io::to_json(c)}, {"xi", shape.xi},
           {"tame_stable", tame.stable}, {"lipschitz_ok", lip.ok}};
  io::write_json(out / "run.json", run);
  log << "tame stability " << format_double(tame.stability) << ", Lipschitz stability "
      << format_double(lip.stability) << "\n";
  return kExitOk;
}

int run_command(const std::string& command, const Json& config, const RunOptions& options,
                std::ostream& log) {
  try {
    if (command == "straighten") return cmd_straighten(config, options, log);
    if (command == "sweep") return cmd_sweep(config, options, log);
    if (command == "transport") return cmd_transport(config, options, log);
    if (command == "forced") return cmd_forced(config, options, log);
    if (command == "verify") return cmd_verify(config, options, log);
    log << "error: unknown command '" << command << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ShapeError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    log << "i/o error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SmallDivisorError& e) {
    log << "refused: " << e.what() << "\n";
    return kExitExcluded;
  } catch (const Error& e) {
    log << "numerical failure: " << e.what() << "\n";
    return kExitDiverged;
  }
}

}  // namespace kamtorus::cli
