#include "kamtorus/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "kamtorus/errors.hpp"

namespace kamtorus::io {

namespace {

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: bad or missing '") + key + "': " + e.what());
  }
}

std::vector<int> mode_vector(const Json& j, int dim) {
  auto k = j.get<std::vector<int>>();
  if (static_cast<int>(k.size()) != dim) throw ConfigError("config: mode index has the wrong length");
  return k;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json to_json(const FourierField& u) {
  Json j;
  j["N"] = u.dim();
  j["m"] = u.range();
  j["K_box"] = u.kbox();
  Json modes = Json::array();
  MultiIndex k(u.dim());
  for (std::size_t idx = u.zero_index(); idx < u.mode_count(); ++idx) {
    bool any = false;
    for (int c = 0; c < u.range(); ++c) any = any || u.coefficients(c)[idx] != Complex{};
    if (!any) continue;
    u.mode_at(idx, k);
    Json re = Json::array(), im = Json::array();
    for (int c = 0; c < u.range(); ++c) {
      re.push_back(u.coefficients(c)[idx].real());
      im.push_back(u.coefficients(c)[idx].imag());
    }
    modes.push_back(Json{{"k", k}, {"re", re}, {"im", im}});
  }
  j["modes"] = std::move(modes);
  return j;
}

FourierField field_from_json(const Json& j) {
  const int N = get_as<int>(j, "N");
  const int m = get_as<int>(j, "m");
  const int K = get_as<int>(j, "K_box");
  if (N < 1 || m < 1 || K < 0) throw ConfigError("field: N, m must be positive and K_box >= 0");
  FourierField u(N, m, K);
  for (const auto& mode : j.at("modes")) {
    const auto k = mode_vector(mode.at("k"), N);
    if (!lex_nonnegative(k)) throw ConfigError("field: modes must have lex(k) >= 0");
    if (!u.in_box(k)) throw ConfigError("field: mode outside K_box");
    const auto re = mode.at("re").get<std::vector<double>>();
    const auto im = mode.at("im").get<std::vector<double>>();
    if (static_cast<int>(re.size()) != m || static_cast<int>(im.size()) != m)
      throw ConfigError("field: re/im must have m entries");
    for (int c = 0; c < m; ++c) u.set_mode(c, k, Complex(re[c], im[c]));
  }
  return u;
}

Json to_json(const TorusDiffeo& d) {
  Json j;
  j["displacement"] = to_json(d.displacement());
  j["inverse"] = d.has_inverse() ? to_json(d.inverse_displacement()) : Json(nullptr);
  return j;
}

TorusDiffeo diffeo_from_json(const Json& j) {
  TorusDiffeo d(field_from_json(j.at("displacement")));
  if (j.contains("inverse") && !j["inverse"].is_null()) d = invert(d);
  return d;
}

Json to_json(const SchemeConstants& c) {
  return Json{{"N", c.N},
              {"tau", c.tau},
              {"s0", c.s0},
              {"s1", c.s1},
              {"gamma", c.gamma},
              {"K0", c.K0},
              {"chi", c.chi},
              {"mu", c.mu},
              {"rho", c.rho},
              {"kappa", c.kappa},
              {"b", c.b},
              {"kbox", c.kbox},
              {"max_steps", c.max_steps},
              {"convergence_tol", c.convergence_tol},
              {"divergence_guard", c.divergence_guard},
              {"delta_step", c.delta_step},
              {"eta_star", c.eta_star},
              {"enforce_smallness", c.enforce_smallness},
              {"weight_split", c.weight_split},
              {"diffeo",
               {{"inverse_tol", c.diffeo.inverse_tol},
                {"max_iters", c.diffeo.max_iters},
                {"alias_tol", c.diffeo.alias_tol}}}};
}

SchemeConstants constants_from_json(const Json& j, int N) {
  SchemeConstants c = SchemeConstants::defaults(N);
  if (j.is_null()) return c;
  if (!j.is_object()) throw ConfigError("config: 'scheme' must be an object");
  static const std::set<std::string> known{
      "N",         "tau",   "s0",    "s1",        "gamma",           "K0",
      "chi",       "mu",    "rho",   "kappa",     "b",               "kbox",
      "max_steps", "convergence_tol", "divergence_guard", "delta_step", "eta_star",
      "enforce_smallness", "weight_split", "diffeo"};
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) throw ConfigError("config: unknown scheme key '" + key + "'");
  if (j.contains("N") && get_as<int>(j, "N") != N)
    throw ConfigError("config: scheme N disagrees with the problem dimension");

  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = get_as<double>(j, key);
  };
  auto integer = [&](const char* key, int& out) {
    if (j.contains(key)) out = get_as<int>(j, key);
  };
  num("tau", c.tau);
  num("s0", c.s0);
  num("s1", c.s1);
  num("gamma", c.gamma);
  integer("K0", c.K0);
  num("chi", c.chi);
  num("mu", c.mu);
  num("rho", c.rho);
  num("kappa", c.kappa);
  num("b", c.b);
  integer("kbox", c.kbox);
  integer("max_steps", c.max_steps);
  num("convergence_tol", c.convergence_tol);
  num("divergence_guard", c.divergence_guard);
  num("delta_step", c.delta_step);
  num("eta_star", c.eta_star);
  if (j.contains("enforce_smallness")) c.enforce_smallness = get_as<bool>(j, "enforce_smallness");
  integer("weight_split", c.weight_split);
  if (j.contains("diffeo")) {
    const auto& d = j["diffeo"];
    for (const auto& [key, value] : d.items())
      if (key != "inverse_tol" && key != "max_iters" && key != "alias_tol")
        throw ConfigError("config: unknown diffeo key '" + key + "'");
    if (d.contains("inverse_tol")) c.diffeo.inverse_tol = get_as<double>(d, "inverse_tol");
    if (d.contains("max_iters")) c.diffeo.max_iters = get_as<int>(d, "max_iters");
    if (d.contains("alias_tol")) c.diffeo.alias_tol = get_as<double>(d, "alias_tol");
  }
  return c;
}

Json to_json(const StepRecord& s) {
  return Json{{"n", s.n},
              {"K", s.K},
              {"K_eff", s.K_eff},
              {"alpha", s.alpha},
              {"delta_s0", s.delta_s0},
              {"delta_s1", s.delta_s1},
              {"smallness", s.smallness},
              {"g_c1", s.g_c1},
              {"homological_residual", s.homological_residual}};
}

FourierField field_from_modes(const Json& modes, int dim, int range, int kbox) {
  FourierField u(dim, range, kbox);
  if (modes.is_null()) return u;
  if (!modes.is_array()) throw ConfigError("config: mode list must be an array");
  for (const auto& mode : modes) {
    const auto k = mode_vector(mode.at("k"), dim);
    if (!u.in_box(k)) throw ConfigError("config: mode outside the working box");
    for (const char* kind : {"cos", "sin"}) {
      if (!mode.contains(kind)) continue;
      const auto amp = mode[kind].get<std::vector<double>>();
      if (static_cast<int>(amp.size()) != range)
        throw ConfigError(std::string("config: '") + kind + "' needs one amplitude per component");
      for (int c = 0; c < range; ++c) {
        if (amp[c] == 0.0) continue;
        if (kind[0] == 'c')
          u.add_cos(c, k, amp[c]);
        else
          u.add_sin(c, k, amp[c]);
      }
    }
  }
  return u;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw ShapeError("csv: row width differs from the header");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) text_ += ',';
    text_ += cells[i];
  }
  text_ += '\n';
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return Json::parse(in, nullptr, true, true);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: " + path.string() + ": " + e.what());
  }
}

}  // namespace kamtorus::io
