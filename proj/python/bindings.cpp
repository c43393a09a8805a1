#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "kamtorus/errors.hpp"
#include "kamtorus/experiment.hpp"
#include "kamtorus/io.hpp"
#include "kamtorus/kam.hpp"
#include "kamtorus/transport.hpp"
#include "kamtorus/verify.hpp"

namespace py = pybind11;
using namespace kamtorus;

namespace {

py::dict step_dict(const StepRecord& s) {
  py::dict d;
  d["n"] = s.n;
  d["K"] = s.K;
  d["K_eff"] = s.K_eff;
  d["alpha"] = s.alpha;
  d["delta_s0"] = s.delta_s0;
  d["delta_s1"] = s.delta_s1;
  d["smallness"] = s.smallness;
  d["g_c1"] = s.g_c1;
  d["homological_residual"] = s.homological_residual;
  return d;
}

}  // namespace

PYBIND11_MODULE(_kamtorus, m) {
  m.doc() = "KAM straightening on T^N: Fourier fields, the iteration, transport reduction";

  static py::exception<Error> base(m, "Error");
  py::register_exception<SmallDivisorError>(m, "SmallDivisorError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

  py::class_<FourierField>(m, "FourierField")
      .def(py::init<int, int, int>(), py::arg("dim"), py::arg("range"), py::arg("kbox"))
      .def_property_readonly("dim", &FourierField::dim)
      .def_property_readonly("range", &FourierField::range)
      .def_property_readonly("kbox", &FourierField::kbox)
      .def("coeff", [](const FourierField& u, int c, const MultiIndex& k) { return u.coeff(c, k); })
      .def("set_mode", [](FourierField& u, int c, const MultiIndex& k, Complex v) { u.set_mode(c, k, v); })
      .def("add_cos", [](FourierField& u, int c, const MultiIndex& k, double a) { u.add_cos(c, k, a); })
      .def("add_sin", [](FourierField& u, int c, const MultiIndex& k, double a) { u.add_sin(c, k, a); })
      .def("is_zero", &FourierField::is_zero)
      .def("with_kbox", &FourierField::with_kbox)
      .def("component", &FourierField::component)
      .def("average", [](const FourierField& u) { return average(u); })
      .def(
          "evaluate",
          [](const FourierField& u, const std::vector<std::vector<double>>& points) {
            std::vector<double> flat;
            for (const auto& p : points) {
              if (static_cast<int>(p.size()) != u.dim()) throw ShapeError("evaluate: point has the wrong length");
              flat.insert(flat.end(), p.begin(), p.end());
            }
            const auto v = evaluate_at(u, flat);
            std::vector<std::vector<double>> out;
            for (std::size_t i = 0; i < points.size(); ++i)
              out.emplace_back(v.begin() + i * u.range(), v.begin() + (i + 1) * u.range());
            return out;
          },
          py::arg("points"))
      .def("to_json", [](const FourierField& u) { return io::to_json(u).dump(); })
      .def_static("from_json", [](const std::string& s) { return io::field_from_json(io::Json::parse(s)); })
      .def("__add__", [](const FourierField& a, const FourierField& b) { return a + b; })
      .def("__sub__", [](const FourierField& a, const FourierField& b) { return a - b; })
      .def("__mul__", [](const FourierField& a, double s) { return s * a; })
      .def("__rmul__", [](const FourierField& a, double s) { return s * a; })
      .def("__repr__", [](const FourierField& u) {
        std::ostringstream os;
        os << "FourierField(dim=" << u.dim() << ", range=" << u.range() << ", kbox=" << u.kbox() << ")";
        return os.str();
      });

  m.def("sobolev_norm", &sobolev_norm, py::arg("u"), py::arg("s"));

  py::class_<SchemeConstants>(m, "SchemeConstants")
      .def(py::init<>())
      .def_static("defaults", &SchemeConstants::defaults, py::arg("N"))
      .def("validate", &SchemeConstants::validate)
      .def_readwrite("N", &SchemeConstants::N)
      .def_readwrite("tau", &SchemeConstants::tau)
      .def_readwrite("s0", &SchemeConstants::s0)
      .def_readwrite("s1", &SchemeConstants::s1)
      .def_readwrite("gamma", &SchemeConstants::gamma)
      .def_readwrite("K0", &SchemeConstants::K0)
      .def_readwrite("chi", &SchemeConstants::chi)
      .def_readwrite("mu", &SchemeConstants::mu)
      .def_readwrite("rho", &SchemeConstants::rho)
      .def_readwrite("kappa", &SchemeConstants::kappa)
      .def_readwrite("b", &SchemeConstants::b)
      .def_readwrite("kbox", &SchemeConstants::kbox)
      .def_readwrite("max_steps", &SchemeConstants::max_steps)
      .def_readwrite("convergence_tol", &SchemeConstants::convergence_tol)
      .def_readwrite("weight_split", &SchemeConstants::weight_split);

  m.def("diophantine_ok",
        [](const std::vector<double>& alpha, double gamma, double tau, int K, int split) {
          return diophantine_ok(alpha, gamma, tau, K, split);
        },
        py::arg("alpha"), py::arg("gamma"), py::arg("tau"),
        py::arg("K"), py::arg("split") = 0);
  m.def("solve_homological",
        [](const FourierField& f, const std::vector<double>& alpha, int K, double gamma, double tau,
           int split) { return solve_homological(f, alpha, K, gamma, tau, split); },
        py::arg("f"), py::arg("alpha"), py::arg("K"),
        py::arg("gamma"), py::arg("tau"), py::arg("split") = 0);

  py::class_<StraighteningResult>(m, "StraighteningResult")
      .def_property_readonly("converged", &StraighteningResult::converged)
      .def_readonly("xi", &StraighteningResult::xi)
      .def_readonly("alpha_inf", &StraighteningResult::alpha_inf)
      .def_readonly("iterations", &StraighteningResult::iterations)
      .def_readonly("final_delta", &StraighteningResult::final_delta)
      .def_readonly("excluded_step", &StraighteningResult::excluded_step)
      .def_property_readonly("beta", [](const StraighteningResult& r) { return r.beta(); })
      .def_property_readonly("resonance",
                             [](const StraighteningResult& r) -> py::object {
                               if (!r.resonance) return py::none();
                               return py::cast(r.resonance->k);
                             })
      .def_property_readonly("steps", [](const StraighteningResult& r) {
        py::list out;
        for (const auto& s : r.steps) out.append(step_dict(s));
        return out;
      });

  m.def("kam_iterate",
        [](const std::vector<double>& xi, const FourierField& f0, const SchemeConstants& c) {
          py::gil_scoped_release release;
          return kam_iterate(xi, f0, c);
        },
        py::arg("xi"), py::arg("f0"), py::arg("constants"));

  m.def("conjugacy_residual",
        [](const std::vector<double>& xi, const FourierField& f0, const FourierField& beta,
           const std::vector<double>& alpha_inf) { return conjugacy_residual(xi, f0, beta, alpha_inf); },
        py::arg("xi"), py::arg("f0"), py::arg("beta"),
        py::arg("alpha_inf"));

  m.def("rotation_vector",
        [](const std::vector<double>& xi, const FourierField& f, const std::vector<double>& theta0,
           double T, double dt) { return rotation_vector({xi, f}, theta0, T, dt); },
        py::arg("xi"), py::arg("f"), py::arg("theta0"), py::arg("T") = 1e4, py::arg("dt") = 1e-2);

  m.def("conjugacy_flow_check",
        [](const StraighteningResult& r, const std::vector<double>& xi, const FourierField& f0,
           const std::vector<double>& theta0, double T, double dt) {
          return conjugacy_flow_check(r, {xi, f0}, theta0, T, dt);
        },
        py::arg("result"), py::arg("xi"), py::arg("f0"), py::arg("theta0"), py::arg("T") = 100.0,
        py::arg("dt") = 1e-2);

  py::class_<TransportOperator>(m, "TransportOperator")
      .def(py::init([](std::vector<double> omega, std::vector<double> zeta, FourierField a0) {
             TransportOperator op{static_cast<int>(omega.size()), static_cast<int>(zeta.size()),
                                  std::move(omega), std::move(zeta), std::move(a0)};
             op.validate();
             return op;
           }),
           py::arg("omega"), py::arg("zeta"), py::arg("a0"))
      .def_readonly("nu", &TransportOperator::nu)
      .def_readonly("d", &TransportOperator::d)
      .def_readonly("omega", &TransportOperator::omega)
      .def_readonly("zeta", &TransportOperator::zeta);

  py::class_<ReducedTransport>(m, "ReducedTransport")
      .def_property_readonly("excluded", &ReducedTransport::excluded)
      .def_readonly("m_inf", &ReducedTransport::m_inf)
      .def_readonly("beta", &ReducedTransport::beta)
      .def_readonly("reduction_residual", &ReducedTransport::reduction_residual)
      .def_readonly("structural_defect", &ReducedTransport::structural_defect)
      .def_readonly("kam", &ReducedTransport::kam);

  m.def("reduce", &reduce, py::arg("op"), py::arg("constants"));
  m.def("forced_solve",
        [](const TransportOperator& op, const FourierField& f, const ReducedTransport& red,
           const SchemeConstants& c) {
          const auto s = forced_solve(op, f, red, c);
          py::dict d;
          d["b"] = s.b;
          d["c"] = s.c;
          d["residual"] = s.residual;
          return d;
        },
        py::arg("op"), py::arg("f"), py::arg("reduced"), py::arg("constants"));

  m.def("_run",
        [](const std::string& command, const std::string& config, std::optional<std::string> out,
           int threads, std::optional<std::uint64_t> seed) -> py::tuple {
          cli::RunOptions opt;
          if (out) opt.out = *out;
          opt.threads = threads;
          opt.seed = seed;
          std::ostringstream log;
          int rc;
          try {
            const auto cfg = io::Json::parse(config);
            py::gil_scoped_release release;
            rc = cli::run_command(command, cfg, opt, log);
          } catch (const nlohmann::json::exception& e) {
            return py::make_tuple(static_cast<int>(cli::kExitConfig), std::string(e.what()));
          }
          return py::make_tuple(rc, log.str());
        },
        py::arg("command"), py::arg("config"), py::arg("out") = py::none(), py::arg("threads") = 1,
        py::arg("seed") = py::none());
}
