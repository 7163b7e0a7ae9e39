#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "rotforch/app.hpp"
#include "rotforch/config.hpp"
#include "rotforch/constitutive.hpp"
#include "rotforch/errors.hpp"
#include "rotforch/exponents.hpp"
#include "rotforch/field_expr.hpp"

namespace py = pybind11;
using namespace rotforch;

namespace {

// Reports cross the boundary as JSON text, so Python sees plain dicts.
py::object to_python(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::tuple result(const CommandResult& r) { return py::make_tuple(r.exit_code, to_python(r.report)); }

Variable variable(const std::string& name) {
  if (name == "x") return Variable::x;
  if (name == "y") return Variable::y;
  if (name == "t") return Variable::t;
  throw InvalidInput("variable must be x, y or t");
}

py::dict bundle_dict(const ExponentBundle& b) {
  py::dict d;
  d["p"] = b.p;
  d["s"] = b.s;
  d["beta"] = b.beta;
  d["r_star"] = b.r_star;
  d["r_tilde"] = b.r_tilde;
  d["theta"] = b.theta;
  d["kappa"] = b.kappa;
  d["theta0"] = b.theta0;
  d["beta_star"] = b.beta_star;
  d["alpha"] = b.alpha;
  d["alpha_star"] = b.alpha_star;
  d["alpha_star_terms"] = std::vector<double>(b.alpha_star_terms.begin(), b.alpha_star_terms.end());
  d["mu_star"] = b.mu_star;
  d["gamma_star"] = b.gamma_star;
  d["mu_bar"] = b.mu_bar;
  d["alpha0_min"] = b.alpha0_min;
  d["alpha0_min_sup"] = b.alpha0_min_sup;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "rotforch native core";
  m.attr("__version__") = kVersion;
  m.attr("REPORT_SCHEMA") = kReportSchema;

  py::register_exception<Error>(m, "RotforchError", PyExc_RuntimeError);
  auto base = m.attr("RotforchError");
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<InvalidInput>(m, "InvalidInput", base);
  py::register_exception<InvalidExponent>(m, "InvalidExponent", base);
  py::register_exception<DegenerateCoefficient>(m, "DegenerateCoefficient", base);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base);
  py::register_exception<FieldDomainError>(m, "FieldDomainError", base);
  py::register_exception<StiffnessError>(m, "StiffnessError", base);
  py::register_exception<SmallnessViolation>(m, "SmallnessViolation", base);
  py::register_exception<DivergentFunctional>(m, "DivergentFunctional", base);

  py::class_<FieldExpr>(m, "FieldExpr")
      .def(py::init(&FieldExpr::parse), py::arg("text"))
      .def(
          "eval",
          [](const FieldExpr& e, double x, double y, double t, double lx, double ly) {
            return e.eval(EvalContext{x, y, t, lx, ly});
          },
          py::arg("x"), py::arg("y"), py::arg("t") = 0.0, py::arg("lx") = 1.0, py::arg("ly") = 1.0)
      .def("derivative", [](const FieldExpr& e, const std::string& v) { return e.derivative(variable(v)); })
      .def("depends_on", [](const FieldExpr& e, const std::string& v) { return e.depends_on(variable(v)); })
      .def("is_constant", &FieldExpr::is_constant)
      .def("__str__", &FieldExpr::to_string)
      .def("__repr__", [](const FieldExpr& e) { return "FieldExpr('" + e.to_string() + "')"; });

  py::class_<LocalLaw>(m, "LocalLaw")
      .def(py::init([](std::vector<double> degrees, std::vector<double> coeffs) {
             if (degrees.empty() || degrees.size() != coeffs.size()) {
               throw InvalidInput("degrees and coeffs must be nonempty and of equal length");
             }
             return LocalLaw{std::move(degrees), std::move(coeffs)};
           }),
           py::arg("degrees"), py::arg("coeffs"))
      .def_readonly("degrees", &LocalLaw::degrees)
      .def_readonly("coeffs", &LocalLaw::coeffs)
      .def("g", &LocalLaw::g, py::arg("s"))
      .def("dg", &LocalLaw::dg, py::arg("s"))
      .def_property_readonly("a", &LocalLaw::a)
      .def_property_readonly("chi0", &LocalLaw::chi0);

  m.def(
      "eval_F", [](const LocalLaw& law, double zeta, const Vec2& v) { return eval_F(law, zeta, v); },
      py::arg("law"), py::arg("zeta"), py::arg("v"));
  m.def(
      "invert_F",
      [](const LocalLaw& law, double zeta, const Vec2& y, double tol) {
        InvertStats st;
        const Vec2 v = invert_F(law, zeta, y, tol, &st);
        return py::make_tuple(v, st.residual);
      },
      py::arg("law"), py::arg("zeta"), py::arg("y"), py::arg("tol") = kInverseTol,
      "Returns (v, relative residual) with F(v) = y.");

  m.def(
      "compute_exponents",
      [](double a, double lambda, double r1, double r, double alpha, double kappa_tilde) {
        ExponentInputs in;
        in.a = a;
        in.lambda = lambda;
        in.r1 = r1;
        in.r = r;
        in.alpha = alpha;
        in.kappa_tilde = kappa_tilde;
        return bundle_dict(compute_exponents(in));
      },
      py::arg("a"), py::arg("lambda_"), py::arg("r1"), py::arg("r"), py::arg("alpha"),
      py::arg("kappa_tilde") = 1.1);
  m.def(
      "default_alpha",
      [](double a, double lambda, double r1, double r, double kappa_tilde) {
        ExponentInputs in;
        in.a = a;
        in.lambda = lambda;
        in.r1 = r1;
        in.r = r;
        in.kappa_tilde = kappa_tilde;
        const AlphaChoice c = default_alpha(in);
        return py::make_tuple(c.alpha0, c.beta1);
      },
      py::arg("a"), py::arg("lambda_"), py::arg("r1"), py::arg("r"), py::arg("kappa_tilde") = 1.1,
      "Returns (alpha_0, beta_1).");

  py::class_<RunConfig>(m, "RunConfig")
      .def_readwrite("nx", &RunConfig::nx)
      .def_readwrite("ny", &RunConfig::ny)
      .def_readwrite("omega", &RunConfig::omega)
      .def_readwrite("t_end", &RunConfig::t_end)
      .def_readwrite("seed", &RunConfig::seed)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def("to_dict", [](const RunConfig& c) { return to_python(c.to_json()); });

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("default_config_text", &default_config_text);

  // Each command returns (exit_code, report). An empty out_dir writes nothing.
  m.def(
      "simulate", [](const RunConfig& c, const std::string& out) { return result(run_simulate(c, out)); },
      py::arg("config"), py::arg("out_dir") = "");
  m.def(
      "verify",
      [](const RunConfig& c, const std::string& suite, const std::string& out) {
        return result(run_verify(c, suite, out));
      },
      py::arg("config"), py::arg("suite"), py::arg("out_dir") = "");
  m.def(
      "certify", [](const RunConfig& c, const std::string& out) { return result(run_certify(c, out)); },
      py::arg("config"), py::arg("out_dir") = "");
  m.def(
      "mms", [](const RunConfig& c, const std::string& out) { return result(run_mms(c, out)); },
      py::arg("config"), py::arg("out_dir") = "");
}
