// pybind11 bindings for the main operations: higher-order Airy evaluation,
// Fredholm determinants, the integro-differential Painleve II solver, the
// hierarchy CAS, and the mKdV reduction checks.

#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "airyhier/airy.hpp"
#include "airyhier/cas.hpp"
#include "airyhier/fredholm.hpp"
#include "airyhier/mkdv.hpp"
#include "airyhier/selftest.hpp"
#include "airyhier/solver.hpp"
#include "airyhier/weight.hpp"

namespace py = pybind11;
using namespace airyhier;

namespace {

weights::Weight weight_of(const std::string& spec) {
  return weights::parse_weight(spec);
}

idpii::SolverOptions options_of(double T0, double tol, int grid_m) {
  idpii::SolverOptions opt;
  opt.T0 = T0;
  opt.tol = tol;
  opt.grid_m = grid_m;
  return opt;
}

}  // namespace

PYBIND11_MODULE(_airyhier, m) {
  m.doc() =
      "Higher-order finite-temperature Airy kernels: Fredholm determinants, "
      "the integro-differential Painleve II hierarchy, and its mKdV "
      "scaling reduction.";

  m.def("ai", &specfun::ai, py::arg("n"), py::arg("x"),
        "Higher-order Airy function Ai_n(x).");
  m.def("ai_deriv", &specfun::ai_deriv, py::arg("n"), py::arg("x"),
        py::arg("j"), "j-th derivative of Ai_n at x.");

  m.def(
      "det",
      [](int n, double t, double lambda, const std::string& weight,
         const std::string& route) {
        if (route == "step") return fredholm::det_step(n, t, lambda);
        auto w = weight_of(weight);
        if (route == "halfline") return fredholm::det_halfline(n, t, lambda, w);
        if (route == "sigma") return fredholm::det_sigma(n, t, lambda, w);
        throw std::invalid_argument("route must be halfline, sigma or step");
      },
      py::arg("n"), py::arg("t"), py::arg("lambda_") = 1.0,
      py::arg("weight") = "fermi:alpha=1", py::arg("route") = "halfline",
      "Fredholm determinant D_n(t, lambda) = det(I - lambda K_{t,n}).");

  py::class_<idpii::TwResult>(m, "TwResult")
      .def_readonly("det", &idpii::TwResult::det)
      .def_readonly("logdet", &idpii::TwResult::logdet)
      .def_readonly("Q", &idpii::TwResult::Q)
      .def_readonly("u_ref", &idpii::TwResult::u_ref)
      .def_readonly("x_ref", &idpii::TwResult::x_ref)
      .def("__repr__", [](const idpii::TwResult& r) {
        std::ostringstream os;
        os << "TwResult(det=" << r.det << ", Q=" << r.Q << ", u_ref=" << r.u_ref
           << ")";
        return os.str();
      });

  m.def(
      "tw_representation",
      [](int n, double lambda, const std::string& weight, double t, double T0,
         double tol, int grid_m) {
        return idpii::tw_representation(n, lambda, weight_of(weight), t,
                                        options_of(T0, tol, grid_m));
      },
      py::arg("n"), py::arg("lambda_"), py::arg("weight"), py::arg("t"),
      py::arg("T0") = 8.0, py::arg("tol") = 1e-10, py::arg("grid_m") = 160,
      "Theorem 1.1 representation: D via the integro-differential "
      "Painleve II solution.");

  m.def(
      "hierarchy",
      [](const std::string& kind, int n, const std::string& format) {
        const auto mem =
            (kind == "pii") ? cas::pii_member(n) : cas::mkdv_member(n);
        if (kind != "pii" && kind != "mkdv")
          throw std::invalid_argument("kind must be pii or mkdv");
        if (format == "text") return cas::render(mem);
        if (format == "json") return cas::to_json(mem);
        throw std::invalid_argument("format must be text or json");
      },
      py::arg("kind"), py::arg("n"), py::arg("format") = "text",
      "Generated hierarchy member as canonical text or JSON.");

  m.def(
      "mkdv_residual",
      [](int n, double tau, double delta_tau, double t1, double x,
         double lambda, const std::string& weight, double T0, int grid_m) {
        return mkdv::mkdv_residual_at(n, tau, delta_tau, t1, x, lambda,
                                      weight_of(weight),
                                      options_of(T0, 1e-10, grid_m));
      },
      py::arg("n"), py::arg("tau"), py::arg("delta_tau"), py::arg("t1") = 0.0,
      py::arg("x") = 0.0, py::arg("lambda_") = 1.0,
      py::arg("weight") = "fermi:alpha=1", py::arg("T0") = 8.0,
      py::arg("grid_m") = 160,
      "Pointwise Theorem 1.2 mKdV defect from two tau-perturbed solves.");

  m.def(
      "fermi_distribution",
      [](int n, double alpha, double t) {
        const auto r = mkdv::fermi_distribution(n, alpha, t);
        return py::make_tuple(r.det, r.frame_value, r.diff);
      },
      py::arg("n"), py::arg("alpha"), py::arg("t"),
      "F_n^alpha(t) by the determinant route and the Corollary 1.3 frame "
      "route; returns (det, frame_value, diff).");

  m.def(
      "scaling_exponents",
      [](int n) {
        const auto [e, f] = mkdv::scaling_exponents(n);
        return py::make_tuple(
            py::make_tuple(numerator(e).convert_to<long long>(),
                           denominator(e).convert_to<long long>()),
            py::make_tuple(numerator(f).convert_to<long long>(),
                           denominator(f).convert_to<long long>()));
      },
      py::arg("n"),
      "Exact scaling exponents (e_n, f_n) as (numerator, denominator) pairs.");

  m.def(
      "selftest",
      [](bool quick) {
        std::ostringstream os;
        const int failures = selftest::run_acceptance(quick, os);
        return py::make_tuple(failures, os.str());
      },
      py::arg("quick") = true,
      "Run the acceptance suite; returns (failure_count, report_text).");
}
