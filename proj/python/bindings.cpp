#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fraclab/constants.hpp"
#include "fraclab/extension.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/fraclap.hpp"
#include "fraclab/groundstate.hpp"
#include "fraclab/kelvin.hpp"
#include "fraclab/pohozaev.hpp"
#include "fraclab/sphere_eig.hpp"

namespace py = pybind11;
using namespace fraclab;

namespace {

std::vector<double> to_vector(std::span<const double> x) { return {x.begin(), x.end()}; }

}  // namespace

PYBIND11_MODULE(_fraclab, m) {
  m.doc() = "Fractional Hardy-Sobolev numerics";

  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);

  m.def("hardy_constant", &hardy_constant, py::arg("n"), py::arg("s"));
  m.def("kappa_s", &kappa_s, py::arg("s"));
  m.def("gagliardo_constant", &gagliardo_constant, py::arg("n"), py::arg("s"));
  m.def("fraclap_constant", &fraclap_constant, py::arg("n"), py::arg("s"));
  m.def("poisson_normalizer", &poisson_normalizer, py::arg("n"), py::arg("s"));
  m.def("bubble_constant", &bubble_constant, py::arg("n"), py::arg("s"));
  m.def("conformal_exponent", &conformal_exponent, py::arg("n"), py::arg("s"), py::arg("p"));

  py::class_<FracParams>(m, "FracParams")
      .def(py::init<int, double, double, double, double>(), py::arg("n"), py::arg("s"), py::arg("lam"),
           py::arg("alpha"), py::arg("p"))
      .def_static("critical", &FracParams::critical, py::arg("n"), py::arg("s"), py::arg("lam") = 0.0)
      .def_property_readonly("n", &FracParams::n)
      .def_property_readonly("s", &FracParams::s)
      .def_property_readonly("lam", &FracParams::lambda)
      .def_property_readonly("alpha", &FracParams::alpha)
      .def_property_readonly("p", &FracParams::p)
      .def_property_readonly("critical_power", &FracParams::critical_power)
      .def("__repr__", &FracParams::describe);

  py::class_<RadialGrid, std::shared_ptr<RadialGrid>>(m, "RadialGrid")
      .def_static(
          "geometric",
          [](int n, double s, double r_min, double r_max, double npo) {
            return std::const_pointer_cast<RadialGrid>(RadialGrid::geometric(n, s, r_min, r_max, npo));
          },
          py::arg("n"), py::arg("s"), py::arg("r_min"), py::arg("r_max"), py::arg("nodes_per_octave"))
      .def_property_readonly("nodes", [](const RadialGrid& g) { return to_vector(g.nodes()); })
      .def("__len__", &RadialGrid::size);

  py::class_<RadialFunction>(m, "RadialFunction")
      .def(py::init([](std::shared_ptr<RadialGrid> g, std::vector<double> v) {
             return RadialFunction(g, std::move(v));
           }),
           py::arg("grid"), py::arg("values"))
      .def_static(
          "sample",
          [](std::shared_ptr<RadialGrid> g, const std::function<double(double)>& f) {
            return RadialFunction::sample(g, f);
          },
          py::arg("grid"), py::arg("f"))
      .def("with_tail", [](const RadialFunction& u, double c, double e) { return u.with_tail({c, e}); },
           py::arg("coef"), py::arg("exponent"))
      .def_property_readonly("values", [](const RadialFunction& u) { return to_vector(u.values()); })
      .def("__call__", &RadialFunction::operator(), py::arg("r"));

  m.def(
      "fraclap_radial",
      [](const RadialFunction& u, std::vector<double> radii, bool allow_truncation) {
        FraclapOptions o;
        o.allow_truncation = allow_truncation;
        std::vector<double> out;
        for (const auto& r : fraclap_radial(u, radii, o)) out.push_back(r.with_tail());
        return out;
      },
      py::arg("u"), py::arg("radii"), py::arg("allow_truncation") = false,
      "(-Δ)^s of a radial profile at the given radii, tail included.");

  m.def(
      "fraclap_spectral_1d",
      [](std::vector<double> samples, double half_width, double s) {
        const PeriodicGrid g{1, half_width, static_cast<int>(samples.size())};
        return fraclap_spectral(samples, g, s).values;
      },
      py::arg("samples"), py::arg("half_width"), py::arg("s"),
      "FFT route on [-L, L) with len(samples) points.");

  m.def(
      "min_hardy_quotient",
      [](std::shared_ptr<RadialGrid> g) { return min_hardy_quotient(*assemble_forms(g)).value; },
      py::arg("grid"));

  m.def(
      "mu1",
      [](int n, double s, double lam, std::size_t elements) {
        const auto res = solve_mu1(lam, assemble_angular(n, s, AngularMesh::graded(elements, s)));
        return py::dict(py::arg("mu1") = res.mu1, py::arg("estimate") = res.estimate,
                        py::arg("mesh_size") = res.mesh->size(), py::arg("psi1") = res.psi1);
      },
      py::arg("n"), py::arg("s"), py::arg("lam"), py::arg("elements") = 2000);

  m.def(
      "groundstate",
      [](double lam, std::shared_ptr<RadialGrid> g, int max_iter) {
        GroundStateOptions o;
        o.max_iter = max_iter;
        const auto res = minimize_groundstate(lam, g, o);
        return py::dict(py::arg("lam") = res.lambda, py::arg("beta") = res.beta,
                        py::arg("iterations") = res.iterations, py::arg("converged") = res.converged,
                        py::arg("el_residual") = res.el_residual, py::arg("monotone") = res.monotone,
                        py::arg("profile") = to_vector(res.profile.values()), py::arg("history") = res.history);
      },
      py::arg("lam"), py::arg("grid"), py::arg("max_iter") = 4000);

  m.def(
      "indefiniteness_probe",
      [](double lam, std::shared_ptr<RadialGrid> g) {
        const auto p = indefiniteness_probe(lam, g);
        return py::dict(py::arg("found") = p.found, py::arg("epsilon") = p.epsilon, py::arg("form") = p.form,
                        py::arg("scan") = p.scan);
      },
      py::arg("lam"), py::arg("grid"));

  m.def(
      "classify_nonexistence",
      [](const FracParams& P) {
        const auto c = classify_nonexistence(P);
        return py::dict(py::arg("case") = c.which, py::arg("label") = c.label,
                        py::arg("hardy_coefficient") = c.hardy_coefficient,
                        py::arg("power_coefficient") = c.power_coefficient);
      },
      py::arg("params"));

  m.def(
      "invert_point",
      [](std::vector<double> x, std::vector<double> x0, double rho) { return invert_point(x, SpherePair(x0, rho)); },
      py::arg("x"), py::arg("x0"), py::arg("rho"));

  m.def(
      "inversion_inequality",
      [](std::vector<double> x, std::vector<double> x0, double rho, double s) {
        const auto r = inversion_inequality(x, SpherePair(x0, rho), s);
        return py::dict(py::arg("margin") = r.margin, py::arg("expected") = r.expected, py::arg("holds") = r.holds);
      },
      py::arg("x"), py::arg("x0"), py::arg("rho"), py::arg("s"));
}
