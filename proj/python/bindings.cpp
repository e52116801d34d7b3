#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "keldysh/continuum.hpp"
#include "keldysh/discrete.hpp"
#include "keldysh/verify.hpp"

namespace py = pybind11;
using namespace keldysh;

namespace {

Statistics statistics(const std::string& name) {
  if (name == "boson") return Statistics::boson();
  if (name == "fermion") return Statistics::fermion();
  throw Error(ErrorCode::InvalidArgument, "statistics must be \"boson\" or \"fermion\", got \"" + name + "\"");
}

// Scalars become 1x1 matrices; anything else goes through the Eigen caster.
ComplexMatrix as_matrix(const py::object& obj) {
  if (py::isinstance<py::int_>(obj) || py::isinstance<py::float_>(obj) || PyComplex_Check(obj.ptr())) {
    ComplexMatrix m(1, 1);
    m(0, 0) = obj.cast<Complex>();
    return m;
  }
  return obj.cast<ComplexMatrix>();
}

LevelSystem make_system(const py::object& epsilon, const py::object& nbar, const std::string& stat) {
  return validate_system({as_matrix(epsilon), as_matrix(nbar), statistics(stat)});
}

KeldyshComponent keldysh_component(const std::string& name) {
  if (name == "R" || name == "11") return KeldyshComponent::Retarded;
  if (name == "A" || name == "22") return KeldyshComponent::Advanced;
  if (name == "K" || name == "12") return KeldyshComponent::Keldysh;
  if (name == "qq" || name == "21") return KeldyshComponent::Zero;
  throw Error(ErrorCode::InvalidArgument, "unknown component \"" + name + "\"");
}

ContourComponent contour_name(const std::string& name) {
  if (name == "++") return ContourComponent::PlusPlus;
  if (name == "+-") return ContourComponent::PlusMinus;
  if (name == "-+") return ContourComponent::MinusPlus;
  if (name == "--") return ContourComponent::MinusMinus;
  throw Error(ErrorCode::InvalidArgument, "unknown contour component \"" + name + "\"");
}

std::vector<TimeGrid> make_grids(double ti, double tf, const std::vector<int>& ns) {
  std::vector<TimeGrid> grids;
  for (int n : ns) grids.emplace_back(ti, tf, n);
  return grids;
}

py::dict check_dict(const CheckResult& c) {
  py::dict d;
  d["name"] = c.name;
  d["passed"] = c.passed;
  d["applicable"] = c.applicable;
  d["observed"] = c.observed;
  d["threshold"] = c.threshold;
  d["details"] = c.details;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed-time-contour Green's functions for non-interacting bosons and fermions";
  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("rho_from_nbar", [](double n, const std::string& stat) { return rho_from_nbar(n, statistics(stat)); },
        py::arg("nbar"), py::arg("statistics"));
  m.def("thermal_nbar",
        [](double eps, double mu, double temp, const std::string& stat) {
          return thermal_nbar(eps, mu, temp, statistics(stat));
        },
        py::arg("epsilon"), py::arg("mu"), py::arg("temperature"), py::arg("statistics"));
  m.def("normalization_prefactor",
        [](const py::object& n, const std::string& stat) { return normalization_prefactor(as_matrix(n), statistics(stat)); },
        py::arg("nbar"), py::arg("statistics"));
  m.def("initial_boundary_ratio", &initial_boundary_ratio, py::arg("nbar"));

  m.def("fix_constants",
        [](const py::object& eps, const py::object& n, const std::string& stat, double ti, double tf) {
          const SolutionConstants k = fix_constants(make_system(eps, n, stat), ti, tf);
          return py::make_tuple(k.a, k.b, k.c, k.d);
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("t_initial") = 0.0,
        py::arg("t_final") = 1.0, "Boundary-fixed constants (a, b, c, d) of the general solution.");

  m.def("gf_component",
        [](const py::object& eps, const py::object& n, const std::string& stat, const std::string& comp, double t,
           double tp, double ti) {
          return gf_component(make_system(eps, n, stat), keldysh_component(comp), t, tp, ti);
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("component"), py::arg("t"),
        py::arg("t_prime"), py::arg("t_initial") = 0.0);
  m.def("contour_component",
        [](const py::object& eps, const py::object& n, const std::string& stat, const std::string& comp, double t,
           double tp, double ti) {
          return contour_component(make_system(eps, n, stat), contour_name(comp), t, tp, ti);
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("component"), py::arg("t"),
        py::arg("t_prime"), py::arg("t_initial") = 0.0);

  py::class_<FreeGreenFunction>(m, "FreeGreenFunction")
      .def(py::init([](const py::object& eps, const py::object& n, const std::string& stat) {
             return FreeGreenFunction(make_system(eps, n, stat));
           }),
           py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"))
      .def_property_readonly("dimension", &FreeGreenFunction::dimension)
      .def("retarded", &FreeGreenFunction::retarded, py::arg("t"), py::arg("t_prime"))
      .def("advanced", &FreeGreenFunction::advanced, py::arg("t"), py::arg("t_prime"))
      .def("keldysh", &FreeGreenFunction::keldysh, py::arg("t"), py::arg("t_prime"), py::arg("t_initial") = 0.0)
      .def(
          "component",
          [](const FreeGreenFunction& g, const std::string& comp, double t, double tp, double ti) {
            if (comp.size() == 2 && (comp[0] == '+' || comp[0] == '-'))
              return g.contour(contour_name(comp), t, tp, ti);
            return g.component(keldysh_component(comp), t, tp, ti);
          },
          py::arg("component"), py::arg("t"), py::arg("t_prime"), py::arg("t_initial") = 0.0);

  m.def("discrete_green",
        [](const py::object& eps, const py::object& n, const std::string& stat, double ti, double tf, int slices) {
          return discrete_green(make_system(eps, n, stat), TimeGrid(ti, tf, slices)).values;
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("t_initial"), py::arg("t_final"),
        py::arg("n_slices"),
        "Contour-ordered -i D^-1 in the basis (phi_1+, ..., phi_N+, phi_{N-1}-, ..., phi_0-).");
  m.def("discrete_partition_function",
        [](const py::object& eps, const py::object& n, const std::string& stat, double ti, double tf, int slices) {
          return discrete_partition_function(make_system(eps, n, stat), TimeGrid(ti, tf, slices));
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("t_initial"), py::arg("t_final"),
        py::arg("n_slices"));

  m.def("structure_suite",
        [](const py::object& eps, const py::object& n, const std::string& stat, double ti, double tf) {
          StructureOptions opts;
          opts.t_initial = ti;
          opts.t_final = tf;
          py::list out;
          for (const CheckResult& c : run_structure_suite(make_system(eps, n, stat), opts)) out.append(check_dict(c));
          return out;
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("t_initial") = 0.0,
        py::arg("t_final") = 1.0);
  m.def("oracle_suite",
        [](const py::object& eps, const py::object& n, const std::string& stat, const std::vector<int>& ns, double ti,
           double tf) {
          const ConvergenceReport r = run_oracle_suite(make_system(eps, n, stat), make_grids(ti, tf, ns));
          py::dict d;
          d["n_slices"] = r.n_slices;
          d["errors"] = r.errors;
          d["error_bounds"] = r.error_bounds;
          d["partition"] = r.partition;
          d["z_deviations"] = r.z_deviations;
          d["fitted_order"] = r.fitted_order ? py::object(py::float_(*r.fitted_order)) : py::object(py::none());
          py::list checks;
          for (const CheckResult& c : convergence_checks(r)) checks.append(check_dict(c));
          d["checks"] = checks;
          return d;
        },
        py::arg("epsilon"), py::arg("nbar"), py::arg("statistics"), py::arg("n_slices"), py::arg("t_initial") = 0.0,
        py::arg("t_final") = 1.0);
}
