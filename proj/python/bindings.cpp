#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "relfl/closed_forms.hpp"
#include "relfl/version.hpp"

namespace py = pybind11;
using namespace relfl;

namespace {

py::object to_fraction(const Rational& r) {
  static py::object fraction = py::module_::import("fractions").attr("Fraction");
  return fraction(r.numerator(), r.denominator());
}

BruteForceOptions options(int jobs, std::uint64_t node_cap) {
  BruteForceOptions o;
  o.count.jobs = jobs;
  o.count.node_cap = node_cap;
  return o;
}

py::dict integral_dict(const IntegralResult& r) {
  py::dict d;
  d["value"] = r.value;
  d["certified"] = r.certified;
  d["window"] = r.window.to_string();
  d["nodes"] = r.nodes;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact orbital integrals on Herm(V_2) over F_q((w))";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "RelflError");

  py::class_<FieldConfig>(m, "FieldConfig")
      .def(py::init<int, int>(), py::arg("q"), py::arg("precision") = 32)
      .def_property_readonly("q", &FieldConfig::q)
      .def_property_readonly("ns", &FieldConfig::ns)
      .def_property_readonly("precision", &FieldConfig::precision)
      .def("__repr__", [](const FieldConfig& c) {
        return "FieldConfig(q=" + std::to_string(c.q()) + ", precision=" + std::to_string(c.precision()) + ")";
      });

  py::class_<LocalElement>(m, "LocalElement")
      .def_static("parse", &parse_local_element, py::arg("text"), py::arg("config"))
      .def_property_readonly("valuation", &LocalElement::valuation)
      .def_property_readonly("precision", &LocalElement::precision)
      .def("__str__", &LocalElement::to_string)
      .def("__repr__", [](const LocalElement& e) { return "LocalElement('" + e.to_string() + "')"; });

  py::class_<QPoly>(m, "QPoly")
      .def_static("parse", [](const std::string& s) { return QPoly::parse(s); })
      .def("evaluate", [](const QPoly& p, std::int64_t q) { return p.evaluate(q); })
      .def("coefficients", [](const QPoly& p) { return std::map<int, std::int64_t>(p.coefficients()); })
      .def("__eq__", [](const QPoly& a, const QPoly& b) { return a == b; })
      .def("__str__", &QPoly::to_string)
      .def("__repr__", [](const QPoly& p) { return "QPoly('" + p.to_string() + "')"; });

  py::class_<LaurentQPoly>(m, "LaurentQPoly")
      .def_static("parse", [](const std::string& s) { return LaurentQPoly::parse(s); })
      .def("evaluate", [](const LaurentQPoly& p, std::int64_t q) { return to_fraction(p.evaluate(q)); })
      .def("__eq__", [](const LaurentQPoly& a, const LaurentQPoly& b) { return a == b; })
      .def("__str__", &LaurentQPoly::to_string)
      .def("__repr__", [](const LaurentQPoly& p) { return "LaurentQPoly('" + p.to_string() + "')"; });

  py::class_<StableClassParams>(m, "StableClassParams")
      .def(py::init([](const std::string& a, const std::string& lambda, const std::string& mu, const FieldConfig& c) {
             return StableClassParams(parse_local_element(a, c), parse_local_element(lambda, c),
                                      parse_local_element(mu, c));
           }),
           py::arg("a"), py::arg("lam"), py::arg("mu"), py::arg("config"))
      .def_property_readonly("n1", [](const StableClassParams& p) -> py::object {
        const int n1 = p.n1();
        return n1 == kInfinity ? py::none() : py::object(py::int_(n1));
      })
      .def_property_readonly("n2", &StableClassParams::n2)
      .def_property_readonly("m", &StableClassParams::m)
      .def_property_readonly("det_valuation", &StableClassParams::det_valuation)
      .def_property_readonly("eta_mu", &StableClassParams::eta_mu)
      .def("companion", &companion_delta)
      .def("__str__", &StableClassParams::to_string);

  m.def("phi_closed", &phi_closed, py::arg("i"), py::arg("j"));
  m.def("orb_basic_closed", &orb_basic_closed, py::arg("eta"), py::arg("m"));
  m.def("orbit_case", &orbit_case, py::arg("n1"), py::arg("n2"));
  m.def(
      "orb_phi_closed",
      [](py::object n1, int n2, int n, int sign) {
        return orb_phi_closed(n1.is_none() ? kInfinity : n1.cast<int>(), n2, n, sign);
      },
      py::arg("n1"), py::arg("n2"), py::arg("n"), py::arg("sign"));
  m.def("kappa_orb_closed", &kappa_orb_closed, py::arg("v_plus"), py::arg("v_minus"), py::arg("n2"));
  m.def("endoscopic_so_closed", &endoscopic_so_closed, py::arg("vx"), py::arg("vy"));
  m.def("kappa_character", &kappa_character, py::arg("parity"));

  m.def(
      "pushforward",
      [](int i, int j, const FieldConfig& c, int jobs, std::uint64_t node_cap) {
        return integral_dict(pushforward_at(HermitianElement(orbit_representative({i, j}, c)), c, options(jobs, node_cap)));
      },
      py::arg("i"), py::arg("j"), py::arg("config"), py::arg("jobs") = 1, py::arg("node_cap") = 50'000'000);
  m.def(
      "orbital_integral",
      [](const StableClassParams& p, const std::string& indicator, int n, const FieldConfig& c, int jobs,
         std::uint64_t node_cap) {
        IndicatorSpec f;
        if (indicator == "end_lambda") {
          f = IndicatorSpec::end_lambda();
        } else if (indicator == "phi_n") {
          f = IndicatorSpec::phi_n(n);
        } else {
          throw InvalidParams("indicator must be 'end_lambda' or 'phi_n'");
        }
        return integral_dict(orb_bruteforce(build_delta(p), f, c, options(jobs, node_cap)));
      },
      py::arg("params"), py::arg("indicator"), py::arg("n") = 0, py::arg("config"), py::arg("jobs") = 1,
      py::arg("node_cap") = 50'000'000);
  m.def(
      "relative_orbital_integral",
      [](const StableClassParams& p, const FieldConfig& c, std::uint64_t node_cap) -> py::object {
        const auto x = contraction_section(build_delta(p), c);
        if (!x) return py::none();
        return integral_dict(ro_bruteforce(*x, c, options(1, node_cap)));
      },
      py::arg("params"), py::arg("config"), py::arg("node_cap") = 50'000'000);
  m.def(
      "transfer_factor",
      [](const StableClassParams& p, int which) { return transfer_factor(eigenvalue_split(p), p, which); },
      py::arg("params"), py::arg("which"));
  m.def(
      "fl_verify_json",
      [](const StableClassParams& p, const FieldConfig& c, bool timings) {
        return fl_verify(p, c, {}, timings).to_json().dump();
      },
      py::arg("params"), py::arg("config"), py::arg("timings") = false);
  m.def(
      "stable_class_grid",
      [](const FieldConfig& c, int max_n, std::uint64_t seed) {
        std::vector<std::pair<std::string, StableClassParams>> out;
        for (auto& g : stable_class_grid(c, max_n, seed)) out.emplace_back(g.label, g.params);
        return out;
      },
      py::arg("config"), py::arg("max_n"), py::arg("seed"));
}
