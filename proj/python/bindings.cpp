#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lipctl/controller1d.hpp"
#include "lipctl/controllermd.hpp"
#include "lipctl/errors.hpp"
#include "lipctl/feasibility.hpp"
#include "lipctl/harness.hpp"
#include "lipctl/sequences.hpp"

namespace py = pybind11;

// Scalars cross the boundary as fractions.Fraction; ints, strings and
// Fractions are accepted on the way in.
namespace pybind11::detail {
template <>
struct type_caster<mpq_class> {
  PYBIND11_TYPE_CASTER(mpq_class, const_name("fractions.Fraction"));

  bool load(handle src, bool) {
    if (!src || PyFloat_Check(src.ptr())) return false;
    if (!PyLong_Check(src.ptr()) && !PyUnicode_Check(src.ptr()) &&
        !py::isinstance(src, py::module_::import("fractions").attr("Fraction")))
      return false;
    try {
      value = lipctl::parse_scalar(py::str(src).cast<std::string>());
      return true;
    } catch (const lipctl::InputError&) {
      return false;
    }
  }

  static handle cast(const mpq_class& q, return_value_policy, handle) {
    py::object as_int = py::module_::import("builtins").attr("int");
    py::object frac = py::module_::import("fractions").attr("Fraction");
    return frac(as_int(q.get_num().get_str()), as_int(q.get_den().get_str())).release();
  }
};
}  // namespace pybind11::detail

using namespace lipctl;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact controlling-pair constructions and checks";
  m.attr("__version__") = "0.1.0";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_RuntimeError);
  py::register_exception<NotFoundError>(m, "NotFoundError", PyExc_RuntimeError);
  py::register_exception<InternalError>(m, "InternalError", PyExc_RuntimeError);

  py::class_<sequences::PointSeq>(m, "PointSeq")
      .def(py::init<>())
      .def_readwrite("m", &sequences::PointSeq::m)
      .def_readwrite("points", &sequences::PointSeq::points)
      .def_readwrite("labels", &sequences::PointSeq::labels)
      .def("__len__", &sequences::PointSeq::size);

  py::class_<feasibility::ControlPair>(m, "ControlPair")
      .def(py::init([](std::size_t index, Point x, Point y) { return feasibility::ControlPair{index, x, y}; }),
           py::arg("index"), py::arg("x"), py::arg("y"))
      .def_readwrite("index", &feasibility::ControlPair::index)
      .def_readwrite("x", &feasibility::ControlPair::x)
      .def_readwrite("y", &feasibility::ControlPair::y);

  m.def("gen_lattice", [](std::size_t mm, long R) { return sequences::gen_lattice(mm, R); });
  m.def("gen_pow2", [](std::size_t d, std::size_t K) { return sequences::gen_pow2(d, K); });
  m.def(
      "counting_function",
      [](const sequences::PointSeq& s, std::size_t d, std::size_t nmax) {
        auto r = sequences::counting_function(s, d, nmax);
        return py::make_tuple(r.counts, r.ratios, r.sup_ratio());
      },
      "(counts, ratios, sup ratio) for n = 1..nmax");

  m.def("build_block", [](unsigned long j, unsigned long n, std::size_t d, std::vector<Scalar> xs) {
    return controller1d::build_block(j, n, d, xs);
  });
  m.def(
      "feasible_control_check",
      [](const std::vector<feasibility::ControlPair>& pairs, const Scalar& j, std::size_t d, const Scalar& n) {
        auto v = feasibility::feasible_control_check(pairs, j, d, n);
        return v.controlled;
      },
      "True when every j-Lipschitz f with |f(0)| <= j on [0, n] is controlled");
  m.def(
      "evade",
      [](std::vector<feasibility::ControlPair> pairs, std::size_t d) {
        pairs = feasibility::sort_by_radius(std::move(pairs));
        auto params = feasibility::compute_params(pairs, d);
        auto trace = feasibility::evader_trace(pairs, d, params);
        auto rep = feasibility::check_measure_bound(trace);
        py::dict out;
        out["alpha"] = params.alpha;
        out["beta"] = params.beta;
        out["measures"] = trace.measures;
        std::vector<Scalar> margins;
        for (const auto& s : rep.steps) margins.push_back(s.margin);
        out["margins"] = margins;
        out["bound_ok"] = rep.ok;
        return out;
      },
      "Feasible-set trace summary for a pair list");

  py::class_<harness::SampledLipschitz>(m, "SampledLipschitz")
      .def_property_readonly("m", &harness::SampledLipschitz::m)
      .def_property_readonly("d", &harness::SampledLipschitz::d)
      .def("evaluate", [](const harness::SampledLipschitz& f,
                          const std::vector<Scalar>& x) { return f.evaluate(std::span<const Scalar>(x)); })
      .def("edge_slope", &harness::SampledLipschitz::edge_slope)
      .def("lipschitz_bound", &harness::SampledLipschitz::lipschitz_bound);

  m.def("sample_lipschitz", [](std::size_t mm, std::size_t d, const Scalar& j, Point lo, Point hi, const Scalar& h,
                               std::uint64_t seed) {
    return harness::sample_lipschitz(mm, d, j, geometry::Box(lo, hi), h, seed);
  });
  m.def("lattice_counterexample", &harness::lattice_counterexample);
  m.def(
      "game_run",
      [](const std::vector<feasibility::ControlPair>& pairs, const std::vector<harness::SampledLipschitz>& fs) {
        auto r = harness::game_run(pairs, fs);
        std::vector<std::optional<Scalar>> margins;
        for (const auto& e : r.entries) margins.push_back(e.margin);
        return py::make_tuple(r.controlled_fraction, margins);
      },
      "(controlled fraction, margins); a margin of None means no pairs");

  m.def("derive_params", [](const sequences::PointSeq& s, unsigned long j, std::size_t d) {
    auto p = controllermd::derive_params(s, j, d);
    py::dict out;
    out["eps"] = p.eps;
    out["c"] = Scalar(p.c);
    out["alpha"] = p.alpha;
    out["t0"] = p.t0;
    out["t1"] = p.t1;
    out["l"] = p.l;
    return out;
  });
}
