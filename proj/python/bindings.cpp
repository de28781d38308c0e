#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cocyclelab/errors.hpp"
#include "cocyclelab/projective.hpp"
#include "cocyclelab/runner.hpp"

namespace py = pybind11;
using namespace cocyclelab;

namespace {

BaseSystem base_named(const std::string& name, int symbols) {
  if (name == "catmap") return BaseSystem::cat_map();
  if (name == "fullshift") return BaseSystem::full_shift(symbols);
  throw ConfigError("base must be 'catmap' or 'fullshift'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Linear cocycles over hyperbolic bases";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<RefusalError>(m, "RefusalError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<GroupDescriptor>(m, "Group")
      .def_readonly("d", &GroupDescriptor::d)
      .def_readwrite("membership_tol", &GroupDescriptor::membership_tol)
      .def_property_readonly("lie_dim", &GroupDescriptor::lie_dim)
      .def("describe", &GroupDescriptor::describe)
      .def("__repr__", [](const GroupDescriptor& g) { return "<Group " + g.describe() + ">"; });

  m.def(
      "make_group",
      [](const std::string& family, const std::string& field, int d, std::optional<std::pair<int, int>> signature) {
        return make_group(parse_family(family), parse_field(field), d, signature);
      },
      py::arg("family"), py::arg("field") = "real", py::arg("d") = 2, py::arg("signature") = py::none());

  m.def(
      "contains", [](const GroupDescriptor& g, const Mat& x) { return contains(g, x).member; }, py::arg("group"),
      py::arg("matrix"));

  m.def(
      "lie_basis", [](const GroupDescriptor& g) { return lie_basis(g); }, py::arg("group"));

  m.def(
      "constant_exponents",
      [](const GroupDescriptor& g, const Mat& value, const std::string& base, std::int64_t n, std::uint64_t seed,
         int symbols) {
        const auto sys = base_named(base, symbols);
        const auto a = constant_cocycle(g, sys, value);
        Rng rng(seed);
        py::gil_scoped_release release;
        return lyapunov_spectrum(a, sample_orbit_start(sys, rng, n), n).exponents;
      },
      "Lyapunov spectrum of a constant cocycle from a random start", py::arg("group"), py::arg("value"),
      py::arg("base") = "catmap", py::arg("n") = 1000, py::arg("seed") = 1, py::arg("symbols") = 2);

  m.def(
      "common_invariant_measure",
      [](const Mat& g1, const Mat& g2) {
        const auto r = common_invariant_measure_test(g1, g2);
        return py::dict(py::arg("verdict") = to_string(r.verdict), py::arg("witness_kind") = r.witness_kind,
                        py::arg("witness_residual") = r.witness_residual, py::arg("growth_rate") = r.growth_rate);
      },
      py::arg("g1"), py::arg("g2"));

  m.def(
      "run",
      [](const std::string& command, const std::string& config, const std::vector<std::string>& overrides,
         std::optional<std::uint64_t> seed, std::optional<int> threads, std::optional<std::string> out) {
        RunRequest req;
        req.command = command;
        req.config = Config::parse(config, "<python>");
        for (const auto& s : overrides) req.config.set(s);
        req.seed = seed;
        req.threads = threads;
        req.out = out;
        std::ostringstream log;
        RunResult r;
        {
          py::gil_scoped_release release;
          r = run(req, log);
        }
        return py::dict(py::arg("exit_code") = r.exit_code, py::arg("error_kind") = r.error_kind,
                        py::arg("message") = r.message, py::arg("files") = r.files,
                        py::arg("summary_json") = r.summary_json, py::arg("log") = log.str());
      },
      "Run a CLI command on config text; returns exit status, files and the JSON summary", py::arg("command"),
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, py::arg("seed") = py::none(),
      py::arg("threads") = py::none(), py::arg("out") = py::none());

  m.def(
      "selftest",
      [](bool corrupt) {
        const auto r = selftest(corrupt);
        py::list cases;
        for (const auto& c : r.cases) cases.append(py::make_tuple(c.name, c.passed, c.detail));
        return cases;
      },
      py::arg("corrupt_tolerance") = false);

  m.def("commands", &command_names);
}
