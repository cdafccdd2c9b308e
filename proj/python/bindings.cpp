#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "slag/analysis.hpp"
#include "slag/cksolve.hpp"
#include "slag/errors.hpp"
#include "slag/geometry.hpp"
#include "slag/pipeline.hpp"
#include "slag/seed.hpp"

namespace py = pybind11;
using namespace slag;

namespace {

// Reports cross the boundary as JSON text; the Python side decodes them.
std::string report_text(const VerificationReport& r) { return r.to_json().dump(); }

struct Handle {
  HandlePtr ptr;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Singular special Lagrangian solutions: construction and verification";

  // Translators run newest first, so the base class goes in before its subclasses.
  const auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<PipelineError>(m, "PipelineError", base.ptr());

  m.def("coeff_a", [](int mm) {
    std::vector<std::string> out;
    for (const auto& c : coeff_a(mm)) out.push_back(format_rational(c));
    return out;
  });
  m.def("property_2_1_report", [](int mm, const std::string& eps, int cap) {
    return report_text(verify_property_2_1({mm, parse_rational(eps), Rational(1, 10)}, cap));
  });
  m.def("ck_solve_report", [](int mm, const std::string& eps, int cap) {
    const auto P = build_P({mm, parse_rational(eps), Rational(1, 10)}, cap);
    return report_text(verify_ck_solution(ck_solve(CauchyData::from_series(P), cap), P, mm));
  });

  m.def("eig3_sym", [](const Mat3& a) {
    const auto e = eig3_sym(SymMat3::from_mat(a));
    return py::make_tuple(e.lambda, e.phase);
  });

  py::class_<Handle>(m, "Handle")
      .def_property_readonly("valid_radius", [](const Handle& h) { return h.ptr->valid_radius(); })
      .def("value", [](const Handle& h, const Vec3& y) { return h.ptr->value(Point3(y)); })
      .def("gradient", [](const Handle& h, const Vec3& y) { return h.ptr->gradient(Point3(y)); })
      .def("hessian", [](const Handle& h, const Vec3& y) { return h.ptr->hessian(Point3(y)).to_mat(); })
      .def("phase", [](const Handle& h, const Vec3& y) { return eig3_sym(h.ptr->hessian(Point3(y))).phase; });

  py::class_<SeriesSolution>(m, "SeriesSolution")
      .def_property_readonly("m", [](const SeriesSolution& s) { return s.params.m; })
      .def_property_readonly("eps", [](const SeriesSolution& s) { return format_rational(s.params.eps); })
      .def_readonly("cap", &SeriesSolution::cap)
      .def_readonly("radius", &SeriesSolution::radius)
      .def_readonly("agreement_order", &SeriesSolution::agreement_order)
      .def_property_readonly("scaled", [](const SeriesSolution& s) { return Handle{s.scaled}; })
      .def_property_readonly("report_json", [](const SeriesSolution& s) { return report_text(s.report); });

  py::class_<SingularSolution>(m, "SingularSolution")
      .def_property_readonly("m", [](const SingularSolution& s) { return s.params.m; })
      .def_property_readonly("theta", [](const SingularSolution& s) { return s.params.theta; })
      .def_readonly("alpha", &SingularSolution::alpha)
      .def_readonly("tau", &SingularSolution::tau)
      .def_readonly("negated", &SingularSolution::negated)
      .def_property_readonly("handle", [](const SingularSolution& s) { return Handle{s.handle}; })
      .def_property_readonly("report_json", [](const SingularSolution& s) { return report_text(s.report); });

  py::class_<SmoothFamily>(m, "SmoothFamily")
      .def_property_readonly("eps", [](const SmoothFamily& f) { return f.params.eps; })
      .def_readonly("scale", &SmoothFamily::scale)
      .def_property_readonly("handle", [](const SmoothFamily& f) { return Handle{f.handle}; })
      .def_property_readonly("report_json", [](const SmoothFamily& f) { return report_text(f.report); });

  m.def(
      "build_series",
      [](int mm, int cap, std::uint64_t seed) {
        SeriesOptions opt;
        opt.solve_cap = cap;
        opt.seed = seed;
        return build_series_solution(mm, opt);
      },
      py::arg("m"), py::arg("cap") = 24, py::arg("seed") = 42);
  m.def(
      "build_singular",
      [](const SeriesSolution& base, double theta, std::uint64_t seed) {
        return build_singular_solution({base.params.m, theta, 0.1}, base, seed);
      },
      py::arg("series"), py::arg("theta") = 0.0, py::arg("seed") = 42);
  m.def(
      "build_family",
      [](const SeriesSolution& base, double theta, double eps, std::uint64_t seed) {
        return build_smooth_family({base.params.m, theta, eps}, base, seed);
      },
      py::arg("series"), py::arg("theta") = 0.0, py::arg("eps") = 0.1, py::arg("seed") = 42);

  m.def(
      "holder_report",
      [](const Handle& h, int mm, std::uint64_t seed) { return report_text(holder_exponent(*h.ptr, mm, seed)); },
      py::arg("handle"), py::arg("m"), py::arg("seed") = 42);
  m.def(
      "phase_report",
      [](const Handle& h, double target, int n, std::uint64_t seed) {
        return report_text(phase_conservation(*h.ptr, target, n, seed));
      },
      py::arg("handle"), py::arg("target"), py::arg("n") = 1000, py::arg("seed") = 42);
  m.def(
      "sobolev_report",
      [](const SingularSolution& s, int samples, std::uint64_t seed) {
        SobolevOptions opt;
        opt.samples_per_shell = samples;
        opt.seed = seed;
        return report_text(sobolev_profile(s, opt));
      },
      py::arg("singular"), py::arg("samples_per_shell") = 1000000, py::arg("seed") = 42);
  m.def(
      "family_report",
      [](const SmoothFamily& f, int neighbors, std::uint64_t seed) {
        return report_text(verify_smooth_family(f, neighbors, seed));
      },
      py::arg("family"), py::arg("neighbors") = 1000, py::arg("seed") = 42);
  m.def("test_field_ids", &test_field_ids);
  m.def(
      "weak_residual_report",
      [](const SingularSolution& s, const std::string& id, const std::vector<double>& deltas) {
        return report_text(weak_residual(s, id, deltas));
      },
      py::arg("singular"), py::arg("field"), py::arg("deltas"));

  m.def("default_config_text", [] { return serialize_config(RunConfig{}); });
  m.def("normalize_config_text", [](const std::string& text) { return serialize_config(parse_config(text)); });
  m.def(
      "run_pipeline_text",
      [](const std::string& text) {
        const RunConfig cfg = parse_config(text);
        py::gil_scoped_release release;
        return run_pipeline(cfg);
      },
      py::arg("config_text"));
  m.def(
      "emit_plotdata",
      [](const std::vector<std::filesystem::path>& reports, const std::string& run_id) {
        return emit_plotdata(reports, run_id);
      },
      py::arg("reports"), py::arg("run_id") = "");
}
