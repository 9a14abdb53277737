#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "splitlab/asymptotics.hpp"
#include "splitlab/cli_report.hpp"
#include "splitlab/errors.hpp"
#include "splitlab/geodesic.hpp"
#include "splitlab/hyperbolic.hpp"
#include "splitlab/invariants.hpp"
#include "splitlab/jacobi.hpp"
#include "splitlab/metric.hpp"

namespace py = pybind11;
using namespace splitlab;

namespace {

MetricSpec make_metric(const std::string& kind, double L, double eps, double alpha, const std::string& potential) {
  switch (metric_kind_from_string(kind)) {
    case MetricKind::Product:
      return MetricSpec::product(L);
    case MetricKind::Warped: {
      WarpProfile w;
      w.eps = eps;
      return MetricSpec::warped(w);
    }
    case MetricKind::Twisted:
      return MetricSpec::twisted(alpha, potential);
  }
  throw DomainError("unknown metric kind");
}

Eigen::MatrixXd stack(const std::vector<Vec3>& rows) {
  Eigen::MatrixXd m(rows.size(), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(i) = rows[i].transpose();
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Geodesics, Jacobi fields and spectral invariants of metrics on H^2 x R.";

  static py::exception<Error> base(m, "Error");
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<AccuracyError>(m, "AccuracyError", base.ptr());
  py::register_exception<IntegrationError>(m, "IntegrationError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());

  py::class_<MetricSpec>(m, "MetricSpec")
      .def_static("product", &MetricSpec::product, py::arg("L"))
      .def_static("warped", [](double eps, double cx, double cy, double r0, double r1) {
        WarpProfile w;
        w.eps = eps;
        w.center = HPoint{cx, cy};
        w.r0 = r0;
        w.r1 = r1;
        return MetricSpec::warped(w);
      }, py::arg("eps") = 0.1, py::arg("center_x") = 0.0, py::arg("center_y") = 1.0, py::arg("r0") = 0.5,
         py::arg("r1") = 0.75)
      .def_static("twisted", &MetricSpec::twisted, py::arg("alpha"), py::arg("potential") = "log_y")
      .def_property_readonly("kind", [](const MetricSpec& s) { return to_string(s.kind()); })
      .def_property_readonly("L", &MetricSpec::L);

  m.def("metric", &make_metric, py::arg("kind"), py::arg("L") = 1.0, py::arg("eps") = 0.1, py::arg("alpha") = 0.0,
        py::arg("potential") = "log_y");

  // hyperbolic plane
  m.def("hyp_distance", [](double x1, double y1, double x2, double y2) {
    return hyp_distance(HPoint{x1, y1}, HPoint{x2, y2});
  });
  m.def("translation_length", [](double a, double b, double c, double d) {
    return translation_length(make_mobius(a, b, c, d));
  });
  m.def("mobius_apply", [](double a, double b, double c, double d, double x, double y) {
    const HPoint p = mobius_apply(make_mobius(a, b, c, d), HPoint{x, y});
    return std::make_pair(p.x, p.y);
  });
  m.def("vertical_busemann", [](double x, double y) { return vertical_busemann(HPoint{x, y}); });
  m.def("disk_area", &disk_area, py::arg("r"), py::arg("kappa") = 1.0);

  // metric model
  m.def("metric_at", [](const MetricSpec& s, double x, double y, double t) { return metric_at(s, ChartPoint(x, y, t)); });
  m.def("sectional_curvatures", [](const MetricSpec& s, double x, double y, double t) {
    const auto c = curvature_at(s, ChartPoint(x, y, t));
    return std::make_tuple(c.sectionals.at({0, 1}), c.sectionals.at({0, 2}), c.sectionals.at({1, 2}));
  });

  // geodesics and Jacobi fields
  m.def("integrate_geodesic", [](const MetricSpec& s, std::array<double, 3> q0, std::array<double, 3> v0, double T,
                                 double step) {
    const ChartPoint q(q0[0], q0[1], q0[2]);
    const auto tr = integrate_geodesic(s, q, normalize_velocity(s, q, Vec3(v0[0], v0[1], v0[2])), T, step);
    return py::dict(py::arg("times") = tr.times, py::arg("q") = stack(tr.q), py::arg("v") = stack(tr.v),
                    py::arg("truncated") = tr.truncated);
  }, py::arg("spec"), py::arg("q0"), py::arg("v0"), py::arg("T"), py::arg("step") = 1e-3);
  m.def("first_conjugate_point", [](const MetricSpec& s, std::array<double, 3> q0, std::array<double, 3> v0,
                                    double Tmax, double step) {
    const ChartPoint q(q0[0], q0[1], q0[2]);
    return first_conjugate_point(s, q, normalize_velocity(s, q, Vec3(v0[0], v0[1], v0[2])), Tmax, step);
  }, py::arg("spec"), py::arg("q0"), py::arg("v0"), py::arg("Tmax"), py::arg("step") = 1e-3);
  m.def("stable_riccati", [](const MetricSpec& s, std::array<double, 3> q0, std::array<double, 3> v0, double T,
                             double step) {
    const ChartPoint q(q0[0], q0[1], q0[2]);
    IntegratorOptions o;
    o.step = step;
    const auto tr = integrate_geodesic(s, q, normalize_velocity(s, q, Vec3(v0[0], v0[1], v0[2])), T, o, true);
    return Mat2(riccati_stable(tr, T).U.front());
  }, py::arg("spec"), py::arg("q0"), py::arg("v0"), py::arg("T"), py::arg("step") = 1e-3);

  // asymptotics
  m.def("busemann_limit", [](double L, double x, double y, double t) {
    return busemann_limit(L, ProductPoint{HPoint{x, y}, t});
  });
  m.def("ball_volume", &ball_volume, py::arg("L"), py::arg("R"), py::arg("kappa") = 1.0);
  m.def("volume_entropy", [](double L, double R_max, double kappa) {
    const auto e = volume_entropy(L, R_max, kappa);
    return py::dict(py::arg("ratio") = e.ratio, py::arg("fitted") = e.fitted, py::arg("log_power") = e.log_power);
  }, py::arg("L"), py::arg("R_max"), py::arg("kappa") = 1.0);

  // invariants
  m.def("product_spectrum", [](std::vector<double> sig, double L, double cutoff) {
    return product_spectrum(SigmaSpectrum(std::move(sig)), L, cutoff);
  });
  m.def("spectral_gap", [](std::vector<double> sig, double L) { return spectral_gap(SigmaSpectrum(std::move(sig)), L); });
  m.def("mls_length", &mls_length);
  m.def("isoperimetric_bound", &isoperimetric_bound);
  m.def("epsilon0", [](double lambda1, double L, double diam) {
    const auto g = epsilon0(lambda1, L, diam);
    return std::make_pair(g.delta, g.eps0);
  });
  m.def("moduli_dimension", &moduli_dimension);
  m.def("curvature_deviation", [](const MetricSpec& s, std::size_t N, std::uint64_t seed) {
    const auto e = curvature_deviation(s, SamplingBox{}, N, seed);
    return std::make_pair(e.estimate, e.stderr_);
  }, py::arg("spec"), py::arg("N"), py::arg("seed") = 0);

  // command line
  m.def("run_subcommand", &run_subcommand, py::arg("args"),
        "Runs a CLI subcommand in-process; returns the exit code (0, 2 or 3).");

  m.attr("__version__") = SPLITLAB_VERSION;
}
