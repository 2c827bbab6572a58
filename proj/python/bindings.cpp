#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "slabdens/basis.hpp"
#include "slabdens/bench.hpp"
#include "slabdens/bounds.hpp"
#include "slabdens/density.hpp"
#include "slabdens/errors.hpp"
#include "slabdens/estimators.hpp"
#include "slabdens/fnspace.hpp"

namespace py = pybind11;
using namespace slabdens;

namespace {

Sample sample_from_points(const std::vector<double>& points) {
  Sample s;
  s.points = points;
  return s;
}

FamilyWithCertificate build_family(const std::string& spec, const std::vector<double>& points) {
  if (points.empty()) return family_from_spec(spec, nullptr);
  const Sample s = sample_from_points(points);
  return family_from_spec(spec, &s);
}

SpanElement element_from(const FamilyWithCertificate& fwc, const std::vector<double>& coeffs) {
  if (static_cast<int>(coeffs.size()) != fwc.family->size())
    throw std::invalid_argument("coefficient count does not match the family size");
  Eigen::VectorXd g(fwc.family->size());
  for (int k = 0; k < fwc.family->size(); ++k) g[k] = coeffs[static_cast<std::size_t>(k)];
  return SpanElement(fwc.family, std::move(g));
}

std::vector<double> coeffs_of(const SpanElement& g) {
  return {g.coefficients().data(), g.coefficients().data() + g.coefficients().size()};
}

EstimatorConfig config_from(const std::string& method, const std::string& union_bound, double eps,
                            std::optional<double> cap) {
  EstimatorConfig cfg;
  cfg.method = interval_method_from_string(method, union_bound);
  cfg.eps = eps;
  cfg.cap_c = cap;
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "density estimation by projection onto per-coefficient confidence slabs";
  m.attr("__version__") = kVersion;

  py::register_exception<Error>(m, "SlabdensError");

  py::class_<Density>(m, "Density")
      .def_property_readonly("name", &Density::name)
      .def("pdf", &Density::pdf, py::arg("t"))
      .def("normalization", &Density::normalization)
      .def("sup_pdf", &Density::sup_pdf)
      .def("breakpoints", &Density::breakpoints);
  m.def("density", &make_density, py::arg("name"),
        "one of: doppler, heavisine, blocks, uniform, cosine");
  m.def(
      "sample",
      [](const std::string& name, int n, std::uint64_t seed, std::uint64_t stream) {
        return draw_sample(make_density(name), n, seed, stream).points;
      },
      py::arg("density"), py::arg("n"), py::arg("seed"), py::arg("stream") = 0,
      "seeded draw from a test density");

  py::class_<FamilyWithCertificate>(m, "Family")
      .def_property_readonly("size",
                             [](const FamilyWithCertificate& f) { return f.family->size(); })
      .def("norm_sq",
           [](const FamilyWithCertificate& f, int k) { return f.family->norm_sq(k); })
      .def("certificate",
           [](const FamilyWithCertificate& f, int k) { return f.certificate.C(k); })
      .def("eval",
           [](const FamilyWithCertificate& f, int k, double x) { return f.family->eval(k, x); })
      .def("label", [](const FamilyWithCertificate& f, int k) { return f.family->label(k); })
      .def("descriptor",
           [](const FamilyWithCertificate& f) { return f.family->descriptor().dump(); })
      .def("orthonormal",
           [](const FamilyWithCertificate& f) { return f.family->orthonormal(); });
  m.def("family", &build_family, py::arg("spec"), py::arg("points") = std::vector<double>{},
        "family preset name or JSON descriptor; data-dependent presets need points");

  m.def(
      "estimate_coefficient",
      [](const std::vector<double>& points, const FamilyWithCertificate& fwc, int k) {
        const CoefficientEstimate est =
            estimate_coefficient(sample_from_points(points), *fwc.family, k, DetailPolicy::none);
        return py::dict(py::arg("alpha_hat") = est.alpha_hat, py::arg("n") = est.n,
                        py::arg("sum_sq") = est.sum_sq, py::arg("v_hat") = est.v_hat);
      },
      py::arg("points"), py::arg("family"), py::arg("k"));

  m.def(
      "interval",
      [](const std::vector<double>& points, const FamilyWithCertificate& fwc, int k,
         const std::string& method, const std::string& union_bound, double eps) {
        const ConfidenceInterval iv =
            interval_for(sample_from_points(points), fwc, k,
                         interval_method_from_string(method, union_bound), eps);
        return py::make_tuple(iv.lower, iv.upper, iv.fallback);
      },
      py::arg("points"), py::arg("family"), py::arg("k"), py::arg("method"),
      py::arg("union") = "all", py::arg("eps") = 0.1,
      "confidence interval (lower, upper, fallback) for one coefficient");

  m.def(
      "fit",
      [](const std::vector<double>& points, const FamilyWithCertificate& fwc,
         const std::string& method, const std::string& union_bound, const std::string& algo,
         double eps, std::optional<double> cap) {
        const Sample s = sample_from_points(points);
        const EstimatorConfig cfg = config_from(method, union_bound, eps, cap);
        py::dict out;
        if (algo == "greedy") {
          const FitResult fit = fit_greedy(s, fwc, cfg);
          out["coefficients"] = coeffs_of(fit.estimate);
          out["steps"] = fit.trace.n_s;
          out["hit_max_iter"] = fit.trace.hit_max_iter;
        } else if (algo == "intersection") {
          out["coefficients"] = coeffs_of(fit_intersection(s, fwc, cfg));
        } else if (algo == "soft") {
          out["coefficients"] = coeffs_of(soft_threshold(s, fwc, cfg));
        } else if (algo == "dual") {
          const std::vector<Slab> slabs = build_slabs(s, fwc, cfg.method, cfg.eps);
          SpanElement g = dual_solve(slabs, gram(*fwc.family), fwc.family);
          if (cap) g = project_cap(g, *cap);
          out["coefficients"] = coeffs_of(g);
        } else {
          throw std::invalid_argument("unknown algorithm: " + algo);
        }
        return out;
      },
      py::arg("points"), py::arg("family"), py::arg("method") = "improved-grid",
      py::arg("union") = "all", py::arg("algo") = "greedy", py::arg("eps") = 0.1,
      py::arg("cap") = std::nullopt,
      "fit coefficients by greedy, intersection, soft, or dual slab projection");

  m.def(
      "evaluate",
      [](const FamilyWithCertificate& fwc, const std::vector<double>& coeffs, double x) {
        return element_from(fwc, coeffs).evaluate(x);
      },
      py::arg("family"), py::arg("coefficients"), py::arg("x"));

  m.def(
      "risk",
      [](const FamilyWithCertificate& fwc, const std::vector<double>& coeffs,
         const std::string& density) {
        return dist2_to_density(element_from(fwc, coeffs), make_density(density));
      },
      py::arg("family"), py::arg("coefficients"), py::arg("density"),
      "squared L2 distance between the span element and a test density");

  m.def(
      "hard_threshold",
      [](const std::vector<double>& points, int resolution, double kappa, bool level_scaled) {
        return coeffs_of(
            hard_threshold_baseline(sample_from_points(points), resolution, kappa, level_scaled));
      },
      py::arg("points"), py::arg("resolution"), py::arg("kappa") = 0.7,
      py::arg("level_scaled") = false);

  m.def(
      "figure2_csv",
      [](long n, long reps, double eps, std::uint64_t seed) {
        return emit_csv(run_figure2(n, reps, eps, seed));
      },
      py::arg("n") = 1024, py::arg("reps") = 20, py::arg("eps") = 0.1, py::arg("seed") = 1);
  m.def(
      "coverage_csv",
      [](const std::string& density, const std::string& basis, const std::string& method,
         double eps, long reps, std::uint64_t seed, long n) {
        return emit_csv(run_coverage(density, basis, interval_method_from_string(method, "all"),
                                     eps, reps, seed, n));
      },
      py::arg("density"), py::arg("basis"), py::arg("method"), py::arg("eps") = 0.1,
      py::arg("reps") = 200, py::arg("seed") = 1, py::arg("n") = 256);
  m.def(
      "rates_csv",
      [](const std::string& density, const std::string& basis, long n_min, long n_max, long reps,
         std::uint64_t seed) { return emit_csv(run_rates(density, basis, n_min, n_max, reps, seed)); },
      py::arg("density") = "cosine", py::arg("basis") = "trig", py::arg("n_min") = 128,
      py::arg("n_max") = 4096, py::arg("reps") = 10, py::arg("seed") = 1);
}
