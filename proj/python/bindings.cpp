#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "oscq/analysis.hpp"
#include "oscq/eigen_qr.hpp"
#include "oscq/errors.hpp"
#include "oscq/floquet.hpp"
#include "oscq/models.hpp"
#include "oscq/report.hpp"

namespace py = pybind11;
using namespace oscq;

namespace {

using Overrides = std::vector<std::pair<std::string, double>>;

struct Prepared {
    DaeSystem model;
    PeriodicSteadyState pss;
};

Prepared prepare(const std::string& name, const Overrides& set, const std::string& method, int steps) {
    const ModelSpec& spec = find_model(name);
    const ParameterSet p = spec.defaults.with(set);
    PssOptions o;
    o.integrator.method = parse_method(method);
    o.steps_per_cycle = steps;
    DaeSystem m = spec.build(p);
    PeriodicSteadyState pss = find_pss(m, spec.seed(p), spec.period_hint(p), o);
    return {std::move(m), std::move(pss)};
}

// JSON text; the Python side decodes it.
std::string analyze(const std::string& name, const Overrides& set, const std::string& method, int steps,
                    double unit_tol) {
    const Prepared s = prepare(name, set, method, steps);
    nlohmann::json j = monodromy_json(analyze_monodromy(s.model, s.pss, unit_tol));
    j["pss"] = pss_summary_json(s.pss);
    return j.dump();
}

std::string perturb(const std::string& name, const Overrides& set, double eps, int cycles, const std::string& direction,
                    std::uint64_t seed) {
    const Prepared s = prepare(name, set, "trap", 2000);
    PerturbOptions o;
    o.eps = eps;
    o.cycles = cycles;
    const PerturbDirection d = direction == "random" ? PerturbDirection::random(seed) : PerturbDirection::lambda2();
    return decay_json(perturb_and_measure(s.model, s.pss, d, o, IntegratorConfig{})).dump();
}

} // namespace

PYBIND11_MODULE(_oscq, m) {
    // translators run last-registered first, so the base class goes first
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
    py::register_exception<AnalysisError>(m, "AnalysisError", PyExc_ValueError);

    m.def("models", [] {
        std::vector<std::pair<std::string, Overrides>> out;
        for (const ModelSpec& s : model_registry()) out.emplace_back(s.name, s.defaults.entries());
        return out;
    });
    m.def("analyze", &analyze, py::arg("model"), py::arg("set"), py::arg("method"), py::arg("steps_per_cycle"),
          py::arg("unit_tol"));
    m.def("perturb", &perturb, py::arg("model"), py::arg("set"), py::arg("eps"), py::arg("cycles"),
          py::arg("direction"), py::arg("seed"));
    m.def("eigen_spectrum", [](const Matrix& a) { return eigen_spectrum(a); });
    m.def("q_from_lambda2", &q_from_lambda2);
    m.def("verdict", [](const std::vector<Complex>& mult, double unit_tol) {
        const QReport r = q_factor(mult, unit_tol);
        return py::make_tuple(to_string(r.verdict), r.n_unit, r.lambda2_modulus, r.q_value);
    });
    m.def("negative_power", &negative_power, py::arg("gain"), py::arg("steepness"), py::arg("vmax"),
          py::arg("points") = 512);
    m.def("balance_point", [](double gain, double steepness, const std::vector<double>& grid) {
        return power_balance_curve(gain, steepness, 1.0, grid).intersection_vmax;
    });
    m.def("ql1", &ql1);
    m.def("ql2", &ql2);
    m.def("equivalence_gap", &equivalence_gap);
}
