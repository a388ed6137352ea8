#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "bpmhd/analysis.hpp"
#include "bpmhd/config.hpp"
#include "bpmhd/dynamics.hpp"
#include "bpmhd/rheology.hpp"
#include "bpmhd/tangent.hpp"

namespace py = pybind11;
using namespace bpmhd;

namespace {

/// Decaying or forced run driven from scalar arguments; returns (t, y,
/// diss_total) tuples.  Convenience surface for scripting and smoke tests.
std::vector<std::tuple<double, double, double>> run_energy_series(
    const PhysicalParams& p, const DomainSpec& dom, double dt, int n_steps, int stride,
    uint64_t seed, double init_amplitude, double forcing_amplitude) {
    const Grid g(dom);
    RunConfig cfg;
    cfg.physics = p;
    cfg.domain = dom;
    cfg.initial.type = InitialSpec::Type::RandomBand;
    cfg.initial.seed = seed;
    cfg.initial.amplitude = init_amplitude;
    if (forcing_amplitude > 0.0) {
        cfg.forcing.type = ForcingSpec::Type::SingleMode;
        cfg.forcing.amplitude = forcing_amplitude;
    }
    SpectralField f = build_forcing(cfg);
    State s = build_initial_state(cfg);

    StepperConfig sc;
    sc.dt = dt;
    Stepper stepper(cfg.physics, sc);
    std::vector<std::tuple<double, double, double>> out;
    auto push = [&](const State& st) {
        const EnergyRecord r = record_energy(st, f, cfg.physics);
        out.emplace_back(r.t, r.y, r.diss_bipolar + r.diss_gamma + r.diss_mag);
    };
    push(s);
    for (int i = 1; i <= n_steps; ++i) {
        s = stepper.step(s, f);
        if (i % stride == 0 || i == n_steps) push(s);
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "spectral shear-thinning MHD solver and attractor analysis";

    py::class_<PhysicalParams>(m, "PhysicalParams")
        .def(py::init<>())
        .def_readwrite("eps", &PhysicalParams::eps)
        .def_readwrite("mu0", &PhysicalParams::mu0)
        .def_readwrite("mu1", &PhysicalParams::mu1)
        .def_readwrite("alpha", &PhysicalParams::alpha)
        .def_readwrite("mu", &PhysicalParams::mu)
        .def_readwrite("s_diff", &PhysicalParams::s_diff)
        .def_readwrite("f_amp", &PhysicalParams::f_amp);

    py::class_<DomainSpec>(m, "DomainSpec")
        .def(py::init<>())
        .def_readwrite("dim", &DomainSpec::dim)
        .def_readwrite("length", &DomainSpec::length)
        .def_readwrite("resolution", &DomainSpec::resolution);

    py::class_<DomainConstants>(m, "DomainConstants")
        .def(py::init<>())
        .def_readwrite("korn", &DomainConstants::korn)
        .def_readwrite("embed", &DomainConstants::embed)
        .def_readwrite("d_const", &DomainConstants::d_const)
        .def_readwrite("stokes_c", &DomainConstants::stokes_c)
        .def_readwrite("lambda1", &DomainConstants::lambda1)
        .def_readwrite("c_tilde", &DomainConstants::c_tilde)
        .def_readwrite("gronwall_rate_b", &DomainConstants::gronwall_rate_b);

    py::class_<KappaReport>(m, "KappaReport")
        .def_readonly("r", &KappaReport::r)
        .def_readonly("kappa0", &KappaReport::kappa0)
        .def_readonly("kappa1", &KappaReport::kappa1)
        .def_readonly("kappa2", &KappaReport::kappa2)
        .def_readonly("kappa3", &KappaReport::kappa3)
        .def_readonly("rho2", &KappaReport::rho2);

    py::class_<DimensionBoundReport>(m, "DimensionBoundReport")
        .def_readonly("delta_prime", &DimensionBoundReport::delta_prime)
        .def_readonly("gamma_prime", &DimensionBoundReport::gamma_prime)
        .def_readonly("lambda_big", &DimensionBoundReport::lambda_big)
        .def_readonly("nu0", &DimensionBoundReport::nu0)
        .def_readonly("rho1_sq", &DimensionBoundReport::rho1_sq)
        .def_readonly("kappa0", &DimensionBoundReport::kappa0)
        .def_readonly("kappa1", &DimensionBoundReport::kappa1)
        .def_readonly("kappa2", &DimensionBoundReport::kappa2)
        .def_readonly("kappa3", &DimensionBoundReport::kappa3)
        .def_readonly("rho2", &DimensionBoundReport::rho2)
        .def_readonly("bracket", &DimensionBoundReport::bracket)
        .def_readonly("m_bound", &DimensionBoundReport::m_bound)
        .def_readonly("alpha_zero_branch", &DimensionBoundReport::alpha_zero_branch)
        .def_readonly("kappa_chain_diverged", &DimensionBoundReport::kappa_chain_diverged);

    m.def("validate",
          [](const PhysicalParams& p, const DomainSpec& d) { return validate(p, d).violations; },
          "list of violated invariants; empty when the configuration is valid");
    m.def("lambda1", &lambda1, "smallest eigenvalue of -Laplacian on the mean-zero box");
    m.def("derive_constants", &derive_constants,
          "lambda1 and the discrete Korn constant for a domain, placeholders elsewhere");
    m.def("nu0", &nu0);
    m.def("nu1", &nu1);
    m.def("absorbing_radius_sq", &absorbing_radius_sq);
    m.def("kappa_chain", &kappa_chain, py::arg("params"), py::arg("constants"), py::arg("r"));
    m.def("gronwall_envelope", &gronwall_envelope);

    m.def("gamma_visc", &gamma_visc, py::arg("strain_sq"), py::arg("params"));
    m.def("sigma_potential", &sigma_potential, py::arg("s"), py::arg("params"));

    m.def("discrete_korn", &discrete_korn);
    m.def("delta_prime", &delta_prime);
    m.def("gamma_prime", &gamma_prime);
    m.def("lambda_big", &lambda_big);
    m.def("dimension_bound", &dimension_bound, py::arg("params"), py::arg("constants"),
          py::arg("dim"), py::arg("kappa_window_r") = 1.0);

    m.def("run_energy_series", &run_energy_series, py::arg("params"), py::arg("domain"),
          py::arg("dt"), py::arg("n_steps"), py::arg("stride") = 1, py::arg("seed") = 1,
          py::arg("init_amplitude") = 1.0, py::arg("forcing_amplitude") = 0.0,
          "integrate and return (t, |u|^2+|b|^2, total dissipation) samples");
}
