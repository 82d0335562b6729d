#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scc/experiments.hpp"
#include "scc/metrology.hpp"

namespace py = pybind11;
using namespace scc;

namespace {

ModelParams make_params(int N, double lam, double q, int nu0, int nu1) {
    ModelParams p{N, lam, q, nu0, nu1};
    p.validate();
    return p;
}

KeyValueConfig config_from_dict(const py::dict& d) {
    KeyValueConfig cfg;
    for (const auto& item : d)
        cfg.set(py::str(item.first).cast<std::string>(),
                py::str(item.second).cast<std::string>());
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact Bethe-ansatz solver and interferometer simulator for the "
              "spin-changing-collision model";

    const py::object err = py::register_exception<Error>(m, "SccError");
    py::register_exception<ConfigError>(m, "SccConfigError", err.ptr());
    py::register_exception<PoleError>(m, "PoleError", err.ptr());
    py::register_exception<SolverError>(m, "SccSolverError", err.ptr());
    py::register_exception<NoDominantPeakError>(m, "NoDominantPeakError", err.ptr());

    py::class_<ModelParams>(m, "ModelParams")
        .def(py::init(&make_params), py::arg("N"), py::arg("lam"), py::arg("q"),
             py::arg("nu0") = 0, py::arg("nu1") = 0)
        .def_readonly("N", &ModelParams::N)
        .def_readonly("lam", &ModelParams::lambda)
        .def_readonly("q", &ModelParams::q)
        .def_readonly("nu0", &ModelParams::nu0)
        .def_readonly("nu1", &ModelParams::nu1)
        .def_property_readonly("n", &ModelParams::pairs)
        .def_property_readonly("g", &ModelParams::g)
        .def_property_readonly("d0", &ModelParams::d0)
        .def_property_readonly("d1", &ModelParams::d1)
        .def("__repr__", [](const ModelParams& p) {
            return "ModelParams(N=" + std::to_string(p.N) +
                   ", lam=" + std::to_string(p.lambda) + ", q=" + std::to_string(p.q) + ")";
        });

    py::class_<SectorMatrix>(m, "SectorMatrix")
        .def_readonly("diag", &SectorMatrix::diag)
        .def_readonly("offdiag", &SectorMatrix::offdiag)
        .def("dense", &SectorMatrix::dense)
        .def_property_readonly("dim", &SectorMatrix::dim);

    py::class_<Spectrum>(m, "Spectrum")
        .def_readonly("energies", &Spectrum::energies)
        .def_readonly("vectors", &Spectrum::vectors);

    py::class_<ConservedCharges>(m, "ConservedCharges")
        .def_readonly("r0", &ConservedCharges::r0)
        .def_readonly("r1", &ConservedCharges::r1);

    py::class_<BetheState>(m, "BetheState")
        .def_readonly("seed_index", &BetheState::seed_index)
        .def_readonly("rapidities", &BetheState::rapidities)
        .def_readonly("energy", &BetheState::energy)
        .def_readonly("r0", &BetheState::r0)
        .def_readonly("r1", &BetheState::r1)
        .def_readonly("residual_norm", &BetheState::residual_norm);

    py::class_<BetheSpectrum>(m, "BetheSpectrum")
        .def_readonly("params", &BetheSpectrum::params)
        .def_readonly("states", &BetheSpectrum::states);

    py::class_<SpectralBasis>(m, "SpectralBasis")
        .def_readonly("params", &SpectralBasis::params)
        .def_readonly("energies", &SpectralBasis::energies)
        .def_readonly("c", &SpectralBasis::c)
        .def_readonly("log_norms", &SpectralBasis::log_norms);

    py::class_<OutputState>(m, "OutputState")
        .def_readonly("x", &OutputState::x)
        .def_readonly("dx_du", &OutputState::dx_du);

    m.def("build_hamiltonian", &build_hamiltonian, py::arg("params"));
    m.def("exact_spectrum", &exact_spectrum, py::arg("matrix"));
    m.def(
        "fock_norms",
        [](int n) { return fock_norms(n).log_values; }, py::arg("n"),
        "log of the ladder-state normalisations N_k");
    m.def("build_conserved_charges", &build_conserved_charges, py::arg("params"));

    m.def(
        "richardson_residual",
        [](const Eigen::VectorXd& e, const ModelParams& p) {
            return richardson_residual(e, p);
        },
        py::arg("rapidities"), py::arg("params"));
    m.def(
        "bethe_energy",
        [](const Eigen::VectorXd& e, const ModelParams& p) {
            const EnergyCharges ec = bethe_energy(e, p);
            return py::make_tuple(ec.energy, ec.r0, ec.r1);
        },
        py::arg("rapidities"), py::arg("params"),
        "(energy, r0, r1) evaluated from a rapidity set");
    m.def("laguerre_zeros", &laguerre_zeros, py::arg("m"), py::arg("a"));
    m.def("solve_rapidities", [](const ModelParams& p) { return solve_rapidities(p); },
          py::arg("params"));

    m.def(
        "build_spectral_basis",
        [](BetheSpectrum& spectrum, bool checked) {
            return checked ? build_spectral_basis_checked(spectrum)
                           : build_spectral_basis(spectrum);
        },
        py::arg("spectrum"), py::arg("checked") = true);
    m.def(
        "solve_basis",
        [](const ModelParams& p) {
            BetheSpectrum spec = solve_rapidities(p);
            return build_spectral_basis_checked(spec);
        },
        py::arg("params"), "solve_rapidities plus the checked basis build");

    m.def("seeded_pair_number", &seeded_pair_number, py::arg("basis"), py::arg("t"));
    m.def(
        "output_state_free",
        [](const SpectralBasis& basis, double omega, double omega0, double t, double u) {
            return output_state_free(basis, {FreePhase{omega, omega0}, t, u});
        },
        py::arg("basis"), py::arg("omega"), py::arg("omega0"), py::arg("t"), py::arg("u"));
    m.def(
        "output_state_quasifree",
        [](const SpectralBasis& basis, const SpectralBasis& primed, double t, double u) {
            return output_state_quasifree(basis, primed,
                                          {QuasifreePhase{primed.params.q}, t, u});
        },
        py::arg("basis"), py::arg("primed"), py::arg("t"), py::arg("u"));
    m.def(
        "observable_moments",
        [](const OutputState& out, const SpectralBasis& basis) {
            const Moments mom = observable_moments(out, basis);
            return py::make_tuple(mom.mean_eta, mom.var_eta);
        },
        py::arg("out"), py::arg("basis"), "(mean, variance) of the pair-boson number");
    m.def("fock_probabilities", &fock_probabilities, py::arg("out"), py::arg("basis"));
    m.def(
        "estimate_fringe_frequency",
        [](const Eigen::VectorXd& u, const Eigen::VectorXd& eta) {
            return estimate_fringe_frequency(u, eta).omega;
        },
        py::arg("u"), py::arg("eta"));

    py::class_<SequenceContext>(m, "SequenceContext")
        .def("output_at", &SequenceContext::output_at, py::arg("u"))
        .def_property_readonly("t", &SequenceContext::seeding_time);
    m.def("free_sequence", &SequenceContext::free_stage, py::arg("basis"),
          py::arg("omega"), py::arg("omega0"), py::arg("t"), py::keep_alive<0, 1>());
    m.def("quasifree_sequence", &SequenceContext::quasifree_stage, py::arg("basis"),
          py::arg("primed"), py::arg("t"), py::keep_alive<0, 1>(), py::keep_alive<0, 2>());

    m.def(
        "phase_sensitivity_error_propagation",
        [](const SequenceContext& ctx, double omega, double phi) {
            const SensitivityValue v =
                phase_sensitivity_error_propagation(ctx, PhaseCalibration{omega}, phi);
            return py::make_tuple(v.value, v.diverged);
        },
        py::arg("ctx"), py::arg("omega"), py::arg("phi"),
        "(value, diverged) from the error-propagation formula");
    m.def(
        "fisher_information",
        [](const SequenceContext& ctx, double omega, double phi) {
            const FisherValue v = fisher_information(ctx, PhaseCalibration{omega}, phi);
            return py::make_tuple(v.value, v.dropped_mass);
        },
        py::arg("ctx"), py::arg("omega"), py::arg("phi"));
    m.def("hellinger_distance", &hellinger_distance, py::arg("p"), py::arg("q"));
    m.def(
        "hellinger_sensitivity_proxy",
        [](const SequenceContext& ctx, double omega, double phi, double delta) {
            const ProxyValue v =
                hellinger_sensitivity_proxy(ctx, PhaseCalibration{omega}, phi, delta);
            return py::make_tuple(v.value, v.degenerate);
        },
        py::arg("ctx"), py::arg("omega"), py::arg("phi"), py::arg("delta") = 1e-5);
    m.def("ideal_su11_sensitivity", &ideal_su11_sensitivity, py::arg("eta1"),
          py::arg("phi"));
    m.def("ideal_pump_parameter", &ideal_pump_parameter, py::arg("eta1"));

    m.def(
        "run_experiment",
        [](const std::string& name, const py::dict& settings) {
            const ExperimentResult res = run_experiment(name, config_from_dict(settings));
            py::dict summary;
            for (const auto& [k, v] : res.summary) summary[py::str(k)] = v;
            return py::make_tuple(res.output_path, summary);
        },
        py::arg("name"), py::arg("settings"),
        "runs a named experiment; returns (output_path, summary)");
    m.def(
        "validate",
        [](const py::dict& settings, int corrupt_state) {
            const ValidationReport report =
                validate_model(config_from_dict(settings), corrupt_state);
            py::list out;
            for (const auto& c : report.checks)
                out.append(py::make_tuple(c.name, c.pass, c.worst, c.tolerance));
            return out;
        },
        py::arg("settings"), py::arg("corrupt_state") = -1,
        "property suite; returns [(name, pass, worst, tolerance), ...]");
}
