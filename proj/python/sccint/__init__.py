"""Exact Bethe-ansatz simulation of spin-changing-collision interferometry.

The heavy lifting lives in the compiled extension; this package re-exports
its surface.
"""

from sccint._core import (  # noqa: F401
    BetheSpectrum,
    BetheState,
    ConservedCharges,
    ModelParams,
    NoDominantPeakError,
    OutputState,
    PoleError,
    SccConfigError,
    SccError,
    SccSolverError,
    SectorMatrix,
    SequenceContext,
    SpectralBasis,
    Spectrum,
    bethe_energy,
    build_conserved_charges,
    build_hamiltonian,
    build_spectral_basis,
    estimate_fringe_frequency,
    exact_spectrum,
    fisher_information,
    fock_norms,
    fock_probabilities,
    free_sequence,
    hellinger_distance,
    hellinger_sensitivity_proxy,
    ideal_pump_parameter,
    ideal_su11_sensitivity,
    laguerre_zeros,
    observable_moments,
    output_state_free,
    output_state_quasifree,
    phase_sensitivity_error_propagation,
    quasifree_sequence,
    richardson_residual,
    run_experiment,
    seeded_pair_number,
    solve_basis,
    solve_rapidities,
    validate,
)

__all__ = [name for name in dir() if not name.startswith("_")]
