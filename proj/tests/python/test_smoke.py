"""Smoke tests for the python bindings and the command-line tool."""

import math
import os
import subprocess
import sys

import numpy as np
import pytest

import sccint


@pytest.fixture(scope="module")
def micro_basis():
    return sccint.solve_basis(sccint.ModelParams(N=2, lam=1.0, q=2.0))


def test_micro_case_spectrum():
    params = sccint.ModelParams(N=2, lam=1.0, q=2.0)
    spec = sccint.solve_rapidities(params)
    energies = [s.energy for s in spec.states]
    assert energies == pytest.approx([-2.0, 4.0], abs=1e-12)
    assert spec.states[0].rapidities[0] == pytest.approx(3.0, abs=1e-12)
    assert abs(spec.states[1].rapidities[0]) < 1e-12
    assert all(s.residual_norm <= 1e-10 for s in spec.states)


def test_hamiltonian_and_oracle():
    params = sccint.ModelParams(N=10, lam=1.0, q=4.0 / 3.0)
    h = sccint.build_hamiltonian(params)
    assert h.dim == 6
    ed = sccint.exact_spectrum(h)
    assert np.all(np.diff(ed.energies) > 0)
    gram = ed.vectors.T @ ed.vectors
    assert np.abs(gram - np.eye(6)).max() < 1e-12


def test_basis_orthogonality():
    basis = sccint.solve_basis(sccint.ModelParams(N=10, lam=1.0, q=4.0 / 3.0))
    gram = basis.c @ basis.c.T
    assert np.abs(gram - np.eye(6)).max() < 1e-10


def test_interferometer_identities(micro_basis):
    assert sccint.seeded_pair_number(micro_basis, 0.0) == pytest.approx(0.0, abs=1e-12)
    out = sccint.output_state_free(micro_basis, omega=100.0, omega0=0.0, t=0.05, u=0.0)
    assert np.abs(out.x - micro_basis.c[:, 0]).max() < 1e-12
    out = sccint.output_state_free(micro_basis, omega=100.0, omega0=0.0, t=0.05, u=0.003)
    assert np.vdot(out.x, out.x).real == pytest.approx(1.0, abs=1e-10)
    probs = sccint.fock_probabilities(out, micro_basis)
    assert probs.sum() == pytest.approx(1.0, abs=1e-10)


def test_fringe_estimator_and_metrology():
    basis = sccint.solve_basis(sccint.ModelParams(N=20, lam=1.0, q=4.0 / 3.0))
    ctx = sccint.free_sequence(basis, 500.0, 0.0, 0.02)
    umax = 8 * math.pi / 500.0
    u = np.arange(256) * umax / 256
    eta = np.array([sccint.observable_moments(ctx.output_at(x), basis)[0] for x in u])
    omega = sccint.estimate_fringe_frequency(u, eta)
    assert omega == pytest.approx(1000.0, rel=1e-3)

    value, diverged = sccint.phase_sensitivity_error_propagation(ctx, omega, 0.9)
    assert not diverged and value > 0
    fisher, _ = sccint.fisher_information(ctx, omega, 0.9)
    assert value * fisher >= 1.0 - 1e-9  # estimator bound
    proxy, degenerate = sccint.hellinger_sensitivity_proxy(ctx, omega, 0.9)
    assert not degenerate and proxy > 0


def test_ideal_reference():
    assert sccint.ideal_su11_sensitivity(3.0, 0.0) == pytest.approx(1.0 / 15.0)
    assert math.cosh(sccint.ideal_pump_parameter(3.0)) - 1.0 == pytest.approx(3.0)
    with pytest.raises(sccint.SccError):
        sccint.ideal_su11_sensitivity(3.0, math.pi)


def test_validation_suite():
    checks = sccint.validate({"N": 12, "lambda": 1, "q": 2})
    assert all(ok for _, ok, _, _ in checks)
    corrupted = sccint.validate({"N": 12, "lambda": 1, "q": 2}, corrupt_state=1)
    assert not all(ok for _, ok, _, _ in corrupted)


def test_run_experiment(tmp_path):
    path, summary = sccint.run_experiment(
        "spectrum", {"N": 8, "lambda": 1, "q": "4/3", "output_dir": str(tmp_path)}
    )
    assert os.path.exists(path)
    assert summary["validation"] == "ok"


def test_config_errors():
    with pytest.raises(sccint.SccConfigError):
        sccint.ModelParams(N=3, lam=1.0, q=1.0)
    with pytest.raises(sccint.SccConfigError):
        sccint.solve_rapidities(sccint.ModelParams(N=4, lam=0.0, q=1.0))


@pytest.mark.skipif("SCCINT_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_round_trip(tmp_path):
    cli = os.environ["SCCINT_CLI"]
    run = subprocess.run(
        [cli, "spectrum", "--set", "N=8", "--set", "lambda=1", "--set", "q=4/3",
         "--set", f"output_dir={tmp_path}"],
        capture_output=True, text=True)
    assert run.returncode == 0, run.stderr
    assert (tmp_path / "spectrum.csv").exists()

    bad = subprocess.run([cli, "spectrum", "--set", "N=7"], capture_output=True, text=True)
    assert bad.returncode == 3  # config error

    corrupt = subprocess.run(
        [cli, "validate", "--set", "N=8", "--set", "lambda=1", "--set", "q=2",
         "--corrupt", "1"],
        capture_output=True, text=True)
    assert corrupt.returncode == 1
    assert "[FAIL]" in corrupt.stdout
