"""Numeric integration, invariant drift, finite-difference checks, CSV export."""

import math
from pathlib import Path

import numpy as np
import pytest

from poissondarboux import (
    FLOAT,
    NaturalSpec,
    Polynomial,
    Trajectory,
    construct_HF,
    drift_report,
    fd_gradient_check,
    instance_from_problem,
    integrate,
    load_problem,
    natural_system,
    parse_expression,
    system_from_problem,
    write_csv,
)
from poissondarboux._kernels import (
    ENV_BACKEND,
    available_backends,
    backend_name,
    get_kernels,
    pack_poly,
)

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"
BACKENDS = available_backends()


def oscillator_system():
    # H = 1/2*(q^2 + p^2) in the canonical plane
    V = parse_expression("0.5*q1^2", ["q1"], FLOAT)
    return natural_system(NaturalSpec(1, (1.0,), V))


class TestIntegrate:
    def test_oscillator_full_period(self):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 2 * math.pi, dt=1e-3)
        assert traj.completed and traj.status == "ok"
        assert np.max(np.abs(traj.states[-1] - np.array([1.0, 0.0]))) < 1e-6

    def test_zero_field_is_constant(self):
        field = [Polynomial.zero(2, FLOAT), Polynomial.zero(2, FLOAT)]
        traj = integrate(field, (0.3, -0.7), 1.0, dt=0.1)
        assert np.all(traj.states == traj.states[0])

    def test_blow_up_truncates(self):
        # x' = x^2 from x = 1 blows up at t = 1
        field = [parse_expression("x^2", ["x"], FLOAT)]
        traj = integrate(field, (1.0,), 2.0, dt=1e-3)
        assert not traj.completed
        assert traj.status == "nonfinite"
        assert traj.times[-1] < 1.05
        assert np.all(np.isfinite(traj.states))

    def test_rk45_adaptive(self):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 2 * math.pi, method="rk45", tol=1e-10)
        assert traj.completed and traj.status == "ok"
        assert np.max(np.abs(traj.states[-1] - np.array([1.0, 0.0]))) < 1e-6
        assert traj.method == "rk45"

    def test_rk45_step_limit(self):
        system = oscillator_system()
        traj = integrate(
            system, (1.0, 0.0), 2 * math.pi, method="rk45", tol=1e-12, max_steps=5
        )
        assert not traj.completed
        assert traj.status == "step_limit"

    def test_argument_validation(self):
        system = oscillator_system()
        with pytest.raises(ValueError):
            integrate(system, (1.0,), 1.0)
        with pytest.raises(ValueError):
            integrate(system, (1.0, 0.0), -1.0)
        with pytest.raises(ValueError):
            integrate(system, (1.0, 0.0), 1.0, dt=0.0)
        with pytest.raises(ValueError):
            integrate(system, (1.0, 0.0), 1.0, method="euler")

    def test_exact_system_accepted(self):
        V = parse_expression("q1^2", ["q1"])
        system = natural_system(NaturalSpec(1, (1,), V))
        traj = integrate(system, (1.0, 0.0), 1.0, dt=1e-2)
        assert traj.completed

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_backends_agree(self, backend):
        system = oscillator_system()
        base = integrate(system, (1.0, 0.0), 1.0, dt=1e-3, backend="numpy")
        other = integrate(system, (1.0, 0.0), 1.0, dt=1e-3, backend=backend)
        assert np.max(np.abs(base.states - other.states)) < 1e-12

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            integrate(oscillator_system(), (1.0, 0.0), 1.0, backend="gpu")


class TestDrift:
    def test_energy_conserved_on_oscillator(self):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 10.0, dt=1e-3)
        report = drift_report(traj, {"H": system.H})
        assert report["H"] < 1e-9

    def test_non_invariant_drifts(self):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 10.0, dt=1e-3)
        q = parse_expression("q", ["q", "p"], FLOAT)
        report = drift_report(traj, {"q": q})
        assert report["q"] > 0.5

    def test_transformed_quartic_system_conserves_everything(self):
        # chart-changed system with Casimir coordinate: H, C, H_F all flat
        pd = load_problem(PROBLEMS / "example4.json")
        system = system_from_problem(pd)
        inst = instance_from_problem(pd)
        HF = construct_HF(inst, pd.F)
        traj = integrate(system, (0.4, -0.3, 0.2, 0.5, 0.1), 10.0, dt=1e-3)
        invariants = {"H": system.H, "C1": system.casimirs[0], "H_F": HF}
        report = drift_report(traj, invariants)
        assert all(v < 1e-6 for v in report.values())

    def test_pair_sequence_accepted(self):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 1.0, dt=1e-2)
        report = drift_report(traj, [("energy", system.H)])
        assert set(report) == {"energy"}


class TestGradientCheck:
    def test_square(self):
        p = parse_expression("x^2", ["x"], FLOAT)
        assert fd_gradient_check(p, (3.0,), h=1e-5) < 1e-8

    def test_constant(self):
        p = parse_expression("4.5", ["x"], FLOAT)
        assert fd_gradient_check(p, (2.0,), h=1e-5) < 1e-12

    def test_structure_entry_from_file(self):
        pd = load_problem(PROBLEMS / "example1.json")
        from poissondarboux import structure_from_problem

        J, _ = structure_from_problem(pd)
        entry = J.entry(1, 2).to_float()
        assert fd_gradient_check(entry, (1.0, 1.0, 1.0, 1.0), h=1e-6) < 1e-6


class TestBackendSelection:
    def test_env_flag_selects_fallback(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "numpy")
        assert backend_name() == "numpy"
        assert get_kernels().name == "numpy"
        traj = integrate(oscillator_system(), (1.0, 0.0), 0.1, dt=0.05)
        assert traj.completed

    def test_argument_beats_env(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "numpy")
        if "numba" in BACKENDS:
            assert backend_name("numba") == "numba"

    def test_bad_env_value_rejected(self, monkeypatch):
        monkeypatch.setenv(ENV_BACKEND, "cuda")
        with pytest.raises(ValueError):
            backend_name()


class TestPacking:
    def test_nonreal_coefficient_rejected(self):
        p = parse_expression("i*x", ["x"], FLOAT)
        with pytest.raises(ValueError):
            pack_poly(p)

    def test_zero_polynomial_packs(self):
        exps, coeffs = pack_poly(Polynomial.zero(2, FLOAT))
        assert exps.shape[0] == 1 and coeffs[0] == 0.0


class TestCsv:
    def test_header_and_round_trip(self, tmp_path):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 0.1, dt=0.05)
        out = tmp_path / "traj.csv"
        write_csv(traj, out, names=["q", "p"], invariants={"H": system.H})
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,q,p,H"
        assert len(lines) == len(traj.times) + 1
        # %.17g survives a float round trip bit-for-bit
        row = lines[1].split(",")
        assert float(row[0]) == traj.times[0]
        assert float(row[1]) == traj.states[0, 0]

    def test_default_names(self, tmp_path):
        system = oscillator_system()
        traj = integrate(system, (1.0, 0.0), 0.1, dt=0.05)
        out = tmp_path / "traj.csv"
        write_csv(traj, out)
        assert out.read_text().splitlines()[0] == "t,x1,x2"
