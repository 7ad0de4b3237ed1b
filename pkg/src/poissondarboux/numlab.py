"""Floating-point evidence for conservation claims.

A certified first integral should drift only at integrator order along
trajectories; a wrong candidate drifts like the truncation error of the
dynamics.  This module integrates polynomial fields (fixed-step RK4 and
adaptive RK45), measures relative drift of claimed invariants, spot-checks
symbolic gradients against finite differences, and writes trajectories to
CSV at full double precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import (
    RK45_NONFINITE,
    RK45_OK,
    RK45_STEP_LIMIT,
    get_kernels,
    pack_field,
    pack_poly,
)
from .polycore import Polynomial
from .poissoncore import PoissonSystem, hamiltonian_vector_field

STATUS_OK = "ok"
STATUS_NONFINITE = "nonfinite"
STATUS_STEP_LIMIT = "step_limit"


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of x' = f(x); completed means t_end was reached."""

    times: np.ndarray
    states: np.ndarray
    method: str
    completed: bool
    status: str
    dt: float | None = None
    tol: float | None = None

    @property
    def n(self) -> int:
        return self.states.shape[1]


def _field_components(source) -> tuple:
    if isinstance(source, PoissonSystem):
        return hamiltonian_vector_field(source)
    components = tuple(source)
    if not components or not all(isinstance(c, Polynomial) for c in components):
        raise TypeError("expected a PoissonSystem or a sequence of Polynomials")
    n = len(components)
    if any(c.nvars != n for c in components):
        raise ValueError("field components must be polynomials in n variables")
    return components


def integrate(
    source,
    x0,
    t_end: float,
    dt: float = 1e-2,
    method: str = "rk4",
    tol: float = 1e-8,
    h0: float | None = None,
    max_steps: int = 1_000_000,
    backend: str | None = None,
) -> Trajectory:
    """Integrate a PoissonSystem (its Hamiltonian field) or an explicit field.

    RK4 takes round(t_end/dt) fixed steps with the step snapped so the last
    one lands exactly on t_end; RK45 adapts its step to keep the per-step
    error inside tol * max(1, |x|).  A nonfinite state truncates the
    trajectory and clears ``completed`` instead of raising.
    """
    components = _field_components(source)
    exps, coeffs, offsets = pack_field(components)
    x0 = np.asarray(x0, dtype=np.float64)
    if x0.shape != (len(components),):
        raise ValueError(f"x0 must have length {len(components)}")
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    kern = get_kernels(backend)
    if method == "rk4":
        if dt <= 0:
            raise ValueError("dt must be positive")
        nsteps = max(1, int(round(t_end / dt)))
        h = float(t_end) / nsteps
        states, done = kern.rk4(exps, coeffs, offsets, x0, h, nsteps)
        completed = done == nsteps
        return Trajectory(
            times=h * np.arange(done + 1),
            states=states[: done + 1],
            method="rk4",
            completed=completed,
            status=STATUS_OK if completed else STATUS_NONFINITE,
            dt=h,
        )
    if method == "rk45":
        if tol <= 0:
            raise ValueError("tol must be positive")
        step0 = h0 if h0 is not None else t_end / 100.0
        times, states, count, code = kern.rk45(
            exps, coeffs, offsets, x0, float(t_end), tol, step0, max_steps
        )
        status = {
            RK45_OK: STATUS_OK,
            RK45_NONFINITE: STATUS_NONFINITE,
            RK45_STEP_LIMIT: STATUS_STEP_LIMIT,
        }[code]
        return Trajectory(
            times=times[:count].copy(),
            states=states[:count].copy(),
            method="rk45",
            completed=code == RK45_OK,
            status=status,
            tol=tol,
        )
    raise ValueError(f"unknown method {method!r}; use 'rk4' or 'rk45'")


def drift_report(traj: Trajectory, invariants, backend: str | None = None) -> dict:
    """max_t |P(x(t)) - P(x(0))| / max(1, |P(x(0))|) for each claimed invariant."""
    if isinstance(invariants, dict):
        items = list(invariants.items())
    else:
        items = list(invariants)
    kern = get_kernels(backend)
    out = {}
    for name, poly in items:
        exps, coeffs = pack_poly(poly)
        values = kern.eval_many(exps, coeffs, traj.states)
        ref = values[0]
        out[name] = float(np.max(np.abs(values - ref)) / max(1.0, abs(ref)))
    return out


def fd_gradient_check(p: Polynomial, point, h: float = 1e-6) -> float:
    """Largest gap between central differences and the symbolic gradient at point."""
    q = p.to_float()
    point = [float(v) for v in point]
    if len(point) != q.nvars:
        raise ValueError(f"point must have length {q.nvars}")
    worst = 0.0
    base = [complex(v) for v in point]
    for k in range(q.nvars):
        up = list(base)
        dn = list(base)
        up[k] += h
        dn[k] -= h
        fd = (q.eval(up) - q.eval(dn)).real / (2.0 * h)
        exact = q.diff(k).eval(base).real
        worst = max(worst, abs(fd - exact))
    return worst


def write_csv(traj: Trajectory, path, names=None, invariants=None,
              backend: str | None = None) -> None:
    """Write t, the state columns, and optional invariant columns, at %.17g."""
    n = traj.n
    names = list(names) if names is not None else [f"x{k + 1}" for k in range(n)]
    if len(names) != n:
        raise ValueError(f"need {n} column names")
    columns = [traj.times] + [traj.states[:, k] for k in range(n)]
    header = ["t"] + names
    if invariants:
        items = list(invariants.items()) if isinstance(invariants, dict) else list(invariants)
        kern = get_kernels(backend)
        for name, poly in items:
            exps, coeffs = pack_poly(poly)
            header.append(name)
            columns.append(kern.eval_many(exps, coeffs, traj.states))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*columns):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
