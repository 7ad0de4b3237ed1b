"""Numeric kernels with two interchangeable backends.

Polynomials are packed into flat arrays (term exponents, term coefficients,
and per-component offsets for vector fields) and evaluated by one of

* ``numba``: JIT-compiled loops (the default whenever numba imports), or
* ``numpy``: vectorized pure-numpy fallback.

``POISSONDARBOUX_BACKEND`` selects one explicitly; ``get_kernels`` returns a
namespace with the same five functions either way:

    eval_one(exps, coeffs, x)                 -> float
    eval_many(exps, coeffs, X)                -> (S,) array
    field_eval(exps, coeffs, offsets, x)      -> (n,) array
    rk4(exps, coeffs, offsets, x0, dt, nsteps)            -> (states, steps_done)
    rk45(exps, coeffs, offsets, x0, t_end, tol, h0, cap)  -> (times, states, count, status)

rk45 statuses: 0 finished, 1 hit a nonfinite state, 2 ran out of steps.
Both integrators stop at the first nonfinite state instead of propagating it.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

ENV_BACKEND = "POISSONDARBOUX_BACKEND"

RK45_OK = 0
RK45_NONFINITE = 1
RK45_STEP_LIMIT = 2

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


def pack_poly(p) -> tuple:
    """Real-coefficient packed form: (exps (T, n) int64, coeffs (T,) float64)."""
    from .polycore import FLOAT_EPS

    q = p.to_float()
    exps = []
    coeffs = []
    for e, c in q.terms():
        if abs(c.imag) > FLOAT_EPS * max(1.0, abs(c.real)):
            raise ValueError(
                f"polynomial has a nonreal coefficient {c!r}; numeric evolution "
                "needs real data"
            )
        exps.append(e)
        coeffs.append(c.real)
    if not exps:
        exps = [(0,) * p.nvars]
        coeffs = [0.0]
    return (
        np.array(exps, dtype=np.int64).reshape(len(coeffs), p.nvars),
        np.array(coeffs, dtype=np.float64),
    )


def pack_field(components) -> tuple:
    """Concatenate packed components: (exps, coeffs, offsets (ncomp+1,))."""
    all_exps = []
    all_coeffs = []
    offsets = [0]
    for comp in components:
        e, c = pack_poly(comp)
        all_exps.append(e)
        all_coeffs.append(c)
        offsets.append(offsets[-1] + len(c))
    return (
        np.concatenate(all_exps, axis=0),
        np.concatenate(all_coeffs),
        np.array(offsets, dtype=np.int64),
    )


def backend_name(requested: str | None = None) -> str:
    """Resolve the backend: explicit argument, then env var, then availability."""
    name = requested or os.environ.get(ENV_BACKEND) or ("numba" if HAVE_NUMBA else "numpy")
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}; use 'numba' or 'numpy'")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not importable")
    return name


def available_backends() -> tuple:
    return ("numba", "numpy") if HAVE_NUMBA else ("numpy",)


def get_kernels(backend: str | None = None) -> SimpleNamespace:
    name = backend_name(backend)
    if name == "numba":
        from . import _kernels_numba as mod
    else:
        mod = _numpy_namespace()
    return SimpleNamespace(
        name=name,
        eval_one=mod.eval_one,
        eval_many=mod.eval_many,
        field_eval=mod.field_eval,
        rk4=mod.rk4,
        rk45=mod.rk45,
    )


# -- pure-numpy implementations ----------------------------------------------


def _np_eval_one(exps, coeffs, x):
    return float(np.sum(coeffs * np.prod(x**exps, axis=1)))


def _np_eval_many(exps, coeffs, X):
    return np.prod(X[:, None, :] ** exps[None, :, :], axis=2) @ coeffs


def _np_field_eval(exps, coeffs, offsets, x):
    term_vals = coeffs * np.prod(x**exps, axis=1)
    ncomp = offsets.shape[0] - 1
    out = np.empty(ncomp, dtype=np.float64)
    for k in range(ncomp):
        out[k] = np.sum(term_vals[offsets[k] : offsets[k + 1]])
    return out


def _np_rk4(exps, coeffs, offsets, x0, dt, nsteps):
    n = x0.shape[0]
    states = np.empty((nsteps + 1, n), dtype=np.float64)
    states[0] = x0
    x = x0.copy()
    for step in range(nsteps):
        k1 = _np_field_eval(exps, coeffs, offsets, x)
        k2 = _np_field_eval(exps, coeffs, offsets, x + (0.5 * dt) * k1)
        k3 = _np_field_eval(exps, coeffs, offsets, x + (0.5 * dt) * k2)
        k4 = _np_field_eval(exps, coeffs, offsets, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            return states, step
        states[step + 1] = x
    return states, nsteps


# Fehlberg 4(5) tableau; the fifth-order solution is propagated.
_A21 = 0.25
_A31, _A32 = 3.0 / 32.0, 9.0 / 32.0
_A41, _A42, _A43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
_A51, _A52, _A53, _A54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
_A61, _A62, _A63, _A64, _A65 = (
    -8.0 / 27.0,
    2.0,
    -3544.0 / 2565.0,
    1859.0 / 4104.0,
    -11.0 / 40.0,
)
_B41, _B43, _B44, _B45 = 25.0 / 216.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2
_B51, _B53, _B54, _B55, _B56 = (
    16.0 / 135.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
)


def _np_rk45(exps, coeffs, offsets, x0, t_end, tol, h0, max_steps):
    n = x0.shape[0]
    times = np.empty(max_steps + 1, dtype=np.float64)
    states = np.empty((max_steps + 1, n), dtype=np.float64)
    times[0] = 0.0
    states[0] = x0
    count = 1
    t = 0.0
    h = h0
    x = x0.copy()
    f = lambda y: _np_field_eval(exps, coeffs, offsets, y)  # noqa: E731
    while t < t_end:
        if count > max_steps:
            return times, states, count, RK45_STEP_LIMIT
        if h > t_end - t:
            h = t_end - t
        k1 = f(x)
        k2 = f(x + h * (_A21 * k1))
        k3 = f(x + h * (_A31 * k1 + _A32 * k2))
        k4 = f(x + h * (_A41 * k1 + _A42 * k2 + _A43 * k3))
        k5 = f(x + h * (_A51 * k1 + _A52 * k2 + _A53 * k3 + _A54 * k4))
        k6 = f(x + h * (_A61 * k1 + _A62 * k2 + _A63 * k3 + _A64 * k4 + _A65 * k5))
        x4 = x + h * (_B41 * k1 + _B43 * k3 + _B44 * k4 + _B45 * k5)
        x5 = x + h * (_B51 * k1 + _B53 * k3 + _B54 * k4 + _B55 * k5 + _B56 * k6)
        if not (np.all(np.isfinite(x4)) and np.all(np.isfinite(x5))):
            return times, states, count, RK45_NONFINITE
        scale = tol * max(1.0, float(np.max(np.abs(x))))
        err = float(np.max(np.abs(x5 - x4)))
        if err <= scale:
            t = t + h
            x = x5
            times[count] = t
            states[count] = x
            count += 1
        if err == 0.0:
            factor = 5.0
        else:
            factor = min(5.0, max(0.2, 0.9 * (scale / err) ** 0.2))
        h = h * factor
        if h <= 1e-300:
            return times, states, count, RK45_NONFINITE
    return times, states, count, RK45_OK


def _numpy_namespace() -> SimpleNamespace:
    return SimpleNamespace(
        eval_one=_np_eval_one,
        eval_many=_np_eval_many,
        field_eval=_np_field_eval,
        rk4=_np_rk4,
        rk45=_np_rk45,
    )
