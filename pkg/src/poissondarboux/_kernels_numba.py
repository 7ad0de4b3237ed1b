"""JIT-compiled twins of the pure-numpy kernels.

Imported only when the numba backend is selected, so environments running
with POISSONDARBOUX_BACKEND=numpy never pay the import or compile cost.
Algorithms and constants mirror _kernels exactly; only the evaluation
strategy differs (term loops here, vectorization there), so results agree
to rounding.
"""

import numpy as np
from numba import njit

RK45_OK = 0
RK45_NONFINITE = 1
RK45_STEP_LIMIT = 2


@njit(cache=True)
def eval_one(exps, coeffs, x):
    total = 0.0
    for t in range(exps.shape[0]):
        term = coeffs[t]
        for v in range(exps.shape[1]):
            e = exps[t, v]
            if e > 0:
                term = term * x[v] ** e
        total += term
    return total


@njit(cache=True)
def eval_many(exps, coeffs, X):
    out = np.empty(X.shape[0], dtype=np.float64)
    for s in range(X.shape[0]):
        out[s] = eval_one(exps, coeffs, X[s])
    return out


@njit(cache=True)
def field_eval(exps, coeffs, offsets, x):
    ncomp = offsets.shape[0] - 1
    out = np.empty(ncomp, dtype=np.float64)
    for k in range(ncomp):
        total = 0.0
        for t in range(offsets[k], offsets[k + 1]):
            term = coeffs[t]
            for v in range(exps.shape[1]):
                e = exps[t, v]
                if e > 0:
                    term = term * x[v] ** e
            total += term
        out[k] = total
    return out


@njit(cache=True)
def rk4(exps, coeffs, offsets, x0, dt, nsteps):
    n = x0.shape[0]
    states = np.empty((nsteps + 1, n), dtype=np.float64)
    states[0] = x0
    x = x0.copy()
    for step in range(nsteps):
        k1 = field_eval(exps, coeffs, offsets, x)
        k2 = field_eval(exps, coeffs, offsets, x + (0.5 * dt) * k1)
        k3 = field_eval(exps, coeffs, offsets, x + (0.5 * dt) * k2)
        k4 = field_eval(exps, coeffs, offsets, x + dt * k3)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            return states, step
        states[step + 1] = x
    return states, nsteps


@njit(cache=True)
def rk45(exps, coeffs, offsets, x0, t_end, tol, h0, max_steps):
    a21 = 0.25
    a31, a32 = 3.0 / 32.0, 9.0 / 32.0
    a41, a42, a43 = 1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0
    a51, a52, a53, a54 = 439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0
    a61, a62, a63, a64, a65 = (
        -8.0 / 27.0,
        2.0,
        -3544.0 / 2565.0,
        1859.0 / 4104.0,
        -11.0 / 40.0,
    )
    b41, b43, b44, b45 = 25.0 / 216.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2
    b51, b53, b54, b55, b56 = (
        16.0 / 135.0,
        6656.0 / 12825.0,
        28561.0 / 56430.0,
        -9.0 / 50.0,
        2.0 / 55.0,
    )
    n = x0.shape[0]
    times = np.empty(max_steps + 1, dtype=np.float64)
    states = np.empty((max_steps + 1, n), dtype=np.float64)
    times[0] = 0.0
    states[0] = x0
    count = 1
    t = 0.0
    h = h0
    x = x0.copy()
    while t < t_end:
        if count > max_steps:
            return times, states, count, RK45_STEP_LIMIT
        if h > t_end - t:
            h = t_end - t
        k1 = field_eval(exps, coeffs, offsets, x)
        k2 = field_eval(exps, coeffs, offsets, x + h * (a21 * k1))
        k3 = field_eval(exps, coeffs, offsets, x + h * (a31 * k1 + a32 * k2))
        k4 = field_eval(exps, coeffs, offsets, x + h * (a41 * k1 + a42 * k2 + a43 * k3))
        k5 = field_eval(
            exps, coeffs, offsets, x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)
        )
        k6 = field_eval(
            exps,
            coeffs,
            offsets,
            x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5),
        )
        x4 = x + h * (b41 * k1 + b43 * k3 + b44 * k4 + b45 * k5)
        x5 = x + h * (b51 * k1 + b53 * k3 + b54 * k4 + b55 * k5 + b56 * k6)
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
