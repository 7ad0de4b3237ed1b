"""Darboux polynomials of polynomial vector fields, and searches for them.

F is a Darboux polynomial of the field X when X(F) = K*F for a polynomial
cofactor K; the pair is *proper* when F is non-constant and K is not
identically zero.  Proper pairs are the raw material for first integrals:
cofactors add under multiplication of the F's, so products whose cofactors
cancel are conserved.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from . import exactlinalg
from .polycore import (
    EXACT,
    FLOAT,
    NotDivisibleError,
    Polynomial,
    RationalizeError,
    exact_divide,
    rationalize,
)
from .poissoncore import lie_derivative

RESIDUAL_TOL = 1e-9
_KERNEL_SV_TOL = 1e-9
_CERTIFY_TOL = 1e-10
# Searches snap float results to rationals only at small denominators: the
# full default bound of 10**6 admits accidental convergents of irrationals
# (1/sqrt(2) has one at 941664 within 6e-13), which must stay float.
_SNAP_MAX_DENOMINATOR = 10**4


class NotDarbouxError(ArithmeticError):
    """Raised when a polynomial is not Darboux for the given field."""


def _check_field(field: Sequence[Polynomial]) -> tuple:
    field = tuple(field)
    if not field:
        raise ValueError("field must have at least one component")
    n, mode = field[0].nvars, field[0].mode
    for f in field:
        if not isinstance(f, Polynomial) or f.nvars != n or f.mode != mode:
            raise ValueError(f"field components must be {mode} polynomials in {n} variables")
    if len(field) != n:
        raise ValueError(f"a field on {n} variables needs {n} components, got {len(field)}")
    return field, n, mode


def cofactor_of(field: Sequence[Polynomial], F: Polynomial, tol: float = RESIDUAL_TOL) -> Polynomial:
    """The cofactor K with X(F) = K*F, via polynomial division of X(F) by F.

    Division decides the sign and the answer: no printed convention is
    trusted.  Raises NotDarbouxError when F does not divide its derivative
    along the field, ValueError when F is zero.
    """
    field, n, mode = _check_field(field)
    if F.is_zero():
        raise ValueError("the zero polynomial has no cofactor")
    if F.nvars != n or F.mode != mode:
        raise ValueError("F must match the field's variables and mode")
    XF = lie_derivative(field, F)
    if XF.is_zero():
        return Polynomial.zero(n, mode)
    try:
        return exact_divide(XF, F, tol)
    except NotDivisibleError as exc:
        raise NotDarbouxError(f"F is not a Darboux polynomial: {exc}") from None


@dataclass(frozen=True)
class CandidateReport:
    """Outcome of checking X(F) = K*F: validity, propriety, and the residual."""

    ok: bool
    proper: bool
    residual: Polynomial


def verify_candidate(
    field: Sequence[Polynomial], F: Polynomial, K: Polynomial, tol: float = RESIDUAL_TOL
) -> CandidateReport:
    """Check X(F) - K*F = 0 (exactly, or to tol in FLOAT mode)."""
    field, n, mode = _check_field(field)
    for p, name in ((F, "F"), (K, "K")):
        if p.nvars != n or p.mode != mode:
            raise ValueError(f"{name} must match the field's variables and mode")
    residual = lie_derivative(field, F) - K * F
    ok = residual.is_zero() if mode == EXACT else residual.max_abs_coeff() <= tol
    proper = bool(ok and F.total_degree() > 0 and not K.is_zero())
    return CandidateReport(ok=ok, proper=proper, residual=residual)


class DarbouxCandidate:
    """A certified Darboux pair (F, cofactor); construction re-verifies it."""

    __slots__ = ("F", "cofactor", "proper")

    def __init__(
        self,
        field: Sequence[Polynomial],
        F: Polynomial,
        cofactor: Polynomial,
        tol: float = RESIDUAL_TOL,
    ):
        report = verify_candidate(field, F, cofactor, tol)
        if not report.ok:
            raise NotDarbouxError(
                f"candidate fails certification with residual magnitude "
                f"{report.residual.max_abs_coeff():.3e}"
            )
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "cofactor", cofactor)
        object.__setattr__(self, "proper", report.proper)

    def __setattr__(self, name, value):
        raise AttributeError("DarbouxCandidate is immutable")

    def __repr__(self):
        return f"<DarbouxCandidate proper={self.proper} F={self.F!r}>"


def monomials_up_to(nvars: int, degree: int) -> list:
    """Exponent tuples of total degree <= degree, graded-lex ascending."""
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    out = []
    for total in range(degree + 1):
        exps_at_total = set()
        for combo in combinations_with_replacement(range(nvars), total):
            exps = [0] * nvars
            for k in combo:
                exps[k] += 1
            exps_at_total.add(tuple(exps))
        out.extend(sorted(exps_at_total, key=lambda e: (sum(e), e)))
    return out


def _kernel_float(rows: np.ndarray) -> list:
    """Right-kernel basis of a complex matrix via SVD."""
    if rows.shape[0] == 0:
        return [np.eye(rows.shape[1], dtype=complex)[k] for k in range(rows.shape[1])]
    _, sing, vh = np.linalg.svd(rows, full_matrices=True)
    thresh = _KERNEL_SV_TOL * max(1.0, sing[0] if sing.size else 1.0)
    rank = int(np.sum(sing > thresh))
    return [np.conj(vh[k]) for k in range(rank, rows.shape[1])]


def _poly_from_vector(vec, basis: list, nvars: int, mode: str) -> Polynomial:
    terms = {}
    for exps, c in zip(basis, vec):
        if c:
            terms[exps] = terms.get(exps, 0) + c
    return Polynomial.from_terms(nvars, terms, mode)


def _strip_component_noise(c: complex) -> complex:
    # kernel vectors pick up ~1e-16 junk in whichever component should be 0
    mag = abs(c)
    re = 0.0 if abs(c.real) < 1e-10 * mag else c.real
    im = 0.0 if abs(c.imag) < 1e-10 * mag else c.imag
    return complex(re, im)


def _normalize_float_poly(p: Polynomial) -> Polynomial:
    """Drop relatively tiny terms, then scale the graded-lex leading coeff to 1."""
    if p.is_zero():
        return p
    peak = p.max_abs_coeff()
    cleaned = {exps: c for exps, c in p.terms() if abs(c) > 1e-8 * peak}
    p = Polynomial.from_terms(p.nvars, cleaned, FLOAT)
    if p.is_zero():
        return p
    _, lead = p.leading_term()
    return p.scale(1.0 / lead).map_coefficients(_strip_component_noise)


def search_with_cofactor(
    field: Sequence[Polynomial], K: Polynomial, degree: int, tol: float = RESIDUAL_TOL
) -> list:
    """All F with X(F) = K*F and deg F <= degree, as a kernel-basis list.

    The linear map F -> X(F) - K*F is assembled on the monomial basis; its
    kernel is computed exactly (EXACT mode) or via SVD with rationalization
    attempted on each vector (FLOAT mode).  With K = 0 the kernel consists
    of first integrals, constants included.
    """
    field, n, mode = _check_field(field)
    if K.nvars != n or K.mode != mode:
        raise ValueError("K must match the field's variables and mode")
    basis = monomials_up_to(n, degree)
    images = []
    row_index: dict = {}
    for exps in basis:
        phi = Polynomial.from_terms(n, {exps: 1}, mode)
        image = lie_derivative(field, phi) - K * phi
        images.append(image)
        for mon, _ in image.terms():
            if mon not in row_index:
                row_index[mon] = len(row_index)
    if mode == EXACT:
        rows = [[0] * len(basis) for _ in range(len(row_index))]
        for j, image in enumerate(images):
            for mon, c in image.terms():
                rows[row_index[mon]][j] = c
        vectors = exactlinalg.nullspace(rows, len(basis))
        return [_poly_from_vector(vec, basis, n, mode) for vec in vectors]
    rows = np.zeros((len(row_index), len(basis)), dtype=complex)
    for j, image in enumerate(images):
        for mon, c in image.terms():
            rows[row_index[mon], j] = c
    results = []
    for vec in _kernel_float(rows):
        poly = _normalize_float_poly(_poly_from_vector(vec, basis, n, FLOAT))
        if poly.is_zero():
            continue
        try:
            poly = rationalize(poly, max_denominator=_SNAP_MAX_DENOMINATOR)
        except RationalizeError:
            pass
        results.append(poly)
    return results


def _as_monomial(entry, nvars: int) -> tuple:
    if isinstance(entry, Polynomial):
        if entry.nvars != nvars or len(entry) != 1:
            raise ValueError(f"cofactor basis entry {entry!r} is not a monomial")
        return entry.terms()[0][0]
    exps = tuple(entry)
    if len(exps) != nvars or any(not isinstance(e, int) or e < 0 for e in exps):
        raise ValueError(f"cofactor basis entry {entry!r} is not an exponent vector")
    return exps


def _dedupe_key(F: Polynomial, K: Polynomial) -> tuple:
    """Coefficients rounded to 9 decimals so restart noise collapses."""

    def poly_key(p: Polynomial) -> tuple:
        out = []
        for exps, c in p.terms():
            c = complex(c)
            out.append((exps, round(c.real, 9), round(c.imag, 9)))
        return tuple(out)

    return poly_key(F), poly_key(K)


def _certify(field, field_float, F: Polynomial, K: Polynomial, mode: str):
    """Return a certified (F, K) pair or None.

    Exact certification (rationalize both, verify with zero residual) is
    attempted first when the field itself is exact; otherwise, or when the
    coefficients are genuinely irrational, a strict float check stands in:
    residual below _CERTIFY_TOL and float division recovering the cofactor.
    """
    if mode == EXACT:
        try:
            F_exact = rationalize(F, max_denominator=_SNAP_MAX_DENOMINATOR)
            K_exact = rationalize(K, max_denominator=_SNAP_MAX_DENOMINATOR)
            report = verify_candidate(field, F_exact, K_exact)
            if report.ok:
                return F_exact, K_exact, report.proper
        except RationalizeError:
            pass
    report = verify_candidate(field_float, F, K, _CERTIFY_TOL)
    if not report.ok:
        return None
    try:
        K_div = cofactor_of(field_float, F, _CERTIFY_TOL)
    except (NotDarbouxError, ValueError):
        return None
    # the division result is tighter than the least-squares K; prefer it
    K_clean = K_div.map_coefficients(_strip_component_noise)
    cleaned = verify_candidate(field_float, F, K_clean, _CERTIFY_TOL)
    if cleaned.ok:
        return F, K_clean, cleaned.proper
    return F, K_div, report.proper


def search_bilinear_restricted(
    field: Sequence[Polynomial],
    cofactor_basis: Sequence,
    degree: int,
    attempts: int = 24,
    seed: int = 0,
) -> list:
    """Search for proper Darboux pairs with the cofactor in a monomial span.

    Alternates between the two halves of the bilinear system X(F) = K*F:
    with K frozen, F is the smallest singular vector of a linear map; with F
    frozen, K is a least-squares fit over the cofactor basis.  Randomized
    restarts make the search nondeterministically complete: misses are
    possible, but every returned candidate is certified (exactly after
    rationalization when possible, else by strict float residuals) and
    proper.

    The constant monomial always belongs to the cofactor span; basis entries
    beyond the classical degree bound deg(field) - 1 are dropped.
    """
    field, n, mode = _check_field(field)
    if degree < 1:
        raise ValueError("degree must be at least 1")
    if attempts < 1:
        raise ValueError("attempts must be at least 1")
    d_f = max(f.total_degree() for f in field)
    bound = max(d_f - 1, 0)
    k_basis = [(0,) * n]
    for entry in cofactor_basis:
        exps = _as_monomial(entry, n)
        if sum(exps) <= bound and exps not in k_basis:
            k_basis.append(exps)
    field_float = [f.to_float() for f in field]
    f_basis = monomials_up_to(n, degree)

    row_index: dict = {}
    x_images = []
    k_images = []
    for exps in f_basis:
        phi = Polynomial.from_terms(n, {exps: 1}, FLOAT)
        x_images.append(lie_derivative(field_float, phi))
        k_images.append(
            [Polynomial.from_terms(n, {kexps: 1}, FLOAT) * phi for kexps in k_basis]
        )
    for image in x_images:
        for mon, _ in image.terms():
            row_index.setdefault(mon, len(row_index))
    for images in k_images:
        for image in images:
            for mon, _ in image.terms():
                row_index.setdefault(mon, len(row_index))

    def to_matrix(columns: list) -> np.ndarray:
        mat = np.zeros((len(row_index), len(columns)), dtype=complex)
        for j, poly in enumerate(columns):
            for mon, c in poly.terms():
                mat[row_index[mon], j] = c
        return mat

    X = to_matrix(x_images)
    M = [to_matrix([k_images[j][t] for j in range(len(f_basis))]) for t in range(len(k_basis))]

    rng = np.random.default_rng(seed)
    found = []
    seen = set()
    for _ in range(attempts):
        c = rng.standard_normal(len(k_basis)) + 1j * rng.standard_normal(len(k_basis))
        v = None
        for _ in range(30):
            A = X - sum(ct * Mt for ct, Mt in zip(c, M))
            _, _, vh = np.linalg.svd(A, full_matrices=True)
            v = np.conj(vh[-1])
            G = np.column_stack([Mt @ v for Mt in M])
            rhs = X @ v
            c, *_ = np.linalg.lstsq(G, rhs, rcond=None)
            if np.linalg.norm(rhs - G @ c) <= 1e-12 * max(1.0, np.linalg.norm(rhs)):
                break
        F = _normalize_float_poly(_poly_from_vector(v, f_basis, n, FLOAT))
        if F.is_zero() or F.total_degree() < 1:
            continue
        K = _poly_from_vector(c, k_basis, n, FLOAT)
        K = Polynomial.from_terms(
            n, {exps: cc for exps, cc in K.terms() if abs(cc) > 1e-8 * max(1.0, K.max_abs_coeff())}, FLOAT
        )
        certified = _certify(field, field_float, F, K, mode)
        if certified is None:
            continue
        F_cert, K_cert, proper = certified
        if not proper:
            continue
        key = _dedupe_key(F_cert, K_cert)
        if key in seen:
            continue
        seen.add(key)
        check_field = field if F_cert.mode == EXACT and mode == EXACT else field_float
        found.append(DarbouxCandidate(check_field, F_cert, K_cert))
    found.sort(key=lambda cand: _dedupe_key(cand.F, cand.cofactor))
    return found
