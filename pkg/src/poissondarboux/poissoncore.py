"""Structure matrices, polynomial diffeomorphisms, and Poisson systems.

A structure matrix J is an n x n grid of polynomials in n variables, skew by
construction.  The Darboux canonical matrix S_{2m,s} pairs the first m
coordinates with the next m symplectically and leaves the last s inert; a
polynomial map Phi with polynomial inverse turns it into a nonconstant
structure J(x) = M(Phi(x)) S M(Phi(x))^T where M is the Jacobian of the
inverse map, and transform_structure pushes any J forward along any map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exprparse import VarTable
from .polycore import EXACT, FLOAT, Polynomial

JACOBI_TOL = 1e-9


class StructureError(ValueError):
    """Raised when structure-matrix data violates its invariants."""


def _is_zero(p: Polynomial, tol: float) -> bool:
    if p.mode == EXACT:
        return p.is_zero()
    return p.max_abs_coeff() <= tol


class StructureMatrix:
    """Skew-symmetric matrix of polynomials in n variables."""

    __slots__ = ("n", "mode", "entries")

    def __init__(self, entries: Sequence[Sequence[Polynomial]], tol: float = JACOBI_TOL):
        entries = tuple(tuple(row) for row in entries)
        n = len(entries)
        if any(len(row) != n for row in entries):
            raise StructureError("structure matrix must be square")
        if n == 0:
            raise StructureError("structure matrix must be nonempty")
        mode = entries[0][0].mode
        for row in entries:
            for p in row:
                if not isinstance(p, Polynomial):
                    raise StructureError("entries must be Polynomials")
                if p.nvars != n or p.mode != mode:
                    raise StructureError(
                        f"every entry must be a {mode} polynomial in {n} variables"
                    )
        for i in range(n):
            if not _is_zero(entries[i][i], tol):
                raise StructureError(f"diagonal entry ({i + 1},{i + 1}) is not zero")
            for j in range(i + 1, n):
                if not _is_zero(entries[i][j] + entries[j][i], tol):
                    raise StructureError(
                        f"entries ({i + 1},{j + 1}) and ({j + 1},{i + 1}) are not skew"
                    )
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "entries", entries)

    def __setattr__(self, name, value):
        raise AttributeError("StructureMatrix is immutable")

    @classmethod
    def from_upper(cls, n: int, mode: str, upper: dict) -> "StructureMatrix":
        """Build from {(i, j): polynomial} with i < j; the rest is implied."""
        zero = Polynomial.zero(n, mode)
        grid = [[zero] * n for _ in range(n)]
        for (i, j), p in upper.items():
            if not 0 <= i < j < n:
                raise StructureError(f"({i}, {j}) is not an upper-triangle index")
            grid[i][j] = p
            grid[j][i] = -p
        return cls(grid)

    @classmethod
    def canonical(cls, m: int, s: int, mode: str = EXACT) -> "StructureMatrix":
        """The Darboux matrix S_{2m,s}: pairs (k, k+m), zero elsewhere."""
        if m < 1 or s < 0:
            raise StructureError("need m >= 1 and s >= 0")
        n = 2 * m + s
        one = Polynomial.one(n, mode)
        return cls.from_upper(n, mode, {(k, k + m): one for k in range(m)})

    def entry(self, i: int, j: int) -> Polynomial:
        return self.entries[i][j]

    def apply_gradient(self, grad: Sequence[Polynomial]) -> tuple:
        """The contraction (J grad)_i = sum_l J_il grad_l."""
        if len(grad) != self.n:
            raise ValueError(f"need {self.n} gradient components")
        out = []
        for i in range(self.n):
            acc = Polynomial.zero(self.n, self.mode)
            for l in range(self.n):
                p = self.entries[i][l]
                if p:
                    acc = acc + p * grad[l]
            out.append(acc)
        return tuple(out)

    def __eq__(self, other):
        if not isinstance(other, StructureMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __repr__(self):
        return f"<StructureMatrix n={self.n} mode={self.mode}>"


def canonical_matrix(m: int, s: int, mode: str = EXACT) -> StructureMatrix:
    """S_{2m,s} as a structure matrix in 2m+s variables."""
    return StructureMatrix.canonical(m, s, mode)


def lie_derivative(field: Sequence[Polynomial], p: Polynomial) -> Polynomial:
    """Directional derivative sum_k field_k * dp/dx_k."""
    if len(field) != p.nvars:
        raise ValueError(f"need {p.nvars} field components, got {len(field)}")
    acc = Polynomial.zero(p.nvars, p.mode)
    for k, component in enumerate(field):
        dp = p.diff(k)
        if dp and component:
            acc = acc + component * dp
    return acc


class PolyMap:
    """Polynomial diffeomorphism: forward components in x, inverse in y.

    The defining identities forward(inverse(y)) = y and
    inverse(forward(x)) = x are checked at construction, exactly in EXACT
    mode and to a coefficient tolerance in FLOAT mode.
    """

    __slots__ = ("forward", "inverse", "n", "mode")

    def __init__(
        self,
        forward: Sequence[Polynomial],
        inverse: Sequence[Polynomial],
        tol: float = JACOBI_TOL,
    ):
        forward = tuple(forward)
        inverse = tuple(inverse)
        n = len(forward)
        if len(inverse) != n or n == 0:
            raise ValueError("forward and inverse must have the same positive length")
        mode = forward[0].mode
        for p in forward + inverse:
            if not isinstance(p, Polynomial) or p.nvars != n or p.mode != mode:
                raise ValueError(f"components must be {mode} polynomials in {n} variables")
        for i in range(n):
            target = Polynomial.variable(n, i, mode)
            fwd_round = forward[i].compose(list(inverse))
            inv_round = inverse[i].compose(list(forward))
            if not _is_zero(fwd_round - target, tol) or not _is_zero(inv_round - target, tol):
                raise ValueError(f"component {i + 1} fails the round-trip identity")
        object.__setattr__(self, "forward", forward)
        object.__setattr__(self, "inverse", inverse)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "mode", mode)

    def __setattr__(self, name, value):
        raise AttributeError("PolyMap is immutable")

    @classmethod
    def identity(cls, n: int, mode: str = EXACT) -> "PolyMap":
        comps = tuple(Polynomial.variable(n, k, mode) for k in range(n))
        return cls(comps, comps)

    def jacobian(self, of: str = "forward") -> list:
        """Matrix of partials of the chosen component family."""
        comps = self.forward if of == "forward" else self.inverse
        return [[comp.diff(k) for k in range(self.n)] for comp in comps]

    def after(self, inner: "PolyMap") -> "PolyMap":
        """The composite map self(inner(x)), with the composite inverse."""
        if inner.n != self.n or inner.mode != self.mode:
            raise ValueError("maps must share dimension and mode")
        forward = tuple(f.compose(list(inner.forward)) for f in self.forward)
        inverse = tuple(g.compose(list(self.inverse)) for g in inner.inverse)
        return PolyMap(forward, inverse)

    def __repr__(self):
        return f"<PolyMap n={self.n} mode={self.mode}>"


@dataclass(frozen=True)
class JacobiReport:
    """Outcome of the Jacobi identity check: ok, or the violating triples."""

    ok: bool
    violations: tuple  # of (i, j, k, residual Polynomial), 0-based


def check_jacobi(J: StructureMatrix, tol: float = JACOBI_TOL) -> JacobiReport:
    """Check sum_l (J_li d_l J_jk + J_lj d_l J_ki + J_lk d_l J_ij) = 0 for i<j<k."""
    n = J.n
    entries = J.entries
    partials = [[[entries[a][b].diff(l) for l in range(n)] for b in range(n)] for a in range(n)]
    violations = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                acc = Polynomial.zero(n, J.mode)
                for l in range(n):
                    for (a, bc) in ((i, (j, k)), (j, (k, i)), (k, (i, j))):
                        term_l = entries[l][a]
                        if term_l:
                            d = partials[bc[0]][bc[1]][l]
                            if d:
                                acc = acc + term_l * d
                if not _is_zero(acc, tol):
                    violations.append((i, j, k, acc))
    return JacobiReport(ok=not violations, violations=tuple(violations))


def transform_structure(J: StructureMatrix, pmap: PolyMap) -> StructureMatrix:
    """Push J forward along pmap: J*_ij(y) = (d phi_i/dx_k J_kl d phi_j/dx_l)(inverse(y))."""
    if pmap.n != J.n:
        raise ValueError("map dimension does not match the structure matrix")
    if pmap.mode != J.mode:
        raise ValueError("map and structure matrix must share a mode")
    n = J.n
    D = pmap.jacobian("forward")
    inverse = list(pmap.inverse)
    upper = {}
    for i in range(n):
        row_i = []
        for l in range(n):
            acc = Polynomial.zero(n, J.mode)
            for k in range(n):
                jk = J.entries[k][l]
                if jk and D[i][k]:
                    acc = acc + D[i][k] * jk
            row_i.append(acc)
        for j in range(i + 1, n):
            acc = Polynomial.zero(n, J.mode)
            for l in range(n):
                if row_i[l] and D[j][l]:
                    acc = acc + row_i[l] * D[j][l]
            upper[(i, j)] = acc.compose(inverse)
    return StructureMatrix.from_upper(n, J.mode, upper)


def build_structure_from_diffeo(pmap: PolyMap, m: int, s: int) -> StructureMatrix:
    """Structure matrix M(Phi(x)) S_{2m,s} M(Phi(x))^T with M the inverse-map Jacobian.

    By construction the result satisfies the Jacobi identity exactly and has
    the last s inverse components of pmap as Casimirs; transforming it along
    pmap returns S_{2m,s}.
    """
    n = pmap.n
    if 2 * m + s != n:
        raise ValueError(f"2m+s = {2 * m + s} does not match the map dimension {n}")
    if m < 1:
        raise ValueError("need m >= 1")
    M = pmap.jacobian("inverse")
    forward = list(pmap.forward)
    upper = {}
    for i in range(n):
        for j in range(i + 1, n):
            acc = Polynomial.zero(n, pmap.mode)
            for k in range(m):
                left = M[i][k] * M[j][k + m] if (M[i][k] and M[j][k + m]) else None
                right = M[i][k + m] * M[j][k] if (M[i][k + m] and M[j][k]) else None
                if left is not None:
                    acc = acc + left
                if right is not None:
                    acc = acc - right
            upper[(i, j)] = acc.compose(forward)
    return StructureMatrix.from_upper(n, pmap.mode, upper)


def check_casimir(J: StructureMatrix, D: Polynomial, tol: float = JACOBI_TOL) -> bool:
    """True when J grad(D) vanishes identically."""
    if D.nvars != J.n or D.mode != J.mode:
        raise ValueError("candidate Casimir must match the structure matrix")
    grad = [D.diff(k) for k in range(J.n)]
    return all(_is_zero(component, tol) for component in J.apply_gradient(grad))


def generic_rank(
    J: StructureMatrix, samples: int = 8, seed: int = 0, tol: float = 1e-9
) -> int:
    """Max numeric rank of J over random integer points in [-10, 10]^n.

    Singular values at or below tol count as zero.  Points where the whole
    matrix evaluates to zero are redrawn (a constant zero matrix still
    reports rank 0).
    """
    n = J.n
    float_entries = [[J.entries[a][b].to_float() for b in range(n)] for a in range(n)]
    identically_zero = all(p.is_zero() for row in float_entries for p in row)
    rng = np.random.default_rng(seed)
    best = 0
    taken = 0
    attempts = 0
    while taken < samples and attempts < 50 * samples:
        attempts += 1
        point = [complex(v) for v in rng.integers(-10, 11, size=n)]
        mat = np.array(
            [[float_entries[a][b].eval(point) for b in range(n)] for a in range(n)],
            dtype=complex,
        )
        if not identically_zero and not np.any(mat != 0):
            continue
        taken += 1
        sing = np.linalg.svd(mat, compute_uv=False)
        best = max(best, int(np.sum(sing > tol)))
    return best


class PoissonSystem:
    """A structure matrix with a Hamiltonian and declared Casimirs."""

    __slots__ = ("vars", "J", "H", "casimirs", "m", "s", "mode")

    def __init__(
        self,
        vars: VarTable,
        J: StructureMatrix,
        H: Polynomial,
        m: int,
        s: int,
        casimirs: Sequence[Polynomial] = (),
        check: bool = True,
        tol: float = JACOBI_TOL,
    ):
        if not isinstance(vars, VarTable):
            vars = VarTable(vars)
        n = len(vars)
        if J.n != n or H.nvars != n:
            raise ValueError("variables, structure matrix, and Hamiltonian disagree on n")
        if 2 * m + s != n or m < 1 or s < 0:
            raise ValueError(f"2m+s must equal {n} with m >= 1")
        if H.mode != J.mode:
            raise ValueError("Hamiltonian and structure matrix must share a mode")
        casimirs = tuple(casimirs)
        for c in casimirs:
            if c.nvars != n or c.mode != J.mode:
                raise ValueError("Casimirs must match the system's variables and mode")
        if check:
            report = check_jacobi(J, tol)
            if not report.ok:
                triples = [(i + 1, j + 1, k + 1) for i, j, k, _ in report.violations]
                raise StructureError(f"Jacobi identity fails at triples {triples}")
            for idx, c in enumerate(casimirs):
                if not check_casimir(J, c, tol):
                    raise StructureError(f"declared Casimir {idx + 1} is not a Casimir")
        object.__setattr__(self, "vars", vars)
        object.__setattr__(self, "J", J)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "casimirs", casimirs)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "mode", J.mode)

    def __setattr__(self, name, value):
        raise AttributeError("PoissonSystem is immutable")

    def __repr__(self):
        return f"<PoissonSystem n={len(self.vars)} m={self.m} s={self.s} mode={self.mode}>"


def hamiltonian_vector_field(system: PoissonSystem) -> tuple:
    """Components of x_dot = J grad(H)."""
    grad = [system.H.diff(k) for k in range(system.J.n)]
    return system.J.apply_gradient(grad)
