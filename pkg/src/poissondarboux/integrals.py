"""First integrals H_F built from Darboux polynomials of natural systems.

The canonical chart carries H* = 1/2 sum_i mu_i p_i^2 + V(q) (plus a Casimir
potential W(z) when s > 0).  Three constructions transplant a Darboux
polynomial F of that chart into a first integral H_F of a transformed
system:

1. a linear symplectic change B = diag((A^-1)^T, A) against the canonical
   structure (the Hamiltonian gains cross terms but stays polynomial),
2. a polynomial diffeomorphism Phi with polynomial inverse, giving the
   structure matrix M(Phi(x)) S M(Phi(x))^T,
3. the same with s extra Casimir coordinates and an optional W.

In every case H_F is F times its momentum-flipped copy, pushed through the
chart change: the two cofactors cancel, so H_F is conserved, and the result
is independent of H and the Casimirs under conditions reported (not
enforced) by hypothesis_report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exactlinalg
from .darboux import NotDarbouxError, cofactor_of
from .exprparse import ProblemDef, VarTable
from .polycore import (
    EXACT,
    FLOAT,
    Polynomial,
    RationalizeError,
    coerce_coeff,
    rationalize,
)
from .poissoncore import (
    PoissonSystem,
    PolyMap,
    StructureMatrix,
    build_structure_from_diffeo,
    canonical_matrix,
    hamiltonian_vector_field,
    lie_derivative,
    transform_structure,
)


class NotProperError(NotDarbouxError):
    """Raised when a Darboux polynomial is valid but improper (K = 0 or F constant)."""


def _default_names(m: int, s: int) -> list:
    return (
        [f"q{k + 1}" for k in range(m)]
        + [f"p{k + 1}" for k in range(m)]
        + [f"z{k + 1}" for k in range(s)]
    )


def _half(mode: str):
    return Fraction(1, 2) if mode == EXACT else 0.5


@dataclass(frozen=True)
class NaturalSpec:
    """Data of a natural Hamiltonian: masses mu and potential V in m variables."""

    m: int
    mu: tuple
    V: Polynomial

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need m >= 1")
        if self.V.nvars != self.m:
            raise ValueError(f"V must be a polynomial in {self.m} variables")
        mu = tuple(coerce_coeff(v, self.V.mode) for v in self.mu)
        object.__setattr__(self, "mu", mu)

    @property
    def mode(self) -> str:
        return self.V.mode

    def hamiltonian(self, s: int = 0, W: Polynomial | None = None) -> Polynomial:
        """H* = 1/2 sum mu_i p_i^2 + V(q) (+ W(z)) in 2m+s variables."""
        m, mode = self.m, self.mode
        n = 2 * m + s
        q = [Polynomial.variable(n, k, mode) for k in range(m)]
        H = self.V.compose(q)
        half = _half(mode)
        for k, mu_k in enumerate(self.mu):
            p = Polynomial.variable(n, m + k, mode)
            H = H + (p * p).scale(half * mu_k)
        if W is not None and not W.is_zero():
            if W.nvars != s:
                raise ValueError(f"W must be a polynomial in {s} variables")
            if W.mode != mode:
                raise ValueError("W must match V's mode")
            z = [Polynomial.variable(n, 2 * m + k, mode) for k in range(s)]
            H = H + W.compose(z)
        return H

    def field(self, s: int = 0) -> tuple:
        """Canonical-chart flow: q_i' = mu_i p_i, p_i' = -dV/dq_i, z' = 0."""
        m, mode = self.m, self.mode
        n = 2 * m + s
        q = [Polynomial.variable(n, k, mode) for k in range(m)]
        components = []
        for k, mu_k in enumerate(self.mu):
            components.append(Polynomial.variable(n, m + k, mode).scale(mu_k))
        for k in range(m):
            components.append(-self.V.diff(k).compose(q))
        components.extend(Polynomial.zero(n, mode) for _ in range(s))
        return tuple(components)


@dataclass(frozen=True)
class TheoremInstance:
    """One concrete setting for the H_F construction.

    kind "T1" carries a linear change A (m x m, invertible); kinds "T2" and
    "T3" carry a polynomial diffeomorphism on 2m+s variables, with s = 0
    forced for T2 and an optional Casimir potential W for T3.  T3 with s = 0
    and no W is the same construction as T2.
    """

    kind: str
    spec: NaturalSpec
    A: tuple | None = None
    pmap: PolyMap | None = None
    s: int = 0
    W: Polynomial | None = None

    def __post_init__(self):
        m, mode = self.spec.m, self.spec.mode
        if self.kind == "T1":
            if self.A is None or self.pmap is not None or self.s or self.W is not None:
                raise ValueError("T1 takes exactly the matrix A (no map, s = 0, no W)")
            A = tuple(tuple(coerce_coeff(v, mode) for v in row) for row in self.A)
            if len(A) != m or any(len(row) != m for row in A):
                raise ValueError(f"A must be {m}x{m}")
            object.__setattr__(self, "A", A)
            _invert_matrix(A, mode)  # raises SingularMatrixError when not invertible
        elif self.kind in ("T2", "T3"):
            if self.kind == "T2" and (self.s or self.W is not None):
                raise ValueError("T2 has s = 0 and no W; use T3 for Casimir coordinates")
            if self.A is not None or self.pmap is None:
                raise ValueError(f"{self.kind} takes a polynomial map, not a matrix")
            if self.pmap.n != 2 * m + self.s:
                raise ValueError(
                    f"map dimension {self.pmap.n} does not match 2m+s = {2 * m + self.s}"
                )
            if self.pmap.mode != mode:
                raise ValueError("map and potential must share a mode")
            if self.W is not None:
                if self.W.nvars != self.s:
                    raise ValueError(f"W must be a polynomial in {self.s} variables")
                if self.W.mode != mode:
                    raise ValueError("W must match V's mode")
        else:
            raise ValueError(f"unknown theorem kind {self.kind!r}")

    @property
    def mode(self) -> str:
        return self.spec.mode


def _invert_matrix(rows, mode: str):
    if mode == EXACT:
        return tuple(tuple(r) for r in exactlinalg.invert([list(r) for r in rows]))
    arr = np.array(rows, dtype=float)
    sing = np.linalg.svd(arr, compute_uv=False)
    if sing.size == 0 or sing[-1] <= 1e-12 * max(1.0, sing[0]):
        raise exactlinalg.SingularMatrixError("matrix is numerically singular")
    return tuple(tuple(float(v) for v in row) for row in np.linalg.inv(arr))


def _linear_polys(matrix, n: int, offset: int, width: int, mode: str) -> list:
    """Rows of matrix contracted with variables offset..offset+width-1."""
    out = []
    for row in matrix:
        acc = Polynomial.zero(n, mode)
        for j, a in enumerate(row):
            if a:
                acc = acc + Polynomial.variable(n, offset + j, mode).scale(a)
        out.append(acc)
    return out


@dataclass(frozen=True)
class Theorem1Build:
    """System from the linear construction, with the symplectic change B."""

    system: PoissonSystem
    B: tuple
    B_inverse: tuple
    A: tuple
    A_inverse: tuple


def _block_diag(upper, lower) -> tuple:
    m = len(upper)
    k = len(lower)
    n = m + k
    rows = []
    for r in range(n):
        row = []
        for c in range(n):
            if r < m and c < m:
                row.append(upper[r][c])
            elif r >= m and c >= m:
                row.append(lower[r - m][c - m])
            else:
                row.append(0)
        rows.append(tuple(row))
    return tuple(rows)


def build_theorem1_system(A, spec: NaturalSpec, variables=None) -> Theorem1Build:
    """Canonical structure S_2m with H = 1/2 sum mu_i ((A^-1 p)_i)^2 + V(A^T q).

    The block change B = diag((A^-1)^T, A) is symplectic and pulls H back to
    the natural H*; both facts are certified during the build.
    """
    m, mode = spec.m, spec.mode
    inst = TheoremInstance(kind="T1", spec=spec, A=tuple(tuple(r) for r in A))
    A = inst.A
    A_inv = _invert_matrix(A, mode)
    A_T = tuple(zip(*A))
    A_inv_T = tuple(zip(*A_inv))
    n = 2 * m

    subs = _linear_polys(A_T, n, 0, m, mode) + _linear_polys(A_inv, n, m, m, mode)
    H = spec.hamiltonian().compose(subs)

    B = _block_diag(A_inv_T, A)
    B_inv = _block_diag(A_T, A_inv)
    _certify_symplectic(B, m, mode)
    subs_B = _linear_polys(B, n, 0, n, mode)
    pulled = H.compose(subs_B)
    diff = pulled - spec.hamiltonian()
    if (mode == EXACT and not diff.is_zero()) or (mode == FLOAT and diff.max_abs_coeff() > 1e-9):
        raise AssertionError("internal error: H did not pull back to the natural Hamiltonian")

    names = variables if variables is not None else _default_names(m, 0)
    system = PoissonSystem(
        VarTable(names), canonical_matrix(m, 0, mode), H, m, 0, check=False
    )
    return Theorem1Build(system=system, B=B, B_inverse=B_inv, A=A, A_inverse=A_inv)


def _certify_symplectic(B, m: int, mode: str):
    """Check B S B^T = S for the 2m x 2m canonical S, in scalar arithmetic."""
    n = 2 * m

    def s_entry(a, b):
        if b == a + m:
            return 1
        if a == b + m:
            return -1
        return 0

    for i in range(n):
        for j in range(n):
            acc = 0
            for k in range(m):
                acc = acc + B[i][k] * B[j][k + m] - B[i][k + m] * B[j][k]
            expected = s_entry(i, j)
            if mode == EXACT:
                bad = acc != expected
            else:
                bad = abs(complex(acc) - expected) > 1e-12
            if bad:
                raise AssertionError("internal error: B is not symplectic")


def build_poisson_from_diffeo(inst: TheoremInstance, variables=None) -> PoissonSystem:
    """The transformed system for a T2/T3 instance.

    J = M(Phi(x)) S M(Phi(x))^T, H = 1/2 sum mu_i Phi_{m+i}^2 + V(Phi_q)
    (+ W(Phi_z)); the last s forward components are the Casimirs.
    """
    if inst.kind not in ("T2", "T3"):
        raise ValueError("build_poisson_from_diffeo needs a T2 or T3 instance")
    spec, pmap, s = inst.spec, inst.pmap, inst.s
    m, mode = spec.m, spec.mode
    n = 2 * m + s
    J = build_structure_from_diffeo(pmap, m, s)
    phi = list(pmap.forward)
    H = spec.V.compose(phi[:m])
    half = _half(mode)
    for k, mu_k in enumerate(spec.mu):
        comp = phi[m + k]
        H = H + (comp * comp).scale(half * mu_k)
    if inst.W is not None and s > 0 and not inst.W.is_zero():
        H = H + inst.W.compose(phi[2 * m :])
    names = variables if variables is not None else [f"x{k + 1}" for k in range(n)]
    return PoissonSystem(
        VarTable(names), J, H, m, s, casimirs=tuple(phi[2 * m :]), check=True
    )


def natural_system(spec: NaturalSpec, s: int = 0, W: Polynomial | None = None,
                   variables=None) -> PoissonSystem:
    """The canonical-chart system (S_{2m,s}, H*)."""
    names = variables if variables is not None else _default_names(spec.m, s)
    casimirs = tuple(
        Polynomial.variable(2 * spec.m + s, 2 * spec.m + k, spec.mode) for k in range(s)
    )
    return PoissonSystem(
        VarTable(names),
        canonical_matrix(spec.m, s, spec.mode),
        spec.hamiltonian(s, W),
        spec.m,
        s,
        casimirs=casimirs,
        check=False,
    )


def construct_HF(
    inst: TheoremInstance,
    F: Polynomial,
    allow_improper: bool = False,
) -> Polynomial:
    """The first integral H_F = (F * momentum-flipped F) pushed through the chart.

    F lives in the canonical 2m-variable chart and must be a Darboux
    polynomial of the natural flow there; improper F (cofactor zero or F
    constant) raises NotProperError unless allow_improper is set.  When F is
    FLOAT but the instance is EXACT, the product F*flip(F) is rationalized
    so composition and later verification can stay exact; if that fails the
    computation falls back to FLOAT throughout.
    """
    m = inst.spec.m
    if F.nvars != 2 * m:
        raise ValueError(f"F must be a polynomial in 2m = {2 * m} variables")
    spec = inst.spec
    if F.mode == EXACT and inst.mode == EXACT:
        check_field = spec.field()
    else:
        float_spec = NaturalSpec(m, tuple(complex(v).real for v in spec.mu), spec.V.to_float())
        check_field = float_spec.field()
    K = cofactor_of(check_field, F.to_float() if F.mode != check_field[0].mode else F)
    proper = F.total_degree() > 0 and not K.is_zero()
    if not proper and not allow_improper:
        raise NotProperError(
            "F is a first integral of the natural flow itself (cofactor 0) or constant; "
            "pass allow_improper=True to build H_F anyway"
        )

    G = F * F.sign_flip(range(m, 2 * m))
    if G.mode == FLOAT and inst.mode == EXACT:
        try:
            G = rationalize(G)
        except RationalizeError:
            pass

    if inst.kind == "T1":
        A = inst.A if G.mode == EXACT else tuple(
            tuple(complex(v).real for v in row) for row in inst.A
        )
        A_inv = _invert_matrix(A, G.mode)
        A_T = tuple(zip(*A))
        subs = _linear_polys(A_T, 2 * m, 0, m, G.mode) + _linear_polys(
            A_inv, 2 * m, m, m, G.mode
        )
        return G.compose(subs)

    pmap = inst.pmap
    forward = [p if p.mode == G.mode else p.to_float() for p in pmap.forward[: 2 * m]]
    return G.compose(forward)


@dataclass(frozen=True)
class IntegralReport:
    """Lie-derivative certificate for a claimed first integral."""

    ok: bool
    residual: Polynomial


def verify_first_integral(
    system: PoissonSystem, integral: Polynomial, tol: float = 1e-9
) -> IntegralReport:
    """Check X_H(I) = 0: exactly in EXACT mode, to tol in FLOAT mode."""
    if integral.nvars != len(system.vars):
        raise ValueError("integral must be a polynomial in the system's variables")
    if integral.mode != system.mode:
        raise ValueError(
            f"integral mode {integral.mode} does not match system mode {system.mode}; "
            "convert explicitly (to_float or rationalize)"
        )
    field = hamiltonian_vector_field(system)
    residual = lie_derivative(field, integral)
    ok = residual.is_zero() if system.mode == EXACT else residual.max_abs_coeff() <= tol
    return IntegralReport(ok=ok, residual=residual)


@dataclass(frozen=True)
class IndependenceReport:
    """Numeric functional-independence evidence at sampled points."""

    additional: bool
    full_rank: int
    ranks: tuple


def independence_report(
    system: PoissonSystem,
    integral: Polynomial,
    samples: int = 8,
    seed: int = 0,
    tol: float = 1e-9,
) -> IndependenceReport:
    """Rank of {grad H, grad Casimirs, grad I} at random integer points.

    additional is True when some sample reaches full rank s + 2, i.e. the
    integral is functionally independent of H and the Casimirs on a dense
    open set (numeric evidence, not a proof).
    """
    n = len(system.vars)
    gradients = []
    for poly in (system.H, *system.casimirs, integral):
        p = poly.to_float()
        gradients.append([p.diff(k) for k in range(n)])
    rng = np.random.default_rng(seed)
    ranks = []
    for _ in range(samples):
        point = [complex(v) for v in rng.integers(-10, 11, size=n)]
        rows = np.array(
            [[g.eval(point) for g in grad] for grad in gradients], dtype=complex
        )
        sing = np.linalg.svd(rows, compute_uv=False)
        ranks.append(int(np.sum(sing > tol)))
    full = len(gradients)
    return IndependenceReport(
        additional=any(r == full for r in ranks), full_rank=full, ranks=tuple(ranks)
    )


@dataclass(frozen=True)
class HypothesisReport:
    """Per-hypothesis outcomes; failures are warnings, never errors."""

    entries: tuple  # of (name, ok: bool | None, detail)

    def failed(self) -> list:
        return [name for name, ok, _ in self.entries if ok is False]

    def ok(self) -> bool:
        return not self.failed()


def hypothesis_report(inst: TheoremInstance, F: Polynomial | None = None) -> HypothesisReport:
    """Report the theorem hypotheses for an instance (optionally checking F)."""
    spec = inst.spec
    entries = []
    deg_V = spec.V.total_degree()
    entries.append(
        ("deg_V_at_least_3", deg_V >= 3, f"deg V = {deg_V}")
    )
    nonzero = sum(1 for v in spec.mu if v)
    entries.append(
        (
            "additionality_m_and_mu",
            spec.m >= 2 and nonzero >= 2,
            f"m = {spec.m}, nonzero mu count = {nonzero}",
        )
    )
    if inst.kind == "T1":
        entries.append(("chart_change_invertible", True, "A inverted exactly at build"))
        entries.append(("structure_reconstructs", True, "canonical S preserved by B"))
    else:
        entries.append(
            ("chart_change_invertible", True, "map round-trip checked at construction")
        )
        J = build_structure_from_diffeo(inst.pmap, spec.m, inst.s)
        back = transform_structure(J, inst.pmap)
        S = canonical_matrix(spec.m, inst.s, inst.mode)
        if inst.mode == EXACT:
            ok = back == S
        else:
            ok = all(
                (back.entry(i, j) - S.entry(i, j)).max_abs_coeff() <= 1e-9
                for i in range(J.n)
                for j in range(J.n)
            )
        entries.append(("structure_reconstructs", ok, "transform along the map returns S"))
    if F is None:
        entries.append(("F_proper", None, "no F supplied"))
    else:
        try:
            field = spec.field() if F.mode == spec.mode else (
                NaturalSpec(
                    spec.m, tuple(complex(v).real for v in spec.mu), spec.V.to_float()
                ).field()
            )
            K = cofactor_of(field, F if F.mode == field[0].mode else F.to_float())
            proper = F.total_degree() > 0 and not K.is_zero()
            entries.append(
                ("F_proper", proper, "cofactor found by division" if proper else "cofactor is zero or F constant")
            )
        except (NotDarbouxError, ValueError) as exc:
            entries.append(("F_proper", False, str(exc)))
    return HypothesisReport(entries=tuple(entries))


# -- problem-file assembly ---------------------------------------------------


def _blocks_to_map(pd: ProblemDef) -> PolyMap:
    B, C, D = pd.A_blocks
    mode = pd.mode
    m, s = pd.m, pd.s
    n = 2 * m + s
    blocks = [(B, 0, m), (C, m, m)] + ([(D, 2 * m, s)] if s else [])
    forward = []
    inverse = []
    for mat, offset, width in blocks:
        inv = _invert_matrix(mat, mode)
        forward.extend(_linear_polys(mat, n, offset, width, mode))
        inverse.extend(_linear_polys(inv, n, offset, width, mode))
    return PolyMap(forward, inverse)


def structure_from_problem(pd: ProblemDef) -> tuple:
    """The structure matrix a file describes, with its declared Casimirs.

    Unlike system_from_problem this never touches the Hamiltonian, so files
    can be structure-checked in isolation.  Returns (StructureMatrix,
    casimirs); the Casimirs are the trailing map components (or trailing
    coordinates in the canonical chart).
    """
    n = 2 * pd.m + pd.s
    if pd.structure is not None:
        return StructureMatrix(pd.structure), ()
    if pd.phi is not None:
        pmap = PolyMap(pd.phi, pd.phi_inverse)
    elif pd.A_blocks is not None and pd.A_blocks[1]:
        pmap = _blocks_to_map(pd)
    else:
        casimirs = tuple(
            Polynomial.variable(n, 2 * pd.m + k, pd.mode) for k in range(pd.s)
        )
        return canonical_matrix(pd.m, pd.s, pd.mode), casimirs
    J = build_structure_from_diffeo(pmap, pd.m, pd.s)
    return J, tuple(pmap.forward[2 * pd.m :])


def instance_from_problem(pd: ProblemDef, theorem: int | None = None) -> TheoremInstance:
    """Build the TheoremInstance a problem file describes.

    With theorem unspecified: A_blocks lacking C means the linear
    construction (T1); otherwise s > 0 or a W potential means T3, else T2.
    An explicit structure grid admits no instance (there is no chart map).
    """
    if pd.structure is not None:
        raise ValueError("a file with an explicit structure grid has no chart map")
    spec = NaturalSpec(pd.m, pd.mu, pd.V)
    has_blocks = pd.A_blocks is not None
    blocks_missing_C = has_blocks and not pd.A_blocks[1]
    if theorem is None:
        theorem = 1 if blocks_missing_C else (3 if pd.s > 0 or pd.W is not None else 2)
    if theorem == 1:
        if not has_blocks:
            raise ValueError("theorem 1 needs A_blocks.B as the matrix A")
        if pd.A_blocks[1] or pd.A_blocks[2]:
            raise ValueError("theorem 1 uses only A_blocks.B; drop C and D")
        if pd.s:
            raise ValueError("theorem 1 requires s = 0")
        return TheoremInstance(kind="T1", spec=spec, A=pd.A_blocks[0])
    if theorem not in (2, 3):
        raise ValueError(f"theorem must be 1, 2, or 3, got {theorem}")
    if theorem == 2 and pd.s:
        raise ValueError("theorem 2 requires s = 0; use theorem 3")
    if pd.phi is not None:
        pmap = PolyMap(pd.phi, pd.phi_inverse)
    elif has_blocks:
        if blocks_missing_C:
            raise ValueError("block-linear maps need both B and C")
        pmap = _blocks_to_map(pd)
    else:
        pmap = PolyMap.identity(2 * pd.m + pd.s, pd.mode)
    kind = "T3" if theorem == 3 else "T2"
    return TheoremInstance(
        kind=kind,
        spec=spec,
        pmap=pmap,
        s=pd.s if kind == "T3" else 0,
        W=pd.W if kind == "T3" else None,
    )


def system_from_problem(pd: ProblemDef, theorem: int | None = None) -> PoissonSystem:
    """The PoissonSystem a problem file describes, in the file's variables.

    An explicit structure grid is taken as given (with the natural H read in
    the file's variables); otherwise the system is assembled from the chart
    map, the blocks, or the canonical chart.
    """
    if pd.structure is not None:
        J = StructureMatrix(pd.structure)
        spec = NaturalSpec(pd.m, pd.mu, pd.V)
        H = spec.hamiltonian(pd.s, pd.W)
        return PoissonSystem(pd.variables, J, H, pd.m, pd.s, check=True)
    inst = instance_from_problem(pd, theorem)
    if inst.kind == "T1":
        return build_theorem1_system(inst.A, inst.spec, variables=pd.variables.names).system
    if pd.phi is None and pd.A_blocks is None:
        spec = inst.spec
        return natural_system(spec, pd.s, pd.W, variables=pd.variables.names)
    return build_poisson_from_diffeo(inst, variables=pd.variables.names)
