"""Expression text <-> polynomial conversion, and problem-file loading.

Grammar (explicit ``*`` required, ``^`` binds tightest, ``i`` is reserved)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := base ('^' uint)?
    base   := number | 'i' | ident | '(' expr ')'

Numbers are integers, fractions ``a/b``, or (FLOAT mode only) decimals with
an optional exponent part.  Every :class:`ParseError` carries the 1-based
line and column of the offending token.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .polycore import (
    EXACT,
    FLOAT,
    Polynomial,
    format_polynomial,
    gaussian,
)

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


class ParseError(ValueError):
    """Syntax or name error in expression text, with source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class ProblemFormatError(ValueError):
    """Raised for structurally invalid problem files."""


class VarTable:
    """Ordered, validated variable names; ``i`` is reserved for the unit."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        seen = set()
        for name in names:
            if not isinstance(name, str) or not _NAME_RE.match(name):
                raise ValueError(f"invalid variable name {name!r}")
            if name == "i":
                raise ValueError("'i' is reserved for the imaginary unit")
            if name in seen:
                raise ValueError(f"duplicate variable name {name!r}")
            seen.add(name)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "_index", {name: k for k, name in enumerate(names)})

    def __setattr__(self, name, value):
        raise AttributeError("VarTable is immutable")

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ValueError(f"unknown variable {name!r}") from None

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def __eq__(self, other):
        if not isinstance(other, VarTable):
            return NotImplemented
        return self.names == other.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarTable({list(self.names)!r})"


def _as_vartable(variables) -> VarTable:
    return variables if isinstance(variables, VarTable) else VarTable(variables)


# -- tokenizer ------------------------------------------------------------------


_OPS = set("+-*^()")


class _Token:
    __slots__ = ("kind", "value", "line", "col")

    def __init__(self, kind, value, line, col):
        self.kind = kind
        self.value = value
        self.line = line
        self.col = col


def _tokenize(text: str, mode: str) -> list:
    tokens = []
    i, n = 0, len(text)
    line, col = 1, 1

    def advance(count: int):
        nonlocal i, col
        i += count
        col += count

    def scan_digits() -> str:
        start = i
        while i < n and text[i].isdigit():
            advance(1)
        return text[start:i]

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            advance(1)
            continue
        tok_line, tok_col = line, col
        if ch.isdigit():
            start = i
            scan_digits()
            is_decimal = False
            if i < n and text[i] == ".":
                advance(1)
                if i >= n or not text[i].isdigit():
                    raise ParseError("digits required after decimal point", line, col)
                scan_digits()
                is_decimal = True
            if i < n and text[i] in "eE":
                j = i + 1
                if j < n and text[j] in "+-":
                    j += 1
                if j < n and text[j].isdigit():
                    advance(j - i)
                    scan_digits()
                    is_decimal = True
            literal = text[start:i]
            if is_decimal:
                if mode != FLOAT:
                    raise ParseError(
                        f"decimal literal {literal!r} requires FLOAT mode", tok_line, tok_col
                    )
                tokens.append(_Token("num", float(literal), tok_line, tok_col))
                continue
            # look ahead for a fraction a/b
            j = i
            while j < n and text[j] in " \t":
                j += 1
            if j < n and text[j] == "/":
                advance(j - i + 1)
                while i < n and text[i] in " \t":
                    advance(1)
                den_line, den_col = line, col
                if i >= n or not text[i].isdigit():
                    raise ParseError("integer denominator required after '/'", den_line, den_col)
                den = scan_digits()
                if i < n and (text[i] == "." or text[i] in "eE"):
                    raise ParseError("fraction denominator must be an integer", den_line, den_col)
                if int(den) == 0:
                    raise ParseError("zero denominator", den_line, den_col)
                tokens.append(
                    _Token("num", Fraction(int(literal), int(den)), tok_line, tok_col)
                )
            else:
                tokens.append(_Token("num", int(literal), tok_line, tok_col))
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                advance(1)
            tokens.append(_Token("ident", text[start:i], tok_line, tok_col))
            continue
        if ch in _OPS:
            advance(1)
            tokens.append(_Token(ch, ch, tok_line, tok_col))
            continue
        raise ParseError(f"unexpected character {ch!r}", tok_line, tok_col)
    tokens.append(_Token("end", None, line, col))
    return tokens


# -- parser ---------------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list, table: VarTable, mode: str):
        self.tokens = tokens
        self.pos = 0
        self.table = table
        self.mode = mode
        self.nvars = len(table)

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: _Token):
        raise ParseError(message, tok.line, tok.col)

    def parse(self) -> Polynomial:
        poly = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.fail(f"unexpected {tok.value!r}", tok)
        return poly

    def expr(self) -> Polynomial:
        negate = False
        tok = self.peek()
        if tok.kind in "+-":
            self.take()
            negate = tok.kind == "-"
        poly = self.term()
        if negate:
            poly = -poly
        while True:
            tok = self.peek()
            if tok.kind == "+":
                self.take()
                poly = poly + self.term()
            elif tok.kind == "-":
                self.take()
                poly = poly - self.term()
            else:
                return poly

    def term(self) -> Polynomial:
        poly = self.factor()
        while self.peek().kind == "*":
            self.take()
            poly = poly * self.factor()
        return poly

    def factor(self) -> Polynomial:
        poly = self.base()
        if self.peek().kind == "^":
            self.take()
            tok = self.take()
            if tok.kind != "num" or not isinstance(tok.value, int) or tok.value < 0:
                self.fail("exponent must be a nonnegative integer", tok)
            poly = poly ** tok.value
        return poly

    def base(self) -> Polynomial:
        tok = self.take()
        if tok.kind == "num":
            value = tok.value
            if self.mode == FLOAT and isinstance(value, Fraction):
                value = float(value)
            return Polynomial.constant(self.nvars, value, self.mode)
        if tok.kind == "ident":
            if tok.value == "i":
                unit = gaussian(0, 1) if self.mode == EXACT else 1j
                return Polynomial.constant(self.nvars, unit, self.mode)
            try:
                k = self.table.index(tok.value)
            except ValueError:
                self.fail(f"unknown identifier {tok.value!r}", tok)
            return Polynomial.variable(self.nvars, k, self.mode)
        if tok.kind == "(":
            poly = self.expr()
            closing = self.take()
            if closing.kind != ")":
                self.fail("expected ')'", closing)
            return poly
        self.fail(
            "expected a number, variable, or '('"
            if tok.kind == "end"
            else f"unexpected {tok.value!r}",
            tok,
        )


def parse_expression(text: str, variables, mode: str = EXACT) -> Polynomial:
    """Parse expression text over the given variables into a Polynomial."""
    if not isinstance(text, str):
        raise TypeError(f"expected expression text, got {text!r}")
    table = _as_vartable(variables)
    tokens = _tokenize(text, mode)
    return _Parser(tokens, table, mode).parse()


def render(p: Polynomial, variables) -> str:
    """Canonical text for p; parse_expression(render(p), vars, p.mode) == p."""
    table = _as_vartable(variables)
    return format_polynomial(p, table.names)


# -- problem files ----------------------------------------------------------------


@dataclass(frozen=True)
class ProblemDef:
    """A fully parsed problem file.

    Expressions are parsed eagerly at load time.  ``phi`` and ``structure``
    entries are written over ``variables``; ``phi_inverse``, ``V`` (first m
    canonical names), ``W`` (last s), ``F`` and ``cofactor`` (first 2m) over
    ``canonical``.  At most one of phi / A_blocks / structure is present and
    determines how the structure matrix is obtained; with none of them the
    system lives in the canonical chart.
    """

    variables: VarTable
    canonical: VarTable
    mode: str
    m: int
    s: int
    mu: tuple
    V: Polynomial
    W: Polynomial | None
    phi: tuple | None
    phi_inverse: tuple | None
    A_blocks: tuple | None
    F: Polynomial | None
    cofactor: Polynomial | None
    structure: tuple | None


_PROBLEM_KEYS = {
    "variables",
    "canonical_variables",
    "mode",
    "m",
    "s",
    "mu",
    "constants",
    "V",
    "W",
    "phi",
    "phi_inverse",
    "A_blocks",
    "F",
    "cofactor",
    "structure",
}


def _number(value, mode: str, where: str):
    """Coerce a JSON scalar (int, float, or fraction string) per mode."""
    if isinstance(value, bool):
        raise ProblemFormatError(f"{where}: booleans are not numbers")
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if mode != FLOAT:
            raise ProblemFormatError(f"{where}: float literal {value!r} requires FLOAT mode")
        return value
    if isinstance(value, str):
        try:
            frac = Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ProblemFormatError(f"{where}: cannot read {value!r} as a rational") from None
        if mode == FLOAT:
            return float(frac)
        return int(frac) if frac.denominator == 1 else frac
    raise ProblemFormatError(f"{where}: expected a number, got {value!r}")


def _parse_bound(text, table: VarTable, mode: str, constants: dict, where: str) -> Polynomial:
    """Parse over table plus constant names, then substitute the constants."""
    if not isinstance(text, str):
        raise ProblemFormatError(f"{where}: expected expression text, got {text!r}")
    if not constants:
        try:
            return parse_expression(text, table, mode)
        except ParseError as exc:
            raise ProblemFormatError(f"{where}: {exc}") from None
    extended = VarTable(table.names + tuple(constants))
    try:
        poly = parse_expression(text, extended, mode)
    except ParseError as exc:
        raise ProblemFormatError(f"{where}: {exc}") from None
    nvars = len(table)
    subs = [Polynomial.variable(nvars, k, mode) for k in range(nvars)]
    subs += [Polynomial.constant(nvars, value, mode) for value in constants.values()]
    return poly.compose(subs)


def _matrix(rows, size, mode: str, where: str) -> tuple:
    if not isinstance(rows, list) or len(rows) != size:
        raise ProblemFormatError(f"{where}: expected a {size}x{size} matrix")
    out = []
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != size:
            raise ProblemFormatError(f"{where}: row {r + 1} is not length {size}")
        out.append(tuple(_number(v, mode, f"{where}[{r + 1}]") for v in row))
    return tuple(out)


def parse_problem(text: str) -> ProblemDef:
    """Parse and validate a problem file (JSON text)."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ProblemFormatError("problem file must be a JSON object")
    unknown = set(data) - _PROBLEM_KEYS
    if unknown:
        raise ProblemFormatError(f"unknown keys: {sorted(unknown)}")
    for key in ("variables", "mode", "m", "mu", "V"):
        if key not in data:
            raise ProblemFormatError(f"missing required key {key!r}")

    mode = data["mode"]
    if mode not in (EXACT, FLOAT):
        raise ProblemFormatError(f"mode must be 'exact' or 'float', got {mode!r}")
    m = data["m"]
    s = data.get("s", 0)
    if not isinstance(m, int) or m < 1:
        raise ProblemFormatError("m must be an int >= 1")
    if not isinstance(s, int) or s < 0:
        raise ProblemFormatError("s must be an int >= 0")
    n = 2 * m + s

    try:
        variables = VarTable(data["variables"])
    except ValueError as exc:
        raise ProblemFormatError(f"variables: {exc}") from None
    if len(variables) != n:
        raise ProblemFormatError(
            f"got {len(variables)} variables but 2m+s = {n}"
        )
    canonical_names = data.get(
        "canonical_variables",
        [f"q{k + 1}" for k in range(m)]
        + [f"p{k + 1}" for k in range(m)]
        + [f"z{k + 1}" for k in range(s)],
    )
    try:
        canonical = VarTable(canonical_names)
    except ValueError as exc:
        raise ProblemFormatError(f"canonical_variables: {exc}") from None
    if len(canonical) != n:
        raise ProblemFormatError(f"canonical_variables must have {n} entries")

    constants_raw = data.get("constants", {})
    if not isinstance(constants_raw, dict):
        raise ProblemFormatError("constants must be an object")
    constants = {}
    for name, value in constants_raw.items():
        if not _NAME_RE.match(name) or name == "i":
            raise ProblemFormatError(f"invalid constant name {name!r}")
        if name in variables or name in canonical:
            raise ProblemFormatError(f"constant {name!r} collides with a variable")
        constants[name] = _number(value, mode, f"constants[{name!r}]")

    mu_raw = data["mu"]
    if not isinstance(mu_raw, list) or len(mu_raw) != m:
        raise ProblemFormatError(f"mu must be a list of {m} numbers")
    mu = tuple(_number(v, mode, f"mu[{k + 1}]") for k, v in enumerate(mu_raw))

    q_table = VarTable(canonical.names[:m])
    qp_table = VarTable(canonical.names[: 2 * m])
    z_table = VarTable(canonical.names[2 * m :])

    V = _parse_bound(data["V"], q_table, mode, constants, "V")

    W = None
    if "W" in data and data["W"] is not None:
        if s == 0:
            raise ProblemFormatError("W requires s >= 1")
        W = _parse_bound(data["W"], z_table, mode, constants, "W")

    sources = [key for key in ("phi", "A_blocks", "structure") if data.get(key) is not None]
    if len(sources) > 1:
        raise ProblemFormatError(
            f"conflicting structure sources {sources}; give at most one"
        )

    phi = phi_inverse = None
    if data.get("phi") is not None or data.get("phi_inverse") is not None:
        if data.get("phi") is None or data.get("phi_inverse") is None:
            raise ProblemFormatError("phi and phi_inverse must be given together")
        phi_raw, inv_raw = data["phi"], data["phi_inverse"]
        if not isinstance(phi_raw, list) or len(phi_raw) != n:
            raise ProblemFormatError(f"phi must be a list of {n} expressions")
        if not isinstance(inv_raw, list) or len(inv_raw) != n:
            raise ProblemFormatError(f"phi_inverse must be a list of {n} expressions")
        phi = tuple(
            _parse_bound(entry, variables, mode, constants, f"phi[{k + 1}]")
            for k, entry in enumerate(phi_raw)
        )
        phi_inverse = tuple(
            _parse_bound(entry, canonical, mode, constants, f"phi_inverse[{k + 1}]")
            for k, entry in enumerate(inv_raw)
        )

    A_blocks = None
    if data.get("A_blocks") is not None:
        raw = data["A_blocks"]
        if not isinstance(raw, dict) or set(raw) - {"B", "C", "D"}:
            raise ProblemFormatError("A_blocks must be an object with keys B, C, D")
        if "B" not in raw:
            raise ProblemFormatError("A_blocks missing 'B'")
        B = _matrix(raw["B"], m, mode, "A_blocks.B")
        # B alone names the matrix of the linear-substitution construction;
        # B with C (and D when s > 0) is a block-diagonal chart change.
        C = _matrix(raw["C"], m, mode, "A_blocks.C") if raw.get("C") else ()
        if s > 0:
            if not C:
                raise ProblemFormatError("A_blocks.C is required when s > 0")
            if "D" not in raw:
                raise ProblemFormatError("A_blocks.D is required when s > 0")
            D = _matrix(raw["D"], s, mode, "A_blocks.D")
        else:
            D = ()
            if raw.get("D"):
                raise ProblemFormatError("A_blocks.D must be empty when s = 0")
        A_blocks = (B, C, D)

    F = None
    if data.get("F") is not None:
        F = _parse_bound(data["F"], qp_table, mode, constants, "F")
    cofactor = None
    if data.get("cofactor") is not None:
        cofactor = _parse_bound(data["cofactor"], qp_table, mode, constants, "cofactor")

    structure = None
    if data.get("structure") is not None:
        raw = data["structure"]
        if not isinstance(raw, list) or len(raw) != n:
            raise ProblemFormatError(f"structure must be a {n}x{n} grid of expressions")
        grid = []
        for r, row in enumerate(raw):
            if not isinstance(row, list) or len(row) != n:
                raise ProblemFormatError(f"structure row {r + 1} is not length {n}")
            grid.append(
                tuple(
                    _parse_bound(entry, variables, mode, constants, f"structure[{r + 1}][{c + 1}]")
                    for c, entry in enumerate(row)
                )
            )
        structure = tuple(grid)

    return ProblemDef(
        variables=variables,
        canonical=canonical,
        mode=mode,
        m=m,
        s=s,
        mu=mu,
        V=V,
        W=W,
        phi=phi,
        phi_inverse=phi_inverse,
        A_blocks=A_blocks,
        F=F,
        cofactor=cofactor,
        structure=structure,
    )


def load_problem(path) -> ProblemDef:
    """Read and parse a problem file from disk."""
    with open(path, "r", encoding="utf-8") as handle:
        return parse_problem(handle.read())
