"""Sparse multivariate polynomials over the Gaussian rationals or complex floats.

A polynomial is a dict from exponent vectors to coefficients.  Exponent
vectors are packed into a single int, 16 bits per variable, so monomial
products are plain integer additions; any exponent reaching 2**16 is a hard
error rather than a silent wrap.

Two coefficient modes exist and never mix:

* ``EXACT``: Gaussian rationals.  Real values are stored as ``int`` or
  ``fractions.Fraction`` (always in lowest terms, positive denominator) and
  values with a nonzero imaginary part as :class:`GaussianRational`.
* ``FLOAT``: complex doubles.  Terms whose coefficient magnitude drops to
  ``FLOAT_EPS`` or below are purged on every operation.

All operations return canonical polynomials: no zero (or purged) terms, all
coefficients demoted to the simplest representation.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

EXACT = "exact"
FLOAT = "float"

FLOAT_EPS = 1e-12
RATIONALIZE_MAX_DENOMINATOR = 10**6

_SHIFT = 16
_MASK = (1 << _SHIFT) - 1
_EXP_LIMIT = 1 << _SHIFT


class ModeError(ValueError):
    """Raised when EXACT and FLOAT data meet in one operation."""


class DegreeOverflowError(OverflowError):
    """Raised when an exponent would reach the packing limit of 2**16."""


class NotDivisibleError(ArithmeticError):
    """Raised by :func:`exact_divide` when the division leaves a remainder."""


class RationalizeError(ValueError):
    """Raised by :func:`rationalize` when no nearby rational exists."""


class GaussianRational:
    """A Gaussian rational a + b*i with b != 0.

    Purely real values are represented as ``int`` or ``Fraction`` instead;
    the :func:`gaussian` factory performs that demotion, and every arithmetic
    result is routed through it.  Instances are immutable.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        re = Fraction(re)
        im = Fraction(im)
        if not im:
            raise ValueError("imaginary part is zero; use gaussian() to build demoted values")
        object.__setattr__(self, "re", re)
        object.__setattr__(self, "im", im)

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return True  # im != 0 by construction

    def __eq__(self, other):
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        return False  # a real number never equals a value with im != 0

    def __hash__(self):
        return hash((self.re, self.im))

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __add__(self, other):
        if isinstance(other, GaussianRational):
            return gaussian(self.re + other.re, self.im + other.im)
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re + other, self.im)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, GaussianRational):
            return gaussian(self.re - other.re, self.im - other.im)
        if isinstance(other, (int, Fraction)):
            return GaussianRational(self.re - other, self.im)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other - self.re, -self.im)
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, GaussianRational):
            return gaussian(
                self.re * other.re - self.im * other.im,
                self.re * other.im + self.im * other.re,
            )
        if isinstance(other, (int, Fraction)):
            return gaussian(self.re * other, self.im * other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, GaussianRational):
            norm = other.re * other.re + other.im * other.im
            return gaussian(
                (self.re * other.re + self.im * other.im) / norm,
                (self.im * other.re - self.re * other.im) / norm,
            )
        if isinstance(other, (int, Fraction)):
            if not other:
                raise ZeroDivisionError("division by zero")
            return GaussianRational(Fraction(self.re, 1) / other, Fraction(self.im, 1) / other)
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Fraction)):
            norm = self.re * self.re + self.im * self.im
            return gaussian(other * self.re / norm, -other * self.im / norm)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (1 / self) ** (-n)
        result = 1
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


def gaussian(re, im=0):
    """Build an exact coefficient a + b*i, demoted to int or Fraction if b == 0."""
    im = Fraction(im)
    if im:
        return GaussianRational(re, im)
    re = Fraction(re)
    return int(re) if re.denominator == 1 else re


ExactCoeff = Union[int, Fraction, GaussianRational]


def coeff_div(a, b, mode: str):
    """Divide two coefficients within a mode, never through float for EXACT."""
    if mode == FLOAT:
        a, b = complex(a), complex(b)
        if b.imag == 0.0:  # avoid complex-division noise for real denominators
            return complex(a.real / b.real, a.imag / b.real)
        if b.real == 0.0:
            return complex(a.imag / b.imag, -a.real / b.imag)
        return a / b
    if isinstance(a, GaussianRational) or isinstance(b, GaussianRational):
        if not isinstance(a, GaussianRational):
            return a / b if isinstance(b, GaussianRational) else gaussian(Fraction(a) / Fraction(b))
        return a / b
    result = Fraction(a) / Fraction(b)
    return int(result) if result.denominator == 1 else result


def coeff_abs(c) -> float:
    """Magnitude of a coefficient of either mode, as a float."""
    return abs(complex(c))


def _coerce_exact(c) -> ExactCoeff:
    if isinstance(c, bool):
        return int(c)
    if isinstance(c, int):
        return c
    if isinstance(c, Fraction):
        return int(c) if c.denominator == 1 else c
    if isinstance(c, GaussianRational):
        return c
    raise ModeError(f"coefficient {c!r} is not usable in EXACT mode")


def _coerce_float(c) -> complex:
    if isinstance(c, bool):
        return complex(int(c))
    if isinstance(c, (int, float, complex)):
        return complex(c)
    raise ModeError(f"coefficient {c!r} is not usable in FLOAT mode")


def coerce_coeff(c, mode: str):
    """Validate and normalize a scalar for the given mode."""
    if mode == EXACT:
        return _coerce_exact(c)
    if mode == FLOAT:
        return _coerce_float(c)
    raise ValueError(f"unknown mode {mode!r}")


def _demote(c):
    if type(c) is Fraction and c.denominator == 1:
        return int(c)
    return c


def _clean_exact(packed: dict) -> dict:
    out = {}
    for key, c in packed.items():
        c = _demote(c)
        if c:
            out[key] = c
    return out


def _clean_float(packed: dict) -> dict:
    eps = FLOAT_EPS
    return {key: c for key, c in packed.items() if abs(c) > eps}


def _pack(exps: Sequence[int], nvars: int) -> int:
    if len(exps) != nvars:
        raise ValueError(f"exponent vector {exps!r} does not have {nvars} entries")
    key = 0
    for k, e in enumerate(exps):
        if not isinstance(e, int) or e < 0:
            raise ValueError(f"exponent {e!r} must be a nonnegative int")
        if e >= _EXP_LIMIT:
            raise DegreeOverflowError(f"exponent {e} reaches the limit {_EXP_LIMIT}")
        key |= e << (_SHIFT * k)
    return key


def _unpack(key: int, nvars: int) -> tuple:
    return tuple((key >> (_SHIFT * k)) & _MASK for k in range(nvars))


def _grlex_key(exps: tuple):
    return (sum(exps), exps)


class Polynomial:
    """Immutable sparse polynomial with a fixed variable count and mode."""

    __slots__ = ("nvars", "mode", "_terms")

    def __init__(self, nvars: int, mode: str, terms: dict | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        if mode not in (EXACT, FLOAT):
            raise ValueError(f"unknown mode {mode!r}")
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "mode", mode)
        packed = {}
        if terms:
            for exps, c in terms.items():
                c = coerce_coeff(c, mode)
                key = _pack(tuple(exps), nvars)
                if key in packed:
                    c = packed[key] + c
                packed[key] = c
        packed = _clean_exact(packed) if mode == EXACT else _clean_float(packed)
        object.__setattr__(self, "_terms", packed)

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    # -- construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, nvars: int, mode: str, packed: dict) -> "Polynomial":
        self = object.__new__(cls)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "_terms", packed)
        return self

    @classmethod
    def zero(cls, nvars: int, mode: str = EXACT) -> "Polynomial":
        return cls(nvars, mode)

    @classmethod
    def constant(cls, nvars: int, value, mode: str = EXACT) -> "Polynomial":
        return cls(nvars, mode, {(0,) * nvars: value})

    @classmethod
    def one(cls, nvars: int, mode: str = EXACT) -> "Polynomial":
        return cls.constant(nvars, 1, mode)

    @classmethod
    def variable(cls, nvars: int, k: int, mode: str = EXACT) -> "Polynomial":
        if not 0 <= k < nvars:
            raise ValueError(f"variable index {k} out of range for {nvars} variables")
        exps = tuple(1 if j == k else 0 for j in range(nvars))
        return cls(nvars, mode, {exps: 1})

    @classmethod
    def from_terms(cls, nvars: int, terms: dict, mode: str = EXACT) -> "Polynomial":
        return cls(nvars, mode, terms)

    # -- views ----------------------------------------------------------------

    def terms(self) -> list:
        """Terms as (exponent tuple, coefficient), graded-lex descending."""
        items = [(_unpack(key, self.nvars), c) for key, c in self._terms.items()]
        items.sort(key=lambda t: _grlex_key(t[0]), reverse=True)
        return items

    def coefficient(self, exps: Sequence[int]):
        """Coefficient of one monomial (0 for absent terms)."""
        c = self._terms.get(_pack(tuple(exps), self.nvars))
        if c is not None:
            return c
        return 0 if self.mode == EXACT else 0j

    def leading_term(self) -> tuple:
        """(exponent tuple, coefficient) of the graded-lex largest monomial."""
        if not self._terms:
            raise ValueError("the zero polynomial has no leading term")
        exps = max((_unpack(key, self.nvars) for key in self._terms), key=_grlex_key)
        return exps, self._terms[_pack(exps, self.nvars)]

    def total_degree(self) -> int:
        """Largest term degree, or -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(sum(_unpack(key, self.nvars)) for key in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def max_abs_coeff(self) -> float:
        """Largest coefficient magnitude (0.0 for the zero polynomial)."""
        if not self._terms:
            return 0.0
        return max(coeff_abs(c) for c in self._terms.values())

    def _max_exps(self) -> list:
        maxes = [0] * self.nvars
        for key in self._terms:
            for k in range(self.nvars):
                e = (key >> (_SHIFT * k)) & _MASK
                if e > maxes[k]:
                    maxes[k] = e
        return maxes

    # -- ring operations ------------------------------------------------------

    def _check_compatible(self, other: "Polynomial"):
        if not isinstance(other, Polynomial):
            raise TypeError(f"expected a Polynomial, got {other!r}")
        if self.mode != other.mode:
            raise ModeError(f"cannot mix {self.mode} and {other.mode} polynomials")
        if self.nvars != other.nvars:
            raise ValueError(f"variable counts differ: {self.nvars} vs {other.nvars}")

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (
            self.nvars == other.nvars
            and self.mode == other.mode
            and self._terms == other._terms
        )

    __hash__ = None

    def __add__(self, other):
        self._check_compatible(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            prev = out.get(key)
            out[key] = c if prev is None else prev + c
        out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
        return Polynomial._raw(self.nvars, self.mode, out)

    def __sub__(self, other):
        self._check_compatible(other)
        out = dict(self._terms)
        for key, c in other._terms.items():
            prev = out.get(key)
            out[key] = -c if prev is None else prev - c
        out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
        return Polynomial._raw(self.nvars, self.mode, out)

    def __neg__(self):
        return Polynomial._raw(
            self.nvars, self.mode, {key: -c for key, c in self._terms.items()}
        )

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check_compatible(other)
            if self._terms and other._terms:
                amax = self._max_exps()
                bmax = other._max_exps()
                if any(a + b >= _EXP_LIMIT for a, b in zip(amax, bmax)):
                    raise DegreeOverflowError(
                        f"product exponent would reach the limit {_EXP_LIMIT}"
                    )
            out: dict = {}
            items = list(other._terms.items())
            for ka, ca in self._terms.items():
                for kb, cb in items:
                    key = ka + kb
                    c = ca * cb
                    prev = out.get(key)
                    out[key] = c if prev is None else prev + c
            out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
            return Polynomial._raw(self.nvars, self.mode, out)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def scale(self, c) -> "Polynomial":
        """Multiply by a scalar of the matching mode."""
        c = coerce_coeff(c, self.mode)
        out = {key: c * v for key, v in self._terms.items()}
        out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
        return Polynomial._raw(self.nvars, self.mode, out)

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("polynomial powers must be nonnegative ints")
        result = Polynomial.one(self.nvars, self.mode)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- calculus and substitution --------------------------------------------

    def diff(self, k: int) -> "Polynomial":
        """Partial derivative with respect to variable k (0-based)."""
        if not 0 <= k < self.nvars:
            raise ValueError(f"variable index {k} out of range for {self.nvars} variables")
        shift = _SHIFT * k
        out = {}
        for key, c in self._terms.items():
            e = (key >> shift) & _MASK
            if e:
                out[key - (1 << shift)] = c * e
        out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
        return Polynomial._raw(self.nvars, self.mode, out)

    def compose(self, subs: Sequence["Polynomial"]) -> "Polynomial":
        """Substitute subs[k] for variable k; subs share a common variable count."""
        if len(subs) != self.nvars:
            raise ValueError(f"need {self.nvars} substitutions, got {len(subs)}")
        if self.nvars == 0:
            raise ValueError("cannot infer target variable count; use eval or rebuild")
        target = subs[0].nvars
        for q in subs:
            if not isinstance(q, Polynomial):
                raise TypeError("substitutions must be Polynomials")
            if q.mode != self.mode:
                raise ModeError(f"cannot mix {self.mode} and {q.mode} polynomials")
            if q.nvars != target:
                raise ValueError("substitutions must share one variable count")
        caches: list = [{} for _ in range(self.nvars)]

        def var_power(k: int, e: int) -> Polynomial:
            cache = caches[k]
            hit = cache.get(e)
            if hit is not None:
                return hit
            if e == 1:
                result = subs[k]
            else:
                half = var_power(k, e // 2)
                result = half * half
                if e & 1:
                    result = result * subs[k]
            cache[e] = result
            return result

        out: dict = {}
        for key, c in self._terms.items():
            prod = None
            for k in range(self.nvars):
                e = (key >> (_SHIFT * k)) & _MASK
                if e:
                    pk = var_power(k, e)
                    prod = pk if prod is None else prod * pk
            if prod is None:
                prev = out.get(0)
                out[0] = c if prev is None else prev + c
            else:
                for kk, cc in prod._terms.items():
                    c2 = cc * c
                    prev = out.get(kk)
                    out[kk] = c2 if prev is None else prev + c2
        out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
        return Polynomial._raw(target, self.mode, out)

    def sign_flip(self, indices: Iterable[int]) -> "Polynomial":
        """Substitute x_k -> -x_k for every k in indices."""
        index_set = set(indices)
        for k in index_set:
            if not 0 <= k < self.nvars:
                raise ValueError(f"variable index {k} out of range for {self.nvars} variables")
        out = {}
        for key, c in self._terms.items():
            parity = sum((key >> (_SHIFT * k)) & _MASK for k in index_set)
            out[key] = -c if parity & 1 else c
        return Polynomial._raw(self.nvars, self.mode, out)

    def eval(self, point: Sequence):
        """Evaluate at a point; scalars must match the polynomial's mode."""
        if len(point) != self.nvars:
            raise ValueError(f"need {self.nvars} coordinates, got {len(point)}")
        values = [coerce_coeff(x, self.mode) for x in point]
        caches: list = [{0: 1, 1: v} for v in values]
        total = 0 if self.mode == EXACT else 0j
        for key, c in self._terms.items():
            acc = c
            for k in range(self.nvars):
                e = (key >> (_SHIFT * k)) & _MASK
                if e:
                    cache = caches[k]
                    p = cache.get(e)
                    if p is None:
                        p = cache[1] ** e
                        cache[e] = p
                    acc = acc * p
            total = total + acc
        return total

    def to_float(self) -> "Polynomial":
        """Copy into FLOAT mode (identity for FLOAT polynomials)."""
        if self.mode == FLOAT:
            return self
        out = {key: complex(c) for key, c in self._terms.items()}
        return Polynomial._raw(self.nvars, FLOAT, _clean_float(out))

    def map_coefficients(self, fn) -> "Polynomial":
        """Apply fn to every coefficient, keeping mode and recanonicalizing."""
        out = {key: coerce_coeff(fn(c), self.mode) for key, c in self._terms.items()}
        out = _clean_exact(out) if self.mode == EXACT else _clean_float(out)
        return Polynomial._raw(self.nvars, self.mode, out)

    def __repr__(self):
        names = [f"x{k + 1}" for k in range(self.nvars)]
        return f"<Polynomial {self.mode} {format_polynomial(self, names)!r}>"


# -- rendering ----------------------------------------------------------------


def _format_fraction(f) -> str:
    return str(f)  # int and Fraction both print as a or a/b


def _format_exact_coeff(c) -> tuple:
    """Return (negate, text, is_unit) for an exact coefficient."""
    if isinstance(c, GaussianRational):
        if not c.re:  # pure imaginary: keep it unparenthesized
            mag = abs(c.im)
            body = "i" if mag == 1 else f"{_format_fraction(mag)}*i"
            return c.im < 0, body, False
        im_mag = abs(c.im)
        im_body = "i" if im_mag == 1 else f"{_format_fraction(im_mag)}*i"
        sign = "-" if c.im < 0 else "+"
        return False, f"({_format_fraction(c.re)}{sign}{im_body})", False
    return c < 0, _format_fraction(abs(c)), abs(c) == 1


def _format_float_coeff(c: complex) -> tuple:
    """Return (negate, text, is_unit) for a complex-double coefficient."""
    if c.imag == 0.0:
        mag = abs(c.real)
        return c.real < 0, repr(mag), False
    if c.real == 0.0:
        mag = abs(c.imag)
        body = "i" if mag == 1.0 else f"{mag!r}*i"
        return c.imag < 0, body, False
    im_mag = abs(c.imag)
    im_body = "i" if im_mag == 1.0 else f"{im_mag!r}*i"
    sign = "-" if c.imag < 0 else "+"
    return False, f"({c.real!r}{sign}{im_body})", False


def format_polynomial(p: Polynomial, names: Sequence[str]) -> str:
    """Canonical text form: graded-lex descending, explicit * and ^.

    The output parses back to an equal polynomial in the same mode (FLOAT
    coefficients use repr, which round-trips doubles exactly).
    """
    if len(names) != p.nvars:
        raise ValueError(f"need {p.nvars} variable names, got {len(names)}")
    if p.is_zero():
        return "0"
    pieces = []
    for exps, c in p.terms():
        if p.mode == EXACT:
            negate, text, is_unit = _format_exact_coeff(c)
        else:
            negate, text, is_unit = _format_float_coeff(c)
        factors = []
        for name, e in zip(names, exps):
            if e == 1:
                factors.append(name)
            elif e:
                factors.append(f"{name}^{e}")
        if not factors:
            body = text
        elif is_unit:
            body = "*".join(factors)
        else:
            body = "*".join([text] + factors)
        pieces.append(("-" if negate else "+", body))
    sign, body = pieces[0]
    parts = [body if sign == "+" else f"-{body}"]
    for sign, body in pieces[1:]:
        parts.append(f" {'+' if sign == '+' else '-'} {body}")
    return "".join(parts)


# -- division and rationalization ----------------------------------------------


def _monomial_divides(den: tuple, num: tuple) -> bool:
    return all(d <= n for d, n in zip(den, num))


def exact_divide(num: Polynomial, den: Polynomial, tol: float = 1e-9) -> Polynomial:
    """Quotient num/den, raising NotDivisibleError on a nonzero remainder.

    Runs monomial division against the graded-lex leading term of den.  A
    single divisor is a Groebner basis of the ideal it generates, so the
    remainder is canonical: it vanishes exactly when den divides num.  In
    FLOAT mode the remainder only has to stay below tol in coefficient
    magnitude.
    """
    if not isinstance(num, Polynomial) or not isinstance(den, Polynomial):
        raise TypeError("exact_divide expects two Polynomials")
    num._check_compatible(den)
    if den.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    nvars, mode = num.nvars, num.mode
    lead_exps, lead_coeff = den.leading_term()
    lead_key = _pack(lead_exps, nvars)
    quotient: dict = {}
    remainder: dict = {}
    work = dict(num._terms)
    while work:
        exps = max((_unpack(key, nvars) for key in work), key=_grlex_key)
        key = _pack(exps, nvars)
        c = work.pop(key)
        if (mode == EXACT and not c) or (mode == FLOAT and abs(c) <= FLOAT_EPS):
            continue
        if not _monomial_divides(lead_exps, exps):
            remainder[key] = c
            continue
        qc = coeff_div(c, lead_coeff, mode)
        qkey = key - lead_key
        prev = quotient.get(qkey)
        quotient[qkey] = qc if prev is None else prev + qc
        for dkey, dc in den._terms.items():
            if dkey == lead_key:
                continue
            tkey = qkey + dkey
            sub = qc * dc
            prev = work.get(tkey)
            work[tkey] = -sub if prev is None else prev - sub
    if mode == EXACT:
        remainder = _clean_exact(remainder)
        if remainder:
            raise NotDivisibleError("division leaves a nonzero remainder")
        quotient = _clean_exact(quotient)
    else:
        residual = max((abs(c) for c in remainder.values()), default=0.0)
        if residual > tol:
            raise NotDivisibleError(
                f"division leaves a remainder of magnitude {residual:.3e}"
            )
        quotient = _clean_float(quotient)
    return Polynomial._raw(nvars, mode, quotient)


def _rationalize_part(x: float, tol: float, max_den: int) -> Fraction:
    approx = Fraction(x).limit_denominator(max_den)
    if abs(approx - Fraction(x)) > tol:
        raise RationalizeError(
            f"{x!r} has no rational approximation within {tol} at denominator bound {max_den}"
        )
    return approx


def rationalize(
    p: Polynomial, tol: float = 1e-12, max_denominator: int | None = None
) -> Polynomial:
    """Snap a FLOAT polynomial to EXACT coefficients within tol, or raise.

    Each coefficient's real and imaginary parts are approximated by
    fractions with denominators bounded by max_denominator (default
    RATIONALIZE_MAX_DENOMINATOR); any part landing farther than tol from its
    approximation raises RationalizeError.
    """
    if p.mode == EXACT:
        return p
    bound = RATIONALIZE_MAX_DENOMINATOR if max_denominator is None else max_denominator
    out = {}
    for key, c in p._terms.items():
        re = _rationalize_part(c.real, tol, bound)
        im = _rationalize_part(c.imag, tol, bound)
        out[key] = gaussian(re, im)
    return Polynomial._raw(p.nvars, EXACT, _clean_exact(out))
