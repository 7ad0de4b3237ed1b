"""Seeded random generators shared by the module tests and the acceptance suite."""

import random
from fractions import Fraction

from poissondarboux import EXACT, FLOAT, Polynomial, PolyMap, gaussian


def random_exact_coeff(rng: random.Random):
    kind = rng.randrange(4)
    if kind == 0:
        return rng.randint(-9, 9)
    if kind == 1:
        return Fraction(rng.randint(-9, 9), rng.randint(1, 9))
    if kind == 2:
        return gaussian(rng.randint(-9, 9), rng.randint(1, 9))
    return gaussian(Fraction(rng.randint(-9, 9), rng.randint(1, 9)),
                    Fraction(rng.randint(-9, 9), rng.randint(1, 9)))


def random_polynomial(rng: random.Random, nvars: int, mode: str = EXACT,
                      max_degree: int = 4, max_terms: int = 6) -> Polynomial:
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        exps = [0] * nvars
        budget = rng.randint(0, max_degree)
        for _ in range(budget):
            exps[rng.randrange(nvars)] += 1
        if mode == EXACT:
            c = random_exact_coeff(rng)
        else:
            c = complex(rng.uniform(-5, 5), rng.uniform(-5, 5) if rng.random() < 0.4 else 0.0)
        terms[tuple(exps)] = c
    return Polynomial.from_terms(nvars, terms, mode)


def random_upper_polynomial(rng: random.Random, nvars: int, start: int,
                            max_degree: int = 2) -> Polynomial:
    """Exact polynomial using only variables with index >= start (may be zero)."""
    terms = {}
    for _ in range(rng.randint(0, 3)):
        exps = [0] * nvars
        for _ in range(rng.randint(1, max_degree)):
            exps[rng.randrange(start, nvars)] += 1
        terms[tuple(exps)] = rng.randint(-3, 3)
    return Polynomial.from_terms(nvars, terms, EXACT)


def random_triangular_map(rng: random.Random, n: int) -> PolyMap:
    """Unipotent triangular diffeomorphism: Phi_i = x_i + g_i(x_{i+1}..x_n).

    The inverse is computed by back-substitution and is polynomial; PolyMap
    checks the round-trip exactly at construction.
    """
    shifts = []
    for i in range(n - 1):
        shifts.append(random_upper_polynomial(rng, n, i + 1))
    shifts.append(Polynomial.zero(n, EXACT))
    forward = [Polynomial.variable(n, i, EXACT) + shifts[i] for i in range(n)]
    inverse = [None] * n
    inverse[n - 1] = Polynomial.variable(n, n - 1, EXACT)
    for i in range(n - 2, -1, -1):
        subs = [Polynomial.zero(n, EXACT)] * (i + 1) + inverse[i + 1 :]
        inverse[i] = Polynomial.variable(n, i, EXACT) - shifts[i].compose(subs)
    return PolyMap(forward, inverse)
