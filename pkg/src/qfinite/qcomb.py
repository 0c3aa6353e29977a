"""q-combinatorial building blocks.

Gaussian binomials (plain and starred, in base q**k), finite rising
q-factorials with their two q-binomial-theorem expansions, the Andrews-Baxter
trinomial T0 and Andrews' z-generalised binomial.  Everything returns an
arity-2 :class:`~qfinite.laurent.LaurentPolynomial` in (z, q).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

from .laurent import LaurentPolynomial, dot

__all__ = [
    "QBinomialArgs",
    "gaussian_binomial",
    "gaussian_binomial_star",
    "rising_q_factorial",
    "pochhammer_expansion_qbt1",
    "inverse_pochhammer_coefficient",
    "trinomial_T0",
    "andrews_z_binomial",
]

ZERO = LaurentPolynomial.zero(2)
ONE = LaurentPolynomial.one(2)


@dataclass(frozen=True)
class QBinomialArgs:
    A: int
    B: int
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("base step k must be positive")


# Pascal rows of base-q binomials, grown on demand.  Each row is a tuple
# indexed by B.  Guarded by a lock so concurrent callers see whole rows.
_rows: list[tuple[LaurentPolynomial, ...]] = [(ONE,)]
_rows_lock = threading.Lock()


def _pascal_row(A: int) -> tuple[LaurentPolynomial, ...]:
    if A < len(_rows):
        return _rows[A]
    with _rows_lock:
        while len(_rows) <= A:
            n = len(_rows)
            prev = _rows[n - 1]
            row = [ONE]
            for B in range(1, n):
                # [n, B] = [n-1, B] + q^(n-B) [n-1, B-1]
                row.append(prev[B] + prev[B - 1].monomial_scale((0, n - B)))
            row.append(ONE)
            _rows.append(tuple(row))
    return _rows[A]


@lru_cache(maxsize=None)
def _binomial(A: int, B: int, k: int) -> LaurentPolynomial:
    if not 0 <= B <= A:
        return ZERO
    base = _pascal_row(A)[B]
    return base if k == 1 else base.substitute_q_power(k)


def gaussian_binomial(args: QBinomialArgs | int, B: int | None = None, k: int = 1) -> LaurentPolynomial:
    """The Gaussian polynomial [A, B] in base q**k; zero unless 0 <= B <= A.

    Accepts either a :class:`QBinomialArgs` or the integers ``A, B[, k]``.
    """
    A, B, k = _unpack(args, B, k)
    return _binomial(A, B, k)


def gaussian_binomial_star(args: QBinomialArgs | int, B: int | None = None, k: int = 1) -> LaurentPolynomial:
    """Like :func:`gaussian_binomial` but equal to 1 at (A, B) = (-1, 0)."""
    A, B, k = _unpack(args, B, k)
    if A == -1 and B == 0:
        return ONE
    return _binomial(A, B, k)


def _unpack(args, B, k):
    if isinstance(args, QBinomialArgs):
        return args.A, args.B, args.k
    if B is None:
        raise TypeError("pass QBinomialArgs or A and B")
    if k < 1:
        raise ValueError("base step k must be positive")
    return int(args), int(B), int(k)


@lru_cache(maxsize=4096)
def rising_q_factorial(a_zexp: int, a_qexp: int, j: int, k: int = 1) -> LaurentPolynomial:
    """prod_{i<j} (1 - z^a_zexp q^(a_qexp + k*i))."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    out = ONE
    for i in range(j):
        out = out - out.monomial_scale((a_zexp, a_qexp + k * i))
    return out


def pochhammer_expansion_qbt1(a_zexp: int, a_qexp: int, j: int, k: int = 1) -> LaurentPolynomial:
    """sum_h (-1)^h t^h q^(k h(h-1)/2) [j, h]_{q^k} with t = z^a_zexp q^a_qexp."""
    if j < 0:
        raise ValueError("j must be nonnegative")
    out = ZERO
    for h in range(j + 1):
        shift = (a_zexp * h, a_qexp * h + k * h * (h - 1) // 2)
        out = out + gaussian_binomial(j, h, k).monomial_scale(shift, (-1) ** h)
    return out


def inverse_pochhammer_coefficient(h: int, j: int, k: int = 1) -> LaurentPolynomial:
    """Coefficient of t^h in 1/(t; q^k)_j, i.e. the starred [h+j-1, h]."""
    if h < 0 or j < 0:
        raise ValueError("h and j must be nonnegative")
    return gaussian_binomial_star(h + j - 1, h, k)


@lru_cache(maxsize=None)
def trinomial_T0(L: int, A: int) -> LaurentPolynomial:
    """Andrews-Baxter T0(L, A; q); zero for L < 0 (empty sum)."""
    return dot((gaussian_binomial(L, r, 2), gaussian_binomial(2 * L - 2 * r, L - A - r), None,
                -1 if r & 1 else 1) for r in range(L + 1))


def andrews_z_binomial(A: int, B: int, z_zexp: int = 1, z_qexp: int = 0) -> LaurentPolynomial:
    """Andrews' generalised binomial with argument zeta = z^z_zexp q^z_qexp.

    >>> str(andrews_z_binomial(1, 2))
    '-z*q^-1 + 1'
    """
    if B < 0:
        return ZERO
    if B == 0 or B == A:
        return ONE
    if B < A:
        out = ZERO
        for h in range(B + 1):
            out = out + gaussian_binomial(A - B + h - 1, h).monomial_scale((z_zexp * h, z_qexp * h))
        return out
    return rising_q_factorial(z_zexp, z_qexp + A - B, B - A, 1)
