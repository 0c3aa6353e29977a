"""Exact nullspaces of integer/rational linear systems.

Two routes:

* :func:`rational_nullspace` - plain Gauss-Jordan over ``Fraction``.  Fine
  for small systems and used as the reference.
* :func:`nullspace_from_images` - row-reduce modular images with numpy,
  lift the reduced basis by CRT + rational reconstruction, and accept it only
  once every lifted vector passes an exact check supplied by the caller.
  Since the nullity of any image is an upper bound for the rational nullity,
  a full set of verified lifts *is* the rational nullspace.
"""

from __future__ import annotations

import logging
import math
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import gmpy2
import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "rational_nullspace",
    "rank",
    "in_span",
    "primes_below_2_31",
    "rref_mod_p",
    "rational_reconstruction",
    "nullspace_from_images",
    "primitive_integer_vector",
    "NullspaceError",
]

Row = Mapping[int, int | Fraction] | Sequence[int | Fraction]


class NullspaceError(RuntimeError):
    """The modular route did not converge to a verified basis."""


def _as_dict(row: Row) -> dict[int, Fraction]:
    if isinstance(row, Mapping):
        return {int(k): Fraction(v) for k, v in row.items() if v}
    return {k: Fraction(v) for k, v in enumerate(row) if v}


def _echelon(rows: Iterable[Row]) -> tuple[list[dict[int, Fraction]], list[int]]:
    """Reduced row echelon form; rows are sparse dicts with pivot entry 1."""
    basis: list[dict[int, Fraction]] = []
    pivots: list[int] = []
    for row in rows:
        r = _as_dict(row)
        for b, pc in zip(basis, pivots):
            f = r.get(pc)
            if f:
                for c, v in b.items():
                    nv = r.get(c, 0) - f * v
                    if nv:
                        r[c] = nv
                    else:
                        r.pop(c, None)
        if not r:
            continue
        pc = min(r)
        inv = 1 / r[pc]
        r = {c: v * inv for c, v in r.items()}
        for b in basis:
            f = b.get(pc)
            if f:
                for c, v in r.items():
                    nv = b.get(c, 0) - f * v
                    if nv:
                        b[c] = nv
                    else:
                        b.pop(c, None)
        basis.append(r)
        pivots.append(pc)
    return basis, pivots


def rational_nullspace(rows: Iterable[Row], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : row . x = 0 for every row}, one vector per free column.

    Each basis vector has a 1 in its free column and 0 in the other free
    columns, so the basis is canonical.
    """
    basis, pivots = _echelon(rows)
    pivset = set(pivots)
    out = []
    for f in range(ncols):
        if f in pivset:
            continue
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for b, pc in zip(basis, pivots):
            if f in b:
                v[pc] = -b[f]
        out.append(v)
    return out


def rank(rows: Iterable[Row]) -> int:
    return len(_echelon(rows)[0])


def in_span(vectors: Sequence[Row], target: Row) -> bool:
    """True when ``target`` is a rational combination of ``vectors``."""
    return rank(list(vectors) + [target]) == rank(vectors)


# -- modular route ---------------------------------------------------------


def primes_below_2_31(count: int, start: int = 2**31 - 1) -> list[int]:
    """The ``count`` largest primes below ``start`` (products stay inside int64)."""
    out = []
    p = start
    while len(out) < count:
        if gmpy2.is_prime(p):
            out.append(p)
        p -= 1
    return out


def rref_mod_p(M: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of an int64 matrix over GF(p)."""
    A = np.array(M, dtype=np.int64) % p
    nrows, ncols = A.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(A[r:, c])
        if nz.size == 0:
            continue
        k = r + int(nz[0])
        if k != r:
            A[[r, k]] = A[[k, r]]
        inv = pow(int(A[r, c]), p - 2, p)
        A[r] = (A[r] * inv) % p
        col = A[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            A[rows] = (A[rows] - np.outer(col[rows], A[r]) % p) % p
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rational_reconstruction(a: int, m: int) -> Fraction | None:
    """The fraction n/d with |n|, d <= sqrt(m/2) congruent to a mod m, if any."""
    a %= m
    if a == 0:
        return Fraction(0)
    bound = math.isqrt(m // 2)
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1 > bound:
        qt = r0 // r1
        r0, r1 = r1, r0 - qt * r1
        s0, s1 = s1, s0 - qt * s1
    if s1 == 0 or abs(s1) > bound:
        return None
    frac = Fraction(r1, s1)
    if math.gcd(frac.numerator, frac.denominator) != 1:
        return None
    return frac


def nullspace_from_images(
    image: Callable[[int], np.ndarray],
    ncols: int,
    verify: Callable[[list[Fraction]], bool],
    max_primes: int = 12,
) -> list[list[Fraction]]:
    """Certified rational nullspace from modular images.

    ``image(p)`` returns an int64 matrix whose rows are F_p-combinations of
    the true system's rows (e.g. the system evaluated at random points mod p).
    ``verify(v)`` must decide exactly whether ``v`` solves the true system.
    """
    best_pivots: tuple[int, ...] | None = None
    residues: list[list[int]] = []
    modulus = 1
    for p in primes_below_2_31(max_primes):
        R, pivots = rref_mod_p(image(p), p)
        pivots_t = tuple(pivots)
        if best_pivots is not None and pivots_t != best_pivots:
            # the image with more pivots (or earlier pivots at equal rank) wins
            if (len(pivots_t), [-c for c in pivots_t]) < (len(best_pivots), [-c for c in best_pivots]):
                log.debug("discarding unlucky prime %d", p)
                continue
            best_pivots, residues, modulus = None, [], 1
        free = [c for c in range(ncols) if c not in set(pivots)]
        vecs = []
        for f in free:
            v = [0] * ncols
            v[f] = 1
            for i, pc in enumerate(pivots):
                v[pc] = int(-R[i, f]) % p
            vecs.append(v)
        if best_pivots is None:
            best_pivots = pivots_t
            residues = vecs
            modulus = p
        else:
            residues = [[_crt(x, modulus, y, p) for x, y in zip(old, new)]
                        for old, new in zip(residues, vecs)]
            modulus *= p
        if not residues:
            return []
        lifted = []
        for v in residues:
            w = [rational_reconstruction(x, modulus) for x in v]
            if any(x is None for x in w):
                break
            lifted.append(w)
        else:
            if all(verify(w) for w in lifted):
                return lifted
    raise NullspaceError("modular images did not yield a verified nullspace basis")


def _crt(a: int, m: int, b: int, n: int) -> int:
    # x = a mod m, x = b mod n, with m and n coprime
    t = ((b - a) * pow(m, -1, n)) % n
    return a + m * t


def primitive_integer_vector(v: Sequence[Fraction]) -> list[int]:
    """Scale to integers with gcd 1; the first nonzero entry is made positive."""
    den = 1
    for x in v:
        den = den * Fraction(x).denominator // math.gcd(den, Fraction(x).denominator)
    ints = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in ints:
        g = math.gcd(g, x)
    if g == 0:
        return ints
    ints = [x // g for x in ints]
    lead = next(x for x in ints if x)
    return [-x for x in ints] if lead < 0 else ints
