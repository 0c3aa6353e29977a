"""Truncated power series in q with Laurent-polynomial coefficients in z.

Used to expand the infinite products on the right of the three two-variable
series-product identities, the matching theta sums (Jacobi triple product),
and to watch the finite polynomials P_n converge to those products.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .identities import IdentityId, MAIN_IDENTITIES, lhs_poly
from .laurent import LaurentPolynomial, PolySum
from .qcomb import rising_q_factorial

log = logging.getLogger(__name__)

__all__ = [
    "TruncatedSeries",
    "Factor",
    "product_truncated",
    "invert_series",
    "product_side",
    "series_side",
    "theta_truncated",
    "triple_product",
    "jtp_check",
    "LimitResult",
    "limit_check",
    "stabilization_valuations",
    "rr_two_variable_lhs",
    "rr_two_variable_rhs",
    "rogers_ramanujan_products",
]

ONE = LaurentPolynomial.one(2)


@dataclass(frozen=True)
class TruncatedSeries:
    """A polynomial known modulo q^(order+1)."""

    body: LaurentPolynomial
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise ValueError("order must be nonnegative")
        if self.body.arity != 2:
            raise ValueError("series bodies are (z, q) polynomials")
        if self.body and self.body.q_degree() > self.order:
            raise ValueError("body has terms above the truncation order")

    @classmethod
    def of(cls, poly: LaurentPolynomial, order: int) -> "TruncatedSeries":
        return cls(poly.truncate_q(order), order)

    @classmethod
    def one(cls, order: int) -> "TruncatedSeries":
        return cls(ONE, order)

    def _match(self, other: "TruncatedSeries") -> int:
        return min(self.order, other.order)

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        N = self._match(other)
        return TruncatedSeries.of(self.body + other.body, N)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        N = self._match(other)
        return TruncatedSeries.of(self.body - other.body, N)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            N = self._match(other)
            a, b = self.body.truncate_q(N), other.body.truncate_q(N)
            return TruncatedSeries.of(a * b, N)
        if isinstance(other, (int, LaurentPolynomial)):
            return TruncatedSeries.of(self.body * other, self.order)
        return NotImplemented

    __rmul__ = __mul__

    def truncate(self, order: int) -> "TruncatedSeries":
        if order > self.order:
            raise ValueError("cannot raise the truncation order")
        return TruncatedSeries.of(self.body, order)

    def specialize_z(self, q_power: int) -> "TruncatedSeries":
        """Substitute z = q**q_power.

        Only safe when it cannot pull discarded high-order terms downwards:
        q_power = 0, or q_power > 0 with no negative z-exponents present.
        """
        if q_power < 0:
            raise ValueError("negative q_power would mix truncated terms into the result")
        if q_power > 0 and any(a < 0 for a, _ in self.body.terms):
            raise ValueError("negative z-exponents present; z = q^k would be inexact")
        return TruncatedSeries.of(self.body.specialize_z(q_power), self.order)


@dataclass(frozen=True)
class Factor:
    """(sign * z^z_exp q^q_exp; q^step)_infinity, i.e. prod_i (1 - sign z^a q^(b + step*i)).

    sign = -1 expresses factors such as (-q; q^2)_inf.
    """

    z_exp: int
    q_exp: int
    step: int
    sign: int = 1

    def __post_init__(self):
        if self.q_exp < 1:
            raise ValueError("factor needs q-exponent >= 1 to truncate finitely")
        if self.step < 1:
            raise ValueError("step must be positive")
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")


def product_truncated(factors: Iterable[Factor | Sequence[int]], N: int) -> TruncatedSeries:
    """Expand a product of infinite q-Pochhammer symbols through q^N."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    body = ONE
    for f in factors:
        if not isinstance(f, Factor):
            f = Factor(*f)
        e = f.q_exp
        while e <= N:
            body = (body - body.monomial_scale((f.z_exp, e), f.sign)).truncate_q(N)
            e += f.step
    return TruncatedSeries(body, N)


def invert_series(s: TruncatedSeries) -> TruncatedSeries:
    """Multiplicative inverse modulo q^(N+1) by Newton iteration."""
    if s.body.q_valuation() < 0 or s.body.q_coefficient(0) != ONE:
        raise ValueError("series inversion needs constant term exactly 1")
    N = s.order
    t = ONE
    prec = 1  # t is correct modulo q^prec
    while prec < N + 1:
        prec = min(2 * prec, N + 1)
        sp = s.body.truncate_q(prec - 1)
        err = (ONE - (sp * t).truncate_q(prec - 1))
        t = (t + (t * err).truncate_q(prec - 1)).truncate_q(prec - 1)
    return TruncatedSeries(t.truncate_q(N), N)


# (numerator factors, denominator factors) of each infinite product side
_PRODUCTS = {
    IdentityId.R1_FINITE: (
        [Factor(1, 3, 6), Factor(-1, 3, 6), Factor(0, 6, 6)],
        [Factor(0, 2, 2)],
    ),
    IdentityId.R1_PARTNER_FINITE: (
        [Factor(1, 2, 3), Factor(-1, 1, 3), Factor(0, 3, 3)],
        [Factor(0, 1, 1)],
    ),
    IdentityId.R2_FINITE: (
        [Factor(1, 2, 4), Factor(-1, 2, 4), Factor(0, 4, 4), Factor(0, 1, 2, -1)],
        [Factor(0, 2, 2)],
    ),
}


def _main(ident) -> IdentityId:
    ident = IdentityId.parse(ident)
    if ident not in MAIN_IDENTITIES:
        raise ValueError(f"{ident.name} has no infinite-product side")
    return ident


def product_side(ident: IdentityId | str, N: int) -> TruncatedSeries:
    """The infinite product a finite family converges to, through q^N."""
    ident = _main(ident)
    num, den = _PRODUCTS[ident]
    return product_truncated(num, N) * invert_series(product_truncated(den, N))


def series_side(ident: IdentityId | str, N: int) -> TruncatedSeries:
    """The infinite q-hypergeometric sum side, through q^N."""
    ident = _main(ident)
    acc = PolySum()
    j = 0
    while True:
        if ident is IdentityId.R1_FINITE:
            lead = 2 * j * j
            num = rising_q_factorial(1, 1, j, 2) * rising_q_factorial(-1, 1, j, 2)
            den = rising_q_factorial(0, 2, 2 * j, 2)
        elif ident is IdentityId.R1_PARTNER_FINITE:
            lead = j * (j + 1)
            num = rising_q_factorial(1, 0, j, 1) * rising_q_factorial(-1, 1, j + 1, 1)
            den = rising_q_factorial(0, 1, 2 * j + 1, 1)
        else:
            lead = j * j
            num = rising_q_factorial(1, 1, j, 2) * rising_q_factorial(-1, 1, j, 2)
            den = rising_q_factorial(0, 1, j, 2) * rising_q_factorial(0, 4, j, 4)
        if lead > N:
            break
        M = N - lead
        term = TruncatedSeries.of(num, M) * invert_series(TruncatedSeries.of(den, M))
        acc.add(term.body, (0, lead))
        j += 1
    return TruncatedSeries.of(acc.result(), N)


def _theta_exponent(ident: IdentityId, j: int) -> int:
    if ident is IdentityId.R1_FINITE:
        return 3 * j * j
    if ident is IdentityId.R1_PARTNER_FINITE:
        return j * (3 * j + 1) // 2
    return 2 * j * j


def theta_truncated(ident: IdentityId | str, N: int) -> TruncatedSeries:
    """sum over all integers j of (-1)^j z^j q^e(j) with e(j) <= N."""
    ident = _main(ident)
    terms = {}
    j = 0
    while _theta_exponent(ident, j) <= N or _theta_exponent(ident, -j) <= N:
        for jj in {j, -j}:
            e = _theta_exponent(ident, jj)
            if e <= N:
                terms[(jj, e)] = -1 if jj & 1 else 1
        j += 1
    return TruncatedSeries(LaurentPolynomial(terms, 2), N)


def triple_product(ident: IdentityId | str, N: int) -> TruncatedSeries:
    """The numerator triple product matching :func:`theta_truncated`."""
    ident = _main(ident)
    return product_truncated(_PRODUCTS[ident][0][:3], N)


def jtp_check(ident: IdentityId | str, N: int) -> bool:
    return theta_truncated(ident, N) == triple_product(ident, N)


@dataclass
class LimitResult:
    identity: IdentityId
    n: int
    status: str
    order: int
    valuations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        return {"identity": self.identity.value, "n": self.n, "status": self.status,
                "order": self.order, "valuations": [str(v) for v in self.valuations]}


def stabilization_valuations(ident: IdentityId | str, n_max: int) -> list:
    """q_valuation(P_{m+1} - P_m) for m = 0 .. n_max - 1."""
    ident = _main(ident)
    return [(lhs_poly(ident, m + 1) - lhs_poly(ident, m)).q_valuation() for m in range(n_max)]


def limit_check(ident: IdentityId | str, n: int, margin: int = 0) -> LimitResult:
    """Compare P_n with the product side up to the order where P_n has settled.

    The settled order M is the smallest q-valuation of P_{m+1} - P_m over
    m = n-3 .. n-1; the comparison runs through q^(M - margin).
    """
    ident = _main(ident)
    if n < 4:
        raise ValueError("limit_check needs n >= 4")
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    vals = [(lhs_poly(ident, m + 1) - lhs_poly(ident, m)).q_valuation() for m in range(n - 3, n)]
    M = min(vals)
    order = M - margin
    if order < 0:
        return LimitResult(ident, n, "inconclusive", order, vals)
    ok = TruncatedSeries.of(lhs_poly(ident, n), order) == product_side(ident, order)
    log.info("%s: P_%d agrees with the product through q^%d: %s", ident.name, n, order, ok)
    return LimitResult(ident, n, "pass" if ok else "fail", order, vals)


# -- the two-variable Rogers-Ramanujan generalisation ---------------------


def rr_two_variable_lhs(N: int) -> TruncatedSeries:
    """sum_j z^j q^(j^2) / (q; q)_j through q^N."""
    acc = PolySum()
    j = 0
    while j * j <= N:
        M = N - j * j
        inv = invert_series(TruncatedSeries.of(rising_q_factorial(0, 1, j, 1), M))
        acc.add(inv.body, (j, j * j))
        j += 1
    return TruncatedSeries.of(acc.result(), N)


def rr_two_variable_rhs(N: int) -> TruncatedSeries:
    """The two-variable right side: 1/(zq; q)_inf times the alternating j-sum.

    (z; q)_j / (1 - z) is taken as (zq; q)_{j-1} for j >= 1, so the j = 0 term is 1.
    """
    acc = PolySum()
    acc.add(ONE)
    j = 1
    while j * (5 * j - 1) // 2 <= N:
        lead = j * (5 * j - 1) // 2
        M = N - lead
        num = (ONE - LaurentPolynomial.monomial((1, 2 * j))) * rising_q_factorial(1, 1, j - 1, 1)
        term = TruncatedSeries.of(num, M) * invert_series(
            TruncatedSeries.of(rising_q_factorial(0, 1, j, 1), M))
        acc.add(term.body, (2 * j, lead), -1 if j & 1 else 1)
        j += 1
    inner = TruncatedSeries.of(acc.result(), N)
    return inner * invert_series(product_truncated([Factor(1, 1, 1)], N))


def rogers_ramanujan_products(N: int) -> tuple[TruncatedSeries, TruncatedSeries]:
    """1/((q;q^5)(q^4;q^5)) and 1/((q^2;q^5)(q^3;q^5)) through q^N."""
    first = invert_series(product_truncated([Factor(0, 1, 5), Factor(0, 4, 5)], N))
    second = invert_series(product_truncated([Factor(0, 2, 5), Factor(0, 3, 5)], N))
    return first, second
