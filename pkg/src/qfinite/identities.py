"""Both sides of the three finite two-variable identities, plus the classical
finite Rogers-Ramanujan analogues aRRf1-aRRf3, and the recurrences that
characterise the left-hand sides.

The left-hand multi-sums are evaluated in factored form: for fixed ``j`` the
inner sum over ``(h, i)`` only depends on ``s = h + i`` through the last
binomial, so the ``(h, i)`` part is cached per ``(j, s)`` and reused for
every ``n``.  :func:`lhs_poly_direct` keeps the literal nested loops and is
used to cross-check the factored path.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .laurent import LaurentPolynomial, PolySum, dot
from .qcomb import (
    andrews_z_binomial,
    gaussian_binomial as qbin,
    gaussian_binomial_star as qbin_star,
    trinomial_T0,
)

log = logging.getLogger(__name__)

__all__ = [
    "IdentityId",
    "RecurrenceSpec",
    "VerificationReport",
    "DEFAULT_SAMPLE_POINTS",
    "lhs_poly",
    "lhs_poly_direct",
    "rhs_main_poly",
    "epsilon_poly",
    "rhs_poly",
    "r1_case_split",
    "recurrence_spec",
    "run_recurrence",
    "recurrence_residual",
    "verify_identity",
    "arrf3_sides",
    "arrf12_sides",
    "arrf12_spot_check",
]

ZERO = LaurentPolynomial.zero(2)
ONE = LaurentPolynomial.one(2)


class IdentityId(enum.Enum):
    R1_FINITE = "r1"
    R1_PARTNER_FINITE = "r1partner"
    R2_FINITE = "r2"
    ARRF1 = "arrf1"
    ARRF2 = "arrf2"
    ARRF3 = "arrf3"

    @classmethod
    def parse(cls, name: "str | IdentityId") -> "IdentityId":
        """Accept the short CLI name (``r1``) or the member name (``R1_FINITE``)."""
        if isinstance(name, cls):
            return name
        key = str(name).strip()
        for member in cls:
            if key.lower() == member.value or key.upper() == member.name:
                return member
        raise ValueError(f"unknown identity {name!r}; expected one of "
                         f"{', '.join(m.value for m in cls)}")

    @property
    def is_main(self) -> bool:
        return self in MAIN_IDENTITIES


MAIN_IDENTITIES = (IdentityId.R1_FINITE, IdentityId.R1_PARTNER_FINITE, IdentityId.R2_FINITE)


def _require_main(ident: IdentityId) -> IdentityId:
    ident = IdentityId.parse(ident)
    if not ident.is_main:
        raise ValueError(f"{ident.name} has no finite multi-sum side here")
    return ident


def _sign(k: int) -> int:
    return -1 if k & 1 else 1


# -- left-hand sides ------------------------------------------------------


@lru_cache(maxsize=None)
def _hi_block_r1(j: int, s: int) -> LaurentPolynomial:
    """sum over h + i = s of (-1)^s z^(h-i) q^(h^2+i^2) [j,h]_{q^2} [j,i]_{q^2}."""
    return dot((qbin(j, h, 2), qbin(j, s - h, 2), (2 * h - s, h * h + (s - h) ** 2), _sign(s))
               for h in range(max(0, s - j), min(j, s) + 1))


@lru_cache(maxsize=None)
def _hi_block_r1p(j: int, s: int) -> LaurentPolynomial:
    """sum over h + i = s of (-1)^s z^(h-i) q^(C(h,2)+C(i+1,2)) [j,h] [j+1,i]."""
    terms = []
    for h in range(max(0, s - j - 1), min(j, s) + 1):
        i = s - h
        terms.append((qbin(j, h), qbin(j + 1, i), (h - i, h * (h - 1) // 2 + i * (i + 1) // 2), _sign(s)))
    return dot(terms)


@lru_cache(maxsize=None)
def _ell_block_r2(j: int, m: int) -> LaurentPolynomial:
    """sum_{l=0}^{m} (-1)^l q^(2l) [j+l-1, l]*_{q^2} [m+j-l, 2j]_q."""
    return dot((qbin_star(j + ell - 1, ell, 2), qbin(m + j - ell, 2 * j), (0, 2 * ell), _sign(ell))
               for ell in range(m + 1))


@lru_cache(maxsize=None)
def lhs_poly(ident: IdentityId | str, n: int) -> LaurentPolynomial:
    """The finite multi-sum P_n(z, q) of a main identity."""
    ident = _require_main(ident)
    if n < 0:
        raise ValueError("n must be nonnegative")
    terms = []
    if ident is IdentityId.R1_FINITE:
        for j in range(n // 2 + 1):
            for s in range(2 * j + 1):
                tail = qbin(j + (n - s) // 2, 2 * j, 2)
                if tail:
                    terms.append((_hi_block_r1(j, s), tail, (0, 2 * j * j)))
    elif ident is IdentityId.R1_PARTNER_FINITE:
        for j in range(n // 2 + 1):
            for s in range(2 * j + 2):
                tail = qbin(j + 1 + (n - s) // 2, 2 * j + 1)
                if tail:
                    terms.append((_hi_block_r1p(j, s), tail, (0, j * (j + 1))))
    else:
        for j in range(n + 1):
            for s in range(min(2 * j, n) + 1):
                tail = _ell_block_r2(j, n - s)
                if tail:
                    terms.append((_hi_block_r1(j, s), tail, (0, j * j)))
    return dot(terms)


def lhs_poly_direct(ident: IdentityId | str, n: int, widen: int = 0) -> LaurentPolynomial:
    """Literal nested-loop evaluation of P_n.

    ``widen`` pushes every summation bound outwards by that many steps on both
    sides (including negative indices); the result must not change.
    """
    ident = _require_main(ident)
    w = widen
    acc = PolySum()
    if ident is IdentityId.R1_FINITE:
        for j in range(-w, n // 2 + 1 + w):
            for h in range(-w, j + 1 + w):
                for i in range(-w, j + 1 + w):
                    t = qbin(j, h, 2) * qbin(j, i, 2) * qbin(j + (n - h - i) // 2, 2 * j, 2)
                    acc.add(t, (h - i, h * h + i * i + 2 * j * j), _sign(h + i))
    elif ident is IdentityId.R1_PARTNER_FINITE:
        for j in range(-w, n // 2 + 1 + w):
            for h in range(-w, j + 1 + w):
                for i in range(-w, j + 2 + w):
                    t = qbin(j, h) * qbin(j + 1, i) * qbin(j + 1 + (n - h - i) // 2, 2 * j + 1)
                    e = h * (h - 1) // 2 + i * (i + 1) // 2 + j * (j + 1)
                    acc.add(t, (h - i, e), _sign(h + i))
    else:
        for j in range(-w, n + 1 + w):
            for h in range(-w, j + 1 + w):
                for i in range(-w, j + 1 + w):
                    for ell in range(-w, n - h - i + 1 + w):
                        t = (qbin(j, h, 2) * qbin(j, i, 2) * qbin_star(j + ell - 1, ell, 2)
                             * qbin(n - h - i + j - ell, 2 * j))
                        e = h * h + i * i + j * j + 2 * ell
                        acc.add(t, (h - i, e), _sign(h + i + ell))
    return acc.result()


# -- right-hand sides -----------------------------------------------------


def _window(n: int) -> range:
    return range(-(n + 2), n + 3)


@lru_cache(maxsize=None)
def rhs_main_poly(ident: IdentityId | str, n: int) -> LaurentPolynomial:
    """The bilateral j-sum on the right, over the finite window |j| <= n + 2."""
    ident = _require_main(ident)
    if n < 0:
        raise ValueError("n must be nonnegative")
    acc = PolySum()
    for j in _window(n):
        if ident is IdentityId.R1_FINITE:
            b = qbin(n - 1, (n + 3 * j - 1) // 2, 2)
            e = 3 * j * j
        elif ident is IdentityId.R1_PARTNER_FINITE:
            b = qbin(n, (n + 3 * j + 2) // 2)
            e = j * (3 * j + 1) // 2
        else:
            b = trinomial_T0(n, 2 * j) + trinomial_T0(n - 1, 2 * j)
            e = 2 * j * j
        if b:
            acc.add(b, (j, e), _sign(j))
    return acc.result()


@lru_cache(maxsize=None)
def epsilon_poly(ident: IdentityId | str, n: int) -> LaurentPolynomial:
    """Parity-dependent boundary correction; zero for the R2 analogue."""
    ident = _require_main(ident)
    if n < 0:
        raise ValueError("n must be nonnegative")
    if ident is IdentityId.R2_FINITE:
        return ZERO
    acc = PolySum()
    even = n % 2 == 0
    for j in _window(n):
        if ident is IdentityId.R1_FINITE:
            if even:
                b = qbin_star(n - 1, (n + 6 * j) // 2, 2)
                shift, sign = (2 * j, 12 * j * j + 6 * j + n), 1
            else:
                b = qbin_star(n - 1, (n + 6 * j - 3) // 2, 2)
                shift, sign = (2 * j - 1, 12 * j * j - 6 * j + n), -1
        else:
            if even:
                b = qbin(n, n // 2 + 3 * j)
                shift, sign = (2 * j, 6 * j * j - 2 * j + n // 2), 1
            else:
                # the printed exponent 6j^2 + 4j + 1/2 + n/2 is an integer for odd n
                b = qbin(n, (n + 6 * j + 3) // 2)
                shift, sign = (2 * j + 1, 6 * j * j + 4 * j + (n + 1) // 2), -1
        if b:
            acc.add(b, shift, sign)
    return acc.result()


def rhs_poly(ident: IdentityId | str, n: int) -> LaurentPolynomial:
    return rhs_main_poly(ident, n) + epsilon_poly(ident, n)


def r1_case_split(n: int) -> LaurentPolynomial:
    """Q_n for the first identity in its parity case-split form (a second oracle)."""
    m, odd = divmod(n, 2)
    out = ZERO
    for k in range(-(n + 2), n + 3):
        first = qbin(2 * m, m + 3 * k, 2)
        second = qbin(2 * m + 1, m + 3 * k + 2, 2) if odd else qbin(2 * m - 1, m + 3 * k + 1, 2)
        if first:
            out = out + first.monomial_scale((2 * k, 12 * k * k))
        if second:
            out = out - second.monomial_scale((-2 * k - 1, 12 * k * k + 12 * k + 3))
    return out


# -- recurrences ----------------------------------------------------------


def _p3(*terms: tuple[int, int, int, int]) -> LaurentPolynomial:
    """Build a (z, q, Q) polynomial from (z_exp, q_exp, Q_exp, coeff) tuples."""
    out: dict[tuple[int, int, int], int] = {}
    for a, b, e, c in terms:
        out[(a, b, e)] = out.get((a, b, e), 0) + c
    return LaurentPolynomial(out, 3)


def _p2(*terms: tuple[int, int, int]) -> LaurentPolynomial:
    return LaurentPolynomial({(a, b): c for a, b, c in terms}, 2)


@dataclass(frozen=True)
class RecurrenceSpec:
    """P_n = sum_{i=1}^{order} c_i(z, q, q^n) P_{n-i}.

    ``templates[i-1]`` is c_i as a (z, q, Q) polynomial with Q standing for q^n.
    """

    order: int
    templates: tuple[LaurentPolynomial, ...]
    initial_conditions: tuple[LaurentPolynomial, ...]

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be positive")
        if len(self.templates) != self.order or len(self.initial_conditions) != self.order:
            raise ValueError("need one template and one initial condition per lag")
        if any(t.arity != 3 for t in self.templates):
            raise ValueError("coefficient templates must be (z, q, Q) polynomials")

    def coefficient(self, lag: int, n: int) -> LaurentPolynomial:
        return self.templates[lag - 1].substitute_Q(n)

    @property
    def lag_coefficients(self) -> list[Callable[[int], LaurentPolynomial]]:
        return [lambda n, t=t: t.substitute_Q(n) for t in self.templates]


_RECURRENCES = {
    IdentityId.R1_FINITE: RecurrenceSpec(
        order=4,
        templates=(
            _p3((0, 0, 0, 1), (0, 2, 0, -1)),
            _p3((0, 2, 0, 2), (0, -2, 2, 1)),
            _p3((0, 4, 0, 1), (0, 2, 0, -1), (1, -3, 2, -1), (-1, -3, 2, -1)),
            _p3((0, -4, 2, 1), (0, 4, 0, -1)),
        ),
        initial_conditions=(
            ONE,
            ONE,
            _p2((0, 0, 1), (0, 2, 1)),
            _p2((0, 0, 1), (0, 2, 1), (1, 3, -1), (-1, 3, -1)),
        ),
    ),
    IdentityId.R1_PARTNER_FINITE: RecurrenceSpec(
        order=4,
        templates=(
            _p3((0, 0, 0, 1), (0, 1, 0, -1)),
            _p3((0, 1, 0, 2), (0, 0, 1, 1)),
            # (z q^2 + z^-1 q^3) q^(n-3) = z q^-1 Q + z^-1 Q
            _p3((0, 2, 0, 1), (0, 1, 0, -1), (1, -1, 1, -1), (-1, 0, 1, -1)),
            _p3((0, -1, 1, 1), (0, 2, 0, -1)),
        ),
        initial_conditions=(
            ONE,
            _p2((0, 0, 1), (-1, 1, -1)),
            # printed as 1 + (1 - z^-1) q + 2q^2; the multi-sum gives q^2, and only
            # q^2 is consistent with the recurrence at n = 4
            _p2((0, 0, 1), (0, 1, 1), (-1, 1, -1), (0, 2, 1)),
            _p2((0, 0, 1), (0, 1, 1), (-1, 1, -1), (0, 2, 1), (1, 2, -1), (-1, 2, -1),
                (-1, 3, -1), (-1, 4, -1)),
        ),
    ),
    IdentityId.R2_FINITE: RecurrenceSpec(
        order=3,
        templates=(
            _p3((0, 0, 0, 1), (0, 1, 0, 1), (0, 2, 0, -1), (0, -1, 2, 1)),
            _p3((0, 3, 0, 1), (0, 2, 0, 1), (0, 1, 0, -1), (1, -2, 2, -1), (-1, -2, 2, -1)),
            _p3((0, -3, 2, 1), (0, 3, 0, -1)),
        ),
        initial_conditions=(
            ONE,
            _p2((0, 0, 1), (0, 1, 1)),
            _p2((0, 0, 1), (0, 1, 1), (0, 2, 1), (1, 2, -1), (-1, 2, -1), (0, 4, 1)),
        ),
    ),
}


def recurrence_spec(ident: IdentityId | str) -> RecurrenceSpec:
    ident = IdentityId.parse(ident)
    if ident not in _RECURRENCES:
        raise ValueError(f"no recurrence is known for {ident.name}")
    return _RECURRENCES[ident]


def run_recurrence(spec: RecurrenceSpec, n_max: int) -> list[LaurentPolynomial]:
    """P_0 .. P_{n_max} from the initial conditions."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    seq = list(spec.initial_conditions[: n_max + 1])
    for n in range(spec.order, n_max + 1):
        acc = ZERO
        for lag in range(1, spec.order + 1):
            acc = acc + spec.coefficient(lag, n) * seq[n - lag]
        seq.append(acc)
    return seq


def recurrence_residual(spec: RecurrenceSpec, seq: Sequence[LaurentPolynomial], n: int) -> LaurentPolynomial:
    """P_n - sum_i c_i(n) P_{n-i}; zero when the recurrence holds at n."""
    acc = seq[n]
    for lag in range(1, spec.order + 1):
        acc = acc - spec.coefficient(lag, n) * seq[n - lag]
    return acc


# -- verification ---------------------------------------------------------


@dataclass
class VerificationReport:
    identity: IdentityId
    n_checked: range
    status: str = "pass"
    first_failure: tuple[int, object] | None = None
    failure_kind: str | None = None
    rejected_points: list[tuple[int, tuple[Fraction, Fraction]]] = field(default_factory=list)

    def fail(self, n: int, difference, kind: str) -> None:
        if self.first_failure is None:
            self.status = "fail"
            self.first_failure = (n, difference)
            self.failure_kind = kind

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def to_dict(self) -> dict:
        out = {
            "identity": self.identity.value,
            "n_min": self.n_checked.start,
            "n_max": self.n_checked.stop - 1,
            "status": self.status,
        }
        if self.first_failure is not None:
            n, diff = self.first_failure
            out["first_failure"] = {
                "n": n,
                "kind": self.failure_kind,
                "difference": diff.to_text() if isinstance(diff, LaurentPolynomial) else str(diff),
            }
        if self.rejected_points:
            out["rejected_points"] = [[n, str(zv), str(qv)] for n, (zv, qv) in self.rejected_points]
        return out


def verify_identity(ident: IdentityId | str, n_max: int = 40) -> VerificationReport:
    """Exhaustive check for 0 <= n <= n_max.

    Main identities: lhs == rhs at every n, and both sequences match the
    recurrence (initial conditions included).  aRRf3 compares its two
    polynomial sides; aRRf1/aRRf2 are checked at the default sample points.
    """
    ident = IdentityId.parse(ident)
    report = VerificationReport(ident, range(0, n_max + 1))
    if ident in (IdentityId.ARRF1, IdentityId.ARRF2):
        for n in range(n_max + 1):
            sub = arrf12_spot_check(ident, n)
            report.rejected_points.extend(sub.rejected_points)
            if not sub.passed:
                report.fail(*sub.first_failure, sub.failure_kind)
                break
        return report
    if ident is IdentityId.ARRF3:
        for n in range(n_max + 1):
            left, right = arrf3_sides(n)
            if left != right:
                report.fail(n, left - right, "lhs != rhs")
                break
        return report

    lhs = [lhs_poly(ident, n) for n in range(n_max + 1)]
    rhs = [rhs_poly(ident, n) for n in range(n_max + 1)]
    for n in range(n_max + 1):
        if lhs[n] != rhs[n]:
            report.fail(n, lhs[n] - rhs[n], "lhs != rhs")
            log.info("%s: mismatch at n=%d", ident.name, n)
            return report
    spec = recurrence_spec(ident)
    for side, seq in (("lhs", lhs), ("rhs", rhs)):
        for n in range(min(spec.order, n_max + 1)):
            if seq[n] != spec.initial_conditions[n]:
                report.fail(n, seq[n] - spec.initial_conditions[n], f"{side} initial condition")
                return report
        for n in range(spec.order, n_max + 1):
            res = recurrence_residual(spec, seq, n)
            if res:
                report.fail(n, res, f"{side} recurrence")
                return report
    return report


# -- the classical finite analogues ----------------------------------------


def arrf3_sides(n: int) -> tuple[LaurentPolynomial, LaurentPolynomial]:
    """Both sides of Andrews' termwise-polynomial finite Rogers-Ramanujan identity."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    left = ZERO
    for j in range(n + 1):
        left = left + andrews_z_binomial(n, j, 0, 1).monomial_scale((j, j * j))
    right = ZERO
    for j in range(n // 2 + 1):
        t = andrews_z_binomial(n, j, 0, 1) * andrews_z_binomial(2 * n + 1 - 2 * j, n - 2 * j, 1, j)
        right = right + t.monomial_scale((2 * j, j * (5 * j - 1) // 2), _sign(j))
    for j in range((n - 1) // 2 + 1 if n >= 1 else 0):
        t = andrews_z_binomial(n, j, 0, 1) * andrews_z_binomial(2 * n - 2 * j, n - 2 * j - 1, 1, j)
        right = right - t.monomial_scale((2 * j + 1, j * (5 * j + 3) // 2), _sign(j))
    return left, right


DEFAULT_SAMPLE_POINTS = (
    (Fraction(2), Fraction(1, 3)),
    (Fraction(3), Fraction(1, 2)),
    (Fraction(5), Fraction(2, 7)),
    (Fraction(-2), Fraction(1, 5)),
    (Fraction(7, 3), Fraction(3, 5)),
)


class _VanishingDenominator(ZeroDivisionError):
    pass


def _poch_value(a: Fraction, qv: Fraction, length: int) -> Fraction:
    out = Fraction(1)
    for i in range(length):
        out *= 1 - a * qv ** i
    return out


def _bin_value(A: int, B: int, qv: Fraction) -> Fraction:
    return qbin(A, B).evaluate((1, qv))


def arrf12_sides(which: IdentityId | str, n: int, zv, qv) -> tuple[Fraction, Fraction]:
    """Exact values of both sides of aRRf1 or aRRf2 at (z, q) = (zv, qv).

    Raises ZeroDivisionError when a denominator factor (1 - z q^m) vanishes.
    """
    which = IdentityId.parse(which)
    if which not in (IdentityId.ARRF1, IdentityId.ARRF2):
        raise ValueError("arrf12_sides handles ARRF1 and ARRF2 only")
    zv, qv = Fraction(zv), Fraction(qv)
    if zv == 0 or qv == 0:
        raise ValueError("sample points need z != 0 and q != 0")
    left = sum((zv ** j * qv ** (j * j) * _bin_value(n, j, qv) for j in range(n + 1)), Fraction(0))
    right = Fraction(0)
    if which is IdentityId.ARRF1:
        for j in range(n + 1):
            den = _poch_value(zv * qv ** j, qv, n + 1)
            if den == 0:
                raise _VanishingDenominator(f"(z q^{j}; q)_{n + 1} vanishes")
            num = (_sign(j) * zv ** (2 * j) * qv ** (j * (5 * j - 1) // 2)
                   * (1 - zv * qv ** (2 * j)) * _bin_value(n, j, qv))
            right += num / den
    else:
        for j in range(n // 2 + 1):
            den = _poch_value(zv * qv ** j, qv, n - j + 1)
            if den == 0:
                raise _VanishingDenominator(f"(z q^{j}; q)_{n - j + 1} vanishes")
            num = (_sign(j) * zv ** (2 * j) * qv ** (j * (5 * j - 1) // 2)
                   * (1 - zv * qv ** (2 * j)) * _bin_value(n, j, qv) * _bin_value(n - j, j, qv)
                   * _poch_value(qv, qv, j) * _poch_value(zv * zv * qv ** (n + 2 * j + 1), qv, n - 2 * j))
            right += num / den
    return left, right


def arrf12_spot_check(which: IdentityId | str, n: int,
                      points: Sequence[tuple] = DEFAULT_SAMPLE_POINTS) -> VerificationReport:
    """Exact rational comparison of both sides of aRRf1/aRRf2 at sample points.

    Points where a denominator vanishes are recorded in ``rejected_points``
    and do not count as failures.
    """
    which = IdentityId.parse(which)
    report = VerificationReport(which, range(n, n + 1))
    for zv, qv in points:
        try:
            left, right = arrf12_sides(which, n, zv, qv)
        except _VanishingDenominator:
            report.rejected_points.append((n, (Fraction(zv), Fraction(qv))))
            continue
        if left != right:
            report.fail(n, left - right, f"lhs != rhs at z={zv}, q={qv}")
    return report
