"""Guess and certify linear recurrences for sequences of Laurent polynomials.

A candidate relation is ``sum_{i=0}^{r} c_i(z, q, q^n) P_{n-i} = 0`` with each
``c_i`` an arity-3 polynomial in (z, q, Q) and Q standing for q^n.

Guessing solves for the unknown coefficients of ``c_i`` over a fixed monomial
basis.  The exact system (one equation per (n, z^a q^b) monomial) is large,
so it is never written down.  Instead it is sampled at random points modulo
word-sized primes, row-reduced with numpy, lifted back to the rationals, and
every lifted vector is then checked exactly against the full polynomial
system.  See :func:`qfinite.nullspace.nullspace_from_images` for why that is
a complete answer rather than a heuristic.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .identities import (
    IdentityId,
    lhs_poly,
    recurrence_spec,
    rhs_poly,
    run_recurrence,
)
from .laurent import LaurentPolynomial, dot
from .nullspace import in_span, nullspace_from_images, primitive_integer_vector

log = logging.getLogger(__name__)

__all__ = [
    "AnsatzSpec",
    "CandidateRecurrence",
    "CandidateCheck",
    "CertifyReport",
    "verify_candidate",
    "guess_recurrence",
    "certify",
    "build_sequence",
    "known_ansatz",
    "known_candidate",
    "BUILDERS",
]

BUILDERS = ("lhs", "rhs", "recurrence")


@dataclass(frozen=True)
class AnsatzSpec:
    order: int
    Q_degree: int
    q_degree_range: tuple[int, int]
    z_exponent_set: tuple[int, ...] = (-1, 0, 1)

    def __post_init__(self):
        lo, hi = self.q_degree_range
        object.__setattr__(self, "q_degree_range", (int(lo), int(hi)))
        object.__setattr__(self, "z_exponent_set", tuple(sorted(set(int(a) for a in self.z_exponent_set))))
        if self.order < 1:
            raise ValueError("order must be positive")
        if self.Q_degree < 0:
            raise ValueError("Q_degree must be nonnegative")
        if lo > hi or not self.z_exponent_set:
            raise ValueError("empty monomial basis")

    @property
    def basis(self) -> list[tuple[int, int, int]]:
        """(z, q, Q) exponents of the monomials allowed in each coefficient."""
        lo, hi = self.q_degree_range
        return [(a, b, e) for e in range(self.Q_degree + 1)
                for b in range(lo, hi + 1) for a in self.z_exponent_set]

    @property
    def n_unknowns(self) -> int:
        return (self.order + 1) * len(self.basis)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "Q_degree": self.Q_degree,
            "q_degree_range": list(self.q_degree_range),
            "z_exponent_set": list(self.z_exponent_set),
        }


@dataclass(frozen=True)
class CandidateRecurrence:
    """sum_i coefficients[i](z, q, q^n) * P_{n-i} = 0."""

    order: int
    coefficients: tuple[LaurentPolynomial, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(self.coefficients))
        if len(self.coefficients) != self.order + 1:
            raise ValueError("need order + 1 coefficients")
        if any(c.arity != 3 for c in self.coefficients):
            raise ValueError("coefficients must be (z, q, Q) polynomials")
        if all(c.is_zero() for c in self.coefficients):
            raise ValueError("all coefficients are zero")

    def at(self, n: int) -> list[LaurentPolynomial]:
        return [c.substitute_Q(n) for c in self.coefficients]

    def residual(self, seq: Sequence[LaurentPolynomial], n: int) -> LaurentPolynomial:
        return dot((c, seq[n - i]) for i, c in enumerate(self.at(n)))

    def scaled(self, factor) -> "CandidateRecurrence":
        """Multiply every coefficient by a nonzero rational (result must be integral)."""
        f = Fraction(factor)
        if f == 0:
            raise ValueError("scaling by zero")
        out = []
        for c in self.coefficients:
            terms = {}
            for k, v in c.terms.items():
                x = v * f
                if x.denominator != 1:
                    raise ValueError("scaling leaves non-integer coefficients")
                terms[k] = int(x)
            out.append(LaurentPolynomial(terms, 3))
        return CandidateRecurrence(self.order, tuple(out))

    def shifted(self, k: int) -> "CandidateRecurrence":
        """Every coefficient multiplied by q^k (same relation)."""
        return CandidateRecurrence(self.order, tuple(c.monomial_scale((0, k, 0)) for c in self.coefficients))

    def vector(self) -> dict[tuple[int, int, int, int], int]:
        """Flat view keyed by (lag, z_exp, q_exp, Q_exp)."""
        return {(i, *k): v for i, c in enumerate(self.coefficients) for k, v in c.terms.items()}

    def normalized(self) -> "CandidateRecurrence":
        """Primitive integer form with the first canonical term of c_0 positive."""
        keys = [(i, *k) for i, c in enumerate(self.coefficients) for k, _ in c.items()]
        vec = self.vector()
        ints = primitive_integer_vector([vec[k] for k in keys])
        return _from_flat(self.order, dict(zip(keys, ints)))

    def is_scalar_multiple(self, other: "CandidateRecurrence") -> bool:
        if self.order != other.order:
            return False
        a, b = self.vector(), other.vector()
        if a.keys() != b.keys():
            return False
        k0 = next(iter(a))
        ratio = Fraction(a[k0], b[k0])
        return all(Fraction(a[k], b[k]) == ratio for k in a)

    def to_text(self) -> str:
        lines = [f"order {self.order}"]
        lines += [f"c{i}: {c.to_text()}" for i, c in enumerate(self.coefficients)]
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "coefficients": [c.to_text() for c in self.coefficients],
            "terms": [c.to_term_list() for c in self.coefficients],
        }

    def __str__(self) -> str:
        return self.to_text()


def _from_flat(order: int, flat: dict) -> CandidateRecurrence:
    per_lag: list[dict] = [{} for _ in range(order + 1)]
    for (i, a, b, e), v in flat.items():
        if v:
            per_lag[i][(a, b, e)] = int(v)
    return CandidateRecurrence(order, tuple(LaurentPolynomial(t, 3) for t in per_lag))


@dataclass
class CandidateCheck:
    passed: bool
    n_checked: int
    first_failure: int | None = None
    residual: LaurentPolynomial | None = None

    def __bool__(self) -> bool:
        return self.passed


def verify_candidate(seq: Sequence[LaurentPolynomial], cand: CandidateRecurrence,
                     n_range: Iterable[int]) -> CandidateCheck:
    """Exact check of the relation at every n in ``n_range``."""
    ns = list(n_range)
    if ns and min(ns) < cand.order:
        raise ValueError(f"n_range must start at or above the order {cand.order}")
    if ns and max(ns) >= len(seq):
        raise ValueError(f"sequence too short: need index {max(ns)}, have {len(seq)} terms")
    for count, n in enumerate(ns):
        res = cand.residual(seq, n)
        if not res.is_zero():
            return CandidateCheck(False, count, n, res)
    return CandidateCheck(True, len(ns))


# -- guessing ---------------------------------------------------------------


class _ModularSampler:
    """Rows of the recurrence system evaluated at random points mod p."""

    def __init__(self, seq, ansatz: AnsatzSpec, ns: list[int], seed: int):
        self.seq = seq
        self.ansatz = ansatz
        self.ns = ns
        self.rng = random.Random(seed)
        self.basis = ansatz.basis
        lo = min(ns) - ansatz.order
        self.indices = range(lo, max(ns) + 1)
        self.arrays = {}
        zmin = qmin = 0
        zmax = qmax = 0
        for m in self.indices:
            items = seq[m].items()
            if items:
                ex = np.array([k for k, _ in items], dtype=np.int64)
                self.arrays[m] = (ex[:, 0], ex[:, 1], [v for _, v in items])
                zmin, zmax = min(zmin, int(ex[:, 0].min())), max(zmax, int(ex[:, 0].max()))
                qmin, qmax = min(qmin, int(ex[:, 1].min())), max(qmax, int(ex[:, 1].max()))
        self.zrange = (zmin, zmax)
        self.qrange = (qmin, qmax)
        ncols = ansatz.n_unknowns
        self.points_per_n = math.ceil((ncols + 8) / len(ns)) + 1
        self._coeff_cache: dict = {}

    @staticmethod
    def _powers(x: int, lo: int, hi: int, p: int) -> np.ndarray:
        """x^lo .. x^hi mod p, filled by doubling."""
        size = hi - lo + 1
        out = np.empty(size, dtype=np.int64)
        out[0] = pow(x, lo, p)
        k = 1
        while k < size:
            step = min(k, size - k)
            out[k:k + step] = out[:step] * pow(x, k, p) % p
            k += step
        return out

    def _value(self, m: int, zpow, qpow, p: int) -> int:
        arr = self.arrays.get(m)
        if arr is None:
            return 0
        za, qa, coeffs = arr
        key = (m, p)
        c = self._coeff_cache.get(key)
        if c is None:
            c = self._coeff_cache[key] = np.array([v % p for v in coeffs], dtype=np.int64)
        t = c * zpow[za - self.zrange[0]] % p
        t = t * qpow[qa - self.qrange[0]] % p
        return int(t.sum() % p)

    def __call__(self, p: int) -> np.ndarray:
        # A fresh point for every row.  Sharing points across n would confine
        # the rows to a subspace of dimension (order+1)*(Q_degree+1) per point.
        r = self.ansatz.order
        bz = np.array([b[0] for b in self.basis], dtype=np.int64)
        bq = np.array([b[1] for b in self.basis], dtype=np.int64)
        bQ = np.array([b[2] for b in self.basis], dtype=np.int64)
        self._coeff_cache = {}
        rows = []
        for n in self.ns:
            for _ in range(self.points_per_n):
                z0 = self.rng.randrange(2, p - 1)
                q0 = self.rng.randrange(2, p - 1)
                zpow = self._powers(z0, *self.zrange, p)
                qpow = self._powers(q0, *self.qrange, p)
                ez = self._powers(z0, int(bz.min()), int(bz.max()), p)[bz - bz.min()]
                lo_q = int(min(bq.min(), 0))
                hi_q = int(bq.max() + bQ.max() * n)
                qtab = self._powers(q0, lo_q, hi_q, p)
                mono = ez * qtab[bq + bQ * n - lo_q] % p
                vals = np.array([self._value(n - i, zpow, qpow, p) for i in range(r + 1)], dtype=np.int64)
                rows.append((vals[:, None] * mono[None, :] % p).ravel())
        return np.array(rows, dtype=np.int64)


def _split_lag0(vectors: list[list[Fraction]], width: int) -> tuple[list[list[Fraction]], int]:
    """Recombine so c_0 parts are independent; drop the c_0 = 0 remainder."""
    vs = [list(v) for v in vectors]
    kept = []
    for col in range(width):
        piv = next((v for v in vs if v[col] != 0), None)
        if piv is None:
            continue
        vs.remove(piv)
        for v in vs:
            if v[col]:
                f = v[col] / piv[col]
                for k in range(len(v)):
                    v[k] -= f * piv[k]
        kept.append(piv)
    return kept, len(vs)


def guess_recurrence(seq: Sequence[LaurentPolynomial], ansatz: AnsatzSpec,
                     fit_range: Iterable[int], seed: int = 0) -> list[CandidateRecurrence]:
    """Every relation of the ansatz shape holding on ``fit_range``, as a basis.

    Basis elements whose lag-0 coefficient would vanish are left out: such a
    relation only constrains P_{n-1}, ..., P_{n-r} and belongs to a shifted
    ansatz.  The result is empty when no relation with c_0 != 0 exists.
    """
    ns = sorted(set(fit_range))
    if not ns:
        raise ValueError("empty fit range")
    if ns[0] < ansatz.order:
        raise ValueError(f"fit range must start at or above the order {ansatz.order}")
    if ns[-1] >= len(seq):
        raise ValueError(f"sequence too short: need index {ns[-1]}, have {len(seq)} terms")
    lo = ns[0] - ansatz.order
    if all(seq[m].is_zero() for m in range(lo, ns[-1] + 1)):
        raise ValueError("degenerate input: the sequence is identically zero")

    basis = ansatz.basis
    width = len(basis)
    keys = [(i, *b) for i in range(ansatz.order + 1) for b in basis]

    def exact(v: list[Fraction]) -> bool:
        ints = primitive_integer_vector(v)
        if not any(ints):
            return False
        cand = _from_flat(ansatz.order, dict(zip(keys, ints)))
        return all(cand.residual(seq, n).is_zero() for n in ns)

    sampler = _ModularSampler(seq, ansatz, ns, seed)
    null = nullspace_from_images(sampler, ansatz.n_unknowns, exact)
    kept, dropped = _split_lag0(null, width)
    if dropped:
        log.info("dropped %d relation(s) with vanishing c_0", dropped)
    out = []
    for v in kept:
        ints = primitive_integer_vector(v)
        out.append(_from_flat(ansatz.order, dict(zip(keys, ints))).normalized())
    return out


# -- certification ----------------------------------------------------------


def build_sequence(ident: IdentityId | str, builder: str, n_max: int) -> list[LaurentPolynomial]:
    ident = IdentityId.parse(ident)
    if builder == "lhs":
        return [lhs_poly(ident, n) for n in range(n_max + 1)]
    if builder == "rhs":
        return [rhs_poly(ident, n) for n in range(n_max + 1)]
    if builder == "recurrence":
        return run_recurrence(recurrence_spec(ident), n_max)
    raise ValueError(f"unknown builder {builder!r}; expected one of {BUILDERS}")


def known_candidate(ident: IdentityId | str) -> CandidateRecurrence:
    """The known recurrence P_n = sum c_i P_{n-i}, as 1*P_n - sum c_i P_{n-i} = 0."""
    spec = recurrence_spec(ident)
    coeffs = [LaurentPolynomial.one(3)] + [-t for t in spec.templates]
    return CandidateRecurrence(spec.order, tuple(coeffs)).normalized()


def known_ansatz(ident: IdentityId | str) -> AnsatzSpec:
    """Tightest ansatz containing the known recurrence."""
    cand = known_candidate(ident)
    qs = [k[1] for c in cand.coefficients for k in c.terms]
    Qs = [k[2] for c in cand.coefficients for k in c.terms]
    return AnsatzSpec(cand.order, max(Qs), (min(qs), max(qs)), (-1, 0, 1))


@dataclass
class CertifyReport:
    identity: str
    builder: str
    ansatz: AnsatzSpec
    fit_range: tuple[int, int]
    holdout_range: tuple[int, int]
    candidates: list[CandidateRecurrence] = field(default_factory=list)
    survivors: list[CandidateRecurrence] = field(default_factory=list)
    rejected: list[tuple[int, int]] = field(default_factory=list)  # (candidate index, first failing n)
    known_in_span: bool | None = None
    known_scalar_match: bool | None = None
    known_shift: int | None = None  # q-power the known relation was multiplied by
    initial_conditions_match: bool | None = None

    @property
    def has_survivor(self) -> bool:
        return bool(self.survivors)

    @property
    def certificate(self) -> bool:
        """Survivor found, it agrees with the known relation, and P_0.. match."""
        return bool(self.survivors) and bool(self.known_in_span) and bool(self.initial_conditions_match)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "builder": self.builder,
            "ansatz": self.ansatz.to_dict(),
            "fit_range": list(self.fit_range),
            "holdout_range": list(self.holdout_range),
            "n_candidates": len(self.candidates),
            "survivors": [c.to_dict() for c in self.survivors],
            "rejected": [list(r) for r in self.rejected],
            "known_in_span": self.known_in_span,
            "known_scalar_match": self.known_scalar_match,
            "known_shift": self.known_shift,
            "initial_conditions_match": self.initial_conditions_match,
            "certificate": self.certificate,
        }

    def to_text(self) -> str:
        lines = [
            f"{self.identity} [{self.builder}] order={self.ansatz.order} Q_degree={self.ansatz.Q_degree} "
            f"q={self.ansatz.q_degree_range[0]}..{self.ansatz.q_degree_range[1]} "
            f"z={list(self.ansatz.z_exponent_set)}",
            f"fit {self.fit_range[0]}..{self.fit_range[1]}, holdout {self.holdout_range[0]}..{self.holdout_range[1]}",
            f"candidates: {len(self.candidates)}, survivors: {len(self.survivors)}",
        ]
        for idx, n in self.rejected:
            lines.append(f"candidate {idx} fails at n={n}")
        for s in self.survivors:
            lines.append(s.to_text())
        if self.known_in_span is not None:
            shift = f" (times q^{self.known_shift})" if self.known_shift else ""
            lines.append(f"known recurrence in survivor span: {self.known_in_span}{shift}")
            lines.append(f"known recurrence equals a survivor up to scaling: {self.known_scalar_match}")
            lines.append(f"initial conditions match: {self.initial_conditions_match}")
        lines.append("certificate: " + ("yes" if self.certificate else "no"))
        return "\n".join(lines)


def certify(ident: IdentityId | str, builder: str, ansatz: AnsatzSpec,
            fit_range: tuple[int, int], holdout_range: tuple[int, int],
            seed: int = 0) -> CertifyReport:
    """Guess on ``fit_range`` (inclusive), then re-verify on ``holdout_range``."""
    ident = IdentityId.parse(ident)
    f0, f1 = fit_range
    h0, h1 = holdout_range
    if f0 > f1 or h0 > h1:
        raise ValueError("empty range")
    if h0 <= f1:
        raise ValueError("holdout range must lie beyond the fit range")
    seq = build_sequence(ident, builder, h1)
    report = CertifyReport(ident.value, builder, ansatz, (f0, f1), (h0, h1))
    report.candidates = guess_recurrence(seq, ansatz, range(f0, f1 + 1), seed=seed)
    for idx, cand in enumerate(report.candidates):
        check = verify_candidate(seq, cand, range(h0, h1 + 1))
        if check.passed:
            report.survivors.append(cand)
        else:
            report.rejected.append((idx, check.first_failure))
    if ident.is_main:
        spec = recurrence_spec(ident)
        known = known_candidate(ident)
        report.known_in_span = False
        report.known_scalar_match = any(s.is_scalar_multiple(known) for s in report.survivors)
        if report.survivors:
            vecs = [_dense(s, ansatz) for s in report.survivors]
            # the known relation times q^k, for every k that fits the basis
            lo, hi = ansatz.q_degree_range
            qs = [k[1] for c in known.coefficients for k in c.terms]
            for k in range(lo - min(qs), hi - max(qs) + 1):
                target = _dense(known.shifted(k), ansatz)
                if target is not None and in_span(vecs, target):
                    report.known_in_span = True
                    report.known_shift = k
                    break
        report.initial_conditions_match = all(seq[i] == spec.initial_conditions[i] for i in range(spec.order))
    return report


def _dense(cand: CandidateRecurrence, ansatz: AnsatzSpec) -> dict[int, int] | None:
    """Coordinates in the ansatz basis; None if the candidate does not fit it."""
    if cand.order != ansatz.order:
        return None
    index = {(i, *b): j for j, (i, b) in enumerate(itertools.product(range(ansatz.order + 1), ansatz.basis))}
    out = {}
    for k, v in cand.vector().items():
        if k not in index:
            return None
        out[index[k]] = v
    return out
