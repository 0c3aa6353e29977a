"""Sparse exact Laurent polynomials over the integers.

A :class:`LaurentPolynomial` maps exponent vectors (plain tuples of ints) to
nonzero Python integers.  Arity 2 means variables ``(z, q)``; arity 3 adds
``Q``, a stand-in for ``q**n`` used by the recurrence guesser.

Values are immutable.  Large products go through Kronecker substitution: both
operands are packed into single big integers, multiplied (with gmpy2 when it
is importable) and unpacked with numpy.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

try:
    import gmpy2
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    gmpy2 = None

__all__ = [
    "LaurentPolynomial",
    "PolySum",
    "dot",
    "ArityError",
    "VARIABLE_NAMES",
    "z",
    "q",
    "add",
    "multiply",
    "monomial_scale",
    "substitute_q_power",
    "invert_z",
    "evaluate",
    "q_valuation",
    "truncate_q",
]

VARIABLE_NAMES = ("z", "q", "Q")

# Below this many cross terms the schoolbook product is faster than packing.
_NAIVE_LIMIT = 400


class ArityError(ValueError):
    """Raised when polynomials of different arity are combined."""


def _check_arity(a: "LaurentPolynomial", b: "LaurentPolynomial") -> None:
    if a.arity != b.arity:
        raise ArityError(f"arity mismatch: {a.arity} vs {b.arity}")


class LaurentPolynomial:
    """Immutable sparse Laurent polynomial with integer coefficients.

    >>> p = LaurentPolynomial({(1, 0): 1, (-1, 0): 1})
    >>> str(p)
    'z + z^-1'
    """

    __slots__ = ("_terms", "arity", "_hash", "_box")

    def __init__(self, terms: Mapping[Sequence[int], int] | None = None, arity: int = 2):
        if arity < 1:
            raise ValueError("arity must be at least 1")
        clean: dict[tuple[int, ...], int] = {}
        for key, coeff in (terms or {}).items():
            key = tuple(int(e) for e in key)
            if len(key) != arity:
                raise ArityError(f"exponent vector {key} does not have arity {arity}")
            if isinstance(coeff, bool) or not isinstance(coeff, (int, np.integer)):
                raise TypeError(f"coefficient {coeff!r} is not an integer")
            coeff = int(coeff)
            if coeff:
                clean[key] = clean.get(key, 0) + coeff
                if not clean[key]:
                    del clean[key]
        self._terms = clean
        self.arity = arity
        self._hash = None
        self._box = None

    @classmethod
    def _raw(cls, terms: dict, arity: int) -> "LaurentPolynomial":
        # trusted constructor: keys are tuples of the right arity, no zeros
        obj = object.__new__(cls)
        obj._terms = terms
        obj.arity = arity
        obj._hash = None
        obj._box = None
        return obj

    @classmethod
    def zero(cls, arity: int = 2) -> "LaurentPolynomial":
        return cls._raw({}, arity)

    @classmethod
    def one(cls, arity: int = 2) -> "LaurentPolynomial":
        return cls._raw({(0,) * arity: 1}, arity)

    @classmethod
    def constant(cls, c: int, arity: int = 2) -> "LaurentPolynomial":
        return cls._raw({(0,) * arity: int(c)} if c else {}, arity)

    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff: int = 1) -> "LaurentPolynomial":
        exponents = tuple(int(e) for e in exponents)
        return cls._raw({exponents: int(coeff)} if coeff else {}, len(exponents))

    @classmethod
    def from_term_list(cls, rows: Iterable[Sequence], arity: int = 2) -> "LaurentPolynomial":
        """Inverse of :meth:`to_term_list`."""
        terms: dict[tuple[int, ...], int] = {}
        for row in rows:
            *exps, coeff = row
            key = tuple(int(e) for e in exps)
            terms[key] = terms.get(key, 0) + int(coeff)
        return cls(terms, arity)

    # -- basic protocol -------------------------------------------------

    @property
    def terms(self) -> Mapping[tuple[int, ...], int]:
        return dict(self._terms)

    def items(self) -> list[tuple[tuple[int, ...], int]]:
        """Terms in canonical order: ascending q-exponent, then z, then the rest."""
        return sorted(self._terms.items(), key=lambda kv: _canonical_key(kv[0]))

    def coefficient(self, exponents: Sequence[int]) -> int:
        return self._terms.get(tuple(exponents), 0)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, LaurentPolynomial):
            return self.arity == other.arity and self._terms == other._terms
        if isinstance(other, int):
            return self._terms == ({(0,) * self.arity: other} if other else {})
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.arity, frozenset(self._terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"LaurentPolynomial({self.to_text()!r}, arity={self.arity})"

    def __str__(self) -> str:
        return self.to_text()

    # -- arithmetic -----------------------------------------------------

    def _coerce(self, other) -> "LaurentPolynomial":
        if isinstance(other, LaurentPolynomial):
            return other
        if isinstance(other, int):
            return LaurentPolynomial.constant(other, self.arity)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        _check_arity(self, other)
        if len(other._terms) > len(self._terms):
            big, small = other._terms, self._terms
        else:
            big, small = self._terms, other._terms
        out = dict(big)
        for key, c in small.items():
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                del out[key]
        return LaurentPolynomial._raw(out, self.arity)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPolynomial":
        return LaurentPolynomial._raw({k: -c for k, c in self._terms.items()}, self.arity)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, int):
            if not other:
                return LaurentPolynomial.zero(self.arity)
            return LaurentPolynomial._raw({k: c * other for k, c in self._terms.items()}, self.arity)
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        _check_arity(self, other)
        return LaurentPolynomial._raw(_mul_terms(self._terms, other._terms, self.arity), self.arity)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "LaurentPolynomial":
        if not isinstance(k, int):
            raise TypeError("integer powers only")
        if k < 0:
            # only units of the Laurent ring (+-monomials) have inverses
            if len(self._terms) != 1 or abs(next(iter(self._terms.values()))) != 1:
                raise ValueError("negative powers need a monomial with coefficient +-1")
            (e, c), = self._terms.items()
            return LaurentPolynomial._raw({tuple(k * x for x in e): c ** (-k)}, self.arity)
        result = LaurentPolynomial.one(self.arity)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # -- structural operations ------------------------------------------

    def monomial_scale(self, shift: Sequence[int], c: int = 1) -> "LaurentPolynomial":
        """Multiply by ``c`` times the monomial with exponent vector ``shift``."""
        shift = tuple(shift)
        if len(shift) != self.arity:
            raise ArityError(f"shift {shift} does not have arity {self.arity}")
        if not c:
            return LaurentPolynomial.zero(self.arity)
        if self.arity == 2:
            dz, dq = shift
            out = {(a + dz, b + dq): v * c for (a, b), v in self._terms.items()}
        else:
            out = {tuple(e + s for e, s in zip(k, shift)): v * c for k, v in self._terms.items()}
        return LaurentPolynomial._raw(out, self.arity)

    def substitute_q_power(self, k: int) -> "LaurentPolynomial":
        """Replace q by q**k."""
        if k <= 0:
            raise ValueError("q -> q^k needs k >= 1")
        _need_arity2(self)
        return LaurentPolynomial._raw({(a, b * k): c for (a, b), c in self._terms.items()}, 2)

    def invert_z(self) -> "LaurentPolynomial":
        """Replace z by 1/z."""
        out = {(-k[0],) + k[1:]: c for k, c in self._terms.items()}
        return LaurentPolynomial._raw(out, self.arity)

    def specialize_z(self, q_power: int) -> "LaurentPolynomial":
        """Substitute z = q**q_power (q_power = 0 gives z = 1)."""
        _need_arity2(self)
        out: dict[tuple[int, int], int] = {}
        for (a, b), c in self._terms.items():
            key = (0, b + a * q_power)
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return LaurentPolynomial._raw(out, 2)

    def substitute_Q(self, n: int) -> "LaurentPolynomial":
        """Collapse a (z, q, Q) polynomial to (z, q) by setting Q = q**n."""
        if self.arity != 3:
            raise ArityError("substitute_Q needs a (z, q, Q) polynomial")
        out: dict[tuple[int, int], int] = {}
        for (a, b, e), c in self._terms.items():
            key = (a, b + e * n)
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return LaurentPolynomial._raw(out, 2)

    def q_valuation(self) -> float | int:
        _need_arity2(self)
        if not self._terms:
            return math.inf
        return min(b for _, b in self._terms)

    def q_degree(self) -> float | int:
        _need_arity2(self)
        if not self._terms:
            return -math.inf
        return max(b for _, b in self._terms)

    def truncate_q(self, N: int) -> "LaurentPolynomial":
        """Drop every term whose q-exponent exceeds N."""
        _need_arity2(self)
        return LaurentPolynomial._raw({k: c for k, c in self._terms.items() if k[1] <= N}, 2)

    def q_coefficient(self, e: int) -> "LaurentPolynomial":
        """The coefficient of q**e as a polynomial in z (kept at arity 2, q-exponent 0)."""
        _need_arity2(self)
        return LaurentPolynomial._raw({(a, 0): c for (a, b), c in self._terms.items() if b == e}, 2)

    def evaluate(self, point: Sequence) -> Fraction:
        """Exact value at a rational point, one coordinate per variable."""
        if len(point) != self.arity:
            raise ArityError(f"point has {len(point)} coordinates, polynomial arity is {self.arity}")
        point = [Fraction(x) for x in point]
        cache: list[dict[int, Fraction]] = [{} for _ in point]
        total = Fraction(0)
        for key, c in self._terms.items():
            value = Fraction(c)
            for axis, e in enumerate(key):
                if not e:
                    continue
                powers = cache[axis]
                if e not in powers:
                    x = point[axis]
                    if x == 0:
                        if e < 0:
                            raise ZeroDivisionError(
                                f"{VARIABLE_NAMES[axis]} = 0 with negative exponent {e}")
                        powers[e] = Fraction(0)
                    else:
                        powers[e] = x ** e
                value *= powers[e]
            total += value
        return total

    # -- serialization --------------------------------------------------

    def to_term_list(self) -> list[list]:
        """``[[z_exp, q_exp, ..., "coeff"], ...]`` in canonical order."""
        return [list(k) + [str(c)] for k, c in self.items()]

    def to_text(self) -> str:
        """Human-readable canonical form, e.g. ``1 + q^2 - (z + z^-1)*q^3``.

        Terms are grouped by every exponent except z's; groups appear in
        ascending q-exponent order.  Inside a group, z powers are listed by
        increasing absolute exponent, positive before negative.
        """
        if not self._terms:
            return "0"
        groups: dict[tuple[int, ...], dict[int, int]] = {}
        for key, c in self._terms.items():
            groups.setdefault(key[1:], {})[key[0]] = c
        pieces: list[tuple[int, str]] = []
        for rest in sorted(groups, key=lambda r: _canonical_key((0,) + r)):
            zpart = groups[rest]
            tail = _monomial_text(rest, VARIABLE_NAMES[1:])
            zs = sorted(zpart, key=lambda a: (abs(a), -a))
            if len(zs) == 1 or not tail:
                # single term, or no q-part to factor out: list terms flat
                for a in zs:
                    c = zpart[a]
                    body = _join_factors(_monomial_text((a,), ("z",)), tail)
                    sign = -1 if c < 0 else 1
                    c = abs(c)
                    if not body:
                        pieces.append((sign, str(c)))
                    elif c == 1:
                        pieces.append((sign, body))
                    else:
                        pieces.append((sign, f"{c}*{body}"))
                continue
            sign = -1 if all(zpart[a] < 0 for a in zs) else 1
            inner = _signed_join([(sign * zpart[a], _monomial_text((a,), ("z",))) for a in zs])
            group = f"({inner})"
            pieces.append((sign, f"{group}*{tail}" if tail else group))
        out = []
        for idx, (sign, text) in enumerate(pieces):
            if idx == 0:
                out.append(text if sign > 0 else f"-{text}")
            else:
                out.append(("+ " if sign > 0 else "- ") + text)
        return " ".join(out)


def _need_arity2(p: LaurentPolynomial) -> None:
    if p.arity != 2:
        raise ArityError("operation defined for (z, q) polynomials only")


def _canonical_key(key: tuple[int, ...]) -> tuple[int, ...]:
    # q first, then z, then any further variables
    if len(key) == 1:
        return key
    return (key[1], key[0]) + key[2:]


def _monomial_text(exps: Sequence[int], names: Sequence[str]) -> str:
    parts = []
    for e, name in zip(exps, names):
        if e == 0:
            continue
        parts.append(name if e == 1 else f"{name}^{e}")
    return "*".join(parts)


def _join_factors(a: str, b: str) -> str:
    return "*".join(x for x in (a, b) if x)


def _signed_join(terms: list[tuple[int, str]]) -> str:
    out = []
    for idx, (c, mono) in enumerate(terms):
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        if idx == 0:
            out.append(body if c > 0 else f"-{body}")
        else:
            out.append(("+ " if c > 0 else "- ") + body)
    return " ".join(out)


# -- multiplication kernels ---------------------------------------------


def _mul_naive(a: dict, b: dict, arity: int) -> dict:
    out: dict = {}
    get = out.get
    if arity == 2:
        for (az, aq), ca in a.items():
            for (bz, bq), cb in b.items():
                key = (az + bz, aq + bq)
                out[key] = get(key, 0) + ca * cb
    else:
        for ka, ca in a.items():
            for kb, cb in b.items():
                key = tuple(x + y for x, y in zip(ka, kb))
                out[key] = get(key, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def _mul_terms(a: dict, b: dict, arity: int) -> dict:
    if not a or not b:
        return {}
    if len(a) * len(b) <= _NAIVE_LIMIT:
        return _mul_naive(a, b, arity)
    return _mul_kronecker(a, b, arity)


def _bounds(terms: dict, arity: int) -> tuple[list[int], list[int]]:
    keys = np.array(list(terms), dtype=np.int64).reshape(len(terms), arity)
    return keys.min(axis=0).tolist(), keys.max(axis=0).tolist()


def _box(p: "LaurentPolynomial") -> tuple[list[int], list[int], int]:
    """(min exponents, max exponents, max |coefficient|), cached on the value."""
    box = p._box
    if box is None:
        lo, hi = _bounds(p._terms, p.arity)
        box = p._box = (lo, hi, max(map(abs, p._terms.values())))
    return box


def _slot_width(bound: int) -> int:
    # bytes per slot so that digits in (-bound, bound) fit as signed values
    width = (bound.bit_length() + 1) // 8 + 1
    for w in (1, 2, 4, 8):
        if width <= w:
            return w
    return -(-width // 8) * 8


def _strides(spans: list[int]) -> tuple[list[int], int]:
    strides = [1] * len(spans)
    for k in range(len(spans) - 2, -1, -1):
        strides[k] = strides[k + 1] * spans[k + 1]
    return strides, strides[0] * spans[0]


def _bigmul(A: int, B: int):
    if gmpy2 is not None:
        return gmpy2.mpz(A) * gmpy2.mpz(B)
    return A * B  # pragma: no cover


def _decode(V: int, base: list[int], spans: list[int], strides: list[int], total: int, width: int) -> dict:
    offset = int.from_bytes((b"\x00" * (width - 1) + b"\x80") * total, "little")
    data = (V + offset).to_bytes(width * total, "little")
    arity = len(base)
    if width <= 8:
        udt = _UDTYPES[width]
        sdt = _SDTYPES[width]
        raw = np.frombuffer(data, dtype=udt)
        vals = (raw ^ udt(1 << (8 * width - 1))).view(sdt)
        idx = np.flatnonzero(vals)
        coeffs = vals[idx].tolist()
    else:
        raw = np.frombuffer(data, dtype=np.uint8).reshape(total, width).copy()
        raw[:, -1] ^= 0x80
        idx = np.flatnonzero(raw.any(axis=1))
        flat = raw.tobytes()
        coeffs = [int.from_bytes(flat[i * width:(i + 1) * width], "little", signed=True)
                  for i in idx.tolist()]
    cols = [(idx // strides[k] % spans[k] + base[k]).tolist() for k in range(arity)]
    return dict(zip(zip(*cols), coeffs))


def _mul_kronecker(a: dict, b: dict, arity: int) -> dict:
    amin, amax = _bounds(a, arity)
    bmin, bmax = _bounds(b, arity)
    spans = [(amax[k] - amin[k]) + (bmax[k] - bmin[k]) + 1 for k in range(arity)]
    strides, total = _strides(spans)
    bound = min(len(a), len(b)) * max(map(abs, a.values())) * max(map(abs, b.values()))
    width = _slot_width(bound)
    V = _bigmul(_pack(a, amin, strides, width), _pack(b, bmin, strides, width))
    return _decode(int(V), [amin[k] + bmin[k] for k in range(arity)], spans, strides, total, width)


def dot(products: Iterable[tuple]) -> "LaurentPolynomial":
    """sum of c * a * b * x^shift over ``(a, b[, shift[, c]])`` tuples.

    All products are accumulated on one Kronecker grid and decoded once, which
    is much cheaper than multiplying and adding term dictionaries pairwise.
    """
    items = []
    arity = None
    for entry in products:
        a, b = entry[0], entry[1]
        shift = entry[2] if len(entry) > 2 and entry[2] is not None else None
        c = entry[3] if len(entry) > 3 else 1
        if arity is None:
            arity = a.arity
        _check_arity(a, b)
        if a.arity != arity:
            raise ArityError("all products in a dot must share one arity")
        if not a._terms or not b._terms or not c:
            continue
        items.append((a, b, tuple(shift) if shift is not None else (0,) * arity, c))
    if not items:
        return LaurentPolynomial.zero(arity or 2)
    gmin = None
    gmax = None
    bound = 0
    for a, b, shift, c in items:
        alo, ahi, amag = _box(a)
        blo, bhi, bmag = _box(b)
        lo = [alo[k] + blo[k] + shift[k] for k in range(arity)]
        hi = [ahi[k] + bhi[k] + shift[k] for k in range(arity)]
        gmin = lo if gmin is None else [min(x, y) for x, y in zip(gmin, lo)]
        gmax = hi if gmax is None else [max(x, y) for x, y in zip(gmax, hi)]
        bound += abs(c) * min(len(a._terms), len(b._terms)) * amag * bmag
    spans = [gmax[k] - gmin[k] + 1 for k in range(arity)]
    strides, total = _strides(spans)
    width = _slot_width(bound)
    packed: dict[int, int] = {}

    def pack(p):
        key = id(p)
        if key not in packed:
            value = _pack(p._terms, _box(p)[0], strides, width)
            packed[key] = gmpy2.mpz(value) if gmpy2 is not None else value
        return packed[key]

    V = 0
    bits = 8 * width
    for a, b, shift, c in items:
        alo = _box(a)[0]
        blo = _box(b)[0]
        pos = sum((alo[k] + blo[k] + shift[k] - gmin[k]) * strides[k] for k in range(arity))
        term = pack(a) * pack(b)
        if c != 1:
            term = term * c
        V = V + (term << (bits * pos))
    return LaurentPolynomial._raw(_decode(int(V), gmin, spans, strides, total, width), arity)


_UDTYPES = {1: np.uint8, 2: np.uint16, 4: np.uint32, 8: np.uint64}
_SDTYPES = {1: np.int8, 2: np.int16, 4: np.int32, 8: np.int64}


def _pack(terms: dict, mins: list[int], strides: list[int], width: int) -> int:
    """sum_i c_i * 2^(8*width*pos_i) for the terms placed on the product grid."""
    keys = np.array(list(terms), dtype=np.int64).reshape(len(terms), len(mins))
    pos = ((keys - np.array(mins, dtype=np.int64)) * np.array(strides, dtype=np.int64)).sum(axis=1)
    top = int(pos.max())
    if width <= 8:
        coeffs = np.fromiter(terms.values(), dtype=np.int64, count=len(terms))
        udt = _UDTYPES[width]
        buf = np.zeros(top + 1, dtype=udt)
        plus = coeffs > 0
        buf[pos[plus]] = coeffs[plus].astype(udt)
        value = int.from_bytes(buf.tobytes(), "little")
        if not plus.all():
            buf[:] = 0
            minus = ~plus
            buf[pos[minus]] = (-coeffs[minus]).astype(udt)
            value -= int.from_bytes(buf.tobytes(), "little")
        return value
    pos_buf = bytearray(width * (top + 1))
    neg_buf = bytearray(width * (top + 1))
    for p, c in zip(pos.tolist(), terms.values()):
        if c > 0:
            pos_buf[p * width:(p + 1) * width] = c.to_bytes(width, "little")
        else:
            neg_buf[p * width:(p + 1) * width] = (-c).to_bytes(width, "little")
    return int.from_bytes(pos_buf, "little") - int.from_bytes(neg_buf, "little")


class PolySum:
    """In-place accumulator for long sums of (shifted, scaled) polynomials.

    >>> acc = PolySum()
    >>> acc.add(z, (0, 1), -1)
    >>> acc.add(z * q)
    >>> acc.result().is_zero()
    True
    """

    __slots__ = ("arity", "_acc")

    def __init__(self, arity: int = 2):
        self.arity = arity
        self._acc: dict = {}

    def add(self, p: LaurentPolynomial, shift: Sequence[int] | None = None, c: int = 1) -> None:
        if p.arity != self.arity:
            raise ArityError(f"arity mismatch: {p.arity} vs {self.arity}")
        acc = self._acc
        get = acc.get
        if shift is None or not any(shift):
            for key, v in p._terms.items():
                acc[key] = get(key, 0) + c * v
        elif self.arity == 2:
            dz, dq = shift
            for (a, b), v in p._terms.items():
                key = (a + dz, b + dq)
                acc[key] = get(key, 0) + c * v
        else:
            for k, v in p._terms.items():
                key = tuple(e + s for e, s in zip(k, shift))
                acc[key] = get(key, 0) + c * v

    def result(self) -> LaurentPolynomial:
        return LaurentPolynomial._raw({k: v for k, v in self._acc.items() if v}, self.arity)


# -- functional aliases ---------------------------------------------------

z = LaurentPolynomial.monomial((1, 0))
q = LaurentPolynomial.monomial((0, 1))


def add(a: LaurentPolynomial, b: LaurentPolynomial) -> LaurentPolynomial:
    _check_arity(a, b)
    return a + b


def multiply(a: LaurentPolynomial, b: LaurentPolynomial) -> LaurentPolynomial:
    _check_arity(a, b)
    return a * b


def monomial_scale(p: LaurentPolynomial, m: Sequence[int], c: int = 1) -> LaurentPolynomial:
    return p.monomial_scale(m, c)


def substitute_q_power(p: LaurentPolynomial, k: int) -> LaurentPolynomial:
    return p.substitute_q_power(k)


def invert_z(p: LaurentPolynomial) -> LaurentPolynomial:
    return p.invert_z()


def evaluate(p: LaurentPolynomial, point: Sequence) -> Fraction:
    return p.evaluate(point)


def q_valuation(p: LaurentPolynomial):
    return p.q_valuation()


def truncate_q(p: LaurentPolynomial, N: int) -> LaurentPolynomial:
    return p.truncate_q(N)
