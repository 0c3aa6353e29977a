import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfinite.identities import MAIN_IDENTITIES
from qfinite.laurent import LaurentPolynomial as L, q, z
from qfinite.series import (
    Factor,
    TruncatedSeries,
    invert_series,
    jtp_check,
    limit_check,
    product_side,
    product_truncated,
    rogers_ramanujan_products,
    rr_two_variable_lhs,
    rr_two_variable_rhs,
    series_side,
    stabilization_valuations,
    theta_truncated,
    triple_product,
)

R1, R1P, R2 = MAIN_IDENTITIES


def S(poly, N):
    return TruncatedSeries.of(poly, N)


# -- integer-list oracle (z = 1): plain Python lists of coefficients ----------


def list_mul(a, b, N):
    out = [0] * (N + 1)
    for i, x in enumerate(a):
        if x:
            for j in range(N + 1 - i):
                out[i + j] += x * b[j]
    return out


def list_product(start, step, N, sign=1):
    """prod_{i>=0} (1 - sign * q^(start + step*i)) as a list through q^N."""
    out = [1] + [0] * N
    e = start
    while e <= N:
        f = [0] * (N + 1)
        f[0] = 1
        f[e] -= sign
        out = list_mul(out, f, N)
        e += step
    return out


def list_inverse(a, N):
    out = [0] * (N + 1)
    out[0] = 1
    for n in range(1, N + 1):
        out[n] = -sum(a[k] * out[n - k] for k in range(1, n + 1))
    return out


def partitions(N):
    p = [1] + [0] * N
    for part in range(1, N + 1):
        for n in range(part, N + 1):
            p[n] += p[n - part]
    return p


# -- examples ----------------------------------------------------------------


def test_product_truncated_examples():
    assert product_truncated([Factor(0, 1, 1)], 5).body == 1 - q - q**2 + q**5
    assert product_truncated([], 7).body == 1
    assert product_truncated([Factor(1, 3, 6)], 2).body == 1
    assert product_truncated([(0, 1, 2, -1)], 3).body == 1 + q + q**3
    with pytest.raises(ValueError):
        Factor(0, 0, 1)
    with pytest.raises(ValueError):
        Factor(1, -2, 3)


def test_invert_examples():
    assert invert_series(product_truncated([Factor(0, 2, 2)], 6)).body == 1 + q**2 + 2 * q**4 + 3 * q**6
    assert invert_series(TruncatedSeries.one(5)).body == 1
    assert invert_series(S(1 - q, 3)).body == 1 + q + q**2 + q**3
    with pytest.raises(ValueError):
        invert_series(S(2 + q, 3))
    with pytest.raises(ValueError):
        invert_series(S(q, 3))


def test_product_side_examples():
    assert product_side(R1, 2).body == 1 + q**2
    assert product_side(R1, 0).body == 1
    assert product_side(R2, 1).body == 1 + q
    with pytest.raises(ValueError):
        product_side("arrf3", 4)


def test_theta_examples():
    assert theta_truncated(R1, 2).body == 1
    assert theta_truncated(R1, 3).body == 1 - (z + z**-1) * q**3
    # j = 1 gives -z q^2 and j = -1 gives -z^-1 q; both signs are (-1)^j = -1
    assert theta_truncated(R1P, 2).body == 1 - z * q**2 - z**-1 * q


def test_truncated_series_rules():
    with pytest.raises(ValueError):
        TruncatedSeries(q**3, 2)
    a = S(1 + q + q**4, 3)
    assert a.body == 1 + q
    assert (a * S(1 - q, 3)).body == 1 - q**2
    assert S(1 + q, 3) != S(1 + q, 4)
    # congruence: equal bodies after truncation at a common order
    assert S(1 + q + q**5, 4).truncate(2) == S(1 + q, 2)


# -- identity checks -----------------------------------------------------------


@pytest.mark.parametrize("ident", MAIN_IDENTITIES, ids=lambda i: i.value)
def test_jtp(ident):
    for N in (0, 1, 7, 30):
        assert jtp_check(ident, N)


def test_jtp_detects_a_wrong_product():
    wrong = product_truncated([Factor(1, 3, 6), Factor(-1, 3, 6)], 30)
    assert theta_truncated(R1, 30) != wrong
    assert triple_product(R1, 30) != wrong


@pytest.mark.parametrize("ident", MAIN_IDENTITIES, ids=lambda i: i.value)
def test_series_side_equals_product_side(ident):
    assert series_side(ident, 30) == product_side(ident, 30)


@pytest.mark.parametrize("ident", MAIN_IDENTITIES, ids=lambda i: i.value)
def test_limit_check_n20(ident):
    res = limit_check(ident, 20)
    assert res.passed
    assert res.order >= 1


def test_limit_check_bad_input():
    with pytest.raises(ValueError):
        limit_check(R1, 3)
    res = limit_check(R1, 4, margin=100)
    assert res.status == "inconclusive"


@pytest.mark.parametrize("ident", MAIN_IDENTITIES, ids=lambda i: i.value)
def test_stabilization(ident):
    vals = stabilization_valuations(ident, 40)
    assert all(v >= 1 for v in vals[1:])
    assert vals[-1] > 10


def test_z1_specialization_against_integer_lists():
    # (q^3;q^6)^2 (q^6;q^6) / (q^2;q^2) with plain integer lists
    for N in range(31):
        num = list_mul(list_mul(list_product(3, 6, N), list_product(3, 6, N), N), list_product(6, 6, N), N)
        expect = list_mul(num, list_inverse(list_product(2, 2, N), N), N)
        got = product_side(R1, N).body
        assert all(e[0] == 0 for e in product_side(R1, N).specialize_z(0).body.terms)
        flat = got.specialize_z(0)
        assert [flat.coefficient((0, e)) for e in range(N + 1)] == expect, N


def test_inverse_of_euler_product_counts_partitions():
    inv = invert_series(product_truncated([Factor(0, 1, 1)], 40))
    assert [inv.body.coefficient((0, e)) for e in range(41)] == partitions(40)


coeff = st.integers(-(10**12), 10**12)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(-3, 3), st.integers(1, 12), coeff), max_size=10), st.integers(0, 12))
def test_inverse_property(terms, N):
    d = {(0, 0): 1}
    for a, b, c in terms:
        d[(a, b)] = d.get((a, b), 0) + c
    s = S(L(d, 2), N)
    assert s * invert_series(s) == TruncatedSeries.one(N)


# -- the two-variable Rogers-Ramanujan generalisation ---------------------------


def test_two_variable_rr():
    N = 30
    lhs = rr_two_variable_lhs(N)
    assert lhs == rr_two_variable_rhs(N)
    g, h = rogers_ramanujan_products(N)
    assert lhs.specialize_z(0) == g
    assert lhs.specialize_z(1) == h


def test_rr_products_match_partition_counts():
    # parts congruent to +-1 mod 5, brute-force with integer lists
    N = 30
    allowed = [k for k in range(1, N + 1) if k % 5 in (1, 4)]
    p = [1] + [0] * N
    for part in allowed:
        for n in range(part, N + 1):
            p[n] += p[n - part]
    g, _ = rogers_ramanujan_products(N)
    assert [g.body.coefficient((0, e)) for e in range(N + 1)] == p


def test_random_factor_products_against_lists():
    rng = random.Random(3)
    for _ in range(20):
        N = rng.randint(0, 25)
        start, step, sign = rng.randint(1, 6), rng.randint(1, 5), rng.choice([1, -1])
        got = product_truncated([Factor(0, start, step, sign)], N).body
        assert [got.coefficient((0, e)) for e in range(N + 1)] == list_product(start, step, N, sign)
