import random
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from qfinite.identities import MAIN_IDENTITIES, lhs_poly
from qfinite.laurent import LaurentPolynomial as L, q, z
from qfinite.nullspace import (
    in_span,
    nullspace_from_images,
    primitive_integer_vector,
    rank,
    rational_nullspace,
    rational_reconstruction,
    rref_mod_p,
)
from qfinite.recurrence import (
    AnsatzSpec,
    CandidateRecurrence,
    build_sequence,
    certify,
    guess_recurrence,
    known_ansatz,
    known_candidate,
    verify_candidate,
)

R1, R1P, R2 = MAIN_IDENTITIES


def Q3(*terms):
    """(z, q, Q, coeff) tuples -> arity-3 polynomial."""
    return L({(a, b, e): c for a, b, e, c in terms}, 3)


ONE3 = L.one(3)


# -- nullspace machinery ----------------------------------------------------


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(1, 7), st.data())
def test_rational_nullspace_matches_sympy(nrows, ncols, data):
    rows = [[data.draw(st.integers(-4, 4)) for _ in range(ncols)] for _ in range(nrows)]
    ours = rational_nullspace(rows, ncols)
    theirs = sympy.Matrix(rows).nullspace()
    assert len(ours) == len(theirs)
    for v in ours:
        assert all(sum(Fraction(r[k]) * v[k] for k in range(ncols)) == 0 for r in rows)
    # same span
    if theirs:
        sym = [[Fraction(int(x.p), int(x.q)) for x in vec] for vec in theirs]
        for v in ours:
            assert in_span(sym, v)


def test_rank_and_span():
    assert rank([[1, 2], [2, 4]]) == 1
    assert in_span([[1, 0, 1]], [3, 0, 3])
    assert not in_span([[1, 0, 1]], [3, 1, 3])


def test_rational_reconstruction():
    m = 2147483647 * 2147483629
    for frac in (Fraction(3, 7), Fraction(-22, 5), Fraction(0), Fraction(123456, 1)):
        a = frac.numerator * pow(frac.denominator, -1, m) % m
        assert rational_reconstruction(a, m) == frac


def test_rref_mod_p():
    p = 101
    M = np.array([[1, 2, 3], [2, 4, 6], [1, 0, 1]], dtype=np.int64)
    R, piv = rref_mod_p(M, p)
    assert piv == [0, 1]
    assert R.tolist() == [[1, 0, 1], [0, 1, 1]]


def test_modular_route_agrees_with_exact_route():
    rng = random.Random(11)
    for _ in range(10):
        ncols = rng.randint(3, 9)
        base = [[rng.randint(-30, 30) for _ in range(ncols)] for _ in range(rng.randint(1, ncols))]
        rows = base + [[sum(rng.randint(-2, 2) * b[k] for b in base) for k in range(ncols)] for _ in range(3)]
        exact = rational_nullspace(rows, ncols)

        def image(p):
            return np.array([[x % p for x in r] for r in rows], dtype=np.int64)

        def check(v):
            return all(sum(r[k] * v[k] for k in range(ncols)) == 0 for r in rows)

        lifted = nullspace_from_images(image, ncols, check)
        assert len(lifted) == len(exact)
        for v in lifted:
            assert in_span(exact, v)


def test_primitive_integer_vector():
    assert primitive_integer_vector([Fraction(-1, 2), Fraction(3, 4), 0]) == [2, -3, 0]
    assert primitive_integer_vector([0, 0]) == [0, 0]


# -- verify_candidate -----------------------------------------------------------


@pytest.fixture(scope="module")
def r1_seq():
    return [lhs_poly(R1, n) for n in range(41)]


def test_known_recurrences_hold(r1_seq):
    assert verify_candidate(r1_seq, known_candidate(R1), range(4, 41)).passed
    p = [lhs_poly(R1P, n) for n in range(41)]
    assert verify_candidate(p, known_candidate(R1P), range(4, 41)).passed


@pytest.mark.slow
def test_r2_recurrence_holds():
    p = [lhs_poly(R2, n) for n in range(41)]
    assert verify_candidate(p, known_candidate(R2), range(3, 41)).passed


def test_constant_sequence():
    seq = [L.one(2)] * 41
    cand = CandidateRecurrence(1, (ONE3, -ONE3))
    assert verify_candidate(seq, cand, range(1, 41)).passed


def test_corrupted_lag_one_fails_at_4(r1_seq):
    good = known_candidate(R1)
    coeffs = list(good.coefficients)
    coeffs[1] = -(ONE3 - Q3((0, 1, 0, 1)))  # relation now reads (1 - q) P_{n-1}
    bad = CandidateRecurrence(4, tuple(coeffs))
    res = verify_candidate(r1_seq, bad, range(4, 41))
    assert not res.passed
    assert res.first_failure == 4
    assert res.residual == bad.residual(r1_seq, 4)


def test_verify_candidate_preconditions(r1_seq):
    cand = known_candidate(R1)
    with pytest.raises(ValueError):
        verify_candidate(r1_seq, cand, range(3, 10))
    with pytest.raises(ValueError):
        verify_candidate(r1_seq[:10], cand, range(4, 12))


@pytest.mark.parametrize("factor", [Fraction(-3), Fraction(7), Fraction(1, 1)])
def test_scaling_invariance(r1_seq, factor):
    cand = known_candidate(R1)
    scaled = cand.scaled(factor)
    assert verify_candidate(r1_seq, scaled, range(4, 30)).passed
    coeffs = list(cand.coefficients)
    coeffs[2] = coeffs[2] + Q3((0, 0, 0, 1))
    broken = CandidateRecurrence(4, tuple(coeffs))
    a = verify_candidate(r1_seq, broken, range(4, 30))
    b = verify_candidate(r1_seq, broken.scaled(factor), range(4, 30))
    assert (a.passed, a.first_failure) == (b.passed, b.first_failure)
    assert scaled.normalized() == cand.normalized()


def test_candidate_text_and_dict():
    cand = known_candidate(R1)
    text = cand.to_text().splitlines()
    assert text[0] == "order 4"
    assert text[1] == "c0: 1"
    assert text[2] == "c1: -1 + q^2"
    assert "Q^2" in text[3]
    d = cand.to_dict()
    assert d["order"] == 4 and len(d["terms"]) == 5


def test_candidate_rejects_all_zero():
    with pytest.raises(ValueError):
        CandidateRecurrence(1, (L.zero(3), L.zero(3)))


# -- guessing ---------------------------------------------------------------------


def test_geometric_sequence():
    seq = [q**n for n in range(25)]
    cands = guess_recurrence(seq, AnsatzSpec(1, 1, (0, 1), (-1, 0, 1)), range(1, 20))
    assert cands
    target = CandidateRecurrence(1, (ONE3, Q3((0, 1, 0, -1))))
    # every candidate is a multiple of P_n - q P_{n-1} by a polynomial factor in the ansatz
    assert any(c.is_scalar_multiple(target) for c in cands)
    for c in cands:
        assert verify_candidate(seq, c, range(1, 25)).passed


def test_guess_rejects_zero_sequence():
    seq = [L.zero(2)] * 10
    with pytest.raises(ValueError):
        guess_recurrence(seq, AnsatzSpec(1, 0, (0, 0), (0,)), range(1, 9))


def test_guess_preconditions(r1_seq):
    with pytest.raises(ValueError):
        guess_recurrence(r1_seq, AnsatzSpec(4, 1, (0, 1)), range(2, 10))
    with pytest.raises(ValueError):
        guess_recurrence(r1_seq[:8], AnsatzSpec(4, 1, (0, 1)), range(4, 10))


def test_ansatz_validation():
    with pytest.raises(ValueError):
        AnsatzSpec(0, 1, (0, 1))
    with pytest.raises(ValueError):
        AnsatzSpec(2, 1, (3, 1))
    with pytest.raises(ValueError):
        AnsatzSpec(2, 1, (0, 1), ())
    a = AnsatzSpec(2, 1, (0, 1), (1, 0, 1))
    assert a.z_exponent_set == (0, 1)
    assert a.n_unknowns == 3 * 2 * 2 * 2


def test_first_order_has_no_relation(r1_seq):
    assert guess_recurrence(r1_seq, AnsatzSpec(1, 1, (0, 4)), range(4, 31)) == []
    rep = certify(R1, "lhs", AnsatzSpec(1, 1, (0, 4)), (4, 30), (31, 40))
    assert rep.survivors == []
    assert not rep.certificate


def test_recovers_first_recurrence(r1_seq):
    cands = guess_recurrence(r1_seq, known_ansatz(R1), range(4, 31))
    assert len(cands) == 1
    assert cands[0].is_scalar_multiple(known_candidate(R1))
    assert verify_candidate(r1_seq, cands[0], range(4, 41)).passed


def test_nullspace_stability(r1_seq):
    # more equations can only shrink the solution space
    seq = [lhs_poly(R1P, n) for n in range(31)]
    a = AnsatzSpec(4, 1, (0, 4))
    small = guess_recurrence(seq, a, range(4, 10))
    large = guess_recurrence(seq, a, range(4, 31))
    assert len(large) <= len(small)
    keyed = sorted({k for c in small + large for k in c.vector()})
    index = {k: i for i, k in enumerate(keyed)}
    vec = lambda c: {index[k]: v for k, v in c.vector().items()}
    for c in large:
        assert in_span([vec(s) for s in small], vec(c))


def test_partner_with_nonnegative_q_range():
    # q exponents 0..4: the known relation fits only after multiplying by q
    rep = certify(R1P, "lhs", AnsatzSpec(4, 1, (0, 4)), (4, 30), (31, 45))
    assert len(rep.survivors) == 2
    assert rep.known_in_span and rep.known_shift == 1
    assert rep.certificate
    # q times the lag-2 coefficient -(2q + q^n)
    assert any(s.coefficients[2] == -Q3((0, 1, 1, 1), (0, 2, 0, 2)) for s in rep.survivors)


def test_q_degree_one_is_too_small_for_first_identity(r1_seq):
    # the first recurrence needs q^(2n), i.e. Q^2
    assert guess_recurrence(r1_seq, AnsatzSpec(4, 1, (0, 4)), range(4, 31)) == []


def test_certify_report_fields():
    rep = certify(R1P, "recurrence", known_ansatz(R1P), (4, 20), (21, 30))
    assert rep.has_survivor and rep.known_scalar_match and rep.initial_conditions_match
    d = rep.to_dict()
    assert d["certificate"] is True
    assert d["fit_range"] == [4, 20]
    assert "certificate: yes" in rep.to_text()
    with pytest.raises(ValueError):
        certify(R1P, "lhs", known_ansatz(R1P), (4, 20), (15, 30))
    with pytest.raises(ValueError):
        build_sequence(R1P, "bogus", 5)
