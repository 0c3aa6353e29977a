"""Exact verification of finite two-variable Rogers-Ramanujan-type identities.

Everything is exact: coefficients are Python integers, evaluations are
``fractions.Fraction``.
"""

from .laurent import ArityError, LaurentPolynomial, PolySum, dot, q, z
from .qcomb import (
    QBinomialArgs,
    andrews_z_binomial,
    gaussian_binomial,
    gaussian_binomial_star,
    inverse_pochhammer_coefficient,
    pochhammer_expansion_qbt1,
    rising_q_factorial,
    trinomial_T0,
)
from .identities import (
    DEFAULT_SAMPLE_POINTS,
    MAIN_IDENTITIES,
    IdentityId,
    RecurrenceSpec,
    VerificationReport,
    arrf3_sides,
    arrf12_sides,
    arrf12_spot_check,
    epsilon_poly,
    lhs_poly,
    lhs_poly_direct,
    recurrence_spec,
    rhs_main_poly,
    rhs_poly,
    run_recurrence,
    verify_identity,
)
from .series import (
    Factor,
    LimitResult,
    TruncatedSeries,
    invert_series,
    jtp_check,
    limit_check,
    product_side,
    product_truncated,
    series_side,
    stabilization_valuations,
    theta_truncated,
)
from .recurrence import (
    AnsatzSpec,
    CandidateRecurrence,
    CertifyReport,
    certify,
    guess_recurrence,
    known_ansatz,
    known_candidate,
    verify_candidate,
)

__version__ = "0.1.0"
