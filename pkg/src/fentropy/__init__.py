"""Furstenberg entropy of nonsingular actions: Bernoulli shifts of finite sets, odometer skew products, spectral bounds."""

__version__ = "0.1.0"

from .bernoulli import (
    BernoulliFinsetSystem,
    BernoulliParam,
    BernoulliSource,
    LazyPoint,
    act_finset,
    exact_entropy_finset_action,
    log_rn,
    phi,
    separation_test,
)
from .cocycle import (
    OdometerCocycle,
    OdometerSystem,
    SkewSystem,
    build_skew,
    cocycle_identity_check,
    odometer_add,
    odometer_cocycle,
    odometer_flip_moments,
    odometer_skew_entropy,
    skew_entropy_exact,
)
from .engine import (
    EntropyEstimate,
    FiniteNonsingularSystem,
    entropy_of_bar,
    exact_entropy_finite,
    mc_entropy,
)
from .finset import (
    EMPTY,
    FINSET,
    INTEGER,
    CyclicGroup,
    FinSet,
    FiniteSupportMeasure,
    TableGroup,
    check_generating,
    convolve,
    delta,
    expected_size_and_max,
    geometric_bar,
    measure,
    symdiff,
)
from .spectral import (
    norm_entropy_check,
    cyclic_gap_curve,
    jensen_bound_check,
    koopman,
    markov_operator,
    operator_norm,
)
