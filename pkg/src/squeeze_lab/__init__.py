"""Gauges, invariant distances and squeezing-function bounds around the symmetrized bidisc."""

from .counterexample import (
    BoundInterval,
    CompactSetSample,
    CounterexampleConfig,
    ViolationReport,
    beta_threshold,
    build_K,
    lemma33_check,
    psh_violation_report,
    sq_lower_origin,
    sq_upper_closed_form,
    sq_upper_numeric,
)
from .errors import (
    BracketingFailed,
    CertificateSearchFailed,
    CertificationFailed,
    DomainError,
    EmptyCompactSet,
)
from .geometry import (
    DegreeVector,
    DomainSpec,
    MembershipVerdict,
    Point2C,
    Status,
    conv_g2_contains,
    d_action,
    d_minkowski,
    d_sublevel_contains,
    g2_contains,
    quadratic_roots,
    sample_g2,
    support_conv_g2,
)
from .metrics import (
    CircleGrid,
    DistanceValue,
    c_g2,
    c_origin_sandwich,
    dist_to_compact,
    extremal_phi,
    mobius,
    poincare,
)

__version__ = "0.1.0"
