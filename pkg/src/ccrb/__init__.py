"""Cramer-Rao bounds for parameters restricted to constraint sets.

Modules: ``matlin`` (pseudoinverse and PSD kernel), ``schur`` (block PSD
tests), ``tangent`` (constraint sets and tangent-cone spans), ``crb`` (bounds),
``models`` (Gaussian models, estimators, Monte Carlo), ``verify`` (property
suites) and ``cli``.
"""

from .crb import (
    BoundResult,
    FisherContext,
    constrained_bound_u,
    constrained_crb,
    crb_reduction,
    feasibility_projector,
    monotonicity_check,
    pushforward_crb,
    unconstrained_crb,
)
from .matlin import DEFAULT_TOL, Tolerances
from .tangent import tangent_span

__all__ = [
    "BoundResult",
    "DEFAULT_TOL",
    "FisherContext",
    "Tolerances",
    "constrained_bound_u",
    "constrained_crb",
    "crb_reduction",
    "feasibility_projector",
    "monotonicity_check",
    "pushforward_crb",
    "tangent_span",
    "unconstrained_crb",
]
