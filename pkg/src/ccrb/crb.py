"""Cramer-Rao bounds for constrained parameters.

The engine is geometry-agnostic: callers hand in a matrix ``U`` of tangent
vectors, or a :class:`~ccrb.tangent.TangentSpan`, and the bounds below are
pure linear algebra on top of the Fisher information ``J`` and the bias
gradient ``db``. With ``S = I + db``:

* unconstrained bound ``S J^+ S^T``, meaningful when ``col S^T`` is in ``col J``;
* bound for a given ``U``: ``S U (U^T J U)^+ U^T S^T``;
* constrained CRB: the same with ``U`` replaced by the projector ``Pi`` onto the
  tangent-cone span, which dominates every other choice of ``U``.

A failing column-space condition means no estimator with that bias exists.
It is reported through ``BoundResult.feasible``; the formal matrix is still
returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import matlin
from .errors import DimMismatch, NotNested, NotProjector, NotPsd, SingularJ
from .matlin import DEFAULT_TOL, Tolerances
from .tangent import ConstraintSet, SmoothMap, TangentSpan, sample_cone, tangent_span


@dataclass(frozen=True)
class FisherContext:
    """Fisher information ``j`` (k x k, PSD) and bias gradient ``db`` (zero by default)."""

    j: np.ndarray
    db: Optional[np.ndarray] = None

    def __post_init__(self):
        j = matlin.as_sym(self.j, name="J")
        if not matlin.is_psd(j):
            raise NotPsd("Fisher information must be PSD")
        k = j.shape[0]
        db = np.zeros((k, k)) if self.db is None else matlin.as_mat(self.db, "db")
        if db.shape != (k, k):
            raise DimMismatch(f"db must be {k}x{k}, got {db.shape}")
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "db", db)

    @property
    def k(self) -> int:
        return self.j.shape[0]


@dataclass(frozen=True)
class BoundResult:
    """A bound matrix with its feasibility verdict.

    ``rule`` is one of ``unconstrained``, ``per_u``, ``span_projector``,
    ``reduction`` or ``pushforward``.
    """

    bound: np.ndarray
    feasible: bool
    rule: str
    extras: dict = field(default_factory=dict)

    @property
    def trace(self) -> float:
        return float(np.trace(self.bound))


def sensitivity(ctx: FisherContext) -> np.ndarray:
    return np.eye(ctx.k) + ctx.db


def _sandwich(s: np.ndarray, w: np.ndarray, j: np.ndarray, tol: Tolerances) -> np.ndarray:
    """``S W (W^T J W)^+ W^T S^T``."""
    sw = s @ w
    return matlin.symmetrize(sw @ matlin.pinv(w.T @ j @ w, tol) @ sw.T)


def unconstrained_crb(ctx: FisherContext, tol: Tolerances = DEFAULT_TOL) -> BoundResult:
    s = sensitivity(ctx)
    bound = matlin.symmetrize(s @ matlin.pinv(ctx.j, tol) @ s.T)
    feasible = matlin.colspace_included(s.T, ctx.j, tol)
    return BoundResult(bound, feasible, "unconstrained")


def constrained_bound_u(ctx: FisherContext, u, tol: Tolerances = DEFAULT_TOL) -> BoundResult:
    """Bound obtained from one matrix ``u`` whose columns are tangent vectors."""
    u = matlin.as_mat(u, "U")
    if u.shape[0] != ctx.k:
        raise DimMismatch(f"U must have {ctx.k} rows, got {u.shape[0]}")
    s = sensitivity(ctx)
    m = u.T @ ctx.j @ u
    feasible = matlin.colspace_included(u.T @ s.T, m, tol)
    return BoundResult(_sandwich(s, u, ctx.j, tol), feasible, "per_u")


def feasibility_projector(ctx: FisherContext, pi, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``col(Pi S^T)`` inside ``col(Pi J Pi)``: the condition checked once for all ``U``."""
    pi = matlin.as_mat(pi, "Pi")
    if pi.shape != (ctx.k, ctx.k):
        raise DimMismatch(f"Pi must be {ctx.k}x{ctx.k}, got {pi.shape}")
    if not matlin.is_projector(pi):
        raise NotProjector("Pi is not a symmetric idempotent matrix")
    s = sensitivity(ctx)
    return matlin.colspace_included(pi @ s.T, pi @ ctx.j @ pi, tol)


def bound_via_basis(ctx: FisherContext, v, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    v = matlin.as_mat(v, "V")
    return _sandwich(sensitivity(ctx), v, ctx.j, tol)


def bound_via_projector(ctx: FisherContext, pi, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    pi = matlin.as_mat(pi, "Pi")
    return _sandwich(sensitivity(ctx), pi, ctx.j, tol)


def constrained_crb(
    ctx: FisherContext, span: TangentSpan, tol: Tolerances = DEFAULT_TOL
) -> BoundResult:
    """Best bound over all tangent matrices, computed from the span projector.

    ``extras["basis_gap"]`` holds the largest entrywise difference between the
    projector form and the basis form of the same bound.
    """
    if span.k != ctx.k:
        raise DimMismatch(f"span lives in R^{span.k}, Fisher context in R^{ctx.k}")
    if span.d == ctx.k:
        full = unconstrained_crb(ctx, tol)
        return BoundResult(full.bound, full.feasible, "span_projector", {"basis_gap": 0.0})
    bound = bound_via_projector(ctx, span.pi, tol)
    feasible = feasibility_projector(ctx, span.pi, tol)
    gap = float(np.max(np.abs(bound - bound_via_basis(ctx, span.v, tol)), initial=0.0))
    return BoundResult(bound, feasible, "span_projector", {"basis_gap": gap})


@dataclass(frozen=True)
class Reduction:
    inv_j: np.ndarray
    reduction: np.ndarray

    @property
    def bound(self) -> np.ndarray:
        return self.inv_j - self.reduction


def crb_reduction(
    ctx: FisherContext, span: TangentSpan, tol: Tolerances = DEFAULT_TOL
) -> Reduction:
    """Split the constrained bound into ``J^-1`` minus the gain from the constraints.

    With ``F`` an orthonormal basis of the complement of the span, the gain is
    ``J^-1 F (F^T J^-1 F)^+ F^T J^-1``. Both terms are sandwiched by
    ``S = I + db``, so ``inv_j - reduction`` equals :func:`constrained_crb`.
    """
    if span.k != ctx.k:
        raise DimMismatch(f"span lives in R^{span.k}, Fisher context in R^{ctx.k}")
    lam = np.linalg.eigvalsh(ctx.j)
    if lam[0] <= tol.psd_tol * max(1.0, lam[-1]):
        raise SingularJ("reduction form needs a nonsingular Fisher information")
    s = sensitivity(ctx)
    inv_j = matlin.symmetrize(np.linalg.inv(ctx.j))
    f = matlin.null_space(span.v.T, tol) if span.d else np.eye(ctx.k)
    if f.shape[1] == 0:
        red = np.zeros((ctx.k, ctx.k))
    else:
        jf = inv_j @ f
        red = jf @ matlin.pinv(f.T @ jf, tol) @ jf.T
    return Reduction(
        matlin.symmetrize(s @ inv_j @ s.T), matlin.symmetrize(s @ red @ s.T)
    )


@dataclass(frozen=True)
class Pushforward:
    lhs: np.ndarray
    rhs: np.ndarray
    j_rho: np.ndarray


def pushforward_crb(g: SmoothMap, rho, j_theta, tol: Tolerances = DEFAULT_TOL) -> Pushforward:
    """Both sides of the reparametrization identity for ``theta = g(rho)``.

    ``lhs`` is the constrained bound with ``U = dg/drho``; ``rhs`` maps the
    unconstrained bound for ``rho`` forward, where ``J_rho`` is built from the
    chain-ruled score factor ``J_theta^(1/2) U``.
    """
    j_theta = matlin.as_sym(j_theta, name="J_theta")
    u = g.jacobian(np.asarray(rho, dtype=float))
    if u.shape[0] != j_theta.shape[0]:
        raise DimMismatch("g's output dimension does not match J_theta")
    lhs = matlin.symmetrize(u @ matlin.pinv(u.T @ j_theta @ u, tol) @ u.T)
    a = matlin.sym_sqrt(j_theta, tol) @ u
    j_rho = matlin.symmetrize(a.T @ a)
    rhs = matlin.symmetrize(u @ matlin.pinv(j_rho, tol) @ u.T)
    return Pushforward(lhs, rhs, j_rho)


@dataclass(frozen=True)
class Monotonicity:
    verdict: str  # holds | fails | precondition_failed
    bound1: np.ndarray
    bound2: np.ndarray
    min_gap_eig: float


def monotonicity_check(
    ctx: FisherContext, w1, w2, tol: Tolerances = DEFAULT_TOL
) -> Monotonicity:
    """Check that the biased bound grows from ``col w1`` to a larger ``col w2``.

    For singular ``J`` the comparison is only guaranteed when ``W2^T J W2`` is
    nonsingular; with a bias, the projector condition on ``col w2`` is also
    required. When either precondition fails the verdict says so.
    """
    w1 = matlin.as_mat(w1, "W1")
    w2 = matlin.as_mat(w2, "W2")
    if w1.shape[0] != ctx.k or w2.shape[0] != ctx.k:
        raise DimMismatch(f"W1 and W2 must have {ctx.k} rows")
    if not matlin.colspace_included(w1, w2, tol):
        raise NotNested("col W1 is not contained in col W2")
    s = sensitivity(ctx)
    b1 = _sandwich(s, w1, ctx.j, tol)
    b2 = _sandwich(s, w2, ctx.j, tol)
    gap = matlin.min_eig(b2 - b1)
    lam = np.linalg.eigvalsh(ctx.j)
    ok = True
    if lam[0] <= tol.psd_tol * max(1.0, lam[-1]):
        ok = matlin.min_eig(w2.T @ ctx.j @ w2) > tol.psd_tol
    if ok and np.any(ctx.db):
        ok = feasibility_projector(ctx, matlin.col_projector(w2, tol), tol)
    if not ok:
        return Monotonicity("precondition_failed", b1, b2, gap)
    verdict = "holds" if matlin.loewner_geq(b2, b1, tol) else "fails"
    return Monotonicity(verdict, b1, b2, gap)


ILL_CONDITIONED = 1e-3


@dataclass
class EquivalenceReport:
    """Outcome of cross-checking the per-U and projector feasibility conditions."""

    projector_condition: bool
    cone_checks: int = 0
    cone_failures: int = 0
    span_checks: int = 0
    span_failures: int = 0
    skipped_ill_conditioned: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def feasibility_equivalence_check(
    ctx: FisherContext,
    cset: ConstraintSet,
    theta,
    n_samples: int = 100,
    seed: int = 0,
    tol: Tolerances = DEFAULT_TOL,
) -> EquivalenceReport:
    """Sample tangent matrices and compare the per-U condition with the projector one.

    Condition (A) is probed with ``U`` drawn from the cone itself plus the
    basis ``V``; condition (C) with ``U`` drawn from the span. If the projector
    condition holds, every sampled ``U`` must pass. If it fails, ``U = V`` must
    fail, so at least one probe in each family fails.
    """
    rng = np.random.default_rng(seed)
    span = tangent_span(cset, theta, tol)
    b = feasibility_projector(ctx, span.pi, tol)
    rep = EquivalenceReport(projector_condition=b)

    def probe(u, family):
        # a nearly dependent U puts U^T J U at the rank cutoff; its verdict is
        # decided by rounding, so it is counted and skipped
        sv = np.linalg.svd(u, compute_uv=False)
        if sv.size and sv[0] > 0:
            rel = sv / sv[0]
            if np.any((rel > tol.rank_rel_tol) & (rel < ILL_CONDITIONED)):
                rep.skipped_ill_conditioned += 1
                return
        ok = constrained_bound_u(ctx, u, tol).feasible
        if family == "cone":
            rep.cone_checks += 1
            rep.cone_failures += not ok
        else:
            rep.span_checks += 1
            rep.span_failures += not ok
        if b and not ok:
            rep.violations.append(f"projector condition holds but {family} U #{n} fails")

    for n in range(n_samples):
        m = int(rng.integers(1, max(2, span.d + 2)))
        probe(sample_cone(cset, theta, m, rng, tol), "cone")
        if span.d:
            probe(span.v @ rng.standard_normal((span.d, m)), "span")
    if span.d:
        n = n_samples
        probe(span.v, "cone")
        probe(span.v, "span")
    if not b:
        if rep.cone_failures == 0:
            rep.violations.append("projector condition fails but no cone U fails")
        if span.d and rep.span_failures == 0:
            rep.violations.append("projector condition fails but no span U fails")
    return rep
