"""Randomized property suites behind ``ccrb verify``.

Each suite takes a trial count and a seed and returns a list of
:class:`PropertyResult`, one per property, with pass/total counts and the
first few failure descriptions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import matlin, schur, tangent
from .crb import (
    FisherContext,
    bound_via_basis,
    constrained_bound_u,
    constrained_crb,
    crb_reduction,
    feasibility_equivalence_check,
    monotonicity_check,
    pushforward_crb,
)
from .matlin import DEFAULT_TOL
from .schur import BlockSym
from .tangent import SmoothMap, TangentSpan, vec


@dataclass
class PropertyResult:
    name: str
    passed: int = 0
    total: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.passed == self.total

    def record(self, ok: bool, note: str = "") -> None:
        self.total += 1
        if ok:
            self.passed += 1
        elif len(self.failures) < 5:
            self.failures.append(note)


# --- random instances ------------------------------------------------------------


def random_spd(rng, k: int) -> np.ndarray:
    a = rng.standard_normal((k, k))
    return matlin.symmetrize(a @ a.T / k + 0.1 * np.eye(k))


def random_psd(rng, k: int, r: int) -> np.ndarray:
    b = rng.standard_normal((k, r))
    return matlin.symmetrize(b @ b.T)


def random_invertible(rng, m: int, lo: float = 0.3, hi: float = 3.0) -> np.ndarray:
    q1 = np.linalg.qr(rng.standard_normal((m, m)))[0]
    q2 = np.linalg.qr(rng.standard_normal((m, m)))[0]
    return (q1 * rng.uniform(lo, hi, m)) @ q2


def random_basis(rng, k: int, m: int, lo: float = 0.3, hi: float = 3.0) -> np.ndarray:
    """k x m matrix of full column rank with singular values in ``[lo, hi]``."""
    q = np.linalg.qr(rng.standard_normal((k, m)))[0]
    return q @ random_invertible(rng, m, lo, hi)


def random_block(rng, kind: int) -> BlockSym:
    """kind 0: Gram (PSD), 1: random symmetric, 2: singular C with B outside
    its range, 3: Gram shifted down by a random amount."""
    p, q = int(rng.integers(1, 5)), int(rng.integers(1, 5))
    n = p + q
    if kind == 0:
        g = rng.standard_normal((n + int(rng.integers(0, 3)), n))
        return BlockSym.split(g.T @ g, p)
    if kind == 1:
        a = rng.standard_normal((n, n))
        return BlockSym.split(a + a.T, p)
    if kind == 2:
        r = int(rng.integers(0, q))
        gc = rng.standard_normal((r, q))
        b = rng.standard_normal((p, q))
        a = b @ b.T * rng.uniform(0.5, 5.0) + np.eye(p)
        return BlockSym(a, b, gc.T @ gc)
    g = rng.standard_normal((n + 2, n))
    m = g.T @ g
    lam = np.linalg.eigvalsh(m)[0]
    return BlockSym.split(m - (lam + rng.uniform(1e-3, 1.0)) * np.eye(n), p)


def random_polynomial_map(rng, d: int, k: int) -> SmoothMap:
    """Random quadratic-plus-cubic map R^d -> R^k with an analytic Jacobian."""
    c0 = rng.standard_normal(k)
    lin = rng.standard_normal((k, d))
    quad = rng.standard_normal((k, d, d)) / 2
    cub = rng.standard_normal((k, d)) / 6

    def f(r):
        return c0 + lin @ r + np.einsum("kij,i,j->k", quad, r, r) + cub @ r**3

    def jac(r):
        return lin + np.einsum("kij,j->ki", quad + quad.transpose(0, 2, 1), r) + 3 * cub * r**2

    return SmoothMap(f, jac)


def _rel(a, b) -> float:
    return float(np.max(np.abs(a - b))) / max(1.0, float(np.max(np.abs(a))))


# --- suites ----------------------------------------------------------------------


def suite_schur(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    iff = PropertyResult("schur_iff")
    weak = PropertyResult("schur_weak_direction")
    band = 10 * DEFAULT_TOL.psd_tol
    for t in range(trials):
        # even trials PSD by construction, odd trials cycle through the indefinite kinds
        m = random_block(rng, 0 if t % 2 == 0 else 1 + (t // 2) % 3)
        direct = schur.block_psd_direct(m)
        cond = schur.schur_conditions(m)
        if direct:
            weak.record(cond.complement_psd, f"trial {t}: PSD block, complement not PSD")
        if abs(matlin.min_eig(m.assemble())) < band:
            continue
        iff.record(direct == cond.all, f"trial {t}: direct={direct}, conditions={tuple(cond)}")
    return [iff, weak]


def suite_dominance(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    res = PropertyResult("per_u_below_inverse_fisher")
    for t in range(trials):
        k = int(rng.integers(1, 7))
        j = random_spd(rng, k)
        u = rng.standard_normal((k, int(rng.integers(1, k + 2))))
        b = constrained_bound_u(FisherContext(j), u).bound
        res.record(matlin.loewner_geq(np.linalg.inv(j), b), f"trial {t}")
    return [res]


def suite_monotonicity(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    res = PropertyResult("nested_spans_monotone")
    for t in range(trials):
        k = int(rng.integers(2, 7))
        j = random_spd(rng, k)
        db = 0.5 * rng.standard_normal((k, k))
        m2 = int(rng.integers(1, k + 1))
        # controlled conditioning: the per-U formula loses about cond(W^T J W) * eps
        w2 = random_basis(rng, k, m2)
        w1 = w2 @ random_basis(rng, m2, int(rng.integers(1, m2 + 1)))
        v = monotonicity_check(FisherContext(j, db), w1, w2)
        res.record(v.verdict == "holds", f"trial {t}: {v.verdict}, gap {v.min_gap_eig:.3e}")
    return [res]


def suite_colspace(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    res = PropertyResult("column_space_only")
    t = 0
    while res.total < trials and t < 10 * trials:
        t += 1
        k = int(rng.integers(2, 7))
        j = random_psd(rng, k, int(rng.integers(1, k + 1)))
        rj = matlin.rank(j)
        w = random_basis(rng, k, int(rng.integers(1, rj + 1)))
        # the property needs W^T J W > 0; redraw when it is singular or nearly so
        wjw = w.T @ j @ w
        if matlin.min_eig(wjw) <= 1e-6 * np.linalg.norm(wjw, 2):
            continue
        mm = random_invertible(rng, w.shape[1])
        ctx = FisherContext(j)
        res.record(
            _rel(bound_via_basis(ctx, w), bound_via_basis(ctx, w @ mm)) <= 1e-8, f"trial {t}"
        )
    return [res]


def suite_formulas(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    res = PropertyResult("basis_projector_reduction_agree")
    best = PropertyResult("span_bound_dominates_sub_bounds")
    for t in range(trials):
        k = int(rng.integers(2, 7))
        ctx = FisherContext(random_spd(rng, k))
        # a near-degenerate V squares its condition number in V^T J V and trips
        # the rank cutoff of the basis form; draw V with controlled conditioning
        span = TangentSpan.from_basis(random_basis(rng, k, int(rng.integers(1, k + 1))))
        via_pi = constrained_crb(ctx, span).bound
        via_v = bound_via_basis(ctx, span.v)
        via_red = crb_reduction(ctx, span).bound
        res.record(
            max(_rel(via_pi, via_v), _rel(via_pi, via_red), _rel(via_v, via_red)) <= 1e-8,
            f"trial {t}",
        )
        u = span.v @ rng.standard_normal((span.d, int(rng.integers(1, span.d + 2))))
        best.record(
            matlin.loewner_geq(via_pi, constrained_bound_u(ctx, u).bound), f"trial {t}"
        )
    return [res, best]


def suite_pushforward(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    res = PropertyResult("reparametrization_identity")
    for t in range(trials):
        k = int(rng.integers(2, 7))
        d = int(rng.integers(1, k + 1))
        g = random_polynomial_map(rng, d, k)
        pf = pushforward_crb(g, rng.standard_normal(d), random_spd(rng, k))
        res.record(_rel(pf.lhs, pf.rhs) <= 1e-7, f"trial {t}")
    return [res]


def catalog_points(rng):
    """(set, point, expected span dimension) for one random point of each catalog set."""
    out = []
    k = int(rng.integers(2, 7))
    x = rng.standard_normal(k)
    out.append((tangent.Sphere(k), x / np.linalg.norm(x), k - 1))
    out.append((tangent.Euclidean(k), rng.standard_normal(k), k))
    p, q = 4, 2
    out.append(
        (tangent.Stiefel(p, q), vec(np.linalg.qr(rng.standard_normal((p, q)))[0]), p * q - q * (q + 1) // 2)
    )
    o = np.linalg.qr(rng.standard_normal((3, 3)))[0]
    out.append((tangent.OrthogonalGroup(3), vec(o), 3))
    o = o * np.sign(np.linalg.det(o))
    out.append((tangent.SpecialOrthogonal(3), vec(o), 3))
    x = rng.standard_normal((3, 1)) @ rng.standard_normal((1, 4))
    out.append((tangent.FixedRank(3, 4, 1), vec(x), 1 * (3 + 4 - 1)))
    b = rng.standard_normal((3, 2))
    out.append((tangent.FixedRankPsd(3, 2), vec(b @ b.T), 2 * (2 * 3 - 2 + 1) // 2))
    out.append((tangent.PositiveDefinite(3), vec(random_spd(rng, 3)), 6))
    theta = np.zeros(5)
    theta[rng.choice(5, 2, replace=False)] = rng.standard_normal(2)
    out.append((tangent.Sparse(5, 2), theta, 2))
    out.append((tangent.Sparse(5, 3), theta, 5))
    circle = tangent.EqualityManifold(
        2, SmoothMap(lambda v: np.array([v @ v - 1.0]), lambda v: 2 * v[None, :])
    )
    a = rng.uniform(0, 2 * np.pi)
    out.append((circle, np.array([np.cos(a), np.sin(a)]), 1))
    out.append(
        (tangent.Product((tangent.Sphere(2), tangent.Sparse(3, 1))), np.array([0.6, 0.8, 0.0, 0.0, 2.0]), 2)
    )
    return out


def suite_tangent(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    laws = PropertyResult("projector_laws")
    dims = PropertyResult("dimension_counts")
    tang = PropertyResult("first_order_feasibility")
    for t in range(trials):
        for cset, theta, d in catalog_points(rng):
            span = tangent.tangent_span(cset, theta)
            pi = span.pi
            ok = (
                np.max(np.abs(pi @ pi - pi)) <= 1e-9
                and np.max(np.abs(pi - pi.T)) <= 1e-9
                and np.max(np.abs(pi @ span.v - span.v), initial=0.0) <= 1e-9
            )
            laws.record(bool(ok), f"{cset.name} trial {t}")
            dims.record(span.d == d, f"{cset.name}: d={span.d}, expected {d}")
            if hasattr(cset, "constraint_jacobian"):
                jac = cset.constraint_jacobian(theta)
                worst = max(
                    np.linalg.norm(jac @ v) / (np.linalg.norm(jac, 2) * np.linalg.norm(v))
                    for v in span.v.T
                )
                tang.record(worst <= 1e-8, f"{cset.name}: {worst:.3e}")
    return [laws, dims, tang]


def suite_feasibility(trials: int, seed: int) -> list:
    rng = np.random.default_rng(seed)
    res = PropertyResult("projector_vs_per_u_equivalence")
    cases = [
        (tangent.Sparse(3, 1), np.zeros(3)),
        (tangent.Sparse(4, 2), np.array([0.0, 1.5, 0.0, 0.0])),
        (tangent.Sparse(4, 2), np.array([0.0, 1.5, -2.0, 0.0])),
        (tangent.Sphere(3), np.array([0.0, 0.6, 0.8])),
    ]
    for t in range(trials):
        cset, theta = cases[t % len(cases)]
        k = cset.k
        j = random_psd(rng, k, int(rng.integers(1, k + 1)))
        if rng.random() < 0.5:
            db = None
        else:
            # S^T inside col J whenever the draw lands in that branch
            pj = matlin.col_projector(j)
            db = (pj @ rng.standard_normal((k, k))).T - np.eye(k)
        rep = feasibility_equivalence_check(
            FisherContext(j, db), cset, theta, n_samples=20, seed=int(rng.integers(2**32))
        )
        res.record(rep.ok, f"{cset.name} trial {t}: {rep.violations[:1]}")
    return [res]


def suite_extension(trials: int, seed: int) -> list:
    """Two extensions that agree on the set give the same directional derivatives
    along tangent vectors."""
    rng = np.random.default_rng(seed)
    res = PropertyResult("extension_independence")
    for t in range(trials):
        k = int(rng.integers(2, 6))
        a = rng.standard_normal((3, k))
        c = rng.standard_normal(3)
        x = rng.standard_normal(k)
        theta = x / np.linalg.norm(x)

        def f1(v):
            return np.tanh(a @ v)

        def f2(v):
            return f1(v) + c * (v @ v - 1.0) * np.cos(v.sum())

        span = tangent.tangent_span(tangent.Sphere(k), theta)
        gap = max(
            np.max(np.abs(tangent.directional_derivative(f1, theta, u)
                          - tangent.directional_derivative(f2, theta, u)))
            for u in span.v.T
        )
        res.record(gap <= 1e-6, f"sphere trial {t}: {gap:.3e}")

        # det vanishes on rank-1 2x2 matrices
        xr = np.outer(rng.standard_normal(2), rng.standard_normal(2))
        cr = rng.standard_normal()

        def g1(v):
            return np.array([np.sin(v @ a[0, :1].repeat(4)[:4])])

        def g2(v):
            return g1(v) + cr * np.linalg.det(tangent.unvec(v, 2, 2))

        span = tangent.tangent_span(tangent.FixedRank(2, 2, 1), vec(xr))
        gap = max(
            np.max(np.abs(tangent.directional_derivative(g1, vec(xr), u)
                          - tangent.directional_derivative(g2, vec(xr), u)))
            for u in span.v.T
        )
        res.record(gap <= 1e-6, f"fixed-rank trial {t}: {gap:.3e}")
    return [res]


def suite_counterexamples(trials: int = 1, seed: int = 0) -> list:
    first = PropertyResult("singular_fisher_not_below_pinv")
    j = np.ones((2, 2))
    w = np.diag([1.0, 0.0])
    b = constrained_bound_u(FisherContext(j), w).bound
    first.record(
        np.max(np.abs(b - w)) <= 1e-12
        and np.max(np.abs(matlin.pinv(j) - j / 4)) <= 1e-12
        and not matlin.loewner_geq(matlin.pinv(j), b),
        "inequality against J^+ did not fail",
    )
    second = PropertyResult("column_space_dependence_needs_positivity")
    ctx = FisherContext(np.diag([1.0, 0.0]))
    w1, w2 = np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]])
    b1, b2 = bound_via_basis(ctx, w1), bound_via_basis(ctx, w2)
    expected2 = np.array([[1.0, 0.5], [0.5, 0.25]])
    second.record(
        np.max(np.abs(b1 - np.diag([1.0, 0.0]))) <= 1e-12
        and np.max(np.abs(b2 - expected2)) <= 1e-12
        and abs(np.max(np.abs(b1 - b2)) - 0.5) <= 1e-12
        and monotonicity_check(ctx, w1, w2).verdict == "precondition_failed",
        "bounds for equal column spaces did not differ as documented",
    )
    return [first, second]


SUITES: dict[str, tuple[Callable, int]] = {
    "schur": (suite_schur, 1000),
    "dominance": (suite_dominance, 1000),
    "monotonicity": (suite_monotonicity, 1000),
    "colspace": (suite_colspace, 500),
    "formulas": (suite_formulas, 200),
    "pushforward": (suite_pushforward, 200),
    "tangent": (suite_tangent, 20),
    "feasibility": (suite_feasibility, 100),
    "extension": (suite_extension, 50),
    "counterexamples": (suite_counterexamples, 1),
}


def run_suite(name: str, trials: int | None = None, seed: int = 0) -> list:
    if name == "all":
        out = []
        for key in SUITES:
            out.extend(run_suite(key, trials, seed))
        return out
    fn, default = SUITES[name]
    return fn(default if trials is None else trials, seed)
