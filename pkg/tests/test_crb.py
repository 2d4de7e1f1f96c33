import numpy as np
import pytest

from ccrb import crb, matlin, tangent, verify
from ccrb.crb import (
    FisherContext, constrained_bound_u, constrained_crb, crb_reduction,
    feasibility_equivalence_check, feasibility_projector, monotonicity_check,
    pushforward_crb, sensitivity, unconstrained_crb,
)
from ccrb.errors import DimMismatch, NotNested, NotProjector, NotPsd, SingularJ
from ccrb.tangent import SmoothMap, Sparse, Sphere, TangentSpan


def test_context_validation():
    with pytest.raises(NotPsd):
        FisherContext(np.diag([1.0, -1.0]))
    with pytest.raises(DimMismatch):
        FisherContext(np.eye(2), np.eye(3))
    assert np.array_equal(FisherContext(np.eye(2)).db, np.zeros((2, 2)))


def test_sensitivity_examples():
    assert np.array_equal(sensitivity(FisherContext(np.eye(2))), np.eye(2))
    assert not sensitivity(FisherContext(np.eye(2), -np.eye(2))).any()
    assert np.allclose(sensitivity(FisherContext(np.eye(2), 0.1 * np.eye(2))), 1.1 * np.eye(2))


def test_unconstrained_examples():
    r = unconstrained_crb(FisherContext(np.eye(3) / 4))
    assert r.feasible and np.allclose(r.bound, 4 * np.eye(3)) and r.rule == "unconstrained"
    r = unconstrained_crb(FisherContext(np.ones((2, 2))))
    assert not r.feasible
    assert np.allclose(r.bound, np.ones((2, 2)) / 4)
    assert np.allclose(unconstrained_crb(FisherContext(np.diag([1.0, 4.0]))).bound, np.diag([1, 0.25]))


def test_per_u_examples():
    r = constrained_bound_u(FisherContext(np.ones((2, 2))), np.diag([1.0, 0.0]))
    assert np.array_equal(r.bound, np.diag([1.0, 0.0]))
    assert not matlin.loewner_geq(matlin.pinv(np.ones((2, 2))), r.bound)
    sigma = 0.7
    r = constrained_bound_u(FisherContext(np.eye(2) / sigma**2), np.array([[0.0], [1.0]]))
    assert np.allclose(r.bound, sigma**2 * np.diag([0.0, 1.0]))
    j = verify.random_spd(np.random.default_rng(0), 3)
    assert np.allclose(
        constrained_bound_u(FisherContext(j), np.eye(3)).bound, unconstrained_crb(FisherContext(j)).bound
    )
    with pytest.raises(DimMismatch):
        constrained_bound_u(FisherContext(j), np.eye(2))


def test_feasibility_projector_examples():
    j = verify.random_spd(np.random.default_rng(1), 3)
    pi = matlin.col_projector(np.random.default_rng(2).standard_normal((3, 2)))
    assert feasibility_projector(FisherContext(j), pi)
    assert not feasibility_projector(FisherContext(np.ones((2, 2))), np.eye(2))
    assert feasibility_projector(FisherContext(np.eye(3)), np.diag([0.0, 0.0, 1.0]))
    with pytest.raises(NotProjector):
        feasibility_projector(FisherContext(np.eye(2)), 2 * np.eye(2))


def test_constrained_examples():
    sigma = 0.3
    span = tangent.tangent_span(Sphere(3), np.eye(3)[0])
    r = constrained_crb(FisherContext(np.eye(3) / sigma**2), span)
    assert np.allclose(r.bound, sigma**2 * np.diag([0.0, 1.0, 1.0]), atol=1e-15)
    assert r.trace == pytest.approx(2 * sigma**2, rel=1e-14) and r.rule == "span_projector"
    k = 7
    span = tangent.tangent_span(Sparse(k, 1), np.zeros(k))
    r = constrained_crb(FisherContext(np.eye(k) / sigma**2), span)
    assert np.allclose(r.bound, sigma**2 * np.eye(k)) and r.trace == pytest.approx(sigma**2 * k)
    # full span collapses to the unconstrained bound exactly
    j = verify.random_spd(np.random.default_rng(3), 4)
    full = constrained_crb(FisherContext(j), tangent.tangent_span(tangent.Euclidean(4), np.zeros(4)))
    assert np.array_equal(full.bound, unconstrained_crb(FisherContext(j)).bound)
    with pytest.raises(DimMismatch):
        constrained_crb(FisherContext(np.eye(2)), span)


def test_basis_and_projector_forms_agree():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(200):
        k = int(rng.integers(2, 6))
        j = verify.random_psd(rng, k, int(rng.integers(1, k + 1)))
        span = TangentSpan.from_basis(rng.standard_normal((k, int(rng.integers(1, k)))))
        if matlin.min_eig(span.v.T @ j @ span.v) <= 1e-6:
            continue
        checked += 1
        r = constrained_crb(FisherContext(j), span)
        assert r.extras["basis_gap"] <= 1e-9 * max(1.0, np.abs(r.bound).max())
    assert checked > 30


def test_basis_form_differs_without_positivity():
    # V^T J V singular: the basis form depends on V, the projector form does not
    ctx = FisherContext(np.diag([1.0, 0.0]))
    span = TangentSpan.from_basis(np.array([[1.0, 1.0], [0.0, 1.0]]))
    r = constrained_crb(ctx, span)
    assert np.array_equal(r.bound, crb.unconstrained_crb(ctx).bound)
    assert r.extras["basis_gap"] == 0.0  # full span short-circuits
    v = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
    ctx3 = FisherContext(np.diag([1.0, 0.0, 1.0]))
    r = constrained_crb(ctx3, TangentSpan.from_basis(v[:, :2]))
    assert r.extras["basis_gap"] == pytest.approx(0.5)


def test_reduction_examples():
    red = crb_reduction(FisherContext(np.eye(2)), TangentSpan.from_basis(np.array([[1.0], [0.0]])))
    assert np.allclose(red.reduction, np.diag([0.0, 1.0]))
    assert np.allclose(red.bound, np.diag([1.0, 0.0]))
    j = verify.random_spd(np.random.default_rng(5), 3)
    red = crb_reduction(FisherContext(j), TangentSpan.from_basis(np.eye(3)))
    assert not red.reduction.any()
    with pytest.raises(SingularJ):
        crb_reduction(FisherContext(np.ones((2, 2))), TangentSpan.from_basis(np.eye(2)))


def test_reduction_with_bias_matches_projector_form():
    rng = np.random.default_rng(6)
    k = 4
    ctx = FisherContext(verify.random_spd(rng, k), 0.3 * rng.standard_normal((k, k)))
    span = TangentSpan.from_basis(rng.standard_normal((k, 2)))
    assert np.allclose(crb_reduction(ctx, span).bound, constrained_crb(ctx, span).bound, atol=1e-10)


def test_pushforward_examples():
    rho = 0.4
    g = SmoothMap(lambda r: np.array([np.cos(r[0]), np.sin(r[0])]),
                  lambda r: np.array([[-np.sin(r[0])], [np.cos(r[0])]]))
    pf = pushforward_crb(g, [rho], np.eye(2))
    u = np.array([-np.sin(rho), np.cos(rho)])
    assert np.allclose(pf.lhs, np.outer(u, u)) and np.allclose(pf.rhs, np.outer(u, u))
    m = np.random.default_rng(7).standard_normal((4, 2))
    pf = pushforward_crb(SmoothMap(lambda r: m @ r, lambda r: m), np.zeros(2), np.eye(4))
    proj = m @ np.linalg.pinv(m.T @ m) @ m.T
    assert np.allclose(pf.lhs, proj) and np.allclose(pf.rhs, proj)
    pf = pushforward_crb(SmoothMap(lambda r: np.ones(3)), np.zeros(2), np.eye(3))
    assert np.allclose(pf.lhs, 0) and np.allclose(pf.rhs, 0)


def test_monotonicity_examples():
    ctx = FisherContext(np.diag([1.0, 2.0]))
    v = monotonicity_check(ctx, np.array([[1.0], [0.0]]), np.eye(2))
    assert v.verdict == "holds"
    assert np.allclose(v.bound1, np.diag([1.0, 0.0])) and np.allclose(v.bound2, np.diag([1.0, 0.5]))
    ctx = FisherContext(np.diag([1.0, 0.0]))
    v = monotonicity_check(ctx, np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert v.verdict == "precondition_failed"
    with pytest.raises(NotNested):
        monotonicity_check(FisherContext(np.eye(2)), np.eye(2), np.array([[1.0], [0.0]]))


def test_monotonicity_singular_fisher_with_positive_precondition():
    # J singular, but W2^T J W2 > 0 on a subspace that avoids its null space
    j = np.diag([1.0, 2.0, 0.0])
    w2 = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    w1 = w2[:, :1]
    assert monotonicity_check(FisherContext(j), w1, w2).verdict == "holds"


def test_both_readings_of_monotonicity():
    """Nested subspaces of the span, and matrices whose column space equals the span."""
    rng = np.random.default_rng(8)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        ctx = FisherContext(verify.random_spd(rng, k), 0.5 * rng.standard_normal((k, k)))
        v = rng.standard_normal((k, int(rng.integers(1, k + 1))))
        span = TangentSpan.from_basis(v)
        best = constrained_crb(ctx, span).bound
        w1 = v @ rng.standard_normal((v.shape[1], 1))
        assert monotonicity_check(ctx, w1, v).verdict == "holds"
        w = v @ verify.random_invertible(rng, v.shape[1])
        assert np.allclose(crb.bound_via_basis(ctx, w), best, atol=1e-8 * max(1, np.abs(best).max()))


def test_feasibility_equivalence_examples():
    rng = np.random.default_rng(9)
    rep = feasibility_equivalence_check(FisherContext(verify.random_spd(rng, 3)), Sphere(3), np.eye(3)[0])
    assert rep.ok and rep.projector_condition and rep.cone_failures == 0
    j = verify.random_psd(rng, 3, 1)
    rep = feasibility_equivalence_check(FisherContext(j), Sparse(3, 1), np.zeros(3), n_samples=100)
    assert rep.ok and not rep.projector_condition
    circle = tangent.EqualityManifold(
        2, SmoothMap(lambda v: np.array([v @ v - 1.0]), lambda v: 2 * v[None, :])
    )
    theta = np.array([1.0, 0.0])  # tangent direction e2
    j = np.diag([1.0, 0.0])
    # S^T e2 must lie in col(Pi J Pi) = span(e2) only if Pi J Pi != 0; here Pi J Pi = 0,
    # so feasibility needs S e2 = 0, i.e. db[:, 1] = -e2
    db = rng.standard_normal((2, 2))
    db[:, 1] = [0.0, -1.0]
    rep = feasibility_equivalence_check(FisherContext(j, db), circle, theta, n_samples=100)
    assert rep.projector_condition and rep.ok and rep.span_failures == 0
    j = np.diag([0.0, 1.0])
    rep = feasibility_equivalence_check(FisherContext(j, rng.standard_normal((2, 2))), circle, theta)
    assert rep.projector_condition and rep.ok


@pytest.mark.parametrize("suite", ["dominance", "monotonicity", "colspace", "formulas", "pushforward", "feasibility", "counterexamples"])
def test_property_suites(suite):
    for r in verify.run_suite(suite, trials=200, seed=11):
        assert r.ok, (r.name, r.failures)
        assert r.total > 0
