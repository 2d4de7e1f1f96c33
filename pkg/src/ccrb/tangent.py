"""Constraint sets and the span of their tangent cones.

Every set lives in R^k. Matrix-valued sets (Stiefel, orthogonal groups,
fixed-rank, positive-definite) are embedded by column-major vectorization, so
a p x q matrix ``X`` is the vector ``vec(X) = X.flatten(order="F")``.

The central call is :func:`tangent_span`, which returns a basis ``V`` whose
columns are themselves tangent vectors, its dimension and the orthogonal
projector onto the span. A few sets also know how to *retract* a step back
onto the set, which is what :func:`tangent_vector_witness` and the
finite-difference bias estimators use to stay feasible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import block_diag

from . import matlin
from .errors import (
    DimMismatch,
    NoRetraction,
    NotInCone,
    NotOnSet,
    RankTolAmbiguous,
)
from .matlin import DEFAULT_TOL, Tolerances


def vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).flatten(order="F")


def unvec(theta, p: int, q: int) -> np.ndarray:
    return np.asarray(theta, dtype=float).reshape((p, q), order="F")


def fd_step(theta) -> float:
    return 1e-6 * (1.0 + float(np.linalg.norm(theta)))


@dataclass(frozen=True)
class SmoothMap:
    """A differentiable map with an optional analytic Jacobian.

    ``jac(x)`` must return the m x n derivative. Without it, central finite
    differences with step ``1e-6 * (1 + ||x||)`` are used.
    """

    f: Callable[[np.ndarray], np.ndarray]
    jac: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float))

    def jacobian(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.jac is not None:
            out = np.asarray(self.jac(x), dtype=float)
            return out.reshape(-1, x.size)
        h = fd_step(x)
        cols = []
        for i in range(x.size):
            e = np.zeros_like(x)
            e[i] = h
            cols.append((self(x + e) - self(x - e)) / (2 * h))
        if not cols:
            return np.zeros((self(x).size, 0))
        return np.column_stack(cols)


def directional_derivative(f, theta, u, jac=None) -> np.ndarray:
    """Derivative of ``f`` at ``theta`` along ``u``.

    Uses the Jacobian-vector product when a gradient oracle is available and a
    central difference along ``u`` otherwise.
    """
    theta = np.asarray(theta, dtype=float)
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("direction must be finite")
    if isinstance(f, SmoothMap) and jac is None:
        jac = f.jac
    if jac is not None:
        return np.asarray(jac(theta), dtype=float).reshape(-1, theta.size) @ u
    nu = float(np.linalg.norm(u))
    fx = np.atleast_1d(np.asarray(f(theta), dtype=float))
    if nu == 0.0:
        return np.zeros_like(fx)
    t = fd_step(theta) / nu
    fp = np.atleast_1d(np.asarray(f(theta + t * u), dtype=float))
    fm = np.atleast_1d(np.asarray(f(theta - t * u), dtype=float))
    return (fp - fm) / (2 * t)


def greedy_basis(generators: Sequence, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Pick a basis out of a spanning set, keeping first-seen order.

    A generator is kept when its distance to the span of the vectors kept so
    far exceeds ``incl_tol * max(1, ||g||)``.
    """
    gens = [np.asarray(g, dtype=float).ravel() for g in generators]
    if not gens:
        return np.zeros((0, 0))
    k = gens[0].size
    if any(g.size != k for g in gens):
        raise DimMismatch("generators have different lengths")
    kept = []
    qbuf = np.zeros((k, min(k, len(gens))))
    for g in gens:
        if len(kept) == k:
            break
        q = qbuf[:, : len(kept)]
        resid = g - q @ (q.T @ g)
        # second pass keeps the orthonormal factor accurate
        resid = resid - q @ (q.T @ resid)
        nr = float(np.linalg.norm(resid))
        if nr > tol.incl_tol * max(1.0, float(np.linalg.norm(g))):
            qbuf[:, len(kept)] = resid / nr
            kept.append(g)
    if not kept:
        return np.zeros((k, 0))
    return np.column_stack(kept)


@dataclass(frozen=True)
class PointMembership:
    in_set: bool
    residual: float


@dataclass(frozen=True)
class TangentSpan:
    """Basis ``v`` (k x d) of the tangent-cone span, its dimension and projector."""

    v: np.ndarray
    d: int
    pi: np.ndarray

    @property
    def k(self) -> int:
        return self.pi.shape[0]

    @classmethod
    def from_basis(cls, v, tol: Tolerances = DEFAULT_TOL) -> "TangentSpan":
        v = matlin.as_mat(v, "V")
        d = matlin.rank(v, tol) if v.size else 0
        k = v.shape[0]
        pi = np.eye(k) if d == k else matlin.col_projector(v, tol)
        return cls(v, d, pi)


class ConstraintSet:
    """Base class for the set catalog. Subclasses are frozen dataclasses."""

    name = "set"

    @property
    def k(self) -> int:
        raise NotImplementedError

    def residual(self, theta: np.ndarray, tol: Tolerances) -> float:
        raise NotImplementedError

    def basis(self, theta: np.ndarray, tol: Tolerances) -> np.ndarray:
        raise NotImplementedError

    def retract(self, theta: np.ndarray, step: np.ndarray) -> np.ndarray:
        raise NoRetraction(f"{self.name} has no retraction")

    def sample_cone(self, theta, m: int, rng: np.random.Generator, tol=DEFAULT_TOL):
        """``m`` random tangent vectors (as columns) drawn from the cone itself."""
        v = self.basis(theta, tol)
        return v @ rng.standard_normal((v.shape[1], m))

    def span(self, theta, tol: Tolerances = DEFAULT_TOL) -> TangentSpan:
        return TangentSpan.from_basis(self.basis(theta, tol), tol)

    def _check_dim(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float).ravel()
        if theta.size != self.k:
            raise DimMismatch(f"{self.name} lives in R^{self.k}, got length {theta.size}")
        if not np.all(np.isfinite(theta)):
            raise ValueError("point must be finite")
        return theta


@dataclass(frozen=True)
class Euclidean(ConstraintSet):
    n: int
    name = "euclidean"

    @property
    def k(self):
        return self.n

    def residual(self, theta, tol):
        return 0.0

    def basis(self, theta, tol):
        return np.eye(self.n)

    def retract(self, theta, step):
        return theta + step


@dataclass(frozen=True)
class Sphere(ConstraintSet):
    n: int
    name = "sphere"

    @property
    def k(self):
        return self.n

    def residual(self, theta, tol):
        return abs(float(np.linalg.norm(theta)) - 1.0)

    def constraint_jacobian(self, theta):
        return 2.0 * np.asarray(theta, dtype=float)[None, :]

    def basis(self, theta, tol):
        return matlin.null_space(np.asarray(theta)[None, :], tol)

    def retract(self, theta, step):
        x = theta + step
        return x / np.linalg.norm(x)


@dataclass(frozen=True)
class Stiefel(ConstraintSet):
    """p x q matrices with orthonormal columns."""

    p: int
    q: int
    name = "stiefel"

    def __post_init__(self):
        if not (0 < self.q <= self.p):
            raise ValueError("Stiefel needs 0 < q <= p")

    @property
    def k(self):
        return self.p * self.q

    def residual(self, theta, tol):
        x = unvec(theta, self.p, self.q)
        return float(np.linalg.norm(x.T @ x - np.eye(self.q)))

    def constraint_jacobian(self, theta):
        """Jacobian of the upper triangle of ``X^T X - I``."""
        x = unvec(theta, self.p, self.q)
        iu = np.triu_indices(self.q)
        cols = []
        for j in range(self.k):
            e = np.zeros(self.k)
            e[j] = 1.0
            u = unvec(e, self.p, self.q)
            cols.append((x.T @ u + u.T @ x)[iu])
        return np.column_stack(cols)

    def basis(self, theta, tol):
        return matlin.null_space(self.constraint_jacobian(theta), tol)

    def retract(self, theta, step):
        x = unvec(theta + step, self.p, self.q)
        qf, r = np.linalg.qr(x)
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        return vec(qf * signs)


@dataclass(frozen=True)
class OrthogonalGroup(Stiefel):
    def __init__(self, p: int):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", p)
        self.__post_init__()

    name = "orthogonal"


@dataclass(frozen=True)
class SpecialOrthogonal(Stiefel):
    def __init__(self, p: int):
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", p)
        self.__post_init__()

    name = "special_orthogonal"

    def residual(self, theta, tol):
        x = unvec(theta, self.p, self.p)
        return super().residual(theta, tol) + abs(float(np.linalg.det(x)) - 1.0)


def _singular_values_ok(s: np.ndarray, r: int, tol: Tolerances) -> None:
    if s[0] == 0 or s[r - 1] / s[0] < 10 * tol.rank_rel_tol:
        raise RankTolAmbiguous(
            f"sigma_r/sigma_1 = {s[r - 1] / s[0] if s[0] else 0.0:.3e} is within "
            "10*rank_rel_tol; numerical rank is ambiguous"
        )


@dataclass(frozen=True)
class FixedRank(ConstraintSet):
    """p x q matrices of rank exactly r."""

    p: int
    q: int
    r: int
    name = "fixed_rank"

    def __post_init__(self):
        if not (0 < self.r <= min(self.p, self.q)):
            raise ValueError("FixedRank needs 0 < r <= min(p, q)")

    @property
    def k(self):
        return self.p * self.q

    def residual(self, theta, tol):
        s = np.linalg.svd(unvec(theta, self.p, self.q), compute_uv=False)
        if s[0] == 0:
            return 1.0
        tail = s[self.r] / s[0] if self.r < s.size else 0.0
        deficit = 1.0 if s[self.r - 1] <= tol.rank_rel_tol * s[0] else 0.0
        return float(max(tail, deficit))

    def basis(self, theta, tol):
        x = unvec(theta, self.p, self.q)
        u, s, vt = np.linalg.svd(x, full_matrices=True)
        _singular_values_ok(s, self.r, tol)
        cols = [
            vec(np.outer(u[:, i], vt[j]))
            for j in range(self.q)
            for i in range(self.p)
            if i < self.r or j < self.r
        ]
        return np.column_stack(cols)

    def retract(self, theta, step):
        x = unvec(theta + step, self.p, self.q)
        u, s, vt = np.linalg.svd(x, full_matrices=False)
        return vec((u[:, : self.r] * s[: self.r]) @ vt[: self.r])


def _sym_basis(q: np.ndarray, pairs) -> np.ndarray:
    cols = []
    for i, j in pairs:
        if i == j:
            m = np.outer(q[:, i], q[:, i])
        else:
            m = (np.outer(q[:, i], q[:, j]) + np.outer(q[:, j], q[:, i])) / np.sqrt(2.0)
        cols.append(vec(m))
    return np.column_stack(cols)


@dataclass(frozen=True)
class FixedRankPsd(ConstraintSet):
    """p x p PSD matrices of rank exactly r."""

    p: int
    r: int
    name = "fixed_rank_psd"

    def __post_init__(self):
        if not (0 < self.r <= self.p):
            raise ValueError("FixedRankPsd needs 0 < r <= p")

    @property
    def k(self):
        return self.p * self.p

    def _eig(self, theta):
        x = unvec(theta, self.p, self.p)
        w, q = np.linalg.eigh(0.5 * (x + x.T))
        return x, w[::-1], q[:, ::-1]

    def residual(self, theta, tol):
        x, w, _ = self._eig(theta)
        asym = float(np.max(np.abs(x - x.T)))
        if w[0] <= 0:
            return max(1.0, asym)
        neg = max(0.0, -float(w[-1]))
        tail = abs(w[self.r]) / w[0] if self.r < self.p else 0.0
        deficit = 1.0 if w[self.r - 1] <= tol.rank_rel_tol * w[0] else 0.0
        return float(max(asym, neg, tail, deficit))

    def basis(self, theta, tol):
        _, w, q = self._eig(theta)
        _singular_values_ok(np.abs(w), self.r, tol)
        pairs = [(i, j) for i in range(self.r) for j in range(i, self.p)]
        return _sym_basis(q, pairs)

    def retract(self, theta, step):
        x = unvec(theta + step, self.p, self.p)
        w, q = np.linalg.eigh(0.5 * (x + x.T))
        w, q = w[::-1][: self.r], q[:, ::-1][:, : self.r]
        return vec((q * np.clip(w, 0.0, None)) @ q.T)


@dataclass(frozen=True)
class PositiveDefinite(ConstraintSet):
    p: int
    name = "positive_definite"

    @property
    def k(self):
        return self.p * self.p

    def residual(self, theta, tol):
        x = unvec(theta, self.p, self.p)
        asym = float(np.max(np.abs(x - x.T)))
        lam = float(np.linalg.eigvalsh(0.5 * (x + x.T))[0])
        return max(asym, max(0.0, -lam))

    def basis(self, theta, tol):
        pairs = [(i, j) for j in range(self.p) for i in range(j + 1)]
        return _sym_basis(np.eye(self.p), pairs)

    def retract(self, theta, step):
        # open set: short straight steps stay inside
        x = unvec(theta + step, self.p, self.p)
        return vec(0.5 * (x + x.T))


def support(theta, tol: Optional[float] = None) -> np.ndarray:
    """Indices of entries above ``1e-12 * max(1, ||theta||_inf)`` in magnitude."""
    theta = np.asarray(theta, dtype=float)
    if tol is None:
        tol = 1e-12 * max(1.0, float(np.max(np.abs(theta), initial=0.0)))
    return np.flatnonzero(np.abs(theta) > tol)


@dataclass(frozen=True)
class Sparse(ConstraintSet):
    """Vectors in R^n with at most s nonzero entries."""

    n: int
    s: int
    name = "sparse"

    def __post_init__(self):
        if not (0 < self.s <= self.n):
            raise ValueError("Sparse needs 0 < s <= n")

    @property
    def k(self):
        return self.n

    def residual(self, theta, tol):
        return float(max(0, support(theta).size - self.s))

    def in_cone(self, theta, u) -> bool:
        supp = set(support(theta).tolist()) | set(support(u, 0.0).tolist())
        return len(supp) <= self.s

    def basis(self, theta, tol):
        supp = support(theta)
        if supp.size < self.s:
            gens = list(np.eye(self.n))
        else:
            gens = [np.eye(self.n)[i] for i in supp]
        return greedy_basis(gens, tol)

    def sample_cone(self, theta, m, rng, tol=DEFAULT_TOL):
        supp = support(theta)
        free = np.setdiff1d(np.arange(self.n), supp)
        out = np.zeros((self.n, m))
        extra = self.s - supp.size
        for c in range(m):
            idx = np.concatenate([supp, rng.choice(free, size=extra, replace=False)])
            out[idx.astype(int), c] = rng.standard_normal(idx.size)
        return out

    def retract(self, theta, step):
        if not self.in_cone(theta, step):
            raise NotInCone("step leaves the sparse set")
        return theta + step


@dataclass(frozen=True)
class EqualityManifold(ConstraintSet):
    """``{theta in R^n : h(theta) = 0}`` for a smooth map ``h``."""

    n: int
    h: SmoothMap
    name = "equality"

    @property
    def k(self):
        return self.n

    def residual(self, theta, tol):
        return float(np.linalg.norm(self.h(theta)))

    def constraint_jacobian(self, theta):
        return self.h.jacobian(theta)

    def basis(self, theta, tol):
        return matlin.null_space(self.h.jacobian(theta), tol)


@dataclass(frozen=True)
class TransformImage(ConstraintSet):
    """Image ``{g(rho)}`` of a smooth map; ``rho`` is the preimage of the point of interest."""

    n: int
    g: SmoothMap
    rho: Optional[np.ndarray] = None
    name = "transform"

    @property
    def k(self):
        return self.n

    def at(self, rho) -> "TransformImage":
        return TransformImage(self.n, self.g, np.asarray(rho, dtype=float))

    def _rho(self):
        if self.rho is None:
            raise NotOnSet("TransformImage needs a preimage rho; use .at(rho)")
        return self.rho

    def residual(self, theta, tol):
        return float(np.linalg.norm(self.g(self._rho()) - theta))

    def basis(self, theta, tol):
        # injectivity of g is not checked; rank-deficient Jacobians give fewer columns
        return matlin.col_basis(self.g.jacobian(self._rho()), tol)


@dataclass(frozen=True)
class Product(ConstraintSet):
    factors: tuple = field(default_factory=tuple)
    name = "product"

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("Product needs at least one factor")

    @property
    def k(self):
        return sum(f.k for f in self.factors)

    def split(self, theta):
        out, start = [], 0
        for f in self.factors:
            out.append(theta[start : start + f.k])
            start += f.k
        return out

    def residual(self, theta, tol):
        return max(f.residual(t, tol) for f, t in zip(self.factors, self.split(theta)))

    def basis(self, theta, tol):
        return block_diag(*[f.basis(t, tol) for f, t in zip(self.factors, self.split(theta))])

    def span(self, theta, tol=DEFAULT_TOL):
        parts = [f.span(t, tol) for f, t in zip(self.factors, self.split(theta))]
        v = block_diag(*[p.v for p in parts])
        pi = block_diag(*[p.pi for p in parts])
        return TangentSpan(v, sum(p.d for p in parts), pi)

    def sample_cone(self, theta, m, rng, tol=DEFAULT_TOL):
        return np.vstack(
            [f.sample_cone(t, m, rng, tol) for f, t in zip(self.factors, self.split(theta))]
        )

    def retract(self, theta, step):
        return np.concatenate(
            [
                f.retract(t, s)
                for f, t, s in zip(self.factors, self.split(theta), self.split(step))
            ]
        )


def contains(cset: ConstraintSet, theta, tol: Tolerances = DEFAULT_TOL) -> PointMembership:
    theta = cset._check_dim(theta)
    r = float(cset.residual(theta, tol))
    return PointMembership(r <= tol.member_tol, r)


def tangent_span(cset: ConstraintSet, theta, tol: Tolerances = DEFAULT_TOL) -> TangentSpan:
    """Basis, dimension and projector of the span of the tangent cone at ``theta``."""
    theta = cset._check_dim(theta)
    m = contains(cset, theta, tol)
    if not m.in_set:
        raise NotOnSet(f"point is off the {cset.name} set (residual {m.residual:.3e})")
    return cset.span(theta, tol)


def retract(cset: ConstraintSet, theta, step) -> np.ndarray:
    theta = cset._check_dim(theta)
    return cset.retract(theta, np.asarray(step, dtype=float).ravel())


def sample_cone(cset: ConstraintSet, theta, m: int, rng, tol: Tolerances = DEFAULT_TOL):
    theta = cset._check_dim(theta)
    return cset.sample_cone(theta, m, rng, tol)


WITNESS_MAX_LOG10 = 6.0


def tangent_vector_witness(
    cset: ConstraintSet,
    theta,
    u,
    n_steps: int = 30,
    schedule: str = "geometric",
    tol: Tolerances = DEFAULT_TOL,
):
    """Sequence ``(theta_i, lambda_i)`` with ``theta_i`` on the set and
    ``lambda_i * (theta_i - theta) -> u``.

    ``schedule="linear"`` uses ``lambda_i = i``; the default ``"geometric"`` spaces
    ``lambda_i`` log-uniformly up to ``1e6``. Curvature error falls like
    ``1 / lambda`` while rounding in ``theta_i - theta`` grows like
    ``lambda * eps``; ``1e6`` keeps both far below ``1e-4 * ||u||``.
    """
    theta = cset._check_dim(theta)
    u = np.asarray(u, dtype=float).ravel()
    if isinstance(cset, (EqualityManifold, TransformImage)):
        raise NoRetraction(f"{cset.name} has no retraction")
    span = tangent_span(cset, theta, tol)
    if not matlin.colspace_included(u[:, None], span.v, tol):
        raise NotInCone("u is not in the span of the tangent cone")
    if schedule == "linear":
        lambdas = np.arange(1, n_steps + 1, dtype=float)
    elif schedule == "geometric":
        lambdas = 10.0 ** (WITNESS_MAX_LOG10 * np.arange(1, n_steps + 1) / n_steps)
    else:
        raise ValueError(f"unknown schedule {schedule!r}")
    return [(cset.retract(theta, u / lam), float(lam)) for lam in lambdas]
