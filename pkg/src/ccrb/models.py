"""Gaussian observation models, estimators and Monte Carlo checks of the bounds.

Randomness is keyed by ``(seed, chunk index)``: sample ``i`` always lands in
chunk ``i // chunk_rows(k)`` and that chunk draws from its own Philox stream.
Chunks may run on several threads; per-chunk results are combined in chunk
order (pairwise for moments), so every statistic is bit-identical for any
thread count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import singledispatch
from typing import Callable, NamedTuple, Union

import numpy as np

from . import matlin, tangent
from .crb import BoundResult
from .errors import DegenerateInput, DimMismatch, NoProjection, NotOnSet
from .tangent import (
    ConstraintSet,
    Euclidean,
    FixedRank,
    FixedRankPsd,
    Product,
    SmoothMap,
    SpecialOrthogonal,
    Sparse,
    Sphere,
    Stiefel,
    TangentSpan,
)

SLACK_SE = 6.0
MAX_CHUNK_ROWS = 4096
MAX_CHUNK_ENTRIES = 1 << 22


def chunk_rows(k: int) -> int:
    return max(1, min(MAX_CHUNK_ROWS, MAX_CHUNK_ENTRIES // max(1, k)))


def stream(seed: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), chunk])))


def map_chunks(fn: Callable, n: int, k: int, seed: int, threads: int = 1) -> list:
    """Run ``fn(rng, rows)`` for every chunk of ``n`` samples, in chunk order."""
    size = chunk_rows(k)
    jobs = [(c, min(size, n - c * size)) for c in range(math.ceil(n / size))]

    def run(job):
        c, rows = job
        return fn(stream(seed, c), rows)

    if threads <= 1 or len(jobs) == 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, jobs))


def _check_sigma(sigma: float) -> float:
    sigma = float(sigma)
    if not (np.isfinite(sigma) and sigma > 0):
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    return sigma


@dataclass(frozen=True)
class GaussianDenoiseModel:
    """``y = theta + w`` with ``w ~ N(0, sigma^2 I)`` and ``theta`` on ``set``."""

    set: ConstraintSet
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))

    @property
    def k(self) -> int:
        return self.set.k

    def mean(self, theta) -> np.ndarray:
        m = tangent.contains(self.set, theta)
        if not m.in_set:
            raise NotOnSet(f"theta is off the set (residual {m.residual:.3e})")
        return np.asarray(theta, dtype=float).ravel()


@dataclass(frozen=True)
class TransformedMeanModel:
    """``y = g(rho) + w`` with ``w ~ N(0, sigma^2 I)``."""

    g: SmoothMap
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "sigma", _check_sigma(self.sigma))

    def mean(self, rho) -> np.ndarray:
        return self.g(np.asarray(rho, dtype=float))


Model = Union[GaussianDenoiseModel, TransformedMeanModel]


def sample(model: Model, param, n: int, seed: int, threads: int = 1) -> np.ndarray:
    """``n`` observations as rows."""
    if n < 1:
        raise ValueError("n must be at least 1")
    mu = model.mean(param)
    k = mu.size
    parts = map_chunks(
        lambda rng, rows: mu + model.sigma * rng.standard_normal((rows, k)),
        n, k, seed, threads,
    )
    return np.concatenate(parts)


def fisher(model: Model, param) -> np.ndarray:
    if isinstance(model, GaussianDenoiseModel):
        model.mean(param)
        return np.eye(model.k) / model.sigma**2
    u = model.g.jacobian(np.asarray(param, dtype=float))
    return matlin.symmetrize(u.T @ u) / model.sigma**2


def score(model: Model, y, param) -> np.ndarray:
    """Gradient of the log-likelihood, one row per observation."""
    y = np.atleast_2d(y)
    resid = (y - model.mean(param)) / model.sigma**2
    if isinstance(model, GaussianDenoiseModel):
        return resid
    return resid @ model.g.jacobian(np.asarray(param, dtype=float))


# --- projections onto the sets -------------------------------------------------


def _rows(y) -> tuple[np.ndarray, bool]:
    y = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ValueError("observation must be finite")
    return np.atleast_2d(y), y.ndim == 1


def _unvec_rows(y, p, q):
    return y.reshape(-1, q, p).transpose(0, 2, 1)


def _vec_rows(x):
    return x.transpose(0, 2, 1).reshape(x.shape[0], -1)


@singledispatch
def _project(cset: ConstraintSet, y: np.ndarray) -> np.ndarray:
    raise NoProjection(f"no nearest-point rule for {cset.name}")


@_project.register
def _(cset: Euclidean, y):
    return y.copy()


@_project.register
def _(cset: Sphere, y):
    norms = np.linalg.norm(y, axis=1, keepdims=True)
    if np.any(norms < 1e-300):
        raise DegenerateInput("cannot normalize a zero observation")
    return y / norms


@_project.register
def _(cset: Sparse, y):
    # stable sort: among tied magnitudes the lowest index wins
    keep = np.argsort(-np.abs(y), axis=1, kind="stable")[:, : cset.s]
    out = np.zeros_like(y)
    np.put_along_axis(out, keep, np.take_along_axis(y, keep, axis=1), axis=1)
    return out


@_project.register
def _(cset: FixedRank, y):
    x = _unvec_rows(y, cset.p, cset.q)
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    r = cset.r
    return _vec_rows((u[:, :, :r] * s[:, None, :r]) @ vt[:, :r])


@_project.register
def _(cset: Stiefel, y):
    x = _unvec_rows(y, cset.p, cset.q)
    u, _, vt = np.linalg.svd(x, full_matrices=False)
    if isinstance(cset, SpecialOrthogonal):
        d = np.sign(np.linalg.det(u @ vt))
        d[d == 0] = 1.0
        u = u.copy()
        u[:, :, -1] *= d[:, None]
    return _vec_rows(u @ vt)


@_project.register
def _(cset: FixedRankPsd, y):
    x = _unvec_rows(y, cset.p, cset.p)
    w, q = np.linalg.eigh(0.5 * (x + x.transpose(0, 2, 1)))
    w, q = w[:, ::-1][:, : cset.r], q[:, :, ::-1][:, :, : cset.r]
    w = np.clip(w, 0.0, None)
    return _vec_rows((q * w[:, None, :]) @ q.transpose(0, 2, 1))


@_project.register
def _(cset: Product, y):
    out, start = [], 0
    for f in cset.factors:
        out.append(_project(f, y[:, start : start + f.k]))
        start += f.k
    return np.hstack(out)


def ml_project(cset: ConstraintSet, y) -> np.ndarray:
    """Nearest point of ``cset`` to ``y`` (the Gaussian ML estimate).

    Accepts one observation or a batch with one observation per row.
    """
    rows, single = _rows(y)
    if rows.shape[1] != cset.k:
        raise DimMismatch(f"observation length {rows.shape[1]} != {cset.k}")
    out = _project(cset, rows)
    return out[0] if single else out


# --- estimators ----------------------------------------------------------------


@dataclass(frozen=True)
class MlProject:
    set: ConstraintSet

    def __call__(self, y):
        return ml_project(self.set, y)


@dataclass(frozen=True)
class UnbiasedSphere:
    """``a * y / ||y||``; unbiased on the sphere for the calibrated ``a``."""

    a: float

    def __call__(self, y):
        rows, single = _rows(y)
        norms = np.linalg.norm(rows, axis=1, keepdims=True)
        if np.any(norms < 1e-300):
            raise DegenerateInput("cannot normalize a zero observation")
        out = self.a * rows / norms
        return out[0] if single else out


@dataclass(frozen=True)
class Linear:
    matrix: np.ndarray

    def __call__(self, y):
        rows, single = _rows(y)
        out = rows @ np.asarray(self.matrix, dtype=float).T
        return out[0] if single else out


@dataclass(frozen=True)
class Custom:
    """Wraps a function of a single observation."""

    fn: Callable[[np.ndarray], np.ndarray]

    def __call__(self, y):
        rows, single = _rows(y)
        out = np.array([np.asarray(self.fn(r), dtype=float) for r in rows])
        return out[0] if single else out


# --- Monte Carlo ---------------------------------------------------------------


@dataclass(frozen=True)
class McReport:
    n: int
    seed: int
    mean: np.ndarray
    bias: np.ndarray
    cov: np.ndarray
    mse: np.ndarray
    se_scale: float


class _Moments(NamedTuple):
    count: int
    mean: np.ndarray
    scatter: np.ndarray  # sum of centered outer products


def _moments(est: np.ndarray) -> _Moments:
    mean = est.mean(axis=0)
    c = est - mean
    return _Moments(est.shape[0], mean, c.T @ c)


def _merge(a: _Moments, b: _Moments) -> _Moments:
    n = a.count + b.count
    delta = b.mean - a.mean
    mean = a.mean + delta * (b.count / n)
    scatter = a.scatter + b.scatter + np.outer(delta, delta) * (a.count * b.count / n)
    return _Moments(n, mean, scatter)


def _tree_merge(parts: list) -> _Moments:
    # fixed pairwise order keeps the result independent of scheduling
    while len(parts) > 1:
        nxt = [_merge(parts[i], parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def _report(mom: _Moments, truth, seed: int) -> McReport:
    n = mom.count
    if n < 2:
        raise ValueError("need at least two samples")
    bias = mom.mean - np.asarray(truth, dtype=float)
    cov = matlin.symmetrize(mom.scatter / (n - 1))
    mse = cov + np.outer(bias, bias)
    return McReport(n, int(seed), mom.mean, bias, cov, mse, 1.0 / math.sqrt(n))


def summarize(est: np.ndarray, truth, seed: int = 0) -> McReport:
    """Sample statistics of estimates (one per row) around ``truth``.

    ``cov`` uses the ``1/(n-1)`` normalization and ``mse`` is defined as
    ``cov + bias bias^T``.
    """
    est = np.atleast_2d(np.asarray(est, dtype=float))
    return _report(_moments(est), truth, seed)


def mc_report(estimator, model: Model, param, n: int, seed: int, threads: int = 1) -> McReport:
    """Monte Carlo bias, covariance and MSE of ``estimator`` at ``param``."""
    if n < 2:
        raise ValueError("n must be at least 2")
    mu = model.mean(param)
    k = mu.size

    def job(rng, rows):
        est = estimator(mu + model.sigma * rng.standard_normal((rows, k)))
        return _moments(np.atleast_2d(est))

    mom = _tree_merge(map_chunks(job, n, k, seed, threads))
    return _report(mom, np.asarray(param, dtype=float).ravel(), seed)


@dataclass(frozen=True)
class SphereCalibration:
    a: float
    se: float
    n: int
    seed: int


def calibrate_sphere_a(k: int, sigma: float, n: int, seed: int, threads: int = 1) -> SphereCalibration:
    """Scale that makes ``a * y / ||y||`` unbiased for denoising on the unit sphere.

    The mean of ``y / ||y||`` is a multiple ``m`` of ``theta`` that does not
    depend on ``theta``; it is estimated at ``theta = e1`` from the first
    coordinate and ``a = 1 / m``. ``se`` comes from the delta method.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    sigma = _check_sigma(sigma)

    def job(rng, rows):
        y = sigma * rng.standard_normal((rows, k))
        y[:, 0] += 1.0
        return y[:, 0] / np.linalg.norm(y, axis=1)

    x = np.concatenate(map_chunks(job, n, k, seed, threads))
    m = float(x.mean())
    se_m = float(x.std(ddof=1)) / math.sqrt(n) if n > 1 else float("inf")
    return SphereCalibration(1.0 / m, se_m / m**2, n, int(seed))


@dataclass(frozen=True)
class BiasGradientEstimate:
    """Directional bias derivatives (k x d), one column per basis vector."""

    db_tangent: np.ndarray
    step: float
    se: np.ndarray

    def as_db(self, span: TangentSpan) -> np.ndarray:
        """A full k x k bias gradient that agrees with the estimate on the span."""
        return self.db_tangent @ matlin.pinv(span.v)


def mc_bias_gradient(
    estimator,
    model: GaussianDenoiseModel,
    theta,
    span: TangentSpan,
    step: float | None = None,
    n: int = 10_000,
    seed: int = 0,
    threads: int = 1,
) -> BiasGradientEstimate:
    """Central differences of the bias along each basis vector, kept on the set.

    Both sides of a difference reuse the same noise draws.
    """
    theta = model.mean(theta)
    step = 1e-2 * model.sigma if step is None else float(step)
    if step <= 0:
        raise ValueError("step must be positive")
    k, d = span.v.shape
    points = []
    for i in range(d):
        tp = tangent.retract(model.set, theta, step * span.v[:, i])
        tm = tangent.retract(model.set, theta, -step * span.v[:, i])
        points.append((tp, tm))

    def job(rng, rows):
        w = model.sigma * rng.standard_normal((rows, k))
        out = np.empty((rows, k, d))
        for i, (tp, tm) in enumerate(points):
            out[:, :, i] = ((estimator(tp + w) - tp) - (estimator(tm + w) - tm)) / (2 * step)
        return out

    diffs = np.concatenate(map_chunks(job, n, k, seed, threads))
    return BiasGradientEstimate(
        diffs.mean(axis=0), step, diffs.std(axis=0, ddof=1) / math.sqrt(n)
    )


@dataclass(frozen=True)
class SparseCornerResult:
    k: int
    sigma: float
    n: int
    empirical_mse: float
    se: float
    crb_trace: float
    asymptote: float


def sparse_corner_experiment(k: int, sigma: float, n: int, seed: int, threads: int = 1) -> SparseCornerResult:
    """MSE of the 1-sparse ML estimator at the origin versus the unbiased bound.

    The unbiased constrained bound there is ``sigma^2 k``; the ML error grows
    like ``2 sigma^2 log k``.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    sigma = _check_sigma(sigma)
    cset = Sparse(k, 1)

    def job(rng, rows):
        est = ml_project(cset, sigma * rng.standard_normal((rows, k)))
        return np.einsum("ij,ij->i", est, est)

    err = np.concatenate(map_chunks(job, n, k, seed, threads))
    se = float(err.std(ddof=1)) / math.sqrt(n) if n > 1 else float("inf")
    return SparseCornerResult(
        k, sigma, n, float(err.mean()), se, sigma**2 * k, 2 * sigma**2 * math.log(k)
    )


@dataclass(frozen=True)
class EmpiricalVerdict:
    holds: bool
    min_eig: float
    slack: float


def bound_vs_empirical(
    report: McReport, bound: BoundResult | np.ndarray, c: float = SLACK_SE
) -> EmpiricalVerdict:
    """Whether the sample covariance dominates the bound up to ``c`` standard errors."""
    b = bound.bound if isinstance(bound, BoundResult) else matlin.as_mat(bound)
    if b.shape != report.cov.shape:
        raise DimMismatch(f"bound {b.shape} vs covariance {report.cov.shape}")
    lam = matlin.min_eig(report.cov - b)
    slack = c * report.se_scale * float(np.linalg.norm(report.cov, 2))
    return EmpiricalVerdict(lam >= -slack, lam, slack)
