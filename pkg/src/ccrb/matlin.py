"""Dense matrix kernel with explicit tolerances.

Every rank decision goes through :func:`svd_rank`, so the pseudoinverse,
projectors, null spaces and column-space tests computed from one matrix
agree with each other. Matrices are plain ``numpy.ndarray`` objects of
dtype float64; :func:`as_mat` and :func:`as_sym` validate them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimMismatch, NonFinite, NotPsd, NotSymmetric


@dataclass(frozen=True)
class Tolerances:
    """Numerical thresholds used by the kernel.

    rank_rel_tol : singular values below ``rank_rel_tol * sigma_max`` count as zero.
    psd_tol : eigenvalues down to ``-psd_tol`` (scaled by the operand norm) count as
        nonnegative.
    sym_tol : allowed relative asymmetry when a matrix is declared symmetric.
    incl_tol : residual threshold for column-space inclusion.
    member_tol : constraint-violation threshold for set membership.
    """

    rank_rel_tol: float = 1e-10
    psd_tol: float = 1e-9
    sym_tol: float = 1e-10
    incl_tol: float = 1e-8
    member_tol: float = 1e-8

    def __post_init__(self):
        for name in ("rank_rel_tol", "psd_tol", "sym_tol", "incl_tol", "member_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def replace(self, **changes) -> "Tolerances":
        fields = {**self.__dict__, **changes}
        return Tolerances(**fields)


DEFAULT_TOL = Tolerances()
_TINY = float(np.finfo(float).tiny)


class SvdRank(NamedTuple):
    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    rank: int


def as_mat(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a finite 2-D float array; 1-D input becomes a column."""
    a = np.array(m, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    elif a.ndim == 0:
        a = a.reshape(1, 1)
    elif a.ndim != 2:
        raise DimMismatch(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has non-finite entries")
    return a


def as_sym(m, tol: Tolerances = DEFAULT_TOL, name: str = "matrix") -> np.ndarray:
    """Validate symmetry of a square matrix and return its symmetrized copy."""
    a = as_mat(m, name)
    if a.shape[0] != a.shape[1]:
        raise DimMismatch(f"{name} must be square, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > tol.sym_tol * scale:
        raise NotSymmetric(f"{name} is not symmetric")
    return 0.5 * (a + a.T)


def symmetrize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.T)


def svd_rank(m, tol: Tolerances = DEFAULT_TOL) -> SvdRank:
    """Full SVD plus the numerical rank at ``tol.rank_rel_tol``.

    Singular values below the smallest normal double also count as zero: their
    reciprocals overflow, so the pseudoinverse could not represent them.
    """
    a = as_mat(m)
    if a.size == 0:
        return SvdRank(np.eye(a.shape[0]), np.zeros(0), np.eye(a.shape[1]), 0)
    u, s, vt = np.linalg.svd(a, full_matrices=True)
    smax = s[0] if s.size else 0.0
    cutoff = max(tol.rank_rel_tol * smax, _TINY)
    rank = int(np.count_nonzero(s > cutoff))
    return SvdRank(u, s, vt, rank)


def rank(m, tol: Tolerances = DEFAULT_TOL) -> int:
    return svd_rank(m, tol).rank


def pinv(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with a relative singular-value cutoff.

    The zero matrix maps to the zero matrix of transposed shape.

    >>> pinv([[1.0, 1.0], [1.0, 1.0]])
    array([[0.25, 0.25],
           [0.25, 0.25]])
    """
    a = as_mat(m)
    dec = svd_rank(a, tol)
    r = dec.rank
    if r == 0:
        return np.zeros((a.shape[1], a.shape[0]))
    return (dec.vt[:r].T / dec.s[:r]) @ dec.u[:, :r].T


def min_eig(m) -> float:
    a = symmetrize(as_mat(m))
    if a.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh(a)[0])


def sym_sqrt(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Principal square root of a PSD matrix.

    Eigenvalues in ``[-psd_tol * max(1, ||M||), 0)`` are clamped to zero; anything
    more negative raises :class:`NotPsd`.
    """
    a = as_sym(m, tol)
    w, q = np.linalg.eigh(a)
    scale = max(1.0, float(np.max(np.abs(w)))) if w.size else 1.0
    if w.size and w[0] < -tol.psd_tol * scale:
        raise NotPsd(f"min eigenvalue {w[0]:.3e} below -psd_tol")
    w = np.clip(w, 0.0, None)
    return symmetrize((q * np.sqrt(w)) @ q.T)


def col_basis(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the column space (possibly zero columns)."""
    dec = svd_rank(m, tol)
    return dec.u[:, : dec.rank]


def col_projector(w, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthogonal projector ``W W^+`` onto ``col W``."""
    q = col_basis(w, tol)
    return symmetrize(q @ q.T)


def null_space(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the null space of ``m``."""
    a = as_mat(m)
    dec = svd_rank(a, tol)
    return dec.vt[dec.rank:].T.copy()


def _sym_eigs(a: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(symmetrize(a)) if a.size else np.zeros(1)


def loewner_geq(a, b, tol: Tolerances = DEFAULT_TOL) -> bool:
    """``A >= B`` in the Loewner order, with slack ``psd_tol*(1+||A||+||B||)``."""
    a = as_mat(a, "A")
    b = as_mat(b, "B")
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"cannot compare shapes {a.shape} and {b.shape}")
    # symmetric operands: the spectral norm is the largest |eigenvalue|
    la, lb = _sym_eigs(a), _sym_eigs(b)
    slack = tol.psd_tol * (1.0 + np.abs(la).max() + np.abs(lb).max())
    return bool(_sym_eigs(a - b)[0] >= -slack)


def is_psd(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = as_mat(m)
    if a.shape[0] != a.shape[1]:
        raise DimMismatch(f"PSD test needs a square matrix, got {a.shape}")
    lam = _sym_eigs(a)
    return bool(lam[0] >= -tol.psd_tol * (1.0 + np.abs(lam).max()))


def inclusion_residual(b, c, tol: Tolerances = DEFAULT_TOL) -> float:
    """Frobenius norm of ``(I - C C^+) B``."""
    b = as_mat(b, "B")
    c = as_mat(c, "C")
    if b.shape[0] != c.shape[0]:
        raise DimMismatch(f"row counts differ: B {b.shape}, C {c.shape}")
    q = col_basis(c, tol)
    return float(np.linalg.norm(b - q @ (q.T @ b)))


def colspace_included(b, c, tol: Tolerances = DEFAULT_TOL) -> bool:
    """Whether ``col B`` is contained in ``col C``."""
    b = as_mat(b, "B")
    res = inclusion_residual(b, c, tol)
    return res <= tol.incl_tol * (1.0 + float(np.linalg.norm(b)))


def is_projector(p, tol: Tolerances = DEFAULT_TOL, atol: float = 1e-9) -> bool:
    a = as_mat(p)
    if a.shape[0] != a.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    return bool(
        np.max(np.abs(a @ a - a), initial=0.0) <= atol * scale
        and np.max(np.abs(a - a.T), initial=0.0) <= atol * scale
    )
