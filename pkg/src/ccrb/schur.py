"""Positive semidefiniteness of 2x2 block matrices via generalized Schur complements.

A symmetric block matrix ``[[A, B], [B^T, C]]`` is PSD exactly when

* ``C >= 0``,
* ``A - B C^+ B^T >= 0``, and
* ``(I - C C^+) B^T = 0``.

:func:`schur_conditions` evaluates the three conditions separately and
:func:`block_psd_direct` is the eigenvalue oracle they are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import matlin
from .errors import DimMismatch
from .matlin import DEFAULT_TOL, Tolerances


@dataclass(frozen=True)
class BlockSym:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        a = matlin.as_sym(self.a, name="A")
        c = matlin.as_sym(self.c, name="C")
        b = matlin.as_mat(self.b, "B")
        if b.shape != (a.shape[0], c.shape[0]):
            raise DimMismatch(
                f"B must be {a.shape[0]}x{c.shape[0]}, got {b.shape[0]}x{b.shape[1]}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)

    @classmethod
    def split(cls, m, p: int) -> "BlockSym":
        """Cut a symmetric matrix after row/column ``p``."""
        m = matlin.as_sym(m)
        return cls(m[:p, :p], m[:p, p:], m[p:, p:])

    def assemble(self) -> np.ndarray:
        return np.block([[self.a, self.b], [self.b.T, self.c]])


class SchurConditions(NamedTuple):
    c_psd: bool
    complement_psd: bool
    range_ok: bool

    @property
    def all(self) -> bool:
        return self.c_psd and self.complement_psd and self.range_ok


def schur_complement(m: BlockSym, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``A - B C^+ B^T``, symmetrized."""
    return matlin.symmetrize(m.a - m.b @ matlin.pinv(m.c, tol) @ m.b.T)


def schur_conditions(m: BlockSym, tol: Tolerances = DEFAULT_TOL) -> SchurConditions:
    c_psd = matlin.is_psd(m.c, tol)
    complement_psd = matlin.is_psd(schur_complement(m, tol), tol)
    # projector residual form, not a rank comparison
    range_ok = matlin.colspace_included(m.b.T, m.c, tol)
    return SchurConditions(c_psd, complement_psd, range_ok)


def block_psd_direct(m: BlockSym, tol: Tolerances = DEFAULT_TOL) -> bool:
    return matlin.min_eig(m.assemble()) >= -tol.psd_tol
