import numpy as np
import pytest

from ccrb import schur, verify
from ccrb.errors import DimMismatch
from ccrb.schur import BlockSym


def test_conditions_examples():
    i2 = np.eye(2)
    assert tuple(schur.schur_conditions(BlockSym(i2, 0 * i2, i2))) == (True, True, True)
    assert tuple(schur.schur_conditions(BlockSym(0 * i2, i2, i2))) == (True, False, True)
    m = BlockSym(np.eye(2), np.array([[0.0, 1.0], [0.0, 0.0]]), np.diag([1.0, 0.0]))
    assert not schur.schur_conditions(m).range_ok
    assert not schur.block_psd_direct(m)


def test_direct_examples():
    i2 = np.eye(2)
    assert schur.block_psd_direct(BlockSym(i2, 0 * i2, i2))
    assert not schur.block_psd_direct(BlockSym(np.diag([1.0, 0.0]), i2, i2))
    g = np.random.default_rng(0).standard_normal((6, 5))
    assert schur.block_psd_direct(BlockSym.split(g.T @ g, 2))


def test_complement_examples():
    i2 = np.eye(2)
    assert np.allclose(schur.schur_complement(BlockSym(i2, 0 * i2, i2)), i2)
    assert np.allclose(schur.schur_complement(BlockSym(i2, i2, i2)), 0)
    # singular-Fisher counterexample data as blocks: A = diag(1,0), B = I, C = ones
    m = BlockSym(np.diag([1.0, 0.0]), np.eye(2), np.ones((2, 2)))
    assert np.allclose(schur.schur_complement(m), np.diag([1.0, 0.0]) - np.ones((2, 2)) / 4)


def test_split_roundtrip_and_shapes():
    g = np.random.default_rng(1).standard_normal((5, 5))
    m = g + g.T
    assert np.array_equal(BlockSym.split(m, 3).assemble(), m)
    with pytest.raises(DimMismatch):
        BlockSym(np.eye(2), np.zeros((3, 2)), np.eye(2))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lemma_equivalence_sweep(seed):
    for r in verify.suite_schur(1000, seed):
        assert r.ok, (r.name, r.failures)
        assert r.total > 500
