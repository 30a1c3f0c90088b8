"""Thick-restart Lanczos and degeneracy clustering."""

import math

import numpy as np
import pytest
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from few2d import (
    Box,
    CagedOscillator,
    assemble,
    detect_degeneracies,
    lowest_eigs,
    make_grid,
    reduce_to_2d,
)


def _dirichlet_laplacian_1d(n, h=1.0):
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def test_discrete_laplacian_lowest_closed_form():
    H = _dirichlet_laplacian_1d(100)
    result = lowest_eigs(H, 1, tol=1e-10)
    assert result.eigenvalues[0] == pytest.approx(2.0 - 2.0 * math.cos(math.pi / 101.0),
                                                  rel=1e-12)
    assert result.converged


def test_diagonal_operator_smallest_entry():
    rng = np.random.default_rng(1)
    d = rng.uniform(1.0, 50.0, size=400)
    d[137] = 0.25
    result = lowest_eigs(sp.diags(d).tocsr(), 1, tol=1e-10)
    assert result.eigenvalues[0] == pytest.approx(0.25, rel=1e-12)


def test_degenerate_copies_found_against_arpack():
    # caged oscillator grid: levels 6, 10, 10, 14, 14, 14 with exact
    # discrete degeneracies from the x <-> y symmetry
    prob = reduce_to_2d(CagedOscillator(), 3, 3, box=Box(12.0, 12.0))
    op = assemble(prob, make_grid(prob.box, 80, 80))
    result = lowest_eigs(op, 6, tol=1e-7)
    ref = np.sort(eigsh(op.matrix, k=6, which="SA", v0=np.ones(op.dim),
                        tol=1e-12, return_eigenvectors=False))
    assert np.allclose(result.eigenvalues, ref, atol=1e-6)
    assert result.converged
    assert np.all(result.residuals <= 1e-7)


def test_eigenvector_orthonormality():
    prob = reduce_to_2d(CagedOscillator(), 3, 3, box=Box(12.0, 12.0))
    op = assemble(prob, make_grid(prob.box, 70, 70))
    result = lowest_eigs(op, 5, tol=1e-8)
    V = result.eigenvectors
    assert np.abs(V.T @ V - np.eye(V.shape[1])).max() < 1e-10


def test_fixed_seed_is_deterministic():
    prob = reduce_to_2d(CagedOscillator(), 3, 3, box=Box(12.0, 12.0))
    op = assemble(prob, make_grid(prob.box, 40, 40))
    a = lowest_eigs(op, 4, tol=1e-8, seed=3)
    b = lowest_eigs(op, 4, tol=1e-8, seed=3)
    assert a.iterations == b.iterations
    assert np.array_equal(a.eigenvalues, b.eigenvalues)


def test_refinement_monotonicity_toward_oracle():
    # the discrete levels approach the continuum limit from below here, so
    # refining must never move a converged level downward (beyond solver
    # tolerance) nor increase its distance to the oracle
    prob = reduce_to_2d(CagedOscillator(), 3, 3, box=Box(12.0, 12.0))
    oracle = np.array([6.0, 10.0, 10.0])
    tol = 1e-8
    prev_vals, prev_err = None, None
    for n in (40, 80, 160):
        op = assemble(prob, make_grid(prob.box, n, n))
        vals = lowest_eigs(op, 3, tol=tol).eigenvalues
        err = np.abs(vals - oracle)
        if prev_vals is not None:
            assert np.all(vals >= prev_vals - 10 * tol)
            assert np.all(err <= prev_err)
        prev_vals, prev_err = vals, err


def test_partial_results_on_iteration_budget():
    prob = reduce_to_2d(CagedOscillator(), 3, 3, box=Box(12.0, 12.0))
    op = assemble(prob, make_grid(prob.box, 80, 80))
    result = lowest_eigs(op, 6, tol=1e-12, max_iter=40)
    assert not result.converged
    assert len(result.eigenvalues) <= 6
    assert np.all(np.isfinite(result.residuals))


# --- degeneracy clustering ---------------------------------------------

def test_detect_degeneracies_constructed_input():
    report = detect_degeneracies([1.0, 1.0 + 1e-12, 2.0], tol_rel=1e-9)
    assert report.multiplicities() == [2, 1]
    assert report.clusters[0][0] == pytest.approx(1.0, abs=1e-12)
    assert report.total == 3


def test_detect_degeneracies_empty_and_sorted_guard():
    report = detect_degeneracies([], tol_rel=1e-9)
    assert report.clusters == () and report.total == 0
    with pytest.raises(ValueError):
        detect_degeneracies([2.0, 1.0])


def test_detect_degeneracies_relative_tolerance_scales():
    # gap 5e-7 at energy ~100 joins at tol 1e-8 relative (threshold 1e-6)
    report = detect_degeneracies([100.0, 100.0 + 5e-7, 200.0], tol_rel=1e-8)
    assert report.multiplicities() == [2, 1]


def test_cluster_representative_is_mean():
    report = detect_degeneracies([1.0, 1.0 + 1e-10], tol_rel=1e-6)
    assert report.clusters[0][0] == pytest.approx(1.0 + 5e-11, abs=1e-16)
