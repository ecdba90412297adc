import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from frontlab.linalg import (BandedMatrix, EigenSolverError, SingularMatrixError, banded_solve,
                             eigs_rightmost, quad_trapezoid)


def _random_banded(rng, m, kl, ku, dominant=True):
    A = sp.diags([rng.standard_normal(m - abs(d)) for d in range(-kl, ku + 1)],
                 list(range(-kl, ku + 1)), format="csr")
    if dominant:
        A = A + sp.identity(m) * (kl + ku + 2)
    return A


@settings(max_examples=40, deadline=None)
@given(m=st.integers(3, 60), kl=st.integers(0, 2), ku=st.integers(0, 3), seed=st.integers(0, 999))
def test_banded_solve_matches_dense(m, kl, ku, seed):
    rng = np.random.default_rng(seed)
    A = _random_banded(rng, m, min(kl, m - 1), min(ku, m - 1))
    B = BandedMatrix.from_sparse(A)
    assert np.array_equal(B.todense(), A.toarray())
    b = rng.standard_normal(m)
    x = banded_solve(B, b)
    assert np.allclose(x, np.linalg.solve(A.toarray(), b), rtol=1e-10, atol=1e-12)


def test_banded_pivoting_and_complex_rhs():
    # a zero diagonal forces row exchanges
    A = np.array([[0.0, 2.0, 0.0], [1.0, 0.0, 3.0], [0.0, 4.0, 1.0]])
    B = BandedMatrix.from_dense(A)
    b = np.array([1.0 + 2j, -1.0, 0.5j])
    assert np.allclose(B.solve(b), np.linalg.solve(A, b))
    assert B.norm_inf() == pytest.approx(np.abs(A).sum(axis=1).max())


def test_singular_reports_pivot():
    A = np.diag([1.0, 2.0, 0.0, 4.0])
    with pytest.raises(SingularMatrixError) as ei:
        BandedMatrix.from_dense(A).factor()
    assert ei.value.pivot == 2


def test_band_storage_validation():
    with pytest.raises(ValueError):
        BandedMatrix(np.zeros((2, 4)), 1, 1)
    with pytest.raises(ValueError):
        BandedMatrix(np.full((3, 4), np.nan), 1, 1)
    with pytest.raises(ValueError):
        BandedMatrix.from_sparse(sp.csr_matrix(np.ones((2, 3))))


def test_eigs_planted_pair_sparse_path():
    """Tridiagonal matrix with a planted rightmost eigenvalue (Arnoldi path)."""
    m = 3000
    main = -2.0 - np.linspace(0, 1, m)
    A = sp.diags([np.ones(m - 1), main, np.ones(m - 1)], [-1, 0, 1], format="lil")
    A[0, 0], A[0, 1], A[1, 0] = 0.5, 0.0, 0.0
    A = A.tocsr()
    out = eigs_rightmost(A, 3, shift=1.0, seed=3)
    lam, v = out[0]
    assert lam == pytest.approx(0.5, abs=1e-10)
    assert abs(v[0]) == pytest.approx(1.0, abs=1e-8)
    dense = np.sort(np.linalg.eigvalsh(A.toarray()))[::-1][:3]
    assert np.allclose([o[0].real for o in out], dense, atol=1e-8)
    again = eigs_rightmost(A, 3, shift=1.0, seed=3)
    assert [o[0] for o in again] == [o[0] for o in out]


def test_eigs_dense_path_and_count_validation():
    A = np.diag([-3.0, 1.0, -1.0, 0.0])
    out = eigs_rightmost(A, 2)
    assert [o[0] for o in out] == [1.0, 0.0]
    assert eigs_rightmost(A, 2, vectors=False)[0][1] is None
    for bad in (0, 5):
        with pytest.raises(ValueError):
            eigs_rightmost(A, bad)
    assert issubclass(EigenSolverError, RuntimeError)


def test_trapezoid():
    t = np.linspace(0, 2, 11)
    assert quad_trapezoid(t, 3 * t + 1) == pytest.approx(8.0, rel=1e-14)
    assert quad_trapezoid(list(zip(t, 3 * t + 1))) == pytest.approx(8.0, rel=1e-14)
    f = np.exp(-t)
    err = abs(quad_trapezoid(t, f) - (1 - np.exp(-2)))
    assert err <= (2 / 12) * 0.2**2 * 1.0
    assert isinstance(quad_trapezoid(t, 1j * t), complex)
    with pytest.raises(ValueError):
        quad_trapezoid([0.0], [1.0])
    with pytest.raises(ValueError):
        quad_trapezoid([0.0, 0.0, 1.0], [1.0, 1.0, 1.0])
