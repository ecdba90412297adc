"""Banded LU solves, rightmost eigenvalues and trapezoid quadrature."""
from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import lapack

__all__ = ["BandedMatrix", "SingularMatrixError", "EigenSolverError",
           "banded_solve", "eigs_rightmost", "quad_trapezoid"]

DENSE_LIMIT = 2500


class SingularMatrixError(np.linalg.LinAlgError):
    """Zero pivot met during factorization; ``pivot`` is the 0-based index."""

    def __init__(self, pivot: int):
        super().__init__(f"matrix is singular to working precision at pivot {pivot}")
        self.pivot = pivot


class EigenSolverError(RuntimeError):
    def __init__(self, msg: str, residual: float = np.nan):
        super().__init__(f"{msg} (achieved residual {residual:.3e})")
        self.residual = residual


class BandedMatrix:
    """Square matrix in LAPACK band storage, LU-factored on first solve.

    Parameters
    ----------
    ab : ndarray, shape (kl + ku + 1, m)
        Band storage, ``ab[ku + i - j, j] = A[i, j]``.
    kl, ku : int
        Lower and upper bandwidths.
    """

    def __init__(self, ab: np.ndarray, kl: int, ku: int):
        ab = np.asarray(ab)
        m = ab.shape[1]
        if ab.shape[0] != kl + ku + 1:
            raise ValueError("band storage has wrong height")
        if m > 1 and (kl >= m or ku >= m):
            raise ValueError("bandwidths must be smaller than the dimension")
        if not np.all(np.isfinite(ab)):
            raise ValueError("non-finite entries")
        self.ab, self.kl, self.ku, self.m = ab, kl, ku, m
        self._lu = None

    @classmethod
    def from_dense(cls, A) -> "BandedMatrix":
        A = np.asarray(A)
        nz = np.nonzero(A)
        d = nz[1] - nz[0] if nz[0].size else np.array([0])
        kl, ku = max(0, -int(d.min())), max(0, int(d.max()))
        return cls.from_sparse(sp.csr_matrix(A), kl, ku)

    @classmethod
    def from_sparse(cls, A, kl: int | None = None, ku: int | None = None) -> "BandedMatrix":
        A = sp.coo_matrix(A)
        m = A.shape[0]
        if A.shape != (m, m):
            raise ValueError("matrix must be square")
        d = A.col - A.row
        if kl is None:
            kl = max(0, -int(d.min())) if d.size else 0
        if ku is None:
            ku = max(0, int(d.max())) if d.size else 0
        dtype = np.result_type(A.dtype, np.float64)
        ab = np.zeros((kl + ku + 1, m), dtype=dtype)
        np.add.at(ab, (ku - d, A.col), A.data)
        return cls(ab, kl, ku)

    def todense(self) -> np.ndarray:
        A = np.zeros((self.m, self.m), dtype=self.ab.dtype)
        for r in range(self.ab.shape[0]):
            k = self.ku - r
            j = np.arange(max(0, k), min(self.m, self.m + k))
            A[j - k, j] = self.ab[r, j]
        return A

    def norm_inf(self) -> float:
        return float(np.max(np.sum(np.abs(self.todense()), axis=1))) if self.m <= 4000 \
            else float(np.max(np.abs(self.ab).sum(axis=0)))

    def factor(self):
        if self._lu is None:
            complex_ = np.iscomplexobj(self.ab)
            gbtrf = lapack.zgbtrf if complex_ else lapack.dgbtrf
            ab2 = np.zeros((2 * self.kl + self.ku + 1, self.m), dtype=self.ab.dtype)
            ab2[self.kl:] = self.ab
            lu, piv, info = gbtrf(ab2, self.kl, self.ku)
            if info > 0:
                raise SingularMatrixError(info - 1)
            if info < 0:
                raise ValueError(f"gbtrf argument {-info} invalid")
            self._lu = (lu, piv, complex_)
        return self._lu

    def solve(self, b) -> np.ndarray:
        lu, piv, complex_ = self.factor()
        b = np.asarray(b)
        if np.iscomplexobj(b) and not complex_:
            return self.solve(b.real) + 1j * self.solve(b.imag)
        gbtrs = lapack.zgbtrs if complex_ else lapack.dgbtrs
        x, info = gbtrs(lu, self.kl, self.ku, b, piv)
        if info != 0:
            raise ValueError(f"gbtrs failed with info={info}")
        return x


def banded_solve(A: BandedMatrix, b) -> np.ndarray:
    """Solve ``A x = b`` by banded LU with partial pivoting."""
    return A.solve(b)


def _residual(A, lam, v) -> float:
    r = A @ v - lam * v
    return float(np.linalg.norm(r) / max(np.linalg.norm(v), 1e-300))


def eigs_rightmost(A, count: int, shift: complex = 0.1, seed: int = 0,
                   dense_limit: int = DENSE_LIMIT, vectors: bool = True,
                   tol_rel: float = 1e-8):
    """Eigenpairs of largest real part, sorted rightmost first.

    Small matrices use LAPACK's dense QR.  Larger sparse matrices use ARPACK
    shift-invert about `shift` (which should lie to the right of the wanted
    eigenvalues), followed by a second shift at the leftmost value found so
    that the cluster near the gap is resolved.

    Returns
    -------
    list of (complex, ndarray or None)
    """
    m = A.shape[0]
    if count < 1 or count > m:
        raise ValueError(f"count must be in [1, {m}], got {count}")
    if sp.issparse(A):
        Anorm = float(spla.norm(A, np.inf))
    else:
        A = np.asarray(A)
        Anorm = float(np.linalg.norm(A, np.inf))
    if m <= dense_limit or m - count < 4:
        Ad = A.toarray() if sp.issparse(A) else A
        if vectors:
            w, V = sla.eig(Ad)
        else:
            w, V = sla.eigvals(Ad), None
        order = np.argsort(-w.real, kind="stable")[:count]
        out = [(complex(w[i]), None if V is None else V[:, i]) for i in order]
    else:
        A = sp.csc_matrix(A)
        rng = np.random.default_rng(seed)
        v0 = rng.standard_normal(m)
        k = min(m - 2, max(2 * count, count + 10))
        pairs = {}
        shifts = [complex(shift)]
        for s in range(2):
            sig = shifts[s]
            try:
                w, V = spla.eigs(A.astype(complex), k=k, sigma=sig, v0=v0.astype(complex),
                                 which="LM", maxiter=10 * m)
            except spla.ArpackNoConvergence as exc:
                if exc.eigenvalues.size == 0:
                    raise EigenSolverError("shift-invert Arnoldi did not converge") from exc
                w, V = exc.eigenvalues, exc.eigenvectors
            for i in range(w.size):
                if _residual(A, w[i], V[:, i]) / np.linalg.norm(V[:, i]) > tol_rel * max(Anorm, 1.0):
                    continue
                key = (round(w[i].real, 10), round(w[i].imag, 10))
                pairs.setdefault(key, (complex(w[i]), V[:, i]))
            if s == 0:
                wr = sorted(pairs.values(), key=lambda p: -p[0].real)
                if len(wr) >= count:
                    # offset keeps the second shift off an eigenvalue
                    sig2 = wr[count - 1][0].real - 1e-3 * (1 + abs(sig)) + 0.0j
                    if abs(sig2 - sig) < 1e-12:
                        break
                    shifts.append(sig2)
                else:
                    break
        # merge near-duplicates from the two runs
        vals = sorted(pairs.values(), key=lambda p: -p[0].real)
        merged = []
        for lam, v in vals:
            if all(abs(lam - mu) > 1e-8 * max(1.0, abs(lam)) for mu, _ in merged):
                merged.append((lam, v))
        if len(merged) < count:
            raise EigenSolverError(f"only {len(merged)} of {count} eigenvalues found")
        out = [(lam, v / np.linalg.norm(v) if vectors else None) for lam, v in merged[:count]]
    if vectors:
        Aop = A
        for lam, v in out:
            res = _residual(Aop, lam, v)
            if res > tol_rel * max(Anorm, 1.0):
                raise EigenSolverError("eigenpair residual above tolerance", res)
    return out


def quad_trapezoid(t, f=None) -> float:
    """Composite trapezoid rule.

    Accepts either ``quad_trapezoid(t, f)`` or a sequence of ``(t_k, f_k)``.
    """
    if f is None:
        pairs = list(t)
        if len(pairs) < 2:
            raise ValueError("need at least 2 samples")
        t = np.array([p[0] for p in pairs], float)
        f = np.array([p[1] for p in pairs])
    t = np.asarray(t, float)
    f = np.asarray(f)
    if t.size < 2:
        raise ValueError("need at least 2 samples")
    if np.any(np.diff(t) <= 0):
        raise ValueError("abscissae must be strictly increasing")
    dt = np.diff(t)
    return float(np.sum(0.5 * dt * (f[1:] + f[:-1]))) if np.isrealobj(f) \
        else complex(np.sum(0.5 * dt * (f[1:] + f[:-1])))
