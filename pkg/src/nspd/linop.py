"""Linear operators with adjoints and spectral-norm estimation.

Solvers consume operators only through :class:`LinearMap`, which bundles a
forward map, its adjoint, and a spectral-norm estimate.  Two concrete
constructions are provided (dense row-major matrices and sparse triplets)
plus identity and zero maps.  Operators are immutable after construction and
safe to share across threads; ``apply``/``adjoint_apply`` are reentrant.
"""

from __future__ import annotations

import warnings
from typing import NamedTuple

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError

__all__ = [
    "LinearMap",
    "NormEstimate",
    "estimate_norm",
    "load_triplets",
    "save_triplets",
    "save_dense_csv",
]


class NormEstimate(NamedTuple):
    value: float
    converged: bool
    iterations: int


class LinearMap:
    """A linear operator K: R^cols -> R^rows with an explicit adjoint.

    Parameters
    ----------
    rows, cols : int
        Output and input dimensions.
    forward : callable
        Maps a ``cols``-vector to a ``rows``-vector.
    adjoint : callable
        Maps a ``rows``-vector to a ``cols``-vector.
    norm_estimate : float, optional
        Upper estimate of the spectral norm.  If omitted it is computed
        lazily by the power method on first access of :attr:`norm`.
    norm_is_exact : bool
        True when ``norm_estimate`` is exact (identity, zero, user-supplied).
    kind : str
        Construction tag ("dense", "sparse", "identity", "zero", "custom");
        used for closed-form fast paths.
    """

    def __init__(self, rows, cols, forward, adjoint, *, norm_estimate=None,
                 norm_is_exact=False, kind="custom"):
        if rows <= 0 or cols <= 0:
            raise ValueError("operator dimensions must be positive")
        self.rows = int(rows)
        self.cols = int(cols)
        self._forward = forward
        self._adjoint = adjoint
        self._norm = None if norm_estimate is None else float(norm_estimate)
        self.norm_is_exact = bool(norm_is_exact)
        self.kind = kind

    @property
    def shape(self):
        return (self.rows, self.cols)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Return K x."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise DimensionMismatchError(
                f"apply expects a vector of length {self.cols}, got shape {x.shape}")
        return self._forward(x)

    def adjoint_apply(self, y: np.ndarray) -> np.ndarray:
        """Return K^T y."""
        y = np.asarray(y, dtype=float)
        if y.shape != (self.rows,):
            raise DimensionMismatchError(
                f"adjoint_apply expects a vector of length {self.rows}, got shape {y.shape}")
        return self._adjoint(y)

    @property
    def norm(self) -> float:
        """Spectral-norm estimate, computed on first access if needed."""
        if self._norm is None:
            self._norm = estimate_norm(self).value
        return self._norm

    # -- constructions -----------------------------------------------------

    @classmethod
    def from_dense(cls, A, norm_estimate=None, norm_is_exact=False) -> "LinearMap":
        A = np.array(A, dtype=float, order="C", copy=True)
        if A.ndim != 2:
            raise ValueError("from_dense expects a 2-d array")
        A.setflags(write=False)
        m = cls(A.shape[0], A.shape[1], lambda x: A @ x, lambda y: A.T @ y,
                norm_estimate=norm_estimate, norm_is_exact=norm_is_exact,
                kind="dense")
        m.matrix = A
        return m

    @classmethod
    def from_triplets(cls, rows, cols, i, j, values) -> "LinearMap":
        S = sp.coo_matrix((np.asarray(values, dtype=float),
                           (np.asarray(i), np.asarray(j))),
                          shape=(rows, cols)).tocsr()
        return cls.from_sparse(S)

    @classmethod
    def from_sparse(cls, S) -> "LinearMap":
        S = sp.csr_matrix(S, dtype=float)
        St = S.T.tocsr()
        m = cls(S.shape[0], S.shape[1], lambda x: S @ x, lambda y: St @ y,
                kind="sparse")
        m.matrix = S
        return m

    @classmethod
    def identity(cls, n) -> "LinearMap":
        return cls(n, n, lambda x: x.copy(), lambda y: y.copy(),
                   norm_estimate=1.0, norm_is_exact=True, kind="identity")

    @classmethod
    def zero(cls, rows, cols) -> "LinearMap":
        return cls(rows, cols, lambda x: np.zeros(rows), lambda y: np.zeros(cols),
                   norm_estimate=0.0, norm_is_exact=True, kind="zero")

    def to_dense(self) -> np.ndarray:
        """Materialize the operator column by column."""
        A = getattr(self, "matrix", None)
        if A is not None:
            return A.toarray() if sp.issparse(A) else np.array(A)
        cols = [self.apply(e) for e in np.eye(self.cols)]
        return np.stack(cols, axis=1)

    def scaled(self, alpha) -> "LinearMap":
        """Return alpha * K with a rescaled norm estimate."""
        a = float(alpha)
        norm = None if self._norm is None else abs(a) * self._norm
        m = LinearMap(self.rows, self.cols,
                      lambda x: a * self._forward(x),
                      lambda y: a * self._adjoint(y),
                      norm_estimate=norm, norm_is_exact=self.norm_is_exact,
                      kind=self.kind)
        A = getattr(self, "matrix", None)
        if A is not None:
            m.matrix = a * A
            if not sp.issparse(m.matrix):
                m.matrix.setflags(write=False)
        return m


def estimate_norm(op: LinearMap, tol: float = 1e-12, max_iters: int = 10_000,
                  seed: int = 0) -> NormEstimate:
    """Power-method estimate of the largest singular value of ``op``.

    Iterates v <- K^T K v / ||.|| and stops when the relative change of the
    Rayleigh quotient drops below ``tol``.  Deterministic under ``seed``; the
    start vector falls back to all-ones if the first iterate is annihilated.
    Non-convergence returns the last estimate and emits a warning rather
    than failing silently.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(op.cols)
    w = op.adjoint_apply(op.apply(v))
    if not np.linalg.norm(w) > 0:
        v = np.ones(op.cols)
        w = op.adjoint_apply(op.apply(v))
        if not np.linalg.norm(w) > 0:
            return NormEstimate(0.0, True, 0)
    lam = 0.0
    for it in range(1, max_iters + 1):
        v = w / np.linalg.norm(w)
        w = op.adjoint_apply(op.apply(v))
        lam_new = float(v @ w)  # Rayleigh quotient of K^T K
        if lam_new <= 0:
            return NormEstimate(0.0, True, it)
        if abs(lam_new - lam) <= tol * lam_new:
            return NormEstimate(float(np.sqrt(lam_new)), True, it)
        lam = lam_new
    warnings.warn(
        f"power method did not converge in {max_iters} iterations "
        f"(last estimate {np.sqrt(lam):.6e})", RuntimeWarning)
    return NormEstimate(float(np.sqrt(lam)), False, max_iters)


# -- text persistence ------------------------------------------------------

def save_triplets(path, op: LinearMap) -> None:
    """Write ``op`` in the triplet text format: `n p nnz` then `i j value`."""
    A = op.to_dense()
    i, j = np.nonzero(A)
    with open(path, "w") as fh:
        fh.write(f"{op.rows} {op.cols} {len(i)}\n")
        for ii, jj in zip(i, j):
            fh.write(f"{ii} {jj} {float(A[ii, jj])!r}\n")


def load_triplets(path) -> LinearMap:
    """Read the triplet text format written by :func:`save_triplets`."""
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise ValueError("expected header line 'n p nnz'")
        rows, cols, nnz = (int(t) for t in header)
        i = np.empty(nnz, dtype=int)
        j = np.empty(nnz, dtype=int)
        v = np.empty(nnz)
        for k in range(nnz):
            ti, tj, tv = fh.readline().split()
            i[k], j[k], v[k] = int(ti), int(tj), float(tv)
    return LinearMap.from_triplets(rows, cols, i, j, v)


def save_dense_csv(path, op: LinearMap) -> None:
    """Write the materialized operator as plain CSV."""
    np.savetxt(path, op.to_dense(), delimiter=",")
