"""Proximal mappings for the objective terms used by the solvers.

Every function is wrapped in a :class:`ProxFunction` carrying its value,
its scaled proximal mapping ``prox(v, step)``, and optional constants
(strong-convexity modulus, Lipschitz constant of the function, gradient for
smooth terms, closed-form conjugate value).  Conjugate proximal mappings are
never hand-written: :func:`conjugate_prox` derives them from the primal prox
through the Moreau decomposition, which keeps a single source of truth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DimensionMismatchError

__all__ = [
    "ProxFunction",
    "conjugate_prox",
    "prox_quadratic_shift",
    "l1_norm",
    "l1_shifted",
    "elastic_net",
    "point_indicator",
    "simplex_indicator",
    "simplex_support",
    "squared_l2",
    "quadratic",
    "zero",
    "project_simplex",
]

FEAS_TOL = 1e-9  # indicator membership tolerance for value()


@dataclass(frozen=True)
class ProxFunction:
    """A convex function together with its proximal mapping.

    ``prox(v, step)`` returns ``argmin_u { value(u) + ||u - v||^2 / (2 step) }``.
    ``mu`` is a strong-convexity modulus (0 if merely convex), ``lipschitz``
    a Lipschitz constant of the function itself (used in bound constants),
    ``smooth_lipschitz`` a gradient Lipschitz constant for smooth terms.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    mu: float = 0.0
    lipschitz: Optional[float] = None
    smooth_lipschitz: Optional[float] = None
    gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None
    conjugate_value: Optional[Callable[[np.ndarray], float]] = None
    shift: Optional[np.ndarray] = None  # anchor vector of shifted functions
    name: str = ""

    def check_dim(self, v: np.ndarray) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(
                f"{self.name or 'function'} expects a vector of length {self.dim}, "
                f"got shape {v.shape}")
        return v


def conjugate_prox(h: ProxFunction, v: np.ndarray, rho: float) -> np.ndarray:
    """Proximal mapping of the conjugate: prox_{rho h*}(v).

    Moreau decomposition rearranged: prox_{rho h*}(v) = v - rho prox_{h/rho}(v/rho).
    Exact for every ProxFunction with a correct primal prox.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    v = np.asarray(v, dtype=float)
    return v - rho * h.prox(v / rho, 1.0 / rho)


def prox_quadratic_shift(h: ProxFunction, v: np.ndarray, step: float,
                         linear: np.ndarray) -> np.ndarray:
    """prox of h(.) + <linear, .> at v, i.e. h.prox(v - step*linear, step)."""
    if step <= 0:
        raise ValueError("step must be positive")
    return h.prox(v - step * np.asarray(linear, dtype=float), step)


def _soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


# -- concrete functions ----------------------------------------------------

def l1_norm(dim: int, lam: float) -> ProxFunction:
    """f(x) = lam * ||x||_1 with componentwise soft-thresholding prox."""
    if lam <= 0:
        raise ValueError("lam must be positive")

    def value(x):
        return lam * float(np.sum(np.abs(x)))

    def prox(v, step):
        return _soft(np.asarray(v, dtype=float), step * lam)

    def conj(s):
        # indicator of the l-inf ball of radius lam
        if np.max(np.abs(s)) <= lam * (1 + FEAS_TOL) + FEAS_TOL:
            return 0.0
        return np.inf

    return ProxFunction(dim, value, prox, conjugate_value=conj,
                        name=f"l1(lam={lam})")


def l1_shifted(b: np.ndarray) -> ProxFunction:
    """g(r) = ||r - b||_1; Lipschitz constant sqrt(n) in the Euclidean norm."""
    b = np.asarray(b, dtype=float)
    n = b.size

    def value(r):
        return float(np.sum(np.abs(r - b)))

    def prox(v, step):
        return b + _soft(np.asarray(v, dtype=float) - b, step)

    def conj(y):
        if np.max(np.abs(y)) <= 1 + FEAS_TOL:
            return float(b @ y)
        return np.inf

    return ProxFunction(n, value, prox, lipschitz=float(np.sqrt(n)),
                        conjugate_value=conj, shift=b, name="l1_shifted")


def elastic_net(dim: int, lam: float, mu: float) -> ProxFunction:
    """f(x) = lam ||x||_1 + (mu/2) ||x||^2, strongly convex with modulus mu."""
    if lam <= 0 or mu <= 0:
        raise ValueError("lam and mu must be positive")

    def value(x):
        return lam * float(np.sum(np.abs(x))) + 0.5 * mu * float(x @ x)

    def prox(v, step):
        return _soft(np.asarray(v, dtype=float), step * lam) / (1.0 + step * mu)

    def conj(s):
        t = np.maximum(np.abs(s) - lam, 0.0)
        return float(t @ t) / (2.0 * mu)

    return ProxFunction(dim, value, prox, mu=mu, conjugate_value=conj,
                        name=f"elastic(lam={lam},mu={mu})")


def point_indicator(b: np.ndarray) -> ProxFunction:
    """g = indicator of the single point b; g*(y) = <b, y>."""
    b = np.asarray(b, dtype=float)

    def value(r):
        return 0.0 if np.linalg.norm(r - b) <= FEAS_TOL * (1 + np.linalg.norm(b)) else np.inf

    def prox(v, step):
        return b.copy()

    def conj(y):
        return float(b @ y)

    return ProxFunction(b.size, value, prox, lipschitz=0.0,
                        conjugate_value=conj, shift=b, name="point_indicator")


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the standard simplex (sort-and-threshold)."""
    v = np.asarray(v, dtype=float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, v.size + 1)
    cand = u - css / idx
    rho = np.nonzero(cand > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _on_simplex(x, tol=FEAS_TOL):
    return abs(float(np.sum(x)) - 1.0) <= tol and float(np.min(x)) >= -tol


def simplex_indicator(dim: int) -> ProxFunction:
    """Indicator of the standard simplex; prox is the Euclidean projection."""

    def value(x):
        return 0.0 if _on_simplex(x) else np.inf

    def prox(v, step):
        return project_simplex(v)  # projection is step-independent

    def conj(s):
        return float(np.max(s))

    return ProxFunction(dim, value, prox, conjugate_value=conj,
                        name="simplex_indicator")


def simplex_support(dim: int) -> ProxFunction:
    """g(r) = max_i r_i, the support function of the standard simplex.

    Its conjugate is the simplex indicator, so conjugate_prox of this
    function is the simplex projection.
    """

    def value(r):
        return float(np.max(r))

    def prox(v, step):
        v = np.asarray(v, dtype=float)
        return v - step * project_simplex(v / step)

    def conj(y):
        return 0.0 if _on_simplex(y) else np.inf

    return ProxFunction(dim, value, prox, lipschitz=1.0,
                        conjugate_value=conj, name="simplex_support")


def squared_l2(dim: int, weight: float = 1.0) -> ProxFunction:
    """psi(x) = (weight/2) ||x||^2: smooth and strongly convex."""
    if weight <= 0:
        raise ValueError("weight must be positive")

    def value(x):
        return 0.5 * weight * float(x @ x)

    def prox(v, step):
        return np.asarray(v, dtype=float) / (1.0 + step * weight)

    def gradient(x):
        return weight * np.asarray(x, dtype=float)

    def conj(s):
        return float(s @ s) / (2.0 * weight)

    return ProxFunction(dim, value, prox, mu=weight, smooth_lipschitz=weight,
                        gradient=gradient, conjugate_value=conj,
                        name=f"squared_l2(w={weight})")


def quadratic(Q: np.ndarray, q: np.ndarray | None = None) -> ProxFunction:
    """psi(x) = 0.5 x^T Q x + <q, x> for symmetric positive semidefinite Q."""
    Q = np.asarray(Q, dtype=float)
    dim = Q.shape[0]
    q = np.zeros(dim) if q is None else np.asarray(q, dtype=float)
    eigs = np.linalg.eigvalsh(Q)
    if eigs[0] < -1e-10:
        raise ValueError("Q must be positive semidefinite")
    L = float(eigs[-1])
    mu = max(float(eigs[0]), 0.0)

    def value(x):
        return 0.5 * float(x @ (Q @ x)) + float(q @ x)

    def prox(v, step):
        A = np.eye(dim) + step * Q
        return np.linalg.solve(A, np.asarray(v, dtype=float) - step * q)

    def gradient(x):
        return Q @ np.asarray(x, dtype=float) + q

    return ProxFunction(dim, value, prox, mu=mu, smooth_lipschitz=L,
                        gradient=gradient, name="quadratic")


def zero(dim: int) -> ProxFunction:
    """The zero function; prox is the identity."""

    def value(x):
        return 0.0

    def prox(v, step):
        return np.asarray(v, dtype=float).copy()

    def gradient(x):
        return np.zeros(dim)

    def conj(s):
        return 0.0 if np.max(np.abs(s)) <= FEAS_TOL else np.inf

    return ProxFunction(dim, value, prox, lipschitz=0.0, smooth_lipschitz=0.0,
                        gradient=gradient, conjugate_value=conj, name="zero")
