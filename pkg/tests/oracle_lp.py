"""Brute-force optimum of small piecewise-linear fits by vertex enumeration.

The objective lam ||x||_1 + ||Kx - b||_1 is polyhedral: an optimum exists at
a point where p of the kink hyperplanes {x_i = 0} and {(Kx - b)_j = 0}
intersect.  Enumerating all p-subsets of the n + p hyperplanes and solving
the corresponding linear systems visits every such vertex; the best finite
candidate is the optimum.  Only usable for tiny p.
"""

from itertools import combinations

import numpy as np


def lad_optimum_by_vertex_enumeration(K, b, lam):
    K = np.asarray(K, dtype=float)
    b = np.asarray(b, dtype=float)
    n, p = K.shape
    rows = np.vstack([np.eye(p), K])
    rhs = np.concatenate([np.zeros(p), b])

    def objective(x):
        return lam * np.sum(np.abs(x)) + np.sum(np.abs(K @ x - b))

    best_val = objective(np.zeros(p))
    best_x = np.zeros(p)
    for idx in combinations(range(n + p), p):
        A = rows[list(idx)]
        try:
            x = np.linalg.solve(A, rhs[list(idx)])
        except np.linalg.LinAlgError:
            continue
        val = objective(x)
        if val < best_val:
            best_val, best_x = val, x
    return best_val, best_x
