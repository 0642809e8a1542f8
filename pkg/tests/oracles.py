"""Independent reference computations used by the tests.

None of these call into the library's numerical code; they use dense
matrices, closed forms, or mpmath.
"""

from __future__ import annotations

import mpmath
import numpy as np


def free_m(x: complex) -> complex:
    """Stieltjes transform of the semicircle measure on [-2, 2] (the root of modulus < 1)."""
    r = np.roots([1.0, complex(x), 1.0])
    return complex(min(r, key=abs))


def transfer_trace(a, b, z) -> complex:
    """Discriminant via the orthogonal-polynomial transfer matrix.

    Uses ``u_{n+1} = ((z - b_n) u_n - a_{n-1} u_{n-1}) / a_n`` with the
    periodic convention ``a_0 = a_p``.
    """
    p = len(a)
    T = np.eye(2, dtype=complex)
    for n in range(p):
        prev = a[n - 1]
        step = np.array([[(z - b[n]) / a[n], -prev / a[n]], [1.0, 0.0]], dtype=complex)
        T = step @ T
    return complex(np.trace(T))


def coefficients(op, n: int):
    a = np.array([op.a(j) for j in range(1, n + 1)])
    b = np.array([op.b(j) for j in range(1, n + 1)])
    return a, b


def dense(op, n: int) -> np.ndarray:
    a, b = coefficients(op, n)
    return np.diag(b) + np.diag(a[:-1], 1) + np.diag(a[:-1], -1)


def truncated_resolvent(op, z: complex, n: int = 400) -> complex:
    """``((J_n - z)^{-1})_{11}``; converges geometrically for ``z`` away from the spectrum."""
    J = dense(op, n).astype(complex)
    rhs = np.zeros(n, dtype=complex)
    rhs[0] = 1.0
    return complex(np.linalg.solve(J - z * np.eye(n), rhs)[0])


def matrix_moments(op, n_max: int) -> np.ndarray:
    """``<e_1, J^n e_1>`` for ``n = 0..n_max``."""
    size = n_max + 2
    J = dense(op, size)
    v = np.zeros(size)
    v[0] = 1.0
    out = []
    for _ in range(n_max + 1):
        out.append(v[0])
        v = J @ v
    return np.array(out)


def isolated_eigenpairs(op, n: int = 600, margin: float = 1e-3):
    """Eigenvalues of a large truncation lying outside the bands, with ``|phi_1|^2``.

    Truncation eigenvalues inside gaps converge to true ones only if the
    truncation boundary does not create spurious states; callers compare
    against known counts.
    """
    w, V = np.linalg.eigh(dense(op, n))
    edges = np.asarray(op.bands.edges)
    keep = []
    for x, vec in zip(w, V.T):
        in_band = any(lo - margin <= x <= hi + margin for lo, hi in zip(edges[::2], edges[1::2]))
        # edge-localized truncation states carry almost no weight at row 1
        if not in_band and abs(vec[0]) ** 2 > 1e-8 and abs(vec[-1]) < 1e-6:
            keep.append((float(x), float(vec[0] ** 2)))
    return keep


def jost_determinant(op, z: complex) -> complex:
    """``det(I + V G_0(z))`` for an eventually free operator.

    ``G_0`` is the free half-line Green function
    ``(z^{|j-k|} - z^{j+k}) / (z - 1/z)`` at energy ``z + 1/z`` and ``V`` the
    finite perturbation.
    """
    s = op.s + 1
    J = dense(op, s + 1)
    J0 = np.diag(np.ones(s), 1) + np.diag(np.ones(s), -1)
    V = (J - J0)[:s, :s]
    j = np.arange(1, s + 1)
    G = (z ** np.abs(j[:, None] - j[None, :]) - z ** (j[:, None] + j[None, :])) / (z - 1 / z)
    return complex(np.linalg.det(np.eye(s) + V @ G))


def mp_band_integral(f, edges, dps: int = 30) -> float:
    """``sum over bands of int f`` with tanh-sinh quadrature (handles edge singularities)."""
    with mpmath.workdps(dps):
        total = mpmath.mpf(0)
        for lo, hi in zip(edges[::2], edges[1::2]):
            total += mpmath.quad(f, [lo, hi])
        return float(total)
