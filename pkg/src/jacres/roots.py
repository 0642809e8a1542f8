"""Polynomial roots by simultaneous (Aberth-Ehrlich) iteration.

Polynomials are ascending coefficient arrays throughout the package.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P


def _initial_guesses(c: np.ndarray) -> np.ndarray:
    n = len(c) - 1
    # Fujiwara-type bound on the root moduli
    ratios = np.abs(c[:-1] / c[-1])
    k = np.arange(n, 0, -1)
    radius = 2.0 * np.max(ratios ** (1.0 / k))
    centre = -c[-2] / (n * c[-1])
    radius = max(radius - abs(centre), 1e-3) if np.isfinite(radius) else 1.0
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    return centre + radius * np.exp(1j * angles)


def aberth(coeffs, tol: float = 1e-12, max_iter: int = 200) -> np.ndarray:
    """All complex roots of a polynomial.

    Parameters
    ----------
    coeffs : array_like
        Ascending coefficients. Trailing (leading-order) zeros are dropped.
    tol : float
        Stop once every Newton-Aberth correction is below
        ``tol * max(1, |z|)``.
    max_iter : int
        Iteration cap.

    Returns
    -------
    ndarray of complex
        The roots, polished by a final Newton step on the original polynomial.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "b")
    if len(c) == 0:
        raise ValueError("zero polynomial has no well-defined roots")
    n = len(c) - 1
    if n == 0:
        return np.empty(0, dtype=complex)
    if n == 1:
        return np.array([-c[0] / c[1]])
    # leading zeros in ascending order are roots at the origin
    nz = 0
    while c[nz] == 0:
        nz += 1
    if nz:
        rest = aberth(c[nz:], tol, max_iter)
        return np.concatenate([np.zeros(nz, dtype=complex), rest])

    dc = P.polyder(c)
    z = _initial_guesses(c)
    for _ in range(max_iter):
        p = P.polyval(z, c)
        dp = P.polyval(z, dc)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = np.sum(1.0 / diff, axis=1)
            step = newton / (1.0 - newton * s)
        step = np.where(np.isfinite(step), step, 0.0)
        z = z - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(z))):
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        step = P.polyval(z, c) / P.polyval(z, dc)
    return z - np.where(np.isfinite(step), step, 0.0)


def cluster_roots(roots, radius: float) -> list[tuple[complex, int, np.ndarray]]:
    """Group numerically coincident roots.

    Roots closer than ``radius * max(1, |z|)`` are merged transitively.

    Returns
    -------
    list of (mean, multiplicity, members)
    """
    roots = np.asarray(roots, dtype=complex)
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(roots[i]), abs(roots[j]))
            if abs(roots[i] - roots[j]) < radius * scale:
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        pts = roots[members]
        out.append((complex(pts.mean()), len(members), pts))
    return out


def polish_multiple_root(coeffs, z0: complex, mult: int, steps: int = 8) -> complex:
    """Refine an ``mult``-fold root by Newton on the ``(mult-1)``-th derivative."""
    c = np.asarray(coeffs, dtype=complex)
    d = P.polyder(c, mult - 1) if mult > 1 else c
    dd = P.polyder(d)
    z = complex(z0)
    for _ in range(steps):
        fd = P.polyval(z, dd)
        if fd == 0:
            break
        step = P.polyval(z, d) / fd
        z -= step
        if abs(step) < 1e-16 * max(1.0, abs(z)):
            break
    return z
