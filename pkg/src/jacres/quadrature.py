"""Band quadrature for densities ``sqrt|r(x)| / |a(x)|``.

On a band ``[alpha, beta]`` of length ``L`` the substitution
``x = alpha + L sin(theta/2)**2`` turns the edge factors
``(x - alpha)**e_l (beta - x)**e_r dx`` into
``L**(1 + e_l + e_r) sin(theta/2)**(2 e_l + 1) cos(theta/2)**(2 e_r + 1) dtheta``.
For ``e = +-1/2`` (an ordinary edge, or an edge that is also a simple zero of
``a``) the powers are 2 or 0, so the transformed integrand is analytic on
``[0, pi]``.  Its remaining singularities are the images of the zeros of ``a``
and of the other bands' edges; composite Gauss-Legendre panels are refined until
each panel is no longer than the distance from its centre to the nearest such
image, which bounds the per-panel error by roughly ``3.7**(-2q)``.

The same panel layout drives a double-precision rule (Stieltjes discretization,
normalization) and an mpmath rule (moments for Hankel determinants).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .periodic import BandSet

FLOAT_PANEL_NODES = 16
MP_PANEL_NODES = 32


@dataclass(frozen=True)
class DensitySpec:
    """Everything needed to evaluate ``sqrt|r| / |a|``: bands, ``|lead|``, zeros.

    Zeros lying exactly on a band edge are recognized by equality with the
    edge value (callers snap them beforehand).
    """

    bands: BandSet
    scale: float
    zeros: tuple[complex, ...]

    def band_pieces(self, k: int):
        """Edge exponents and remaining zeros for band ``k`` (0-based)."""
        al, be = self.bands.bands[k]
        rest = list(self.zeros)
        e_l = e_r = 0.5
        for z in list(rest):
            if z == complex(al) and e_l == 0.5:
                e_l = -0.5
                rest.remove(z)
            elif z == complex(be) and e_r == 0.5:
                e_r = -0.5
                rest.remove(z)
        others = [e for j, pair in enumerate(self.bands.bands) if j != k for e in pair]
        return al, be, e_l, e_r, rest, others


def _theta_images(w: complex, al: float, L: float) -> list[complex]:
    t = cmath.acos(1 - 2 * (complex(w) - al) / L)
    return [t, -t, 2 * np.pi - t]


def panels(spec: DensitySpec, k: int, base: int, kappa: float = 1.0,
           max_panels: int = 100000) -> np.ndarray:
    """Breakpoints in ``theta`` for band ``k``."""
    al, be, _, _, rest, others = spec.band_pieces(k)
    L = be - al
    images = []
    for w in list(rest) + [complex(e) for e in others]:
        images.extend(_theta_images(w, al, L))
    images = np.array(images, dtype=complex)

    def dist(c):
        if images.size == 0:
            return np.inf
        return float(np.min(np.abs(images - c)))

    work = list(zip(np.linspace(0, np.pi, base + 1)[:-1], np.linspace(0, np.pi, base + 1)[1:]))
    done = []
    while work:
        lo, hi = work.pop()
        c = 0.5 * (lo + hi)
        if hi - lo > kappa * dist(c) and hi - lo > 1e-15 and len(done) + len(work) < max_panels:
            work.append((lo, c))
            work.append((c, hi))
        else:
            done.append((lo, hi))
    done.sort()
    return np.array([d[0] for d in done] + [np.pi])


@lru_cache(maxsize=None)
def _leggauss(q: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(q)


def band_rule(spec: DensitySpec, k: int, base: int, q: int = FLOAT_PANEL_NODES):
    """Nodes and density-weighted weights for band ``k`` in double precision."""
    al, be, e_l, e_r, rest, others = spec.band_pieces(k)
    L = be - al
    brk = panels(spec, k, base)
    t, w = _leggauss(q)
    lo, hi = brk[:-1, None], brk[1:, None]
    theta = (0.5 * (hi - lo) * t + 0.5 * (hi + lo)).ravel()
    wt = (0.5 * (hi - lo) * w).ravel()
    s = np.sin(0.5 * theta)
    c = np.cos(0.5 * theta)
    x = al + L * s * s
    jac = L ** (1 + e_l + e_r) * s ** (2 * e_l + 1) * c ** (2 * e_r + 1)
    val = np.ones_like(x)
    for j in range(0, len(others), 2):
        val *= np.sqrt(np.abs((x - others[j]) * (x - others[j + 1])))
    for z in rest:
        val /= np.abs(x - z)
    return x, wt * jac * val / spec.scale


def rule(spec: DensitySpec, base: int, q: int = FLOAT_PANEL_NODES):
    """Concatenated nodes and weights over all bands."""
    xs, ws = [], []
    for k in range(spec.bands.p):
        x, w = band_rule(spec, k, base, q)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


@lru_cache(maxsize=None)
def _mp_leggauss(q: int, dps: int):
    """Gauss-Legendre nodes on [-1, 1] at ``dps`` digits (Newton from float guesses)."""
    with mpmath.workdps(dps + 10):
        t0, _ = np.polynomial.legendre.leggauss(q)
        nodes, weights = [], []
        for guess in t0:
            x = mpmath.mpf(guess)
            for _ in range(100):
                p0, p1 = mpmath.mpf(1), x
                for n in range(2, q + 1):
                    p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
                dp = q * (x * p1 - p0) / (x * x - 1)
                step = p1 / dp
                x -= step
                if abs(step) < mpmath.mpf(10) ** (-(dps + 8)):
                    break
            p0, p1 = mpmath.mpf(1), x
            for n in range(2, q + 1):
                p0, p1 = p1, ((2 * n - 1) * x * p1 - (n - 1) * p0) / n
            dp = q * (x * p1 - p0) / (x * x - 1)
            nodes.append(x)
            weights.append(2 / ((1 - x * x) * dp * dp))
    return tuple(nodes), tuple(weights)


def mp_band_moments(spec: DensitySpec, k: int, n_max: int, base: int = 4,
                    q: int = MP_PANEL_NODES, dps: int = 40) -> list:
    """``int x**n f(x) dx`` over band ``k`` for ``n = 0..n_max`` as mpf values."""
    al, be, e_l, e_r, rest, others = spec.band_pieces(k)
    brk = panels(spec, k, base)
    t, w = _mp_leggauss(q, dps)
    with mpmath.workdps(dps):
        alm, bem = mpmath.mpf(al), mpmath.mpf(be)
        L = bem - alm
        othm = [mpmath.mpf(e) for e in others]
        restm = [mpmath.mpc(z) for z in rest]
        pref = L ** (1 + mpmath.mpf(e_l) + mpmath.mpf(e_r)) / mpmath.mpf(spec.scale)
        pl, pr = int(2 * e_l + 1), int(2 * e_r + 1)
        acc = [mpmath.mpf(0)] * (n_max + 1)
        brk_m = [mpmath.mpf(b) for b in brk[:-1]] + [mpmath.pi]
        for lo, hi in zip(brk_m[:-1], brk_m[1:]):
            half = (hi - lo) / 2
            mid = (hi + lo) / 2
            for tj, wj in zip(t, w):
                th = half * tj + mid
                s = mpmath.sin(th / 2)
                c = mpmath.cos(th / 2)
                x = alm + L * s * s
                val = half * wj * pref * s ** pl * c ** pr
                for j in range(0, len(othm), 2):
                    val *= mpmath.sqrt(abs((x - othm[j]) * (x - othm[j + 1])))
                for z in restm:
                    val /= abs(x - z)
                xn = val
                for n in range(n_max + 1):
                    acc[n] += xn
                    xn *= x
        return acc
