"""Jacobi coefficients from a spectral measure, and periodic-tail detection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath
import numpy as np

from .errors import LostPrecision, NoTailFound, QuadratureUnderresolved
from .inverse import SpectralMeasure
from .jacobi import EventuallyPeriodicOperator
from .periodic import PeriodicBlock
from .quadrature import FLOAT_PANEL_NODES, mp_band_moments, rule

STIELTJES_NODES = 512
STIELTJES_CAP = 4096
DOUBLING_TOL = 1e-9
TAIL_TOL = 1e-7
HANKEL_MAX = 12
MOMENT_DPS = 40


@dataclass(frozen=True)
class MomentSequence:
    """Normalized moments ``m_0 = 1, m_1, ...`` held at extended precision.

    Attributes
    ----------
    values : tuple of mpmath.mpf
    rel_err : float
        Relative accuracy of each moment.
    dps : int
        Working precision in decimal digits.
    """

    values: tuple
    rel_err: float = 1e-30
    dps: int = MOMENT_DPS

    def __len__(self) -> int:
        return len(self.values)

    def as_float(self) -> np.ndarray:
        return np.array([float(v) for v in self.values])

    @classmethod
    def from_floats(cls, values, rel_err: float = 1e-16) -> "MomentSequence":
        with mpmath.workdps(MOMENT_DPS):
            return cls(tuple(mpmath.mpf(v) for v in values), rel_err)


def moments(measure: SpectralMeasure, n_max: int, dps: int = MOMENT_DPS) -> MomentSequence:
    """``m_n = int x**n dmu`` for ``n = 0..n_max``.

    Band integrals use the graded panel rule in mpmath at ``dps`` digits;
    masses are added exactly.  The result is renormalized so ``m_0 = 1``.
    """
    spec = measure.density_spec
    with mpmath.workdps(dps):
        acc = [mpmath.mpf(0)] * (n_max + 1)
        for k in range(measure.bands.p):
            band = mp_band_moments(spec, k, n_max, dps=dps)
            acc = [u + v for u, v in zip(acc, band)]
        for e, w in measure.masses:
            em, wm = mpmath.mpf(e), mpmath.mpf(w)
            xn = wm
            for n in range(n_max + 1):
                acc[n] += xn
                xn *= em
        m0 = acc[0]
        vals = tuple(v / m0 for v in acc)
    return MomentSequence(vals, rel_err=10.0 ** (-(dps - 6)), dps=dps)


def _hankel(m, n: int, shift_last: bool = False):
    H = mpmath.matrix(n, n)
    for j in range(n):
        for k in range(n):
            idx = j + k + (1 if shift_last and k == n - 1 else 0)
            H[j, k] = m[idx]
    return H


def hankel_reconstruct(mom: MomentSequence, n_max: int | None = None,
                       precision_floor: float = 1e-3) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi coefficients from Hankel determinants of the moments.

    ``a_n = sqrt(h_{n+1} h_{n-1}) / h_n`` and ``b_1 + ... + b_n = g_n / h_n``,
    where ``h_n = det(m_{j+k})_{j,k<n}`` and ``g_n`` replaces the last column by
    ``(m_n, ..., m_{2n-1})``.  Determinants are evaluated at the moments'
    working precision.

    Raises
    ------
    LostPrecision
        If a determinant's propagated error bound exceeds ``precision_floor``
        times its value (in particular for singular Hankel matrices).
    """
    avail = (len(mom) - 1) // 2
    n_max = min(HANKEL_MAX, avail) if n_max is None else n_max
    if n_max > avail:
        raise ValueError(f"need moments up to order {2 * n_max}")
    m = mom.values
    a = np.empty(n_max)
    b = np.empty(n_max)
    with mpmath.workdps(mom.dps):
        h = [mpmath.mpf(1)]
        for n in range(1, n_max + 2):
            H = _hankel(m, n)
            det = mpmath.det(H)
            eig = mpmath.eigsy(H, eigvals_only=True)
            lam_min = min(eig)
            mmax = max(abs(v) for v in m[: 2 * n - 1])
            if lam_min <= 0:
                bound = mpmath.inf
            else:
                bound = n * mom.rel_err * mmax / lam_min * abs(det)
            if not det > 0 or bound > precision_floor * abs(det):
                raise LostPrecision(
                    f"Hankel determinant of order {n} not resolved "
                    f"(value {mpmath.nstr(det, 5)}, error bound {mpmath.nstr(bound, 5)})")
            h.append(det)
        prev = mpmath.mpf(0)
        for n in range(1, n_max + 1):
            a[n - 1] = float(mpmath.sqrt(h[n + 1] * h[n - 1]) / h[n])
            g = mpmath.det(_hankel(m, n, shift_last=True))
            partial = g / h[n]
            b[n - 1] = float(partial - prev)
            prev = partial
    return a, b


def _lanczos(x: np.ndarray, w: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Recurrence coefficients of the discrete measure ``sum w_i delta_{x_i}``."""
    q = np.sqrt(w / w.sum())
    Q = np.zeros((n + 1, len(x)))
    Q[0] = q
    a = np.empty(n)
    b = np.empty(n)
    beta_prev = 0.0
    for j in range(n):
        v = x * Q[j]
        b[j] = Q[j] @ v
        v -= b[j] * Q[j]
        if j:
            v -= beta_prev * Q[j - 1]
        # two passes of full reorthogonalization
        for _ in range(2):
            v -= Q[: j + 1].T @ (Q[: j + 1] @ v)
        beta = np.linalg.norm(v)
        a[j] = beta
        Q[j + 1] = v / beta
        beta_prev = beta
    return a, b


def discretize(measure: SpectralMeasure, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the discretized measure (masses appended)."""
    x, w = rule(measure.density_spec, max(1, nodes // FLOAT_PANEL_NODES))
    if measure.masses:
        x = np.concatenate([x, measure.mass_points])
        w = np.concatenate([w, measure.weights])
    return x, w


def stieltjes_reconstruct(measure: SpectralMeasure, n_max: int,
                          nodes: int = STIELTJES_NODES, cap: int = STIELTJES_CAP,
                          tol: float = DOUBLING_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi coefficients by orthogonalization against a discretized measure.

    The node count is doubled until successive outputs agree to ``tol``.

    Raises
    ------
    QuadratureUnderresolved
        If agreement is not reached by ``cap`` nodes per band.
    """
    if n_max < 1:
        raise ValueError("n_max must be positive")
    prev = _lanczos(*discretize(measure, nodes), n_max)
    n = nodes
    while 2 * n <= cap:
        n *= 2
        cur = _lanczos(*discretize(measure, n), n_max)
        diff = max(np.max(np.abs(cur[0] - prev[0])), np.max(np.abs(cur[1] - prev[1])))
        if diff < tol:
            return cur
        prev = cur
    raise QuadratureUnderresolved(
        f"doubling to {n} nodes per band still changes coefficients by {diff:.3g}")


@dataclass(frozen=True)
class TailInfo:
    """Result of tail detection.

    Attributes
    ----------
    s : int
        Head length: the coefficients repeat with period ``p`` from row ``s + 1``.
    tail : PeriodicBlock
        Rows ``s + 1 .. s + p``.
    k : int
        Class index.
    ambiguous : bool
        The ``a_s`` versus ``a_{s+p}`` comparison sits within a factor 100 of the
        tolerance, so ``k`` could be off by one.
    """

    s: int
    tail: PeriodicBlock
    k: int
    ambiguous: bool = False


def detect_tail(a, b, p: int, tol: float = TAIL_TOL) -> TailInfo:
    """Find the shortest head after which ``(a_n, b_n)`` is ``p``-periodic.

    A candidate head length ``s`` needs at least one full period of
    comparisons ``|a_{n+p} - a_n| + |b_{n+p} - b_n| < tol`` for ``n > s``.

    Raises
    ------
    NoTailFound
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) != len(b) or len(a) < 2 * p + 2:
        raise ValueError("need equal-length lists with at least 2p + 2 entries")
    L = len(a)
    dev = np.abs(a[p:] - a[:-p]) + np.abs(b[p:] - b[:-p])  # dev[i] compares rows i+1, i+1+p
    s = None
    for cand in range(0, L - 2 * p + 1):
        if np.all(dev[cand:] < tol):
            s = cand
            break
    if s is None:
        raise NoTailFound(f"no {p}-periodic tail within {L} coefficients at tolerance {tol:g}")
    tail = PeriodicBlock(tuple(a[s:s + p]), tuple(b[s:s + p]))
    if s == 0:
        return TailInfo(0, tail, 0, False)
    da = abs(a[s - 1] - a[s - 1 + p])
    k = 2 * s if da >= tol else 2 * s - 1
    ambiguous = bool(tol / 100 <= da < 100 * tol)
    return TailInfo(s, tail, k, ambiguous)


def default_n_max(measure: SpectralMeasure) -> int:
    """Enough coefficients to see the head plus three periods of tail."""
    p = measure.bands.p
    k_pred = len(measure.a_poly) - 1 - p + 1
    return max(HANKEL_MAX, math.ceil(k_pred / 2) + 3 * p + 2)


def reconstruct_operator(measure: SpectralMeasure, n_max: int | None = None,
                         nodes: int = STIELTJES_NODES, tol: float = TAIL_TOL):
    """Coefficients, tail information and the resulting operator.

    Returns
    -------
    (a, b, TailInfo, EventuallyPeriodicOperator)
    """
    n_max = default_n_max(measure) if n_max is None else n_max
    a, b = stieltjes_reconstruct(measure, n_max, nodes=nodes)
    info = detect_tail(a, b, measure.bands.p, tol)
    return a, b, info, operator_from_tail(a, b, info, tol)


def operator_from_tail(a, b, info: TailInfo, tol: float = TAIL_TOL) -> EventuallyPeriodicOperator:
    """Operator with head ``a_1..a_s, b_1..b_s`` and the detected tail.

    Head entries within ``tol`` of the periodic background are replaced by the
    background value so that the class index is not inflated by noise.
    """
    ha, hb = list(a[: info.s]), list(b[: info.s])
    p = info.tail.p
    for n in range(1, info.s + 1):
        ao = info.tail.a[(n - info.s - 1) % p]
        bo = info.tail.b[(n - info.s - 1) % p]
        if abs(ha[n - 1] - ao) < tol:
            ha[n - 1] = ao
        if abs(hb[n - 1] - bo) < tol:
            hb[n - 1] = bo
    return EventuallyPeriodicOperator(tuple(ha), tuple(hb), info.tail)
