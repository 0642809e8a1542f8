"""Periodic Jacobi machinery: discriminant, bands, and the periodic m-function.

Conventions
-----------
The one-step transfer matrix is ``[[0, 1], [-a_j**2, b_j - z]]``; it is the
matrix of the Moebius map ``m -> 1 / (b_j - z - a_j**2 m)``.  The monodromy
``M = M_1 ... M_p`` therefore represents one full period of stripping, and the
discriminant is ``(-1)**p * trace(M) / prod(a)``, normalized so that its leading
coefficient is ``1 / prod(a)`` (positive at ``+inf``).

Points of the two-sheeted surface are ``SurfacePoint(z, sheet)``.  On the plus
sheet the m-function is the Herglotz function of the spectral measure; the
minus sheet carries the other root of the fixed-point quadratic.  For real
``x`` inside a band, values on either sheet are boundary values from the upper
half-plane.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ClosedGap, NonReal
from .roots import aberth, cluster_roots

EDGE_TOL = 1e-9


class Sheet(enum.IntEnum):
    PLUS = 1
    MINUS = -1

    def flip(self) -> "Sheet":
        return Sheet(-int(self))


@dataclass(frozen=True)
class SurfacePoint:
    """A point ``z`` on one sheet of the surface."""

    z: complex
    sheet: Sheet = Sheet.PLUS

    def __post_init__(self):
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "sheet", Sheet(self.sheet))

    def sharp(self) -> "SurfacePoint":
        """Image under the involution ``(z, +) <-> (conj z, -)``."""
        return SurfacePoint(self.z.conjugate(), self.sheet.flip())


@dataclass(frozen=True)
class PeriodicBlock:
    """One period ``(a_1..a_p, b_1..b_p)`` of a periodic Jacobi matrix."""

    a: tuple[float, ...]
    b: tuple[float, ...]

    def __post_init__(self):
        a = tuple(float(x) for x in self.a)
        b = tuple(float(x) for x in self.b)
        if len(a) == 0 or len(a) != len(b):
            raise ValueError("a and b must be non-empty and of equal length")
        if not all(np.isfinite(a + b)):
            raise ValueError("coefficients must be finite")
        if min(a) <= 0:
            raise ValueError("off-diagonal coefficients must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def p(self) -> int:
        return len(self.a)

    @classmethod
    def free(cls) -> "PeriodicBlock":
        return cls((1.0,), (0.0,))

    def rotate(self, shift: int = 1) -> "PeriodicBlock":
        """Block of the operator with the first ``shift`` rows stripped."""
        j = shift % self.p
        return PeriodicBlock(self.a[j:] + self.a[:j], self.b[j:] + self.b[:j])

    def monodromy(self, z) -> tuple[np.ndarray, ...]:
        """Entries ``(alpha, beta, gamma, delta)`` of ``M_1 ... M_p`` at ``z``."""
        z = np.asarray(z, dtype=complex)
        al = np.ones_like(z)
        be = np.zeros_like(z)
        ga = np.zeros_like(z)
        de = np.ones_like(z)
        for aj, bj in zip(self.a, self.b):
            t = bj - z
            # [[al, be], [ga, de]] @ [[0, 1], [-aj^2, t]]
            al, be = -aj * aj * be, al + t * be
            ga, de = -aj * aj * de, ga + t * de
        return al, be, ga, de

    def to_json(self) -> dict:
        return {"p": self.p, "a": list(self.a), "b": list(self.b)}

    @classmethod
    def from_json(cls, obj: dict) -> "PeriodicBlock":
        blk = cls(tuple(obj["a"]), tuple(obj["b"]))
        if "p" in obj and int(obj["p"]) != blk.p:
            raise ValueError("declared period does not match coefficient count")
        return blk


def discriminant(block: PeriodicBlock) -> np.ndarray:
    """Discriminant polynomial of a periodic block (ascending coefficients)."""
    one = np.array([1.0])
    zero = np.array([0.0])
    al, be, ga, de = one, zero, zero, one
    for aj, bj in zip(block.a, block.b):
        t = np.array([bj, -1.0])
        al, be = -aj * aj * be, P.polyadd(al, P.polymul(t, be))
        ga, de = -aj * aj * de, P.polyadd(ga, P.polymul(t, de))
    tr = P.polyadd(al, de)
    delta = (-1) ** block.p * tr / np.prod(block.a)
    return np.trim_zeros(np.asarray(delta, dtype=float), "b")


@dataclass(frozen=True)
class BandSet:
    """Union of ``p`` closed bands with all gaps open."""

    edges: tuple[float, ...]

    def __post_init__(self):
        e = tuple(float(x) for x in self.edges)
        if len(e) == 0 or len(e) % 2:
            raise ValueError("need an even, positive number of edges")
        if any(not np.isfinite(x) for x in e):
            raise ValueError("edges must be finite")
        if any(x >= y for x, y in zip(e, e[1:])):
            raise ClosedGap("edges must be strictly increasing (all gaps open)")
        object.__setattr__(self, "edges", e)

    @property
    def p(self) -> int:
        return len(self.edges) // 2

    @property
    def bands(self) -> list[tuple[float, float]]:
        e = self.edges
        return [(e[2 * j], e[2 * j + 1]) for j in range(self.p)]

    @property
    def gaps(self) -> list[tuple[float, float]]:
        e = self.edges
        return [(e[2 * j + 1], e[2 * j + 2]) for j in range(self.p - 1)]

    @property
    def lower(self) -> float:
        return self.edges[0]

    @property
    def upper(self) -> float:
        return self.edges[-1]

    @cached_property
    def r_poly(self) -> np.ndarray:
        return P.polyfromroots(self.edges).real

    def r(self, x):
        """``prod (x - alpha_j)(x - beta_j)``."""
        return P.polyval(x, self.r_poly)

    def sqrt_r(self, z) -> np.ndarray:
        """Branch of ``sqrt(r(z))`` analytic off the bands, positive right of them.

        Real arguments inside a band return the boundary value from the upper
        half-plane, ``i * sqrt(|r(x)|) * sg(x)``.
        """
        z = np.asarray(z, dtype=complex)
        z = np.where(z.imag == 0, z.real + 0j, z)
        out = np.ones_like(z)
        for al, be in self.bands:
            out = out * np.sqrt(z - al) * np.sqrt(z - be)
        return out

    def band_index(self, x) -> np.ndarray:
        """0-based index of the band containing real ``x`` or -1."""
        x = np.asarray(x, dtype=float)
        idx = np.full(x.shape, -1, dtype=int)
        for k, (al, be) in enumerate(self.bands):
            idx = np.where((x >= al) & (x <= be), k, idx)
        return idx

    def sg(self, x) -> np.ndarray:
        """``(-1)**(p-k)`` on the interior of band ``k`` (1-based), 0 elsewhere."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for k, (al, be) in enumerate(self.bands, start=1):
            out = np.where((x > al) & (x < be), (-1.0) ** (self.p - k), out)
        return out

    def contains(self, x, tol: float = 0.0) -> np.ndarray:
        """Whether real ``x`` lies on a band, up to ``tol``."""
        x = np.asarray(x, dtype=float)
        hit = np.zeros(x.shape, dtype=bool)
        for al, be in self.bands:
            hit |= (x >= al - tol) & (x <= be + tol)
        return hit

    def in_interior(self, z, tol: float = EDGE_TOL) -> np.ndarray:
        """Whether ``z`` is (numerically) real and strictly inside a band."""
        z = np.asarray(z, dtype=complex)
        x = z.real
        ok = np.abs(z.imag) <= tol
        inside = np.zeros(x.shape, dtype=bool)
        for al, be in self.bands:
            inside |= (x > al + tol) & (x < be - tol)
        return ok & inside

    def nearest_edge(self, z) -> tuple[float, float]:
        """Closest edge to ``z`` and its distance."""
        e = np.asarray(self.edges)
        d = np.abs(complex(z) - e)
        i = int(np.argmin(d))
        return float(e[i]), float(d[i])

    def snap(self, z: complex, tol: float = EDGE_TOL) -> complex:
        """Return the edge if ``z`` is within ``tol`` of it, else ``z``."""
        edge, d = self.nearest_edge(z)
        return complex(edge) if d <= tol * max(1.0, abs(edge)) else complex(z)

    def is_edge(self, z, tol: float = EDGE_TOL) -> bool:
        edge, d = self.nearest_edge(z)
        return d <= tol * max(1.0, abs(edge))

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def scale(self) -> float:
        return max(abs(x) for x in self.edges)

    def to_json(self) -> dict:
        return {"edges": list(self.edges)}

    @classmethod
    def from_json(cls, obj: dict) -> "BandSet":
        return cls(tuple(obj["edges"]))


def band_set(delta, tol: float = 1e-12, max_iter: int = 200,
             multiple_tol: float = 1e-8) -> BandSet:
    """Bands ``Delta^{-1}([-2, 2])`` of a real discriminant.

    Raises
    ------
    ClosedGap
        If ``Delta**2 - 4`` has a (numerically) multiple root.
    NonReal
        If some root of ``Delta -+ 2`` is not real.
    """
    delta = np.trim_zeros(np.asarray(delta, dtype=float), "b")
    if len(delta) < 2:
        raise ValueError("discriminant must have degree at least one")
    p = len(delta) - 1
    lead = abs(delta[-1])
    scale = max(1.0, float(np.max(np.abs(aberth(delta)))))
    roots = []
    for shift in (2.0, -2.0):
        c = delta.copy()
        c[0] -= shift
        roots.append(aberth(c, tol=tol, max_iter=max_iter))
    allr = np.concatenate(roots)
    # double roots of Delta^2-4: clustered roots, or a vanishing derivative
    ddelta = P.polyder(delta)
    for centre, mult, _ in cluster_roots(allr, multiple_tol):
        if mult > 1:
            raise ClosedGap(f"bands touch near {centre.real:.12g}")
    for z in allr:
        if abs(P.polyval(z, ddelta)) < multiple_tol * lead * scale ** (p - 1):
            raise ClosedGap(f"bands touch near {z.real:.12g}")
    for z in allr:
        if abs(z.imag) > 1e-9 * scale:
            raise NonReal(f"root {z:.6g} of Delta -+ 2 is not real")
    edges = np.sort(allr.real)
    return BandSet(tuple(edges))


def bands_of(block: PeriodicBlock) -> BandSet:
    return band_set(discriminant(block))


def periodic_m_pair(block: PeriodicBlock, z, sheet: int, bands: BandSet | None = None):
    """Periodic m-function as a projective pair ``(num, den)``, vectorized.

    Both representations of the quadratic root are available; the one that
    avoids cancellation is used elementwise.
    """
    if bands is None:
        bands = bands_of(block)
    z = np.asarray(z, dtype=complex)
    al, be, ga, de = block.monodromy(z)
    A, B, C = ga, de - al, -be
    s = (-1) ** block.p * int(sheet) * bands.sqrt_r(z)
    u = -B + s
    v = -B - s
    use_u = np.abs(u) >= np.abs(v)
    num = np.where(use_u, u, 2 * C)
    den = np.where(use_u, 2 * A, v)
    return num, den


def periodic_m(block: PeriodicBlock, pt: SurfacePoint, bands: BandSet | None = None) -> complex:
    """Value of the periodic m-function at a point of the surface.

    At a band edge both sheets give the same (double) root.
    """
    if bands is None:
        bands = bands_of(block)
    num, den = periodic_m_pair(block, pt.z, pt.sheet, bands)
    num, den = complex(num), complex(den)
    if den == 0:
        return complex(np.inf)
    return num / den


def quadratic_coefficients(block: PeriodicBlock, z) -> tuple[np.ndarray, ...]:
    """``(A, B, C)`` with ``A m**2 + B m + C = 0`` for both sheet values."""
    al, be, ga, de = block.monodromy(z)
    return ga, de - al, -be


def random_block(rng: np.random.Generator, p: int, min_gap: float = 0.05,
                 max_tries: int = 1000) -> tuple[PeriodicBlock, BandSet]:
    """A random periodic block with all gaps at least ``min_gap`` wide."""
    for _ in range(max_tries):
        a = rng.uniform(0.5, 1.5, size=p)
        b = rng.uniform(-1.0, 1.0, size=p)
        blk = PeriodicBlock(tuple(a), tuple(b))
        try:
            bs = bands_of(blk)
        except (ClosedGap, NonReal):
            continue
        if all(hi - lo >= min_gap for lo, hi in bs.gaps):
            return blk, bs
    raise RuntimeError("could not draw a block with open gaps")
