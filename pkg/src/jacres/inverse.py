"""Inverse problem: singularity configuration to spectral measure."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .direct import _zeros_of_a, canonical_weights
from .errors import InvalidConfiguration, QuadratureUnderresolved
from .periodic import EDGE_TOL, BandSet
from .quadrature import FLOAT_PANEL_NODES, DensitySpec, rule
from .report import Check, Report
from .singularities import SingularityConfiguration

DEFAULT_NODES = 256
NODE_CAP = 65536
MASS_TOL = 1e-13


@dataclass(frozen=True)
class SpectralMeasure:
    """``sqrt|r(x)| / |a(x)| dx`` on the bands plus point masses.

    Attributes
    ----------
    bands : BandSet
    a_poly : tuple of float
        Ascending coefficients of ``a``.
    masses : tuple of (float, float)
        ``(E_j, w_j)`` sorted by position.
    zeros : tuple of complex
        Zeros of ``a`` with multiplicity; edge zeros are exactly equal to the
        edge.  Recovered from ``a_poly`` when not supplied.
    """

    bands: BandSet
    a_poly: tuple[float, ...]
    masses: tuple[tuple[float, float], ...] = ()
    zeros: tuple[complex, ...] | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        a = tuple(float(c) + 0.0 for c in np.trim_zeros(np.asarray(self.a_poly, dtype=float), "b"))
        if not a:
            raise ValueError("a_poly must be non-zero")
        masses = tuple(sorted((float(e), float(w)) for e, w in self.masses))
        object.__setattr__(self, "a_poly", a)
        object.__setattr__(self, "masses", masses)
        if self.zeros is None:
            zs = []
            for z, m in _zeros_of_a(a, self.bands):
                zs.extend([z] * m)
            object.__setattr__(self, "zeros", tuple(zs))
        else:
            object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))

    @classmethod
    def from_zeros(cls, bands: BandSet, lead: float, zeros, masses=()) -> "SpectralMeasure":
        zeros = tuple(complex(z) for z in zeros)
        a = lead * P.polyfromroots(zeros).real if zeros else np.array([lead])
        return cls(bands, tuple(np.real(a)), tuple(masses), zeros)

    @property
    def lead(self) -> float:
        return self.a_poly[-1]

    @property
    def density_spec(self) -> DensitySpec:
        return DensitySpec(self.bands, abs(self.lead), self.zeros)

    @property
    def mass_points(self) -> tuple[float, ...]:
        return tuple(e for e, _ in self.masses)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _, w in self.masses)

    def a(self, z):
        return P.polyval(z, np.asarray(self.a_poly))

    def density(self, x):
        return ac_density(self, x)

    def configuration(self) -> SingularityConfiguration:
        """Mass points as eigenvalues, remaining zeros of ``a`` as resonances."""
        eig = list(self.mass_points)
        res = list(self.zeros)
        for e in eig:
            j = int(np.argmin([abs(z - e) for z in res]))
            res.pop(j)
        return SingularityConfiguration.from_lists(eig, res)

    def total_mass(self, nodes: int = DEFAULT_NODES) -> float:
        x, w = rule(self.density_spec, max(1, nodes // FLOAT_PANEL_NODES))
        return float(w.sum() + sum(self.weights))

    def to_json(self) -> dict:
        return {"bands": self.bands.to_json(), "a_poly": list(self.a_poly),
                "masses": [{"E": e, "w": w} for e, w in self.masses]}

    @classmethod
    def from_json(cls, obj: dict) -> "SpectralMeasure":
        bands = BandSet.from_json(obj["bands"])
        masses = tuple((m["E"], m["w"]) for m in obj.get("masses", []))
        return cls(bands, tuple(obj["a_poly"]), masses)


def _close(x: complex, y: complex, tol: float = 1e-12) -> bool:
    return abs(x - y) <= tol * max(1.0, abs(x), abs(y))


def validate_configuration(cfg: SingularityConfiguration, bands: BandSet,
                           edge_tol: float = EDGE_TOL) -> Report:
    """Check whether a configuration is realized by a finite-range perturbation.

    Checks
    ------
    interlacing
        For every band edge, walk the real singularities outward across the
        adjacent gap (or half-line); every even-numbered point must be a
        resonance.
    gap_parity
        Every closed gap holds an odd number of real singularities.
    eigenvalues
        Eigenvalues are real, simple and off the bands.
    resonances
        Resonances avoid band interiors, are closed under conjugation with
        matching multiplicities, and are simple at band edges.
    disjoint
        No point is both an eigenvalue and a resonance.
    """
    edges = bands.edges
    snap = lambda z: bands.snap(z, edge_tol)  # noqa: E731
    eig = [float(snap(complex(e)).real) for e in cfg.eigenvalues]
    res = [(snap(z) if abs(z.imag) == 0 else z, m) for z, m in cfg.resonances]

    # eigenvalues
    bad_eig = [e for e in eig if bands.contains(e, 0.0)]
    dup = sorted({e for e in eig if sum(_close(e, f) for f in eig) > 1})
    eig_msg = []
    if bad_eig:
        eig_msg.append("eigenvalue on the essential spectrum")
    if dup:
        eig_msg.append("repeated eigenvalue")
    c_eig = Check("eigenvalues", not eig_msg, "; ".join(eig_msg), tuple(bad_eig + dup))

    # resonances
    interior = [z for z, _ in res if z.imag == 0 and bands.in_interior(z, 0.0)]
    unpaired = []
    for z, m in res:
        if z.imag != 0:
            partner = [n for w, n in res if _close(w, z.conjugate(), 1e-9)]
            if sum(partner) != m:
                unpaired.append(z)
    edge_mult = [z for z, m in res if z.imag == 0 and bands.is_edge(z, 0.0) and m > 1]
    res_msg = []
    if interior:
        res_msg.append("resonance inside a band")
    if unpaired:
        res_msg.append("resonances not closed under conjugation")
    if edge_mult:
        res_msg.append("multiple resonance at a band edge")
    c_res = Check("resonances", not res_msg, "; ".join(res_msg),
                  tuple(interior + unpaired + edge_mult))

    # disjointness
    both = [e for e in eig if any(_close(complex(e), z) for z, _ in res)]
    c_dis = Check("disjoint", not both,
                  "point is both an eigenvalue and a resonance" if both else "", tuple(both))

    # real points with kinds, multiplicity expanded
    real_pts = [(e, "E") for e in eig]
    for z, m in res:
        if z.imag == 0:
            real_pts.extend([(z.real, "R")] * m)

    # gap parity
    odd_fail = []
    for lo, hi in bands.gaps:
        count = sum(1 for x, _ in real_pts if lo <= x <= hi)
        if count % 2 == 0:
            odd_fail.append((lo, hi))
    c_gap = Check("gap_parity", not odd_fail,
                  f"{len(odd_fail)} gap(s) with an even number of singularities" if odd_fail else "",
                  tuple(odd_fail))

    # interlacing
    viol = []
    for k, (al, be) in enumerate(bands.bands):
        right_end = edges[2 * k + 2] if k + 1 < bands.p else np.inf
        right = sorted([(x, t) for x, t in real_pts if be <= x < right_end],
                       key=lambda q: (q[0], q[1] == "E"))
        left_end = edges[2 * k - 1] if k > 0 else -np.inf
        left = sorted([(x, t) for x, t in real_pts if left_end < x <= al],
                      key=lambda q: (-q[0], q[1] == "E"))
        for seq in (right, left):
            for pos, (x, t) in enumerate(seq, start=1):
                if pos % 2 == 0 and t == "E":
                    viol.append(x)
    viol = sorted(set(viol))
    c_int = Check("interlacing", not viol,
                  "eigenvalue at an even position counted from a band edge" if viol else "",
                  tuple(viol))
    return Report((c_int, c_gap, c_eig, c_res, c_dis))


def _unnormalized_mass(spec: DensitySpec, nodes: int, tol: float = MASS_TOL) -> float:
    base = max(1, nodes // FLOAT_PANEL_NODES)
    prev = rule(spec, base)[1].sum()
    while base * FLOAT_PANEL_NODES <= NODE_CAP:
        base *= 2
        cur = rule(spec, base)[1].sum()
        if abs(cur - prev) <= tol * abs(cur):
            return float(cur)
        prev = cur
    raise QuadratureUnderresolved("band integral of the density does not converge")


def build_measure(cfg: SingularityConfiguration, bands: BandSet,
                  nodes: int = DEFAULT_NODES) -> SpectralMeasure:
    """The unique probability measure with the given eigenvalues and resonances.

    ``a(z) = A prod (z - z_j)`` over all singularities, the sign of ``A`` making
    ``a`` positive on the last band and ``|A|`` the total mass computed with
    ``A = 1``.  Eigenvalue masses are ``2 pi |sqrt(r(E)) / a'(E)|``.

    Raises
    ------
    InvalidConfiguration
        If ``validate_configuration`` fails.
    """
    rep = validate_configuration(cfg, bands)
    if not rep.ok:
        raise InvalidConfiguration(rep)
    zeros = [complex(e) for e in cfg.eigenvalues] + cfg.resonance_list()
    zeros = [bands.snap(z) if z.imag == 0 else z for z in zeros]
    al, be = bands.bands[-1]
    mid = 0.5 * (al + be)
    sign = 1.0 if np.real(np.prod([mid - z for z in zeros])) > 0 else -1.0

    monic = P.polyfromroots(zeros).real if zeros else np.array([1.0])
    spec = DensitySpec(bands, 1.0, tuple(zeros))
    ac = _unnormalized_mass(spec, nodes)
    w_unit = canonical_weights(monic, bands, cfg.eigenvalues)
    A = ac + float(np.sum(w_unit))
    masses = [(float(e), float(w / A)) for e, w in zip(cfg.eigenvalues, w_unit)]
    return SpectralMeasure.from_zeros(bands, sign * A, zeros, masses)


def ac_density(measure: SpectralMeasure, x):
    """Absolutely continuous density ``sqrt|r(x)| / |a(x)|`` on the bands.

    Off the bands the density is 0; at an edge it is 0 unless ``a`` vanishes
    there, in which case the (integrable) limit is ``inf``.
    """
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    bands = measure.bands
    out = np.zeros_like(x)
    inside = bands.in_interior(x.astype(complex), 0.0)
    if np.any(inside):
        xi = x[inside]
        val = np.sqrt(np.abs(bands.r(xi)))
        denom = np.full(xi.shape, abs(measure.lead))
        for z in measure.zeros:
            denom = denom * np.abs(xi - z)
        out[inside] = val / denom
    for e in bands.edges:
        at = x == e
        if np.any(at) and any(z == complex(e) for z in measure.zeros):
            out[at] = np.inf
    return float(out[0]) if scalar else out


def density_table(measure: SpectralMeasure, n: int = 201) -> np.ndarray:
    """``(x, f(x))`` rows on a uniform grid covering the bands."""
    lo, hi = measure.bands.lower, measure.bands.upper
    pad = 0.05 * (hi - lo)
    x = np.linspace(lo - pad, hi + pad, n)
    return np.column_stack([x, ac_density(measure, x)])


def random_configuration(bands: BandSet, rng: np.random.Generator, max_total: int = 6,
                         guard: float = 0.05, reach: float = 2.5,
                         allow_multiple: bool = True,
                         max_tries: int = 10000) -> SingularityConfiguration:
    """A random valid configuration with at most ``max_total`` singularities.

    All points stay ``guard`` away from the bands and from each other and
    within ``reach`` of the spectrum's convex hull.  Every gap must be wider
    than ``2 * guard``.
    """
    p = bands.p
    lo, hi = bands.lower, bands.upper
    if any(g_hi - g_lo <= 2 * guard for g_lo, g_hi in bands.gaps):
        raise ValueError("every gap must be wider than twice the guard")
    for _ in range(max_tries):
        pts: list[tuple[complex, int]] = []
        budget = int(rng.integers(p - 1, max_total + 1))
        for g_lo, g_hi in bands.gaps:
            n = 3 if (budget - len(pts) >= 3 + (p - 1) and rng.random() < 0.2) else 1
            for _ in range(n):
                pts.append((complex(rng.uniform(g_lo + guard, g_hi - guard)), 1))
        while sum(m for _, m in pts) < budget:
            left = budget - sum(m for _, m in pts)
            u = rng.random()
            if u < 0.4 and left >= 2:
                z = complex(rng.uniform(lo - reach, hi + reach), rng.uniform(guard, reach))
                m = 2 if (allow_multiple and left >= 4 and rng.random() < 0.15) else 1
                pts.append((z, m))
                pts.append((z.conjugate(), m))
            else:
                side = rng.random() < 0.5
                x = rng.uniform(hi + guard, hi + reach) if side else rng.uniform(lo - reach, lo - guard)
                m = 2 if (allow_multiple and left >= 2 and rng.random() < 0.15) else 1
                pts.append((complex(x), m))
        zs = [z for z, _ in pts]
        if any(abs(zs[i] - zs[j]) < guard for i in range(len(zs))
               for j in range(i + 1, len(zs))):
            continue
        eig, res = [], []
        for z, m in pts:
            if z.imag == 0 and m == 1 and rng.random() < 0.5:
                eig.append(z.real)
            else:
                res.append((z, m))
        cfg = SingularityConfiguration(tuple(eig), tuple(res))
        if validate_configuration(cfg, bands).ok:
            return cfg
    raise RuntimeError("could not draw a valid configuration")
