"""Direct problem: operator coefficients to m-function, ``a(z)`` and singularities."""

from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ClassificationAmbiguous, DegreeMismatch, PoleHit
from .jacobi import EventuallyPeriodicOperator
from .periodic import EDGE_TOL, BandSet, Sheet, SurfacePoint, periodic_m_pair
from .report import Check, Report
from .roots import aberth, cluster_roots, polish_multiple_root
from .singularities import SingularityConfiguration

POLE_TOL = 1e-13
FIT_TOL = 1e-8
CLUSTER_TOL = 1e-4
REAL_SNAP = 1e-9


def m_pair(op: EventuallyPeriodicOperator, z, sheet: int):
    """m-function as a projective pair ``(num, den)`` on one sheet, vectorized.

    The head is wrapped around the periodic m-function by the stripping map
    ``m -> 1 / (b_j - z - a_j**2 m)`` written projectively, so intermediate
    poles cause no division.
    """
    z = np.asarray(z, dtype=complex)
    num, den = periodic_m_pair(op.tail, z, sheet, op.bands)
    for j in range(op.s, 0, -1):
        aj, bj = op.head_a[j - 1], op.head_b[j - 1]
        num, den = den, (bj - z) * den - aj * aj * num
        scale = np.maximum(np.abs(num), np.abs(den))
        scale = np.where(scale == 0, 1.0, scale)
        num, den = num / scale, den / scale
    return num, den


def m_function(op: EventuallyPeriodicOperator, pt: SurfacePoint) -> complex:
    """Value of the m-function at a point of the two-sheeted surface.

    Raises
    ------
    PoleHit
        If the denominator is below ``1e-13`` relative to the numerator.
    """
    num, den = m_pair(op, pt.z, pt.sheet)
    num, den = complex(num), complex(den)
    if abs(den) < POLE_TOL * max(abs(num), abs(den)):
        raise PoleHit(f"m has a pole at {pt.z} on the {pt.sheet.name.lower()} sheet")
    return num / den


def _a_samples(op: EventuallyPeriodicOperator, z: np.ndarray) -> np.ndarray:
    """``2 pi sqrt(r(z)) / (m_+(z) - m_-(z))`` evaluated projectively."""
    n1, d1 = m_pair(op, z, Sheet.PLUS)
    n2, d2 = m_pair(op, z, Sheet.MINUS)
    return 2 * np.pi * op.bands.sqrt_r(z) * d1 * d2 / (n1 * d2 - n2 * d1)


def _sample_circle(bands: BandSet, n: int, offset: float = 0.5, radius_factor: float = 1.0):
    c = bands.midpoint
    rho = 2.0 * bands.scale * radius_factor
    theta = 2 * np.pi * (np.arange(n) + offset) / n
    z = c + rho * np.exp(1j * theta)
    return z[np.abs(z.imag) > 1e-3]


def _fit(op: EventuallyPeriodicOperator, degree: int, n_samples: int):
    """Least-squares fit of ``a`` in the scaled variable ``t = (z - c) / rho``."""
    bands = op.bands
    c = bands.midpoint
    rho = 2.0 * bands.scale
    z = _sample_circle(bands, n_samples)
    g = _a_samples(op, z)
    t = (z - c) / rho
    V = np.vander(t, degree + 1, increasing=True)
    coef_t, *_ = np.linalg.lstsq(V, g, rcond=None)
    return coef_t, c, rho


def _to_monomial(coef_t: np.ndarray, c: float, rho: float) -> np.ndarray:
    out = np.zeros(1, dtype=complex)
    basis = np.ones(1, dtype=complex)
    step = np.array([-c / rho, 1.0 / rho])
    for ck in coef_t:
        out = P.polyadd(out, ck * basis)
        basis = P.polymul(basis, step)
    return out


def recover_a_polynomial(op: EventuallyPeriodicOperator, tol: float = FIT_TOL) -> np.ndarray:
    """The polynomial ``a(z)`` with ``m_+ - m_- = 2 pi sqrt(r) / a``.

    Its degree is ``k + p - 1`` for an operator of class index ``k``.  The
    fit uses ``4 (k + p)`` points on a circle around the spectrum and is
    validated at held-out points on a smaller, rotated circle.

    Returns
    -------
    ndarray
        Real ascending coefficients.

    Raises
    ------
    DegreeMismatch
        If the held-out relative residual exceeds ``tol``.
    """
    k, p = op.class_index, op.p
    degree = k + p - 1
    coef_t, c, rho = _fit(op, degree, 4 * (k + p))
    zt = _sample_circle(op.bands, 4 * (k + p) + 4, offset=0.25, radius_factor=0.75)
    g = _a_samples(op, zt)
    fitted = P.polyval((zt - c) / rho, coef_t)
    resid = np.max(np.abs(g - fitted)) / max(np.max(np.abs(g)), 1e-300)
    if not resid < tol:
        raise DegreeMismatch(
            f"degree-{degree} fit leaves held-out residual {resid:.3g} (> {tol:g})")
    return _to_monomial(coef_t, c, rho).real


def fitted_degree(op: EventuallyPeriodicOperator, rel_tol: float = 1e-9) -> int:
    """Numerical degree of ``a`` from an over-parametrized fit.

    This does not use the class index, so it serves as an independent check
    of the degree law.
    """
    d_max = 2 * op.s + op.p + 1
    coef_t, _, _ = _fit(op, d_max, 4 * (d_max + 2))
    mag = np.abs(coef_t)
    big = np.nonzero(mag > rel_tol * mag.max())[0]
    return int(big[-1])


def canonical_weights(a_poly, bands: BandSet, points) -> np.ndarray:
    """``2 pi |sqrt(r(E)) / a'(E)|`` at simple zeros ``E`` of ``a``."""
    pts = np.asarray(points, dtype=float)
    da = P.polyval(pts, P.polyder(np.asarray(a_poly, dtype=float)))
    return 2 * np.pi * np.sqrt(np.abs(bands.r(pts))) / np.abs(da)


def _snap_zeros(pairs, bands: BandSet):
    """Real and edge snapping, then exact conjugate symmetry."""
    scale = max(1.0, bands.scale)
    out = []
    for z, mult in pairs:
        z = complex(z)
        if abs(z.imag) < REAL_SNAP * scale:
            z = complex(z.real, 0.0)
        if z.imag == 0:
            z = bands.snap(z)
        out.append((z, mult))
    upper = [(z, m) for z, m in out if z.imag > 0]
    real = [(z, m) for z, m in out if z.imag == 0]
    return real + upper + [(z.conjugate(), m) for z, m in upper]


def _zeros_of_a(a_poly, bands: BandSet):
    """Distinct zeros ``(z, multiplicity)`` with real and edge snapping."""
    a = np.trim_zeros(np.asarray(a_poly, dtype=float), "b")
    pairs = []
    for centre, mult, _ in cluster_roots(aberth(a), CLUSTER_TOL):
        pairs.append((polish_multiple_root(a, centre, mult) if mult > 1 else centre, mult))
    return _snap_zeros(pairs, bands)


def _root_groups(roots: np.ndarray, scale: float):
    """Groups of nearby roots with a disk ``(centre, radius)`` isolating each group.

    Every member lies within half the radius of its centre and every other
    root at least twice the radius away.
    """
    groups = [list(m) for _, _, m in cluster_roots(roots, 0.02 * scale)]
    while True:
        disks = []
        merge = None
        for i, g in enumerate(groups):
            c = complex(np.mean(g))
            spread = max(abs(z - c) for z in g)
            outside = [(abs(z - c), j) for j, h in enumerate(groups) if j != i for z in h]
            dist, nearest = min(outside) if outside else (np.inf, None)
            if 4 * spread >= dist:
                merge = (i, nearest)
                break
            rho = min(0.5 * dist, max(scale, 4 * spread))
            disks.append((c, max(rho, 1e-3 * scale), g))
        if merge is None:
            return disks
        i, j = merge
        groups[i] = groups[i] + groups[j]
        del groups[j]


def _refined_zeros(op: EventuallyPeriodicOperator, a_poly):
    """Zeros of ``a`` re-solved locally around each cluster of the fitted roots.

    Monomial coefficients of a fitted ``a`` locate tightly clustered zeros far
    from the sample circle poorly.  Since ``a`` is a polynomial, samples on a
    small circle around a cluster give its exact Taylor expansion there (by
    FFT), whose roots inside the circle are well conditioned.
    """
    bands = op.bands
    a = np.trim_zeros(np.asarray(a_poly, dtype=float), "b")
    deg = len(a) - 1
    if deg < 1:
        return []
    roots = aberth(a)
    n = max(32, 1 << (2 * deg + 1).bit_length())
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    k = np.arange(n)
    pairs = []
    for c, rho, members in _root_groups(roots, max(1.0, bands.scale)):
        g = _a_samples(op, c + rho * np.exp(1j * theta))
        local = (np.fft.fft(g) / n * np.exp(-1j * np.pi * k / n))[: deg + 1]
        found = []
        for w0, mult, _ in cluster_roots(aberth(local), CLUSTER_TOL / rho):
            if abs(w0) < 1:
                w = polish_multiple_root(local, w0, mult) if mult > 1 else w0
                found.append((c + rho * w, mult))
        if sum(m for _, m in found) != len(members):
            # fall back to the global polynomial for this group
            found = []
            for centre, mult, _ in cluster_roots(np.asarray(members), CLUSTER_TOL):
                found.append((polish_multiple_root(a, centre, mult) if mult > 1 else centre, mult))
        pairs.extend(found)
    return _snap_zeros(pairs, bands)


def _residue_ratios(op: EventuallyPeriodicOperator, x: float, others) -> tuple[float, float]:
    """Normalized pole strength of ``m`` on each sheet at a simple real zero ``x``.

    Approaching along ``x + i delta``, ``|m| / |m_+ - m_-|`` tends to 1 on the
    sheet carrying the pole and to 0 on the other.  The difference of the
    sheets is measured rather than taken from ``a'``, which loses accuracy
    when zeros nearly coincide.
    """
    bands = op.bands
    gap = min([abs(x - e) for e in bands.edges] + [abs(x - o) for o in others] + [np.inf])
    delta = min(1e-7 * max(1.0, bands.scale), 1e-2 * gap)
    z = x + 1j * delta
    vals = []
    for sheet in (Sheet.PLUS, Sheet.MINUS):
        num, den = m_pair(op, z, sheet)
        vals.append(complex(num) / complex(den) if den != 0 else complex(np.inf))
    diff = abs(vals[0] - vals[1])
    return abs(vals[0]) / diff, abs(vals[1]) / diff


def _classify(ratios: tuple[float, float]) -> str | None:
    qp, qm = ratios
    if abs(qp - 1) < 0.1 and qm < 0.1:
        return "eigenvalue"
    if abs(qm - 1) < 0.1 and qp < 0.1:
        return "resonance"
    return None


def find_singularities(op: EventuallyPeriodicOperator) -> SingularityConfiguration:
    """Eigenvalues and resonances of an eventually periodic operator.

    Zeros of ``a(z)`` are the singularities.  Complex, multiple and band-edge
    zeros are resonances; a simple real zero is an eigenvalue exactly when the
    plus-sheet m-function has the pole there.

    Raises
    ------
    ClassificationAmbiguous
        If neither sheet shows a clean pole at a simple real zero.
    """
    a = recover_a_polynomial(op)
    zeros = _refined_zeros(op, a)
    eig, res = [], []
    for z, mult in zeros:
        if z.imag != 0 or mult > 1 or op.bands.is_edge(z):
            res.append((z, mult))
            continue
        others = [w for w, _ in zeros if w != z]
        ratios = _residue_ratios(op, z.real, others)
        kind = _classify(ratios)
        if kind is None:
            raise ClassificationAmbiguous(z.real, ratios)
        if kind == "eigenvalue":
            eig.append(z.real)
        else:
            res.append((z, 1))
    return SingularityConfiguration(tuple(eig), tuple(res))


def verify_m_conditions(op: EventuallyPeriodicOperator, a_poly=None) -> Report:
    """Check the meromorphy conditions on the m-function of ``op``.

    Parameters
    ----------
    op : EventuallyPeriodicOperator
    a_poly : array_like, optional
        Use this polynomial instead of the recovered one (test hook for
        deliberately invalid inputs).

    Returns
    -------
    Report
        ``no_band_poles``: no pole of ``m`` on band interiors;
        ``m_minus_msharp_nonzero``: ``a`` has no zeros on band interiors and
        only simple zeros at edges; ``not_pole_on_both_sheets``: no real zero
        of ``a`` is a pole on both sheets.
    """
    bands = op.bands
    if a_poly is None:
        a = recover_a_polynomial(op)
        zeros = _refined_zeros(op, a)
    else:
        a = np.asarray(a_poly, dtype=float)
        zeros = _zeros_of_a(a, bands)

    band_poles = []
    for z, _ in zeros:
        if z.imag == 0 and bands.in_interior(z):
            num, den = m_pair(op, z.real + 1e-9j, Sheet.PLUS)
            if abs(complex(den)) < 1e-6 * abs(complex(num)):
                band_poles.append(z.real)

    interior = [z.real for z, _ in zeros if z.imag == 0 and bands.in_interior(z)]
    edge_multiple = [z.real for z, m in zeros if z.imag == 0 and bands.is_edge(z) and m > 1]

    both = []
    for z, mult in zeros:
        if z.imag != 0 or mult > 1 or bands.is_edge(z) or bands.in_interior(z):
            continue
        others = [w for w, _ in zeros if w != z]
        qp, qm = _residue_ratios(op, z.real, others)
        if qp > 0.5 and qm > 0.5:
            both.append(z.real)

    checks = (
        Check("no_band_poles", not band_poles,
              "m has poles on band interiors" if band_poles else "", tuple(band_poles)),
        Check("m_minus_msharp_nonzero", not interior and not edge_multiple,
              ("a vanishes on band interiors" if interior else "")
              + ("; a has a multiple zero at a band edge" if edge_multiple else ""),
              tuple(interior + edge_multiple)),
        Check("not_pole_on_both_sheets", not both,
              "zero is a pole on both sheets" if both else "", tuple(both)),
    )
    return Report(checks)


def _residue_mass(op: EventuallyPeriodicOperator, E: float, radius: float, n: int = 64) -> float:
    """``-Res m`` at ``E`` by the trapezoidal rule on a circle (exponentially accurate)."""
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    u = radius * np.exp(1j * theta)
    num, den = m_pair(op, E + u, Sheet.PLUS)
    return float(-np.mean(num / den * u).real)


def direct_weights(op: EventuallyPeriodicOperator, cfg: SingularityConfiguration | None = None,
                   a_poly=None) -> np.ndarray:
    """Eigenvalue masses of the spectral measure of ``op``.

    Each mass is the residue of ``-m`` at the eigenvalue, integrated on a
    circle reaching halfway to the nearest band or other eigenvalue.  This
    avoids differentiating the fitted ``a``, whose monomial coefficients can
    be large.  ``a_poly`` is accepted for API symmetry and only used when no
    configuration is given.
    """
    if cfg is None:
        cfg = find_singularities(op)
    eig = list(cfg.eigenvalues)
    edges = np.asarray(op.bands.edges)
    out = []
    for i, E in enumerate(eig):
        dist = [float(np.min(np.abs(edges - E)))]
        dist += [abs(E - F) for j, F in enumerate(eig) if j != i]
        out.append(_residue_mass(op, E, 0.5 * min(dist)))
    return np.array(out)


__all__ = [
    "m_pair", "m_function", "recover_a_polynomial", "fitted_degree",
    "find_singularities", "verify_m_conditions", "canonical_weights", "direct_weights",
    "EDGE_TOL",
]
