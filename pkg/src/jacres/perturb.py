"""Point-mass surgery, Christoffel transforms, stability experiments and the
perturbation determinant of eventually free operators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .direct import find_singularities
from .errors import GuardViolated, InterlacingViolation, NoSuchMass, NotFreeTail, OnSpectrum
from .inverse import SpectralMeasure, build_measure, validate_configuration
from .jacobi import EventuallyPeriodicOperator
from .periodic import BandSet
from .reconstruct import STIELTJES_NODES, stieltjes_reconstruct
from .report import Check, Report
from .roots import aberth, cluster_roots
from .singularities import SingularityConfiguration

POINT_TOL = 1e-9
WEIGHT_RTOL = 1e-8


def _find_mass(measure: SpectralMeasure, E0: float) -> int | None:
    for i, (e, _) in enumerate(measure.masses):
        if abs(e - E0) <= POINT_TOL * max(1.0, abs(E0)):
            return i
    return None


def remove_point_mass(measure: SpectralMeasure, E0: float) -> SpectralMeasure:
    """``(mu - w_0 delta_{E_0}) / (1 - w_0)``.

    ``a`` keeps its zeros (``E_0`` becomes a resonance) and is scaled by
    ``1 - w_0``; the remaining masses are divided by ``1 - w_0``.

    Raises
    ------
    NoSuchMass
    """
    i = _find_mass(measure, E0)
    if i is None:
        raise NoSuchMass(f"{E0!r} is not a mass point")
    w0 = measure.masses[i][1]
    keep = [(e, w / (1 - w0)) for j, (e, w) in enumerate(measure.masses) if j != i]
    return SpectralMeasure.from_zeros(measure.bands, measure.lead * (1 - w0),
                                      measure.zeros, keep)


def canonical_mass(measure: SpectralMeasure, E0: float) -> float:
    """Mass that a point at the zero ``E_0`` of ``a`` must carry after addition.

    Adding mass ``w`` rescales the absolutely continuous part by ``1 - w``, so
    the canonical value solves ``w = c (1 - w)`` with
    ``c = 2 pi |sqrt(r(E_0)) / a'(E_0)|`` for the current ``a``.
    """
    bands = measure.bands
    da = P.polyval(E0, P.polyder(np.asarray(measure.a_poly)))
    c = 2 * np.pi * math.sqrt(abs(bands.r(E0))) / abs(da)
    return c / (1 + c)


@dataclass(frozen=True)
class AddMassResult:
    """Outcome of :func:`add_point_mass`.

    ``measure`` is set when accepted; ``report`` lists the evaluated conditions.
    """

    accepted: bool
    report: Report
    measure: SpectralMeasure | None = None


def add_point_mass(measure: SpectralMeasure, E0: float, w0: float) -> AddMassResult:
    """``(1 - w_0) mu + w_0 delta_{E_0}``, if that stays in the finite-range class.

    ``w_0`` is the mass of ``E_0`` in the resulting probability measure.  The
    addition is accepted when ``E_0`` is a resonance of ``mu``, ``w_0`` is the
    canonical mass, and turning that resonance into an eigenvalue keeps the
    configuration valid.  Otherwise a rejection report names the failing
    condition(s).

    Raises
    ------
    OnSpectrum
        If ``E_0`` lies on a band.
    """
    bands = measure.bands
    if bands.contains(E0):
        raise OnSpectrum(f"{E0!r} lies on the essential spectrum")
    if not 0 < w0 < 1:
        raise ValueError("w_0 must lie in (0, 1)")
    if _find_mass(measure, E0) is not None:
        rep = Report((Check("resonance_at_point", False, f"{E0!r} already carries mass", (E0,)),))
        return AddMassResult(False, rep)

    real_zeros = [z.real for z in measure.zeros if z.imag == 0]
    has_res = any(abs(x - E0) <= POINT_TOL * max(1.0, abs(E0)) for x in real_zeros)
    checks = [Check("resonance_at_point", has_res,
                    "" if has_res else f"no resonance at {E0!r}", () if has_res else (E0,))]
    if not has_res:
        return AddMassResult(False, Report(tuple(checks)))

    E0 = min(real_zeros, key=lambda x: abs(x - E0))
    wc = canonical_mass(measure, E0)
    canon = abs(w0 - wc) <= WEIGHT_RTOL * wc
    checks.append(Check("canonical_weight", canon,
                        "" if canon else f"weight {w0!r} differs from canonical {float(wc)!r}",
                        () if canon else (float(w0), float(wc))))

    cfg = measure.configuration()
    res = cfg.resonance_list()
    res.pop(int(np.argmin([abs(z - E0) for z in res])))
    new_cfg = SingularityConfiguration.from_lists(list(cfg.eigenvalues) + [E0], res)
    parity = validate_configuration(new_cfg, bands)
    checks.append(Check("parity", parity.ok,
                        "" if parity.ok else f"flipping the resonance breaks validity: {parity}",
                        () if parity.ok else (E0,)))
    rep = Report(tuple(checks))
    if not rep.ok:
        return AddMassResult(False, rep)
    masses = [(e, w * (1 - w0)) for e, w in measure.masses] + [(E0, w0)]
    new = SpectralMeasure.from_zeros(bands, measure.lead / (1 - w0), measure.zeros, masses)
    return AddMassResult(True, rep, new)


def christoffel_add(measure: SpectralMeasure, E0: float, eps: float,
                    nodes: int | None = None) -> SpectralMeasure:
    """Multiply ``a`` by ``(E_0 - x)(E_0 + eps - x)`` and attach the canonical mass at ``E_0``.

    The result has an extra eigenvalue at ``E_0`` and an extra resonance at
    ``E_0 + eps``; it is renormalized to a probability measure.

    Raises
    ------
    OnSpectrum
        If ``E_0`` or ``E_0 + eps`` lies on a band.
    InterlacingViolation
        If the requested sign of ``eps`` gives an invalid configuration.  The
        exception's ``suggested_eps`` is ``-eps`` when that sign would work.
    """
    bands = measure.bands
    if eps == 0:
        raise ValueError("eps must be non-zero")
    for x in (E0, E0 + eps):
        if bands.contains(x):
            raise OnSpectrum(f"{x!r} lies on the essential spectrum")
    cfg = measure.configuration()

    def extended(e):
        return SingularityConfiguration.from_lists(
            list(cfg.eigenvalues) + [E0], cfg.resonance_list() + [E0 + e])

    new_cfg = extended(eps)
    rep = validate_configuration(new_cfg, bands)
    if not rep.ok:
        alt = -eps
        ok_alt = not bands.contains(E0 + alt) and validate_configuration(extended(alt), bands).ok
        hint = f"; eps={alt!r} would be admissible" if ok_alt else ""
        raise InterlacingViolation(f"eps={eps!r} gives an invalid configuration: {rep}{hint}",
                                   alt if ok_alt else None)
    kwargs = {} if nodes is None else {"nodes": nodes}
    return build_measure(new_cfg, bands, **kwargs)


# -- stability -----------------------------------------------------------------

@dataclass(frozen=True)
class StabilityExperimentConfig:
    """Parameters of a resonance-stability experiment.

    Attributes
    ----------
    base_cfg, bands
        The unperturbed configuration.
    epsilons
        Perturbation sizes (non-negative).
    truncation_radii
        Singularities outside ``|z| <= R`` are dropped; ``inf`` keeps all.
    trials
        Random perturbations per ``(epsilon, R)``.
    n_report
        Number of coefficient pairs compared.
    edge_exclusion
        If set, perturbed singularities must stay this far from the bands.
    seed
        Seed of the random generator.
    """

    base_cfg: SingularityConfiguration
    bands: BandSet
    epsilons: tuple[float, ...]
    truncation_radii: tuple[float, ...] = (math.inf,)
    trials: int = 10
    n_report: int = 10
    edge_exclusion: float | None = None
    seed: int = 0
    nodes: int = STIELTJES_NODES

    def to_json(self) -> dict:
        return {
            "base_cfg": self.base_cfg.to_json(),
            "bands": self.bands.to_json(),
            "epsilons": list(self.epsilons),
            "truncation_radii": [None if math.isinf(r) else r for r in self.truncation_radii],
            "trials": self.trials,
            "n_report": self.n_report,
            "edge_exclusion": self.edge_exclusion,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StabilityExperimentConfig":
        radii = tuple(math.inf if r is None else float(r)
                      for r in obj.get("truncation_radii", [None]))
        return cls(
            base_cfg=SingularityConfiguration.from_json(obj["base_cfg"]),
            bands=BandSet.from_json(obj["bands"]),
            epsilons=tuple(float(e) for e in obj.get("epsilons", ())),
            truncation_radii=radii,
            trials=int(obj.get("trials", 10)),
            n_report=int(obj.get("n_report", 10)),
            edge_exclusion=obj.get("edge_exclusion"),
            seed=int(obj.get("seed", 0)),
        )


@dataclass(frozen=True)
class StabilityRow:
    epsilon: float
    radius: float
    median_err: tuple[float, ...]
    median_max_err: float
    slope: float | None

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon,
                "radius": None if math.isinf(self.radius) else self.radius,
                "median_err": list(self.median_err),
                "median_max_err": self.median_max_err,
                "slope": self.slope}


@dataclass(frozen=True)
class StabilityReport:
    rows: tuple[StabilityRow, ...]
    slopes: dict = field(default_factory=dict)

    def slope(self, radius: float = math.inf) -> float | None:
        return self.slopes.get(radius)

    def to_json(self) -> list:
        return [r.to_json() for r in self.rows]


def _perturbed(cfg: SingularityConfiguration, bands: BandSet, eps: float,
               rng: np.random.Generator, edge_exclusion: float | None) -> SingularityConfiguration:
    """Shift every singularity by less than ``eps``, keeping validity."""
    scale = eps
    while True:
        for _ in range(100):
            eig = [e + scale * rng.uniform(-1, 1) for e in cfg.eigenvalues]
            res = []
            for z, m in cfg.resonances:
                if z.imag < 0:
                    continue
                if z.imag == 0:
                    res.append((complex(z.real + scale * rng.uniform(-1, 1)), m))
                else:
                    rad = scale * math.sqrt(rng.uniform(0, 1))
                    w = z + rad * np.exp(2j * np.pi * rng.uniform(0, 1))
                    if w.imag <= 0:
                        break
                    res.append((w, m))
                    res.append((w.conjugate(), m))
            else:
                new = SingularityConfiguration(tuple(eig), tuple(res))
                if edge_exclusion is not None:
                    d = min((_dist_to_bands(z, bands) for z in new.zeros()), default=np.inf)
                    if d < edge_exclusion:
                        continue
                if all(not bands.contains(z.real) or z.imag != 0 for z in new.zeros()) \
                        and validate_configuration(new, bands).ok:
                    return new
        scale /= 2


def _dist_to_bands(z: complex, bands: BandSet) -> float:
    best = np.inf
    for al, be in bands.bands:
        x = min(max(z.real, al), be)
        best = min(best, abs(z - x))
    return float(best)


def _truncate(cfg: SingularityConfiguration, radius: float) -> SingularityConfiguration:
    if math.isinf(radius):
        return cfg
    eig = [e for e in cfg.eigenvalues if abs(e) <= radius]
    res = [(z, m) for z, m in cfg.resonances if abs(z) <= radius]
    return SingularityConfiguration(tuple(eig), tuple(res))


def fit_slope(eps, err) -> float:
    """Least-squares slope of ``log err`` against ``log eps``."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(err, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def stability_experiment(config: StabilityExperimentConfig) -> StabilityReport:
    """Coefficient error of perturbed and truncated configurations.

    Every trial draws its own generator from ``(seed, trial)``, so the same
    random directions are used for every ``epsilon``.  For each ``(epsilon, R)``
    the per-``n`` medians of ``|a_n - a~_n| + |b_n - b~_n|`` are reported,
    together with the median of their maximum over ``n`` and the log-log slope
    of the latter against ``epsilon`` (needs at least four positive epsilons).

    Raises
    ------
    GuardViolated
        If some ``epsilon`` is not below half the minimal separation.
    """
    cfg, bands = config.base_cfg, config.bands
    guard = cfg.min_separation() / 2
    for eps in config.epsilons:
        if eps < 0:
            raise ValueError("epsilons must be non-negative")
        if eps > 0 and eps >= guard:
            raise GuardViolated(f"epsilon {eps!r} is not below the separation guard {guard!r}")
    n = config.n_report
    base = stieltjes_reconstruct(build_measure(cfg, bands), n, nodes=config.nodes)
    rows = []
    slopes = {}
    for radius in config.truncation_radii:
        per_eps = []
        for eps in config.epsilons:
            errs = []
            for t in range(config.trials):
                rng = np.random.default_rng([config.seed, t])
                new = _perturbed(cfg, bands, eps, rng, config.edge_exclusion) if eps > 0 else cfg
                new = _truncate(new, radius)
                a, b = stieltjes_reconstruct(build_measure(new, bands), n, nodes=config.nodes)
                errs.append(np.abs(a - base[0]) + np.abs(b - base[1]))
            errs = np.array(errs)
            med = np.median(errs, axis=0)
            med_max = float(np.median(errs.max(axis=1)))
            per_eps.append((eps, tuple(float(v) for v in med), med_max))
        pos = [(e, m) for e, _, m in per_eps if e > 0 and m > 0]
        slope = fit_slope(*zip(*pos)) if len(pos) >= 4 else None
        slopes[radius] = slope
        rows.extend(StabilityRow(e, radius, med, mm, slope) for e, med, mm in per_eps)
    return StabilityReport(tuple(rows), slopes)


def migration_experiment(cfg: SingularityConfiguration, bands: BandSet, eigenvalue: float,
                         distances, n_report: int = 10) -> list[dict]:
    """Move an eigenvalue onto the nearest edge, then out again as a resonance.

    For each distance ``d`` the eigenvalue is placed at ``edge + d`` (toward its
    original side), and separately a resonance at the same point; the two
    configurations must converge to the same edge-resonance operator as
    ``d -> 0``.

    Returns
    -------
    list of dict
        ``{"distance", "eigen_err", "resonance_err"}``: coefficient distances of
        each configuration to the operator with a resonance exactly at the edge.
    """
    edge, _ = bands.nearest_edge(eigenvalue)
    side = math.copysign(1.0, eigenvalue - edge)
    rest_e = [e for e in cfg.eigenvalues if e != eigenvalue]
    res = cfg.resonance_list()
    limit = SingularityConfiguration.from_lists(rest_e, res + [edge])
    ref = stieltjes_reconstruct(build_measure(limit, bands), n_report)
    out = []
    for d in distances:
        x = edge + side * d
        rows = {}
        for kind, new in (("eigen", SingularityConfiguration.from_lists(rest_e + [x], res)),
                          ("resonance", SingularityConfiguration.from_lists(rest_e, res + [x]))):
            a, b = stieltjes_reconstruct(build_measure(new, bands), n_report)
            rows[kind] = float(np.max(np.abs(a - ref[0]) + np.abs(b - ref[1])))
        out.append({"distance": float(d), "eigen_err": rows["eigen"],
                    "resonance_err": rows["resonance"]})
    return out


# -- perturbation determinant ----------------------------------------------------

@dataclass(frozen=True)
class PerturbationDeterminant:
    """Polynomial ``L(z)`` with ``L(0) = 1`` (ascending real coefficients)."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=complex), "b")
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if np.all(c.imag == 0):
            object.__setattr__(self, "coeffs", tuple(float(x) + 0.0 for x in c.real))
        else:
            object.__setattr__(self, "coeffs", tuple(complex(x) for x in c))

    def __call__(self, z):
        return P.polyval(z, np.asarray(self.coeffs))

    def to_json(self) -> dict:
        return {"coeffs": [float(np.real(c)) for c in self.coeffs]}

    @classmethod
    def from_json(cls, obj: dict) -> "PerturbationDeterminant":
        return cls(tuple(obj["coeffs"]))


def _is_free(block) -> bool:
    return block.p == 1 and block.a[0] == 1.0 and block.b[0] == 0.0


def joukowski_preimage(x: complex, inside: bool) -> complex:
    """Root of ``z + 1/z = x`` inside (or outside) the unit disk."""
    r = np.roots([1.0, -complex(x), 1.0])
    r = sorted(r, key=abs)
    return complex(r[0] if inside else r[1])


def build_perturbation_determinant(op: EventuallyPeriodicOperator) -> PerturbationDeterminant:
    """``L(z) = prod (1 - z / z_j)`` over the singularities of an eventually free operator.

    Eigenvalues map to ``z_j`` inside the unit disk, resonances outside.

    Raises
    ------
    NotFreeTail
    """
    if not _is_free(op.tail):
        raise NotFreeTail("the tail must be the free block a = 1, b = 0")
    cfg = find_singularities(op)
    zs = [joukowski_preimage(e, True) for e in cfg.eigenvalues]
    zs += [joukowski_preimage(r, False) for r in cfg.resonance_list()]
    L = np.array([1.0 + 0j])
    for zj in zs:
        L = P.polymul(L, np.array([1.0, -1.0 / zj]))
    return PerturbationDeterminant(tuple(L.real))


def check_damsim(L: PerturbationDeterminant, R: float = 1e6, tol: float = 1e-9) -> Report:
    """Check whether ``L`` is the perturbation determinant of an eventually free operator.

    Checks
    ------
    real_coefficients
    off_axis_disk_zeros
        No zeros in the closed unit disk off the real line.
    simple_disk_zeros
        Real zeros in the closed disk are simple.
    normalized
        ``L(0) = 1``.
    positive_first_interval, positive_between, positive_reciprocal
        With ``0 < x_k < ... < x_1 < 1`` the zeros in ``(1/R, 1)``: an even
        number of zeros on ``[1, 1/x_1)``, an odd number on each
        ``(1/x_j, 1/x_{j+1})``, and no zero at any ``1/x_j``.
    negative_first_interval, negative_between, negative_reciprocal
        The mirror conditions for zeros in ``(-1, -1/R)``.
    """
    if R <= 1:
        raise ValueError("R must exceed 1")
    c = np.asarray(L.coeffs)
    checks = []
    real = bool(np.all(np.imag(c) == 0))
    checks.append(Check("real_coefficients", real, "" if real else "complex coefficients"))
    c = np.real(c).astype(float)
    roots = aberth(c) if len(c) > 1 else np.empty(0, dtype=complex)
    clusters = []
    for z, m, _ in cluster_roots(roots, 1e-6):
        if abs(z.imag) < tol:
            z = complex(z.real, 0.0)
        clusters.append((z, m))

    off = [z for z, _ in clusters if abs(z) <= 1 + tol and z.imag != 0]
    checks.append(Check("off_axis_disk_zeros", not off,
                        "zeros in the closed disk off the real line" if off else "", tuple(off)))
    mult = [z.real for z, m in clusters if z.imag == 0 and abs(z) <= 1 + tol and m > 1]
    checks.append(Check("simple_disk_zeros", not mult,
                        "multiple real zeros in the closed disk" if mult else "", tuple(mult)))
    norm = abs(c[0] - 1) <= 1e-12
    checks.append(Check("normalized", norm, "" if norm else f"L(0) = {c[0]!r}"))

    real_zeros = [(z.real, m) for z, m in clusters if z.imag == 0]
    for name, sgn in (("positive", 1.0), ("negative", -1.0)):
        # mirror the negative side onto the positive one
        zs = [(sgn * x, m) for x, m in real_zeros if sgn * x > 0]
        xs = sorted([x for x, _ in zs if 1 / R < x < 1 - tol], reverse=True)

        def count(lo, hi, lo_closed):
            return sum(m for x, m in zs
                       if (x >= lo - tol if lo_closed else x > lo + tol) and x < hi - tol)

        first_ok, between_bad, recip_bad = True, [], []
        if xs:
            n0 = count(1.0, 1 / xs[0], True)
            first_ok = n0 % 2 == 0
            for j in range(len(xs) - 1):
                if count(1 / xs[j], 1 / xs[j + 1], False) % 2 == 0:
                    between_bad.append(sgn / xs[j])
            for x in xs:
                if any(abs(y - 1 / x) <= tol * max(1.0, 1 / x) for y, _ in zs):
                    recip_bad.append(sgn / x)
        checks.append(Check(f"{name}_first_interval", first_ok,
                            "" if first_ok else "odd number of zeros between 1 and the first reciprocal",
                            () if first_ok else (sgn / xs[0],)))
        checks.append(Check(f"{name}_between", not between_bad,
                            "even number of zeros between consecutive reciprocals" if between_bad else "",
                            tuple(between_bad)))
        checks.append(Check(f"{name}_reciprocal", not recip_bad,
                            "a reciprocal of a disk zero is itself a zero" if recip_bad else "",
                            tuple(recip_bad)))
    return Report(tuple(checks))
