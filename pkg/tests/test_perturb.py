import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from jacres import (BandSet, EventuallyPeriodicOperator, GuardViolated, InterlacingViolation,
                    NoSuchMass, NotFreeTail, OnSpectrum, PerturbationDeterminant, PeriodicBlock,
                    SingularityConfiguration, StabilityExperimentConfig, add_point_mass,
                    build_measure, build_perturbation_determinant, canonical_mass, check_damsim,
                    christoffel_add, find_singularities, migration_experiment, random_configuration,
                    reconstruct_operator, remove_point_mass, stability_experiment,
                    stieltjes_reconstruct, validate_configuration)
from jacres.roots import aberth

from oracles import jost_determinant

FREE_BANDS = BandSet((-2.0, 2.0))
FREE = PeriodicBlock.free()


def cfg(eig=(), res=()):
    return SingularityConfiguration.from_lists(list(eig), list(res))


FREE_MEASURE = build_measure(cfg(), FREE_BANDS)
RANK_ONE = build_measure(cfg([2.5]), FREE_BANDS)


def free_configurations():
    def draw(seed):
        rng = np.random.default_rng(seed)
        return random_configuration(FREE_BANDS, rng, max_total=5, guard=0.05)
    return st.builds(draw, st.integers(0, 2**32 - 1))


def eventually_free_operators():
    def draw(seed, s):
        rng = np.random.default_rng(seed)
        return EventuallyPeriodicOperator(tuple(rng.uniform(0.5, 1.5, s)),
                                          tuple(rng.uniform(-1.5, 1.5, s)), FREE)
    return st.builds(draw, st.integers(0, 2**32 - 1), st.integers(1, 3))


# -- removal ------------------------------------------------------------------------------

def test_remove_rank_one_eigenvalue():
    m = remove_point_mass(RANK_ONE, 2.5)
    assert m.masses == ()
    np.testing.assert_allclose(m.a_poly, np.array(RANK_ONE.a_poly) * 0.25, rtol=1e-12)
    assert m.total_mass() == pytest.approx(1.0, abs=1e-12)
    _, _, info, op = reconstruct_operator(m)
    assert info.tail.a[0] == pytest.approx(1.0, abs=1e-9)
    got = find_singularities(op)
    assert got.N == 0
    assert [z for z, _ in got.resonances] == pytest.approx([2.5], abs=1e-8)


def test_remove_from_measure_without_masses():
    with pytest.raises(NoSuchMass):
        remove_point_mass(FREE_MEASURE, 2.5)


def test_remove_gap_eigenvalue_swaps_periodic_block():
    op = EventuallyPeriodicOperator.periodic(PeriodicBlock((1.0, 2.0), (0.0, 0.0)))
    c = find_singularities(op)
    assert c.N == 1
    m = remove_point_mass(build_measure(c, op.bands), c.eigenvalues[0])
    a, b = stieltjes_reconstruct(m, 8)
    np.testing.assert_allclose(a, [2.0, 1.0] * 4, atol=1e-7)
    np.testing.assert_allclose(b, 0, atol=1e-7)


# -- addition -----------------------------------------------------------------------------

def test_add_canonical_mass_restores_rank_one_measure():
    base = build_measure(cfg([], [2.5]), FREE_BANDS)
    assert canonical_mass(base, 2.5) == pytest.approx(0.75, abs=1e-12)
    res = add_point_mass(base, 2.5, 0.75)
    assert res.accepted
    np.testing.assert_allclose(res.measure.a_poly, RANK_ONE.a_poly, rtol=1e-10)
    a, b = stieltjes_reconstruct(res.measure, 6)
    assert b[0] == pytest.approx(2.0, abs=1e-10)


def test_add_non_canonical_mass_rejected():
    base = build_measure(cfg([], [2.5]), FREE_BANDS)
    res = add_point_mass(base, 2.5, 0.5)
    assert not res.accepted
    assert res.report.failed_names() == ["canonical_weight"]


def test_add_without_resonance_rejected():
    res = add_point_mass(FREE_MEASURE, 3.0, 0.5)
    assert not res.accepted
    assert res.report.failed_names() == ["resonance_at_point"]


def test_add_on_spectrum_raises():
    with pytest.raises(OnSpectrum):
        add_point_mass(FREE_MEASURE, 1.0, 0.5)


def test_add_breaking_parity_rejected():
    # flipping 2.8 to an eigenvalue gives E, E, R outward from the edge
    base = build_measure(cfg([2.5], [2.8, 3.0]), FREE_BANDS)
    res = add_point_mass(base, 2.8, canonical_mass(base, 2.8))
    assert not res.accepted
    assert res.report.failed_names() == ["parity"]


@settings(max_examples=25, deadline=None)
@given(free_configurations())
def test_remove_then_add_is_identity(c):
    assume(c.N > 0)
    m = build_measure(c, FREE_BANDS)
    E0, w0 = m.masses[-1]
    back = add_point_mass(remove_point_mass(m, E0), E0, w0)
    assert back.accepted
    np.testing.assert_allclose(back.measure.a_poly, m.a_poly, rtol=1e-10)
    for (e1, w1), (e2, w2) in zip(back.measure.masses, m.masses):
        assert abs(e1 - e2) < 1e-12 and abs(w1 - w2) < 1e-10


# -- Christoffel ---------------------------------------------------------------------------

def test_christoffel_on_free_measure():
    m = christoffel_add(FREE_MEASURE, 3.0, 0.1)
    c = m.configuration()
    assert c.approx_equal(cfg([3.0], [3.1]), 1e-12)
    assert m.total_mass() == pytest.approx(1.0, abs=1e-10)


def test_christoffel_wrong_sign_on_free_measure():
    with pytest.raises(InterlacingViolation) as exc:
        christoffel_add(FREE_MEASURE, 3.0, -0.1)
    assert exc.value.suggested_eps == pytest.approx(0.1)


def test_christoffel_requested_sign_only():
    with pytest.raises(InterlacingViolation) as exc:
        christoffel_add(RANK_ONE, 3.0, 0.1)
    assert exc.value.suggested_eps == pytest.approx(-0.1)
    m = christoffel_add(RANK_ONE, 3.0, -0.1)
    assert m.configuration().approx_equal(cfg([2.5, 3.0], [2.9]), 1e-12)


def test_christoffel_on_spectrum():
    with pytest.raises(OnSpectrum):
        christoffel_add(FREE_MEASURE, 2.5, -0.6)


@settings(max_examples=20, deadline=None)
@given(free_configurations(), st.floats(2.3, 4.0), st.floats(0.02, 0.2), st.booleans())
def test_christoffel_output_is_valid(c, E0, size, negative):
    zs = c.zeros()
    eps = -size if negative else size
    assume(all(abs(z - E0) > 0.01 and abs(z - E0 - eps) > 0.01 for z in zs))
    m = build_measure(c, FREE_BANDS)
    try:
        new = christoffel_add(m, E0, eps)
    except InterlacingViolation:
        return
    assert validate_configuration(new.configuration(), FREE_BANDS).ok
    assert new.total_mass() == pytest.approx(1.0, abs=1e-10)
    assert all(w > 0 for w in new.weights)


# -- stability ------------------------------------------------------------------------------

FAR = cfg([-2.8], [2.6, 1 + 1j, 1 - 1j])


def test_zero_perturbation_gives_zero_error():
    rep = stability_experiment(StabilityExperimentConfig(FAR, FREE_BANDS, (0.0,), trials=2))
    assert rep.rows[0].median_max_err == 0.0


def test_far_singularities_give_linear_scaling():
    conf = StabilityExperimentConfig(FAR, FREE_BANDS, (1e-2, 3e-3, 1e-3, 3e-4), trials=8,
                                     edge_exclusion=0.5)
    slope = stability_experiment(conf).slope()
    assert 0.8 <= slope <= 1.2


def test_edge_resonance_gives_square_root_scaling():
    conf = StabilityExperimentConfig(cfg([], [2.0]), FREE_BANDS, (1e-2, 3e-3, 1e-3, 3e-4),
                                     trials=8)
    slope = stability_experiment(conf).slope()
    assert 0.35 <= slope <= 0.65


def test_stability_error_monotone_in_epsilon():
    eps = (1e-2, 3e-3, 1e-3, 3e-4)
    rep = stability_experiment(StabilityExperimentConfig(FAR, FREE_BANDS, eps, trials=6))
    errs = [r.median_max_err for r in rep.rows]
    assert all(x >= y for x, y in zip(errs, errs[1:]))


def test_truncation_radius_drops_far_singularities():
    conf = StabilityExperimentConfig(cfg([], [2.6, 5.0]), FREE_BANDS, (0.0,),
                                     truncation_radii=(math.inf, 3.0), trials=1)
    rep = stability_experiment(conf)
    assert rep.rows[0].median_max_err == 0.0
    assert rep.rows[1].median_max_err > 1e-3


def test_guard_violation():
    conf = StabilityExperimentConfig(cfg([2.5], [2.6]), FREE_BANDS, (0.06,))
    with pytest.raises(GuardViolated):
        stability_experiment(conf)


def test_stability_config_json_round_trip():
    conf = StabilityExperimentConfig(FAR, FREE_BANDS, (1e-2, 1e-3), (math.inf, 4.0), 3, 5, 0.5, 7)
    again = StabilityExperimentConfig.from_json(conf.to_json())
    assert again.to_json() == conf.to_json()
    assert again.base_cfg.approx_equal(FAR, 0)


def test_stability_report_json_shape():
    conf = StabilityExperimentConfig(FAR, FREE_BANDS, (1e-2, 3e-3, 1e-3, 3e-4), trials=2,
                                     n_report=4)
    rows = stability_experiment(conf).to_json()
    assert len(rows) == 4
    assert all(r["radius"] is None and len(r["median_err"]) == 4 for r in rows)
    assert rows[0]["slope"] == rows[-1]["slope"] is not None


def test_migration_is_continuous_at_the_edge():
    rows = migration_experiment(cfg([2.5]), FREE_BANDS, 2.5, [0.1, 0.01, 1e-3, 1e-4])
    eig = [r["eigen_err"] for r in rows]
    res = [r["resonance_err"] for r in rows]
    assert all(x > y for x, y in zip(eig, eig[1:]))
    assert all(x > y for x, y in zip(res, res[1:]))
    assert eig[-1] < 0.05 and res[-1] < 0.05


# -- perturbation determinant -------------------------------------------------------------

def test_determinant_rank_one():
    L = build_perturbation_determinant(EventuallyPeriodicOperator((1.0,), (2.0,), FREE))
    np.testing.assert_allclose(L.coeffs, [1.0, -2.0], atol=1e-10)


def test_determinant_free():
    L = build_perturbation_determinant(EventuallyPeriodicOperator.free())
    assert L.coeffs == (1.0,)


def test_determinant_weak_rank_one():
    L = build_perturbation_determinant(EventuallyPeriodicOperator((1.0,), (0.5,), FREE))
    np.testing.assert_allclose(L.coeffs, [1.0, -0.5], atol=1e-10)


def test_determinant_needs_free_tail():
    op = EventuallyPeriodicOperator.periodic(PeriodicBlock((1.0, 2.0), (0.0, 0.0)))
    with pytest.raises(NotFreeTail):
        build_perturbation_determinant(op)


@settings(max_examples=25, deadline=None)
@given(eventually_free_operators(), st.floats(0, 2 * np.pi))
def test_determinant_matches_jost_oracle(op, phase):
    L = build_perturbation_determinant(op)
    for radius in (0.3, 0.7, 0.95):
        z = radius * np.exp(1j * phase)
        assert abs(L(z) - jost_determinant(op, z)) < 1e-8 * max(1, abs(L(z)))


@settings(max_examples=25, deadline=None)
@given(eventually_free_operators())
def test_determinant_disk_zeros_are_eigenvalues(op):
    L = build_perturbation_determinant(op)
    inside = sorted(float((z + 1 / z).real) for z in aberth(L.coeffs) if abs(z) < 1)
    assert inside == pytest.approx(sorted(find_singularities(op).eigenvalues), abs=1e-8)


def test_damsim_rank_one_passes():
    assert check_damsim(PerturbationDeterminant((1.0, -2.0))).ok


def test_damsim_zero_past_first_reciprocal_passes():
    L = np.polynomial.polynomial.polymul([1.0, -2.0], [1.0, -1 / 2.2])
    assert check_damsim(PerturbationDeterminant(tuple(L))).ok


def test_damsim_odd_count_on_first_interval_fails():
    L = np.polynomial.polynomial.polymul([1.0, -2.0], [1.0, -1 / 1.5])
    rep = check_damsim(PerturbationDeterminant(tuple(L)))
    assert rep.failed_names() == ["positive_first_interval"]
    assert rep["positive_first_interval"].witnesses == pytest.approx((2.0,))


def test_damsim_unnormalized_and_complex_disk_zero():
    L = np.polynomial.polynomial.polyfromroots([0.5 + 0.5j, 0.5 - 0.5j]).real * 3
    rep = check_damsim(PerturbationDeterminant(tuple(L)))
    assert {"normalized", "off_axis_disk_zeros"} <= set(rep.failed_names())


def test_damsim_double_disk_zero():
    L = np.polynomial.polynomial.polyfromroots([2.0, 2.0])
    L = L / L[0]
    rep = check_damsim(PerturbationDeterminant(tuple(L)))
    assert rep.ok
    L = np.polynomial.polynomial.polyfromroots([0.5, 0.5])
    L = L / L[0]
    assert "simple_disk_zeros" in check_damsim(PerturbationDeterminant(tuple(L))).failed_names()


def test_damsim_radius_must_exceed_one():
    with pytest.raises(ValueError):
        check_damsim(PerturbationDeterminant((1.0,)), R=0.5)


@settings(max_examples=30, deadline=None)
@given(eventually_free_operators())
def test_damsim_passes_for_eventually_free_operators(op):
    assert check_damsim(build_perturbation_determinant(op)).ok


def test_determinant_json_round_trip():
    L = PerturbationDeterminant((1.0, -2.0, 0.5))
    assert PerturbationDeterminant.from_json(L.to_json()) == L
    assert L(0) == 1.0
