import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as P

from jacres import (BandSet, InvalidConfiguration, SingularityConfiguration, SpectralMeasure,
                    ac_density, build_measure, density_table, random_block, random_configuration,
                    validate_configuration)

from oracles import mp_band_integral

FREE_BANDS = BandSet((-2.0, 2.0))
R5 = math.sqrt(5)
TWO_BANDS = BandSet((-R5, -1.0, 1.0, R5))

# oracle: tanh-sinh quadrature of sqrt|r(x)| / |x| over both bands (tests.oracles.mp_band_integral)
GAP_RESONANCE_MASS = 2.399963229728654


def cfg(eig=(), res=()):
    return SingularityConfiguration.from_lists(list(eig), list(res))


def configurations():
    def draw(seed, p):
        rng = np.random.default_rng(seed)
        bands = FREE_BANDS if p == 1 else random_block(rng, p, min_gap=0.3)[1]
        return random_configuration(bands, rng, max_total=6, guard=0.05), bands
    return st.builds(draw, st.integers(0, 2**32 - 1), st.integers(1, 2))


# -- validation ---------------------------------------------------------------------

def test_single_eigenvalue_is_valid():
    assert validate_configuration(cfg([2.5]), FREE_BANDS).ok


def test_two_eigenvalues_in_a_row_violate_interlacing():
    rep = validate_configuration(cfg([2.5, 3.0]), FREE_BANDS)
    assert rep.failed_names() == ["interlacing"]
    assert rep["interlacing"].witnesses == (3.0,)


def test_resonance_between_eigenvalues_restores_interlacing():
    assert validate_configuration(cfg([2.5, 3.0], [2.8]), FREE_BANDS).ok


def test_gap_needs_odd_count():
    rep = validate_configuration(cfg(), TWO_BANDS)
    assert "gap_parity" in rep.failed_names()
    assert validate_configuration(cfg([], [0.0]), TWO_BANDS).ok


def test_eigenvalue_on_band_rejected():
    rep = validate_configuration(cfg([1.0]), FREE_BANDS)
    assert "eigenvalues" in rep.failed_names()


def test_unpaired_complex_resonance_rejected():
    rep = validate_configuration(cfg([], [1 + 1j]), FREE_BANDS)
    assert "resonances" in rep.failed_names()


def test_double_edge_resonance_rejected():
    rep = validate_configuration(cfg([], [2.0, 2.0]), FREE_BANDS)
    assert "resonances" in rep.failed_names()


def test_band_interior_resonance_rejected():
    rep = validate_configuration(cfg([], [0.5]), FREE_BANDS)
    assert "resonances" in rep.failed_names()


def test_point_both_eigenvalue_and_resonance_rejected():
    rep = validate_configuration(cfg([2.5], [2.5, 3.0]), FREE_BANDS)
    assert "disjoint" in rep.failed_names()


@settings(max_examples=40, deadline=None)
@given(configurations())
def test_random_configurations_are_valid(cb):
    c, bands = cb
    assert validate_configuration(c, bands).ok
    assert c.total <= 6


def test_build_measure_rejects_invalid_configuration():
    with pytest.raises(InvalidConfiguration):
        build_measure(cfg([2.5, 3.0]), FREE_BANDS)


# -- measure construction -----------------------------------------------------------

def test_free_measure():
    m = build_measure(cfg(), FREE_BANDS)
    np.testing.assert_allclose(m.a_poly, [2 * np.pi], rtol=1e-12)
    assert m.masses == ()
    assert ac_density(m, 0.0) == pytest.approx(1 / np.pi, rel=1e-12)


def test_single_eigenvalue_measure():
    m = build_measure(cfg([2.5]), FREE_BANDS)
    np.testing.assert_allclose(m.a_poly, [10 * np.pi, -4 * np.pi], rtol=1e-10)
    assert m.weights[0] == pytest.approx(0.75, abs=1e-10)
    assert ac_density(m, 0.0) == pytest.approx(1 / (5 * np.pi), rel=1e-10)


def test_single_eigenvalue_ac_mass_oracle():
    ac = mp_band_integral(lambda x: mpmath.sqrt(4 - x * x) / (2.5 - x), [-2, 2])
    assert ac == pytest.approx(np.pi, rel=1e-14)
    # normalization pi + 3 pi = 4 pi, eigenvalue mass 3 pi / (4 pi)
    assert 1 - ac / (4 * np.pi) == pytest.approx(0.75, abs=1e-14)


def test_gap_resonance_measure():
    m = build_measure(cfg([], [0.0]), TWO_BANDS)
    assert m.a_poly[0] == 0.0
    assert m.a_poly[1] == pytest.approx(GAP_RESONANCE_MASS, rel=1e-10)
    for (lo, hi), sg in zip(TWO_BANDS.bands, (-1, 1)):
        assert np.sign(m.a((lo + hi) / 2)) == sg


def test_gap_resonance_mass_oracle_is_frozen():
    e = TWO_BANDS.edges
    r = lambda x: mpmath.sqrt(abs((x - e[0]) * (x - e[1]) * (x - e[2]) * (x - e[3]))) / abs(x)
    assert mp_band_integral(r, e) == pytest.approx(GAP_RESONANCE_MASS, rel=1e-13)


def test_density_vanishes_off_bands():
    m = build_measure(cfg([2.5]), FREE_BANDS)
    assert ac_density(m, 2.5) == 0
    assert ac_density(m, -3.0) == 0
    assert ac_density(m, 2.0) == 0


def test_density_infinite_at_edge_zero():
    m = build_measure(cfg([], [2.0]), FREE_BANDS)
    assert ac_density(m, 2.0) == np.inf
    assert np.isfinite(ac_density(m, 1.999))


@settings(max_examples=30, deadline=None)
@given(configurations())
def test_measure_invariants(cb):
    c, bands = cb
    m = build_measure(c, bands)
    assert m.total_mass(1024) == pytest.approx(1.0, abs=1e-10)
    assert all(w > 0 for w in m.weights)
    assert len(m.a_poly) - 1 == c.N + c.K
    for lo, hi in bands.bands:
        x = np.linspace(lo, hi, 7)[1:-1]
        assert np.all(np.sign(m.a(x)) == bands.sg(x))


@settings(max_examples=20, deadline=None)
@given(configurations())
def test_weights_are_residues(cb):
    c, bands = cb
    m = build_measure(c, bands)
    da = P.polyder(np.asarray(m.a_poly))
    for e, w in m.masses:
        expected = 2 * np.pi * math.sqrt(abs(bands.r(e))) / abs(P.polyval(e, da))
        assert w == pytest.approx(expected, rel=1e-10)


@settings(max_examples=20, deadline=None)
@given(configurations())
def test_total_mass_matches_independent_quadrature(cb):
    c, bands = cb
    m = build_measure(c, bands)
    ac = mp_band_integral(lambda x: mpmath.mpf(float(ac_density(m, float(x)))), bands.edges, 15)
    assert ac + sum(m.weights) == pytest.approx(1.0, abs=1e-8)


def test_configuration_round_trip_through_measure():
    c = cfg([2.5, 3.0], [2.8, 1 + 1j, 1 - 1j])
    m = build_measure(c, FREE_BANDS)
    assert m.configuration().approx_equal(c, 1e-10)


def test_measure_json_round_trip():
    m = build_measure(cfg([2.5], [-2.3]), FREE_BANDS)
    again = SpectralMeasure.from_json(m.to_json())
    np.testing.assert_allclose(again.a_poly, m.a_poly)
    assert again.masses == m.masses


def test_density_table_shape():
    m = build_measure(cfg(), FREE_BANDS)
    tab = density_table(m, 11)
    assert tab.shape == (11, 2)
    assert np.all(tab[:, 1] >= 0)


def test_random_configuration_rejects_narrow_gaps():
    bands = BandSet((-2.0, -0.05, 0.0, 2.0))
    with pytest.raises(ValueError):
        random_configuration(bands, np.random.default_rng(0), guard=0.05)
