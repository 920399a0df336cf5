import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from lrchain.analysis import (
    DEFAULT_LEVELS,
    HSS_FLOOR,
    extract_lightcone,
    fit_front_velocity,
    front_velocity,
    hss_fit,
    localization_length,
    localization_report,
    longest_run,
    onset_times,
    quasiparticle_energy,
    stationarity_check,
)
from lrchain.disorder import DisorderModel, ensemble_average
from lrchain.opw import ChainSpec, CorrelationField, build_walk_matrix, correlation_field


def profile(values, t=1.0, n_c=1):
    values = np.asarray(values, dtype=float)
    return CorrelationField(np.arange(1, values.size + 1), np.array([t]), values[:, None], ensemble_size=n_c)


decreasing_st = st.lists(st.floats(0.0, 2.0), min_size=2, max_size=40).map(lambda v: sorted(v, reverse=True))


# --- formulas ---------------------------------------------------------------


@pytest.mark.parametrize("jp", [0.2, 0.5, 1.0, 1.7])
def test_gap_at_zero_wavenumber(jp):
    assert quasiparticle_energy(jp, 0.0) == pytest.approx(2 * abs(1 - jp), abs=1e-7)


def test_energy_critical_zone_edge():
    assert quasiparticle_energy(1.0, math.pi) == pytest.approx(4.0, abs=1e-14)


def test_energy_quarter_zone():
    assert quasiparticle_energy(0.5, math.pi / 2) == pytest.approx(math.sqrt(5), abs=1e-14)


def test_energy_in_terms_of_g():
    jp, q = 0.8, np.linspace(-math.pi, math.pi, 9)
    g = 1 / jp
    np.testing.assert_allclose(quasiparticle_energy(jp, q), 2 * jp * np.sqrt(g**2 + 1 - 2 * g * np.cos(q)), atol=1e-14)


@pytest.mark.parametrize("jp", [0.0, -0.5])
def test_energy_rejects_nonpositive(jp):
    with pytest.raises(ValueError):
        quasiparticle_energy(jp, 0.3)


@given(st.floats(1e-3, 5), st.floats(-math.pi, math.pi))
def test_energy_nonnegative_and_gapped_off_critical(jp, q):
    e = quasiparticle_energy(jp, q)
    assert e >= 0
    assume(abs(jp - 1) > 1e-3 or abs(q) > 1e-3)
    assert e > 0


def test_front_velocity_values():
    assert front_velocity(0.5) == pytest.approx(math.pi)
    assert front_velocity(1.5) == pytest.approx(2 * math.pi)
    assert front_velocity(1.0) == pytest.approx(2 * math.pi)
    assert front_velocity(1.0 - 1e-12) == pytest.approx(front_velocity(1.0 + 1e-12))
    with pytest.raises(ValueError):
        front_velocity(-0.1)


@given(st.floats(0, 10), st.floats(0, 10))
def test_front_velocity_monotone_bounded(a, b):
    lo, hi = sorted((a, b))
    assert front_velocity(lo) <= front_velocity(hi) <= 2 * math.pi


# --- light cones ------------------------------------------------------------


def test_zero_field_no_crossings():
    cf = CorrelationField(np.arange(1, 11), np.array([0.0, 1.0]), np.zeros((10, 2)))
    assert np.all(np.isnan(extract_lightcone(cf).crossings))


def test_empty_levels_rejected():
    with pytest.raises(ValueError):
        extract_lightcone(profile([1.0, 0.5]), [])


def test_linear_interpolation_in_k():
    cone = extract_lightcone(profile([1.0, 0.8, 0.4, 0.0]), [0.6])
    assert cone.crossings[0, 0] == pytest.approx(2.5)


@settings(max_examples=40)
@given(decreasing_st)
def test_crossings_nonincreasing_in_level(values):
    cone = extract_lightcone(profile(values), DEFAULT_LEVELS)
    x = cone.crossings[:, 0]
    finite = x[np.isfinite(x)]
    assert np.all(np.diff(finite) >= -1e-12)


def test_clean_paramagnetic_front_velocity():
    t = np.arange(0.0, 50.01, 0.5)
    cf = correlation_field(build_walk_matrix(ChainSpec.homogeneous(400, 0.5)), t)
    fit = fit_front_velocity(extract_lightcone(cf, [0.5]), 0.5, (5.0, 50.0))
    assert abs(fit.velocity / math.pi - 1) < 0.05


def test_fit_needs_points_and_level():
    cone = extract_lightcone(profile([1.0, 0.2]), [0.5])
    with pytest.raises(KeyError):
        fit_front_velocity(cone, 0.9, (0, 1))
    with pytest.raises(ValueError):
        fit_front_velocity(cone, 0.5, (0, 1))


def test_strong_disorder_contours_vertical():
    cf = ensemble_average(DisorderModel(0.5, 0.8, 200, 42), 300, [100.0, 150.0])
    cone = extract_lightcone(cf)
    assert np.all(np.isfinite(cone.crossings))
    assert np.all(np.abs(cone.crossings[:, 1] - cone.crossings[:, 0]) < 1.0)


def test_onset_times_interpolate():
    cf = CorrelationField(np.array([1, 2]), np.array([0.0, 1.0, 2.0]), np.array([[0.0, 1.0, 1.0], [0.0, 0.0, 0.4]]))
    np.testing.assert_allclose(onset_times(cf, 0.2), [0.2, 1.5])


def test_longest_run():
    assert longest_run([0, 1, 1, 0, 1, 1, 1, 0]) == (3, 4)
    assert longest_run([False, False]) == (0, -1)


# --- stationarity -----------------------------------------------------------


def test_identical_fields_stationary():
    a = profile([1.5, 0.7, 0.1], t=10.0)
    b = profile([1.5, 0.7, 0.1], t=20.0)
    rep = stationarity_check(a, b, 0.01)
    assert rep.max_difference == 0 and rep.passed


def test_clean_field_inside_cone_not_stationary():
    cf = correlation_field(build_walk_matrix(ChainSpec.homogeneous(200, 0.5)), [10.0, 20.0])
    assert not stationarity_check(cf.at_time(10.0), cf.at_time(20.0), 0.01).passed


def test_min_site_drops_leading_sites():
    rep = stationarity_check(profile([1.0, 0.5], t=1), profile([0.0, 0.5], t=2), 0.01, min_site=2)
    assert rep.passed and rep.worst_site == 2


def test_mismatched_grids():
    with pytest.raises(ValueError):
        stationarity_check(profile([1.0, 0.5]), profile([1.0, 0.5, 0.1], 2.0), 0.01)
    with pytest.raises(ValueError):
        stationarity_check(profile([1.0], 1.0), profile([1.0], 1.0), 0.01)
    with pytest.raises(ValueError):
        stationarity_check(profile([1.0], 1.0, n_c=2), profile([1.0], 2.0, n_c=3), 0.01)


# --- localization length ----------------------------------------------------


def test_kthresh_zero_field():
    assert localization_length(profile(np.zeros(8)), 0.2).k_thresh == 1


def test_kthresh_saturation():
    loc = localization_length(profile(np.full(8, 1.0)), 0.2)
    assert loc.saturated and loc.k_thresh is None


def test_kthresh_basic_and_flagging():
    p = profile([2.0, 1.0, 0.3, 0.2, 0.1])
    assert localization_length(p, 0.2).k_thresh == 4
    moving = stationarity_check(profile([1.0], 1), profile([0.5], 2), 0.01)
    assert localization_length(p, 0.2, moving).flagged
    with pytest.raises(ValueError):
        localization_length(p, 2.5)


@given(decreasing_st, st.lists(st.floats(0, 1), min_size=40, max_size=40), st.floats(0.05, 1.9))
def test_kthresh_monotone_under_pointwise_decrease(values, shrink, threshold):
    hi = np.asarray(values)
    lo = hi * np.asarray(shrink[: hi.size])
    a = localization_length(profile(hi), threshold)
    b = localization_length(profile(lo), threshold)
    if not a.saturated:
        assert not b.saturated and b.k_thresh <= a.k_thresh


# --- HSS envelope -----------------------------------------------------------


@pytest.mark.parametrize("beta", [0.01, 0.3, 2.5])
def test_hss_exact_exponential(beta):
    k = np.arange(1, 30)
    fit = hss_fit(profile(1.7 * np.exp(-beta * (k - 1))))
    assert fit.K == 1.7
    assert fit.alpha == pytest.approx(beta, abs=1e-12)


def test_hss_two_point():
    fit = hss_fit(profile([1.0, math.exp(-2)]))
    assert fit.K == 1.0 and fit.alpha == pytest.approx(2.0, abs=1e-15)


def test_hss_unbounded():
    fit = hss_fit(profile([1.0, 1e-14, 0.0]))
    assert fit.unbounded
    np.testing.assert_array_equal(fit.envelope(), [1.0, 0.0, 0.0])


def test_hss_needs_positive_first_site():
    with pytest.raises(ValueError):
        hss_fit(profile([0.0, 0.0]))


def test_hss_rejects_field_above_first_site():
    with pytest.raises(ValueError):
        hss_fit(profile([0.5, 1.0, 0.1]))


@settings(max_examples=60)
@given(st.lists(st.floats(0, 2), min_size=1, max_size=50), st.floats(1e-3, 2.0))
def test_hss_bound_holds_on_retained(tail, first):
    values = np.array([first, *np.minimum(tail, first)])
    fit = hss_fit(profile(values))
    k = fit.sites[fit.retained]
    assert fit.alpha >= 0
    assert np.all(values[fit.retained] <= fit.envelope(k) * (1 + 1e-12))
    assert np.all(values[fit.retained] > HSS_FLOOR)


def test_hss_ferromagnetic_faster_than_envelope():
    cf = ensemble_average(DisorderModel(1.5, 0.8, 200, 42), 300, [2000.0])
    fit = hss_fit(cf)
    ratio = cf.values[:, 0] / fit.envelope()
    assert np.any(ratio[1:-1] < 1 - 1e-3)


def test_localization_report():
    fields = {0.8: profile([2.0, 0.5, 0.1], 5.0), 0.2: profile([2.0, 1.5, 0.9], 5.0)}
    rep = localization_report(fields, 0.2, 5.0)
    assert rep.widths == [0.2, 0.8]
    assert rep.k_thresh[0].saturated and rep.k_thresh[1].k_thresh == 3
    assert all(f.alpha >= 0 for f in rep.hss)
