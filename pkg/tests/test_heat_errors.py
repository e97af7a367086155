import math

import numpy as np
import pytest

from spde1d import heat_errors as he

from oracles import spatial_tail_mp, temporal_mode_mp, temporal_mode_quad_mp, ou_pair_mismatch_brute

# values pinned from the mp oracles in oracles.py; regression guards
FROZEN = {
    "temporal_1_1": 0.2250558010675487,
    "temporal_16_64": 0.18332083461176604,
    "temporal_8_all": 0.22103800978968863,
    "spatial_4": 0.10588839370418567,
    "full_16_64": 0.18545066245028516,
    "upper_temporal_1": 2.5481367392847365,
    "lower_spatial_4": 0.06326887229572566,
    "mode_1_1": 0.050650113594156054,
}


def test_frozen_values():
    assert he.temporal_error_exact(1, 1, 1.0, 1.0) == pytest.approx(
        FROZEN["temporal_1_1"], rel=1e-12)
    assert he.temporal_error_exact(16, 64, 1.0, 1.0) == pytest.approx(
        FROZEN["temporal_16_64"], rel=1e-12)
    assert he.temporal_error_exact(8, "all", 1.0, 1.0) == pytest.approx(
        FROZEN["temporal_8_all"], rel=1e-12)
    assert he.spatial_error_exact(4, 1.0, 1.0) == pytest.approx(
        FROZEN["spatial_4"], rel=1e-12)
    assert he.full_error_exact(16, 64, 1.0, 1.0) == pytest.approx(
        FROZEN["full_16_64"], rel=1e-12)
    assert he.bound_upper_temporal(1, 1.0, 1.0) == pytest.approx(
        FROZEN["upper_temporal_1"], rel=1e-12)
    assert he.bound_lower_spatial(4, 1.0, 1.0) == pytest.approx(
        FROZEN["lower_spatial_4"], rel=1e-12)
    assert he.temporal_mode_integral(1, 1, 1.0, 1.0) == pytest.approx(
        FROZEN["mode_1_1"], rel=1e-12)


@pytest.mark.parametrize("M,k,T,nu", [
    (1, 1, 1.0, 1.0), (4, 2, 1.0, 1.0), (16, 5, 1.0, 1.0),
    (3, 7, 1.0, 1.0), (7, 3, 0.5, 2.0), (32, 1, 2.0, 0.05),
])
def test_mode_integral_against_mp(M, k, T, nu):
    got = he.temporal_mode_integral(M, k, T, nu)
    assert got == pytest.approx(temporal_mode_mp(M, k, T, nu), rel=1e-13)
    assert got == pytest.approx(temporal_mode_quad_mp(M, k, T, nu), rel=1e-12)


def test_mode_integral_against_package_quadrature():
    for M, k in [(2, 3), (9, 9), (16, 1)]:
        closed = he.temporal_mode_integral(M, k, 1.0, 1.0)
        quad = he.temporal_mode_integral_quadrature(M, k, 1.0, 1.0)
        assert closed == pytest.approx(quad, rel=1e-10)


def test_mode_integral_branches_meet_at_crossover():
    # x = mu h straddling the series/closed switch must agree with mp
    mu = math.pi**2
    for eps in (-1e-9, 0.0, 1e-9):
        h = (0.5 + eps) / mu
        M = 1
        got = he.temporal_mode_integral(M, 1, h * M, 1.0)
        want = temporal_mode_mp(M, 1, h * M, 1.0)
        assert got == pytest.approx(want, rel=1e-13)


def test_spatial_series_basel_limit():
    # T large: squared value approaches sum 1/(2 pi^2 k^2) = 1/12
    val = he.spatial_error_exact(0, 50.0, 1.0)
    assert val**2 == pytest.approx(1.0 / 12.0, rel=1e-6)


@pytest.mark.parametrize("N", [1, 4, 17])
def test_spatial_series_against_mp(N):
    got = he.spatial_error_exact(N, 1.0, 1.0)
    assert got**2 == pytest.approx(spatial_tail_mp(N, 1.0, 1.0), rel=1e-12)


def test_spatial_tail_tolerance_knob():
    loose = he.spatial_error_exact(4, 1.0, 1.0, tail_rel_tol=1e-6)
    assert loose == pytest.approx(FROZEN["spatial_4"], rel=1e-6)


def test_temporal_error_monotone_in_steps():
    vals = [he.temporal_error_exact(M, 32, 1.0, 1.0) for M in (1, 2, 4, 8, 16, 32, 64)]
    assert all(a >= b - 1e-15 for a, b in zip(vals, vals[1:]))


def test_temporal_error_vanishing_time_step():
    assert he.temporal_error_exact(2**20, 4, 1.0, 1.0) <= 1e-2


def test_temporal_all_exceeds_any_finite_band():
    finite = he.temporal_error_exact(8, 4096, 1.0, 1.0)
    full = he.temporal_error_exact(8, "all", 1.0, 1.0)
    assert finite < full
    # the gap is the pure-diffusion tail above the band, 1/(2 mu_k) summed
    from scipy.special import polygamma
    tail = float(polygamma(1, 4097)) / (2 * math.pi**2)
    assert full**2 - finite**2 == pytest.approx(tail, rel=1e-3)


def test_full_error_composition():
    t = he.temporal_error_exact(16, 64, 1.0, 1.0)
    s = he.spatial_error_exact(64, 1.0, 1.0)
    assert he.full_error_exact(16, 64, 1.0, 1.0) == pytest.approx(
        math.hypot(t, s), rel=1e-15)
    assert he.full_error_exact(math.inf, 64, 1.0, 1.0) == pytest.approx(s, rel=1e-15)
    assert he.full_error_exact(16, "all", 1.0, 1.0) == pytest.approx(
        he.temporal_error_exact(16, "all", 1.0, 1.0), rel=1e-15)


@pytest.mark.parametrize("T,nu", [(1.0, 1.0), (0.5, 2.0), (2.0, 0.1)])
@pytest.mark.parametrize("M,N", [(1, 1), (4, 16), (64, 3), (1024, 256)])
def test_bounds_sandwich_spot_checks(T, nu, M, N):
    t = he.temporal_error_exact(M, N, T, nu)
    assert he.bound_lower_temporal(M, N, T, nu) <= t <= he.bound_upper_temporal(M, T, nu)
    s = he.spatial_error_exact(N, T, nu)
    assert he.bound_lower_spatial(N, T, nu) <= s <= he.bound_upper_spatial(N, T, nu)
    f = he.full_error_exact(M, N, T, nu)
    lo, hi = he.bounds_full(M, N, T, nu)
    assert lo <= f <= hi


def test_lower_temporal_clamps_to_zero_when_band_resolved():
    # N^2 T / (2M) small: the lower-bound integration window is empty
    assert he.bound_lower_temporal(64, 1, 1.0, 1.0) == 0.0


def test_upper_spatial_closed_form():
    assert he.bound_upper_spatial(9, 1.0, 2.0) == pytest.approx(
        1.0 / (math.pi * math.sqrt(2.0 * 2.0)) / math.sqrt(9.0), rel=1e-15)


def test_hs_factor_monotonicity_edges():
    assert he.hs_factor_monotone_in_semigroup_time(4, 0.3, 0.3, 1.0)
    assert he.hs_factor_monotone_in_increment_time(4, 0.5, 0.0, 0.0)
    with pytest.raises(ValueError):
        he.hs_factor_monotone_in_semigroup_time(4, 0.5, 0.2, 1.0)


def test_hs_monotonicity_audit_clean():
    assert he.run_hs_monotonicity_audit(trials=200, seed=3) == 0


def test_ou_pair_mismatch_against_brute_force():
    got = he.ou_pair_mismatch_exact(4, 16, 2, 3, 1.0, 1.0)
    want = ou_pair_mismatch_brute(4, 16, 2, 3, 1.0, 1.0)
    np.testing.assert_allclose(got, want, rtol=1e-12, atol=1e-16)
    assert got[0] == 0.0


def test_ou_pair_mismatch_guards():
    with pytest.raises(ValueError):
        he.ou_pair_mismatch_exact(5, 16, 2, 3, 1.0, 1.0)
    with pytest.raises(ValueError):
        he.ou_pair_mismatch_exact(4, 16, 4, 3, 1.0, 1.0)


def test_fit_rate_recovers_synthetic_power_law():
    errors = {M: 1.7 * M**-0.25 for M in (4, 16, 64, 256)}
    fit = he.fit_rate(errors)
    assert fit.slope == pytest.approx(-0.25, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(1.7), abs=1e-12)
    assert fit.residual < 1e-12
    assert len(fit.points) == 4


def test_fit_rate_guards():
    with pytest.raises(ValueError):
        he.fit_rate({4: 1.0, 16: 0.5})
    with pytest.raises(ValueError):
        he.fit_rate({4: 1.0, 16: 0.5, 64: -0.1})


def test_exact_rate_windows():
    temporal = {M: he.temporal_error_exact(M, 2048, 1.0, 1.0)
                for M in (4, 16, 64, 256, 1024, 4096)}
    slope_t = he.fit_rate(temporal).slope
    assert -0.30 <= slope_t <= -0.20
    spatial = {N: he.spatial_error_exact(N, 1.0, 1.0) for N in (8, 16, 32, 64, 128)}
    slope_s = he.fit_rate(spatial).slope
    assert -0.55 <= slope_s <= -0.45


def test_error_report_row_roundtrip():
    rep = he.error_report("temporal", 16, 64, 1.0, 1.0)
    assert rep.sandwiched(1e-12)
    row = rep.as_csv_row()
    m, n, exact, lower, upper, kind = row.split(",")
    assert (int(m), int(n), kind) == (16, 64, "temporal")
    assert float(exact) == rep.exact and float(lower) == rep.lower
    assert he.REPORT_HEADER == "M,N,exact,lower,upper,kind"


def test_error_report_all_modes_row():
    rep = he.error_report("temporal", 16, "all", 1.0, 1.0)
    assert rep.N == "all"
    assert "all" in rep.as_csv_row()


def test_error_report_kind_guard():
    with pytest.raises(ValueError):
        he.error_report("mixed", 4, 4, 1.0, 1.0)
