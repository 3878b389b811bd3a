import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import rieszfield as rf
from conftest import ProbeStream


def test_fbm_covariance_values():
    for hurst in (0.2, 0.5, 0.8):
        assert rf.fbm_covariance(1.0, 1.0, hurst) == pytest.approx(1.0)
    assert rf.fbm_covariance(0.3, 0.7, 0.5) == pytest.approx(0.3)
    assert rf.fbm_covariance(0.0, 0.9, 0.3) == 0.0
    with pytest.raises(ValueError):
        rf.fbm_covariance(-0.1, 0.5, 0.5)


def test_fbs_covariance_values():
    x = np.array([0.4, -0.2])
    assert rf.fbs_covariance(x, x, 0.3) == pytest.approx(np.linalg.norm(x) ** 0.6)
    assert rf.fbs_covariance([0.0, 0.0], x, 0.3) == 0.0


def test_fbs_rotation_invariance():
    rng = np.random.default_rng(1)
    theta = 0.77
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    for _ in range(10):
        x, y = rng.standard_normal(2), rng.standard_normal(2)
        base = rf.fbs_covariance(x, y, 0.65)
        rot = rf.fbs_covariance(R @ x, R @ y, 0.65)
        assert rot == pytest.approx(base, abs=1e-12)


def test_fgn_autocovariance_values():
    assert rf.fgn_autocovariance(0, 1.0, 0.3) == pytest.approx(1.0)
    for n in range(1, 6):
        assert rf.fgn_autocovariance(n, 0.7, 0.5) == pytest.approx(0.0, abs=1e-14)
    expected = 0.5 * (2.0 ** 1.5 - 2.0)
    assert rf.fgn_autocovariance(1, 1.0, 0.75) == pytest.approx(expected, rel=1e-12)


@given(st.floats(0.05, 0.95), st.floats(0.0, 3.0), st.floats(0.05, 1.5),
       st.integers(0, 10))
@settings(max_examples=60, deadline=None)
def test_fgn_matches_fbm_increment_covariance(hurst, t, h, n):
    s = t + n * h
    direct = rf.fgn_autocovariance(n, h, hurst)
    from_fbm = (rf.fbm_covariance(t + h, s + h, hurst)
                - rf.fbm_covariance(t + h, s, hurst)
                - rf.fbm_covariance(t, s + h, hurst)
                + rf.fbm_covariance(t, s, hurst))
    assert abs(direct - from_fbm) <= 1e-12 * max(1.0, abs(direct))


def test_hosking_impulse_brownian_and_white():
    assert np.array_equal(rf.hosking_impulse(1.0, 6), np.ones(6))
    white = rf.hosking_impulse(1e-300, 6)   # beta -> 0 limit
    assert white[0] == 1.0 and np.abs(white[1:]).max() < 1e-290


def test_hosking_impulse_half_order_series():
    h = rf.hosking_impulse(0.5, 4)
    assert h == pytest.approx([1.0, 0.5, 0.375, 0.3125], rel=1e-15)


def test_hosking_impulse_matches_symbolic_series():
    import sympy

    w, beta = sympy.symbols("w beta")
    series = sympy.series((1 - w) ** (-sympy.Rational(1, 2)), w, 0, 11).removeO()
    coeffs = [float(series.coeff(w, k)) for k in range(11)]
    h = rf.hosking_impulse(0.5, 11)
    assert np.abs(h - np.array(coeffs)).max() <= 1e-12


def test_hosking_filter_running_sum_probe():
    out = rf.hosking_filter(np.ones(16), 1.0)
    assert out == pytest.approx(np.arange(1.0, 17.0), abs=1e-10)


def test_hosking_filter_matches_naive_convolution():
    rng = np.random.default_rng(2)
    z = rng.standard_normal(64)
    for beta in (0.3, 0.5, 1.7):
        got = rf.hosking_filter(z, beta)
        h = rf.hosking_impulse(beta, 64)
        naive = np.array([np.dot(h[: k + 1][::-1], z[: k + 1]) for k in range(64)])
        assert np.abs(got - naive).max() <= 1e-10 * np.abs(naive).max()


def test_hosking_sample_interface():
    spec = rf.HoskingSpec(beta=0.5, length=64)
    a = rf.hosking_sample(spec, rf.GaussianStream(3))
    b = rf.hosking_sample(spec, rf.GaussianStream(3))
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        rf.HoskingSpec(beta=0.5, length=48)
    with pytest.raises(ValueError):
        rf.HoskingSpec(beta=2.5, length=64)


def test_hosking_periodogram_slope_near_one_over_f():
    spec = rf.HoskingSpec(beta=0.5, length=2 ** 13)
    stream = rf.GaussianStream(21)
    series = np.vstack([rf.hosking_sample(spec, stream.child(r)) for r in range(50)])
    freqs, psd = rf.periodogram_1d(series)
    n = spec.length
    mid = 0.5 * (np.log10(1.0 / n) + np.log10(0.5))
    sel = (freqs >= 10 ** (mid - 1)) & (freqs <= 10 ** (mid + 1))
    fit = rf.fit_power_law(freqs[sel], np.log10(psd[sel]), 0.0)
    assert -1.15 <= fit.slope <= -0.85


def test_cholesky_sample_identity_passthrough():
    z = np.array([0.3, -1.2, 0.9])
    out = rf.cholesky_sample(np.eye(3), ProbeStream(z))
    assert out == pytest.approx(z)


def test_cholesky_sample_correlation():
    rho = 0.6
    C = np.array([[1.0, rho], [rho, 1.0]])
    stream = rf.GaussianStream(5)
    draws = np.array([rf.cholesky_sample(C, stream) for _ in range(10 ** 5)])
    emp = np.corrcoef(draws.T)[0, 1]
    assert emp == pytest.approx(rho, abs=0.01)


def test_cholesky_sample_bridge_variance():
    system = rf.assemble_interval(64, 1.0, rf.DIRICHLET, rf.DIRICHLET)
    spec = rf.RieszFieldSpec(hurst=0.5, dim=1)
    C = rf.covariance_spectral(system, spec)
    mid = np.nonzero(np.abs(system.points[system.free_nodes, 0] - 0.5) < 1e-12)[0][0]
    stream = rf.GaussianStream(6)
    S = 10 ** 4
    vals = np.array([rf.cholesky_sample(C, stream)[mid] for _ in range(S)])
    se = 0.25 * np.sqrt(2.0 / S)
    assert abs(vals.var() - 0.25) <= 3 * se


def test_cholesky_sample_rejects_indefinite():
    C = np.array([[1.0, 2.0], [2.0, 1.0]])    # eigenvalues 3, -1
    with pytest.raises(ValueError, match="indefinite"):
        rf.cholesky_sample(C, rf.GaussianStream(0))


def test_fgn_series_periodogram_slope():
    # alpha = 2H - 1 correspondence for increments, H = 0.75 -> slope -0.5
    hurst = 0.75
    n = 1024
    lags = np.arange(n)
    g = np.array([rf.fgn_autocovariance(k, 1.0, hurst) for k in lags])
    from scipy.linalg import toeplitz

    C = toeplitz(g)
    stream = rf.GaussianStream(30)
    series = np.array([rf.cholesky_sample(C, stream) for _ in range(100)])
    freqs, psd = rf.periodogram_1d(series)
    mid = 0.5 * (np.log10(1.0 / n) + np.log10(0.5))
    sel = (freqs >= 10 ** (mid - 1)) & (freqs <= 10 ** (mid + 1))
    fit = rf.fit_power_law(freqs[sel], np.log10(psd[sel]), 0.0)
    assert abs(fit.slope - (-(2 * hurst - 1))) <= 0.15
