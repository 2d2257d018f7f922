import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dimerlaser import stats
from dimerlaser.stats import (
    DegenerateStatisticsError,
    MomentAccumulator,
    amplitude_from_cross,
    autocorr_width,
    cross_from_imbalance,
    fit_equilibrium,
    g2_zero,
    joint_histogram,
    ks_uniform,
    lowpass,
    sample_equilibrium,
)


def rng(seed=0):
    return np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# g2 estimators
# ---------------------------------------------------------------------------


def test_g2_constant_series():
    series = np.full(100, 3.7)
    assert g2_zero(series, series) == pytest.approx(1.0, rel=1e-12)


def test_g2_symmetry():
    r = rng(1)
    a, b = r.exponential(2.0, 2000), r.exponential(5.0, 2000)
    assert g2_zero(a, b) == pytest.approx(g2_zero(b, a), rel=1e-14)


def test_g2_uniform_imbalance_two_thirds():
    """Modes fed by a flat imbalance: I_B = c(1+x)/2, I_A = c(1-x)/2 with x
    uniform on [-1, 1] gives g2_BA = <(1-x^2)>/(1-<x>^2) -> 2/3."""
    x = rng(2).uniform(-1.0, 1.0, 400_000)
    c = 10.0
    g2 = g2_zero(c * (1 + x) / 2, c * (1 - x) / 2)
    assert g2 == pytest.approx(2.0 / 3.0, abs=0.005)


def test_g2_thermal_series_two():
    series = rng(3).exponential(4.0, 500_000)
    assert g2_zero(series, series) == pytest.approx(2.0, abs=0.02)


def test_g2_degenerate():
    with pytest.raises(DegenerateStatisticsError):
        g2_zero(np.zeros(10), np.ones(10))
    with pytest.raises(DegenerateStatisticsError):
        g2_zero([1.0], [1.0])


# ---------------------------------------------------------------------------
# cross-correlation from imbalance moments
# ---------------------------------------------------------------------------


def test_cross_from_imbalance_flat_limit():
    assert cross_from_imbalance(1.0, 0.0, 1.0 / 3.0) == pytest.approx(2.0 / 3.0, rel=1e-12)


def test_cross_from_imbalance_frozen_x():
    assert cross_from_imbalance(1.0, 0.4, 0.16) == pytest.approx(1.0, rel=1e-12)


def test_cross_from_imbalance_degenerate_flag():
    assert math.isnan(cross_from_imbalance(1.0, 1.0 - 1e-12, 1.0 - 1e-12))
    with pytest.raises(ValueError):
        cross_from_imbalance(1.0, 1.0, 1.0)


def test_identity_direct_vs_prediction_on_product_grid():
    """On an outer-product sample set the empirical <I x> factorises exactly,
    so the direct estimator and the moment prediction agree to rounding."""
    r = rng(4)
    I = r.exponential(1.0, 300) + 0.5
    x = r.uniform(-0.9, 0.9, 401)
    II, xx = np.meshgrid(I, x)
    I_B = II * (1 + xx) / 2
    I_A = II * (1 - xx) / 2
    direct = g2_zero(I_B, I_A)
    g2_ii = g2_zero(II, II)
    predicted = cross_from_imbalance(g2_ii, float(xx.mean()), float((xx**2).mean()))
    assert direct == pytest.approx(predicted, rel=1e-12)


def test_amplitude_from_cross():
    assert amplitude_from_cross(2.0 / 3.0) == pytest.approx(0.8165, abs=5e-5)
    assert amplitude_from_cross(1.0) == 1.0
    assert amplitude_from_cross(0.7) == pytest.approx(0.8367, abs=5e-5)
    with pytest.raises(ValueError):
        amplitude_from_cross(-0.1)


# ---------------------------------------------------------------------------
# moment accumulator
# ---------------------------------------------------------------------------


def _fill(acc, I_B, I_A):
    acc.add(I_B, I_A)
    return acc


def test_accumulator_matches_direct_estimators():
    r = rng(5)
    x = r.uniform(-0.99, 0.99, 20_000)
    I = r.exponential(1.0, 20_000) + 0.2
    I_B, I_A = I * (1 + x) / 2, I * (1 - x) / 2
    cs = _fill(MomentAccumulator(), I_B, I_A).correlation_set()
    assert cs.g2_BA == pytest.approx(g2_zero(I_B, I_A), rel=1e-12)
    assert cs.g2_II == pytest.approx(g2_zero(I, I), rel=1e-12)
    assert cs.mean_x == pytest.approx(x.mean(), rel=1e-9)
    assert cs.mean_A == pytest.approx(np.sqrt(1 - x**2).mean(), rel=1e-9)


def test_accumulator_order_parameter_bounds():
    r = rng(6)
    for seed in range(5):
        x = np.random.default_rng(seed).uniform(-1, 1, 1000)
        I = np.random.default_rng(seed + 50).exponential(1.0, 1000) + 0.1
        cs = _fill(MomentAccumulator(), I * (1 + x) / 2, I * (1 - x) / 2).correlation_set()
        assert 0.0 <= cs.mean_A <= 1.0
        assert cs.var_A <= 0.25 + 1e-12


@given(st.lists(st.floats(min_value=0.01, max_value=50.0), min_size=6, max_size=60),
       st.integers(min_value=1, max_value=5))
@settings(max_examples=40)
def test_accumulator_merge_associative(values, cut_count):
    vals = np.asarray(values)
    I_B, I_A = vals, vals[::-1].copy()
    whole = _fill(MomentAccumulator(), I_B, I_A)
    cuts = sorted({1 + (i * (len(vals) - 1)) // (cut_count + 1) for i in range(1, cut_count + 1)})
    parts = []
    prev = 0
    for c in cuts + [len(vals)]:
        parts.append(_fill(MomentAccumulator(), I_B[prev:c], I_A[prev:c]))
        prev = c
    merged = parts[0]
    for part in parts[1:]:
        merged = merged.merge(part)
    assert merged.count == whole.count
    for key in whole.s:
        assert merged.s[key] == pytest.approx(whole.s[key], rel=1e-12, abs=1e-12)
    # commutativity
    swapped = parts[-1]
    for part in parts[-2::-1]:
        swapped = swapped.merge(part)
    for key in whole.s:
        assert swapped.s[key] == pytest.approx(merged.s[key], rel=1e-12, abs=1e-12)


def test_accumulator_binned_shape():
    acc = MomentAccumulator(shape=(3,))
    acc.add(np.ones((5, 3)), 2 * np.ones((5, 3)))
    assert acc.count == 5
    assert acc.mean("I_B") == pytest.approx(np.ones(3))
    assert acc.mean("x") == pytest.approx(-np.ones(3) / 3)


# ---------------------------------------------------------------------------
# equilibrium fit
# ---------------------------------------------------------------------------


def test_fit_uniform_lambda_zero():
    x = rng(7).uniform(-1, 1, 100_000)
    fit = fit_equilibrium(x)
    assert abs(fit.lam) < 3 * math.sqrt(3.0 / x.size) * 2
    assert fit.normalization == pytest.approx(0.5, abs=1e-3)


def test_fit_recovers_lambda_three():
    x = sample_equilibrium(3.0, 100_000, rng(8))
    fit = fit_equilibrium(x)
    assert fit.lam == pytest.approx(3.0, abs=0.1)


@pytest.mark.parametrize("lam", [-6.0, -1.0, -0.1, 0.5, 2.0, 8.0])
def test_fit_recovers_sign_and_value(lam):
    x = sample_equilibrium(lam, 50_000, rng(abs(hash(lam)) % 2**32))
    fit = fit_equilibrium(x)
    assert fit.lam == pytest.approx(lam, abs=0.15 * max(1.0, abs(lam)))


def test_fit_normalization_integral():
    from scipy.integrate import quad

    for lam in (-4.0, -0.3, 0.0, 0.7, 5.0):
        n = stats._lambda_normalization(lam)
        integral, err = quad(lambda v: n * math.exp(-lam * v), -1.0, 1.0, epsabs=1e-13)
        assert integral == pytest.approx(1.0, abs=1e-10)


def test_fit_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_equilibrium(np.linspace(-1, 1, 50))
    with pytest.raises(ValueError):
        fit_equilibrium(np.linspace(-1.5, 1, 500))


def test_ks_uniform_flat_accepts_skewed_rejects():
    flat = rng(9).uniform(-1, 1, 5000)
    assert ks_uniform(flat) < stats.ks_critical(5000, alpha=0.01)
    skewed = sample_equilibrium(1.0, 5000, rng(10))
    assert ks_uniform(skewed) > stats.ks_critical(5000, alpha=0.01)


# ---------------------------------------------------------------------------
# joint histogram
# ---------------------------------------------------------------------------


def test_joint_histogram_single_sample():
    x_edges, i_edges = stats.default_edges(8, 4, i_max=2.0)
    h = joint_histogram([0.1], [1.1], x_edges, i_edges)
    assert h.total == 1
    assert h.counts.sum() == 1


def test_joint_histogram_marginals_match_1d():
    r = rng(11)
    x = r.uniform(-1, 1, 5000)
    I = r.exponential(1.0, 5000)
    x_edges, i_edges = stats.default_edges(16, 12, i_max=float(3 * I.mean()))
    h = joint_histogram(x, I, x_edges, i_edges)
    inside = I <= i_edges[-1]
    np.testing.assert_array_equal(h.x_marginal(), np.histogram(x[inside], x_edges)[0])
    np.testing.assert_array_equal(h.i_marginal(), np.histogram(I[x <= 1], i_edges)[0][: len(i_edges) - 1])


def test_joint_histogram_csv(tmp_path):
    x_edges, i_edges = stats.default_edges(4, 3, i_max=1.5)
    h = joint_histogram([-0.5, 0.1, 0.2], [0.3, 0.6, 1.2], x_edges, i_edges)
    path = tmp_path / "hist.csv"
    h.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# x_edges,")
    assert lines[1].startswith("# i_edges,")
    counts = np.array([[int(v) for v in row.split(",")] for row in lines[3:]])
    np.testing.assert_array_equal(counts, h.counts)


def test_joint_histogram_rejects_bad_edges():
    with pytest.raises(ValueError):
        joint_histogram([0.0], [1.0], [0.5, 0.0], [0.0, 1.0])
    with pytest.raises(ValueError):
        joint_histogram([0.0, 0.1], [1.0], [-1, 1], [0, 1])


# ---------------------------------------------------------------------------
# autocorrelation width
# ---------------------------------------------------------------------------


def test_autocorr_width_white_noise():
    dt = 0.01
    trace = rng(12).standard_normal(200_000)
    width = autocorr_width(trace, dt)
    assert width == pytest.approx(dt, rel=0.1)


def test_autocorr_width_ou_process():
    """Ornstein-Uhlenbeck with correlation time tau has FWHM = 2 ln2 tau."""
    tau = 1.0
    dt = 0.01
    n = 400_000
    r = rng(13)
    x = np.empty(n)
    x[0] = 0.0
    rho = math.exp(-dt / tau)
    sigma = math.sqrt(1 - rho * rho)
    noise = r.standard_normal(n - 1)
    for k in range(1, n):
        x[k] = rho * x[k - 1] + sigma * noise[k - 1]
    width = autocorr_width(x, dt)
    assert width == pytest.approx(2 * math.log(2) * tau, rel=0.1)


def test_autocorr_width_insufficient_length():
    with pytest.raises(ValueError):
        autocorr_width(np.array([1.0, 2.0, 1.5]), 0.01)
    with pytest.raises(DegenerateStatisticsError):
        autocorr_width(np.full(1000, 2.0), 0.01)


# ---------------------------------------------------------------------------
# low-pass filter
# ---------------------------------------------------------------------------


def test_lowpass_constant_unchanged():
    trace = np.full(1000, 2.5)
    out = lowpass(trace, dt=2e-4, bandwidth=0.6)
    np.testing.assert_allclose(out, trace, rtol=1e-12)


def _tone_response(freq, bandwidth, dt=2e-4, n=400_000):
    t = np.arange(n) * dt
    tone = np.sin(2 * np.pi * freq * t)
    out = lowpass(tone, dt, bandwidth)
    tail = out[n // 4:]
    # amplitude via quadrature projection
    c = 2 * np.mean(tail * np.cos(2 * np.pi * freq * t[n // 4:]))
    s = 2 * np.mean(tail * np.sin(2 * np.pi * freq * t[n // 4:]))
    return math.hypot(c, s)


def test_lowpass_kills_beat_band():
    amp = _tone_response(538.0, bandwidth=0.6)
    assert 20 * math.log10(max(amp, 1e-12)) < -50.0


def test_lowpass_passes_slow_band():
    amp = _tone_response(0.1, bandwidth=0.6, n=2_000_000)
    assert 20 * math.log10(amp) > -1.0


def test_lowpass_preserves_mean_of_stationary_trace():
    r = rng(14)
    trace = 5.0 + r.standard_normal(500_000)
    out = lowpass(trace, dt=2e-4, bandwidth=0.6)
    assert out.mean() == pytest.approx(trace.mean(), abs=0.02)
