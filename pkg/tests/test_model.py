import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import fsolve

from dimerlaser import model
from dimerlaser.model import (
    CavityState,
    ParameterError,
    PhysicalParams,
    PumpSchedule,
    drift,
    gain,
    imbalance,
    modal_frame,
    mode_intensities,
    order_parameter,
    reference_params,
    spontaneous_rate,
    to_modal,
    transparency_pump,
    wrap_phase,
)


@pytest.fixture
def params():
    return reference_params(0.017)


finite_complex = st.complex_numbers(min_magnitude=0.0, max_magnitude=1e4,
                                    allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# parameter validation
# ---------------------------------------------------------------------------


def test_reference_values(params):
    assert params.kappa == 140.84
    assert params.K == pytest.approx(12 * 140.84)
    assert params.gamma_c == pytest.approx(0.05 * 140.84)
    assert params.n0 == pytest.approx(1.6e4)
    assert params.V_a == pytest.approx(1.6e-14)


def test_isat_positive(params):
    assert params.I_sat == pytest.approx(5.0 / (2.2 * 0.017))


def test_beta_scaling_keeps_density(params):
    macro = model.scale_to_beta(params, 1.7e-5)
    assert macro.n0 == pytest.approx(1.6e7)
    assert macro.V_a == pytest.approx(16e-12)
    assert macro.n0 / macro.V_a == pytest.approx(params.n0 / params.V_a)


@pytest.mark.parametrize("field,value", [
    ("kappa", -1.0), ("kappa", 0.0), ("beta", 0.0), ("beta", 1.5),
    ("n0", -3.0), ("V_a", 0.0), ("gamma_tot", -2.0),
])
def test_invalid_params_rejected(params, field, value):
    kwargs = {f: getattr(params, f) for f in model.PARAM_KEYS}
    kwargs[field] = value
    with pytest.raises(ParameterError):
        PhysicalParams(**kwargs)


def test_negative_carriers_rejected():
    with pytest.raises(ParameterError):
        CavityState(a1=0j, a2=0j, n1=-1.0, n2=0.0)


# ---------------------------------------------------------------------------
# gain and spontaneous rate
# ---------------------------------------------------------------------------


def test_gain_zero_at_transparency(params):
    assert gain(params.n0, params) == 0.0


def test_gain_fig1_value(params):
    # gamma_par * beta * n0 = 2.2 * 0.017 * 1.6e4 at n = 2 n0
    assert gain(2 * params.n0, params) == pytest.approx(598.4, rel=1e-12)


def test_gain_clamp_matches_root_finding_oracle(params):
    """The bonding-mode operating point found by root finding clamps the gain
    at 2(kappa - gamma_c); the closed-form carrier value must agree."""
    P = 6.0 * transparency_pump(params)

    def residual(z):
        I, n = z
        G = gain(n, params)
        return [(0.5 * G - params.kappa + params.gamma_c) * I,
                P - params.gamma_tot * n - G * I]

    I_root, n_root = fsolve(residual, [1e3, params.n0 * 1.5], xtol=1e-13)
    n_direct = params.n0 + 2 * (params.kappa - params.gamma_c) / (params.gamma_par * params.beta)
    assert n_root == pytest.approx(n_direct, rel=1e-9)
    assert gain(n_direct, params) == pytest.approx(2 * (params.kappa - params.gamma_c), rel=1e-12)


def test_spontaneous_rate_zero_and_quadratic(params):
    assert spontaneous_rate(0.0, params) == 0.0
    r1 = spontaneous_rate(1.3e4, params)
    assert spontaneous_rate(2.6e4, params) == pytest.approx(4 * r1, rel=1e-12)


def test_spontaneous_rate_fig1_value(params):
    # independent evaluation with exact rational arithmetic
    beta = Fraction(17, 1000)
    F_P = Fraction(103, 100)
    B = Fraction(3, 10**10)
    V_a = Fraction(16, 10**15)
    n = Fraction(16000)
    expected = beta * F_P * B * n * n / V_a / 10**9  # GHz
    assert spontaneous_rate(1.6e4, params) == pytest.approx(float(expected), rel=1e-12)
    assert float(expected) == pytest.approx(84.048, rel=1e-6)


@given(st.floats(min_value=0.0, max_value=1e8), st.floats(min_value=1.0, max_value=1e8))
def test_spontaneous_rate_monotone(n_lo, dn):
    p = reference_params(0.017)
    assert spontaneous_rate(n_lo + dn, p) > spontaneous_rate(n_lo, p)


# ---------------------------------------------------------------------------
# drift
# ---------------------------------------------------------------------------


def test_drift_below_threshold_fixed_point(params):
    P = 0.5 * transparency_pump(params)
    s = CavityState(a1=0j, a2=0j, n1=P / params.gamma_tot, n2=P / params.gamma_tot)
    d = drift(s, P, params)
    assert d.da1 == 0 and d.da2 == 0
    assert d.dn1 == pytest.approx(0.0, abs=1e-9)
    assert d.dn2 == pytest.approx(0.0, abs=1e-9)


def test_drift_symmetric_state_rotates(params):
    """At the clamped gain the symmetric state's field derivative is purely
    imaginary: rotation at alpha*(kappa - gamma_c) + K."""
    n_clamp = params.n0 + 2 * (params.kappa - params.gamma_c) / (params.gamma_par * params.beta)
    P = params.gamma_tot * n_clamp  # zero intensity-drift pump for I -> 0 limit
    r = 3.7
    s = CavityState(a1=r + 0j, a2=r + 0j, n1=n_clamp, n2=n_clamp)
    d = drift(s, P, params)
    omega = params.alpha * (params.kappa - params.gamma_c) + params.K
    assert d.da1 == pytest.approx(1j * omega * r, rel=1e-12)
    assert d.da2 == pytest.approx(1j * omega * r, rel=1e-12)


@given(finite_complex, finite_complex,
       st.floats(min_value=0.0, max_value=1e8), st.floats(min_value=0.0, max_value=1e8),
       st.floats(min_value=0.0, max_value=1e7))
@settings(max_examples=50)
def test_drift_swap_equivariance(a1, a2, n1, n2, P):
    p = reference_params(0.017)
    s = CavityState(a1=a1, a2=a2, n1=n1, n2=n2)
    d = drift(s, P, p)
    d_swapped = drift(s.swapped(), P, p)
    assert d_swapped.da1 == d.da2 and d_swapped.da2 == d.da1
    assert d_swapped.dn1 == d.dn2 and d_swapped.dn2 == d.dn1


# ---------------------------------------------------------------------------
# modal transform and Bloch frame
# ---------------------------------------------------------------------------


def test_to_modal_pure_bonding():
    a_b, a_a = to_modal(1.0 + 0j, 1.0 + 0j)
    assert a_b == pytest.approx(math.sqrt(2))
    assert a_a == 0


def test_to_modal_pure_antibonding():
    a_b, a_a = to_modal(1.0 + 0j, -1.0 + 0j)
    assert a_b == 0
    assert a_a == pytest.approx(math.sqrt(2))


def test_to_modal_quadrature_pair_balanced():
    I_B, I_A = mode_intensities(1.0 + 0j, 1j)
    assert I_B == pytest.approx(1.0, rel=1e-12)
    assert I_A == pytest.approx(1.0, rel=1e-12)
    assert imbalance(I_B, I_A) == pytest.approx(0.0, abs=1e-12)


@given(finite_complex, finite_complex)
def test_modal_unitarity(a1, a2):
    a_b, a_a = to_modal(a1, a2)
    lhs = abs(a_b) ** 2 + abs(a_a) ** 2
    rhs = abs(a1) ** 2 + abs(a2) ** 2
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@given(finite_complex, finite_complex, st.floats(min_value=-math.pi, max_value=math.pi))
@settings(max_examples=100)
def test_imbalance_global_phase_invariant(a1, a2, phase):
    if abs(a1) ** 2 + abs(a2) ** 2 < 1e-12:
        return
    rot = complex(math.cos(phase), math.sin(phase))
    x0 = imbalance(*mode_intensities(a1, a2))
    x1 = imbalance(*mode_intensities(a1 * rot, a2 * rot))
    assert x1 == pytest.approx(x0, abs=1e-9)
    assert order_parameter(x1) == pytest.approx(order_parameter(x0), abs=1e-9)


def test_modal_frame_symmetric(params):
    f = modal_frame(CavityState(a1=1 + 0j, a2=1 + 0j, n1=0, n2=0))
    assert f.x == pytest.approx(1.0)
    assert f.theta == pytest.approx(math.pi / 2)
    assert f.phi == 0.0


def test_modal_frame_balanced_modes():
    f = modal_frame(CavityState(a1=1 + 0j, a2=1j, n1=0, n2=0))
    assert f.x == pytest.approx(0.0, abs=1e-12)


def test_modal_frame_pole():
    f = modal_frame(CavityState(a1=2.0 + 0j, a2=0j, n1=0, n2=0))
    assert f.theta == 0.0


def test_modal_frame_degenerate():
    with pytest.raises(model.DegenerateStateError):
        modal_frame(CavityState(a1=0j, a2=0j, n1=0, n2=0))


def test_wrap_phase_boundary():
    assert wrap_phase(math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert wrap_phase(3 * math.pi / 2) == pytest.approx(-math.pi / 2)


# ---------------------------------------------------------------------------
# order parameter
# ---------------------------------------------------------------------------


def test_order_parameter_values():
    assert order_parameter(1.0) == 0.0
    assert order_parameter(-1.0) == 0.0
    assert order_parameter(0.0) == 1.0
    assert order_parameter(0.6) == pytest.approx(0.8, rel=1e-12)


def test_order_parameter_clamps_tiny_overshoot():
    assert order_parameter(1.0 + 5e-13) == 0.0


def test_order_parameter_rejects_out_of_range():
    with pytest.raises(ValueError):
        order_parameter(1.001)


# ---------------------------------------------------------------------------
# transparency pump and schedules
# ---------------------------------------------------------------------------


def test_transparency_pump_value(params):
    assert transparency_pump(params) == pytest.approx(8e4)


def test_transparency_pump_linear(params):
    doubled = model.scale_to_beta(params, params.beta / 2)  # doubles n0
    assert transparency_pump(doubled) == pytest.approx(2 * transparency_pump(params))


def test_threshold_between_one_and_window(params):
    """Noiseless bonding-mode lasing threshold sits between P/P0 = 1 and 6.008."""
    P0 = transparency_pump(params)
    n_clamp = params.n0 + 2 * (params.kappa - params.gamma_c) / (params.gamma_par * params.beta)
    threshold = params.gamma_tot * n_clamp / P0
    assert 1.0 < threshold < 6.008


def test_schedule_constant_and_ramp():
    c = PumpSchedule.constant(5.0, duration=2.0)
    assert c.pump_at(0.0) == 5.0 and c.pump_at(1.7) == 5.0
    r = PumpSchedule.ramp(0.0, 10.0, duration=2.0)
    assert r.pump_at(0.0) == 0.0
    assert r.pump_at(1.0) == pytest.approx(5.0)
    assert r.pump_at(5.0) == pytest.approx(10.0)  # clamps past the end
    with pytest.raises(ParameterError):
        PumpSchedule("constant", 1.0, 2.0, 1.0)
    with pytest.raises(ParameterError):
        PumpSchedule.constant(-1.0, 1.0)


# ---------------------------------------------------------------------------
# parameter files
# ---------------------------------------------------------------------------


def test_params_roundtrip(tmp_path, params):
    path = tmp_path / "params.txt"
    path.write_text(model.dump_params(params, extras={"P_over_P0": 6.02}))
    loaded, extras = model.load_params(path)
    assert loaded == params
    assert extras["P_over_P0"] == 6.02


def test_params_unknown_key_suggests(tmp_path, params):
    path = tmp_path / "params.txt"
    path.write_text(model.dump_params(params).replace("kappa =", "kapa ="))
    with pytest.raises(ParameterError, match="kappa"):
        model.load_params(path)


def test_params_parse_error_carries_line_number(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("kappa = 140.84\nnot a pair\n")
    with pytest.raises(ParameterError, match=":2"):
        model.load_params(path)


def test_params_missing_key(tmp_path, params):
    text = "\n".join(line for line in model.dump_params(params).splitlines()
                     if not line.startswith("alpha"))
    path = tmp_path / "params.txt"
    path.write_text(text)
    with pytest.raises(ParameterError, match="alpha"):
        model.load_params(path)


def test_params_hash_stable(params):
    assert model.params_hash(params) == model.params_hash(reference_params(0.017))
    assert model.params_hash(params) != model.params_hash(reference_params(1.7e-5))
