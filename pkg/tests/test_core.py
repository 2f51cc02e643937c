import math
import warnings

import pytest
from hypothesis import given, strategies as st

from ponderoscatter import PhysicalConfig, derive_initial_state, derive_sim_params
from ponderoscatter.core import (
    ParameterError,
    cm_to_r,
    free_electron,
    r_to_cm,
)

# 10 keV electron, m c^2 = 0.511 MeV; q_minus from gamma - sqrt(gamma^2 - 1)
GAMMA0 = 1.019569471624266
BETA0 = 0.19498541419117452
QMINUS0 = 0.8207682959029314


def test_free_electron_oracle():
    g, b, qm = free_electron(10.0)
    assert g == pytest.approx(GAMMA0, rel=1e-15)
    assert b == pytest.approx(BETA0, rel=1e-14)
    assert qm == pytest.approx(QMINUS0, rel=1e-14)
    assert g * (1 - b) == pytest.approx(qm, rel=1e-14)


def test_defaults(params):
    assert params.delta == pytest.approx(1 / (20 * math.pi), rel=1e-15)
    assert params.delta_prime == pytest.approx(1 / 480)
    assert params.eta0 == pytest.approx(3 / math.sqrt(2))
    assert params.amplitude == pytest.approx(2.25)
    assert params.rayleigh_over_r == pytest.approx(20 * math.pi)
    assert params.detector.z == pytest.approx(11660.0)
    assert params.detector.r1 == pytest.approx(8990.0)
    assert params.detector.r2 == pytest.approx(9890.0)
    assert params.detector.to_cm(params.focal_radius_um) == pytest.approx((11.66, 8.99, 9.89))


def test_eta0_overrides_default_a():
    p = derive_sim_params(PhysicalConfig(eta0=1.5))
    assert p.eta0 == 1.5
    with pytest.raises(ParameterError):
        PhysicalConfig(eta0=1.0, a=2.0).intensity()


def test_pulse_too_short():
    with pytest.raises(ParameterError):
        derive_sim_params(PhysicalConfig(omega_tau=50.0))


def test_large_delta_warns():
    with pytest.warns(UserWarning):
        derive_sim_params(PhysicalConfig(wavelength_um=10.0))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        derive_sim_params(PhysicalConfig())


@pytest.mark.parametrize(
    "kw",
    [
        dict(wavelength_um=-1.0),
        dict(focal_radius_um=0.0),
        dict(electron_kev=float("nan")),
        dict(mu=float("inf")),
        dict(detector_r1_cm=10.0, detector_r2_cm=9.0),
        dict(detector_z_cm=5.0),
        dict(envelope="gauss"),
        dict(a=-1.0),
        dict(w_threshold_mev=-0.1),
    ],
)
def test_invalid_config(kw):
    with pytest.raises(ParameterError):
        derive_sim_params(PhysicalConfig(**kw))


def test_initial_state(params):
    s = derive_initial_state(params, (1e-3, -2e-3, -6.0))
    assert s.phi == -params.omega_tau
    assert (s.x, s.y, s.z) == (1e-3, -2e-3, -6.0)
    assert s.qx == 0.0 and s.qy == 0.0
    assert s.q_minus == params.q_minus0
    with pytest.raises(ParameterError):
        derive_initial_state(params, (float("nan"), 0.0, 0.0))


@given(st.floats(1e-6, 1e3), st.floats(0.1, 100.0))
def test_unit_round_trip(x, f):
    assert r_to_cm(cm_to_r(x, f), f) == pytest.approx(x, rel=1e-12)


@given(st.floats(0.01, 5000.0), st.floats(1.001, 2.0))
def test_q_minus_decreases_with_energy(kev, factor):
    assert free_electron(kev * factor)[2] < free_electron(kev)[2]
