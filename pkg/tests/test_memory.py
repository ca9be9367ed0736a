import math
import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from atsmem import memory
from atsmem.errors import DomainError

from _invariants import (check_backward_increasing, check_efficiency_bounds,
                         check_efficiency_vanishes_as_F_to_zero, check_forward_argmax)


def test_forward_at_working_point_closed_form():
    # d = 4F gives x = 2: 4 e^-2 e^-1/F
    for F in (0.5, 3.7, 50.0):
        assert memory.eta_forward(4 * F, F) == pytest.approx(4 * math.exp(-2 - 1 / F), rel=1e-14)


def test_forward_ceiling_values():
    assert memory.eta_forward(4 * 3.7, 3.7) == pytest.approx(0.41, abs=0.02)
    assert memory.eta_forward(4e4, 1e4) == pytest.approx(0.541, abs=1e-3)
    assert memory.eta_forward(4e12, 1e12) == pytest.approx(4 * math.exp(-2), rel=1e-9)


def test_forward_argmax_by_scipy():
    for F in (0.3, 3.7, 120.0):
        res = minimize_scalar(lambda d: -memory.eta_forward(d, F), bounds=(0, 20 * F), method="bounded",
                              options={"xatol": 1e-10 * F})
        assert res.x == pytest.approx(4 * F, rel=1e-5)


def test_backward_limits():
    F = 5.0
    assert memory.eta_backward(0.0, F) == 0.0
    assert memory.eta_backward(1e6, F) == pytest.approx(math.exp(-1 / F), rel=1e-14)
    # small d expansion (d/2F)^2 e^-1/F
    d = 1e-6
    assert memory.eta_backward(d, F) == pytest.approx((d / (2 * F)) ** 2 * math.exp(-1 / F), rel=1e-6)


def test_backward_at_nearly_pure_bec_od():
    # d ~ 200 at a 170 MHz bandwidth on D1 leaves little room below the 1/F ceiling
    from atsmem.phys import rb87
    F = memory.ats_factor(170e6, rb87(memory_line="D1"))
    assert memory.eta_backward(200, F) >= 0.9


def test_efficiency_dispatch_and_errors():
    assert memory.efficiency(3, 2, "forward") == memory.eta_forward(3, 2)
    assert memory.efficiency(3, 2) == memory.eta_backward(3, 2)
    with pytest.raises(DomainError):
        memory.efficiency(3, 2, "sideways")
    with pytest.raises(DomainError):
        memory.eta_forward(-1, 2)
    with pytest.raises(DomainError):
        memory.eta_backward(1, 0)


def test_bandwidth_duration_round_trip():
    assert memory.bandwidth_from_duration(2.6e-9) == pytest.approx(0.44 / 2.6e-9)
    assert memory.duration_from_bandwidth(memory.bandwidth_from_duration(7e-9)) == pytest.approx(7e-9)
    with pytest.raises(DomainError):
        memory.bandwidth_from_duration(0.0)


def test_memory_config_requires_one_of_b_and_tau():
    with pytest.raises(DomainError):
        memory.MemoryConfig()
    with pytest.raises(DomainError):
        memory.MemoryConfig(B=1e8, tau_p=1e-9)
    with pytest.raises(DomainError):
        memory.MemoryConfig(protocol="GEM", B=1e8)
    cfg = memory.MemoryConfig(tau_p=4.4e-9)
    assert cfg.bandwidth == pytest.approx(1e8)


def test_ats_factor(rb):
    linewidth_hz = rb.Gamma_eg / (2 * math.pi)
    assert memory.ats_factor(10 * linewidth_hz, rb) == pytest.approx(10.0, rel=1e-14)


def test_optimal_od():
    assert memory.optimal_od(3.0, "forward") == 12.0
    assert memory.optimal_od(3.0, "backward") == 24.0
    assert memory.optimal_od(3.0, "backward", backward_ratio=2.0) == 12.0


def test_resource_scalings(rb):
    B = 20 * rb.Gamma_eg / (2 * math.pi)
    ats = memory.required_resources("ATS", B, rb)
    eit = memory.required_resources("EIT", B, rb)
    assert ats.d == pytest.approx(160.0) and eit.d == pytest.approx(1000.0)
    assert ats.omega_c == pytest.approx(1.5 * 2 * math.pi * B)
    assert eit.omega_c == pytest.approx(4 * 2 * math.pi * B)
    assert ats.broadband and eit.broadband


def test_resources_warn_below_broadband(rb):
    with pytest.warns(UserWarning, match="broadband"):
        res = memory.required_resources("ATS", rb.Gamma_eg / (2 * math.pi), rb)
    assert not res.broadband
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        memory.required_resources("ATS", 10 * rb.Gamma_eg / (2 * math.pi), rb)


positive = st.floats(1e-3, 1e4)


@given(positive, st.floats(1e-2, 1e4))
def test_bounds(d, F):
    check_efficiency_bounds(d, F)


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(0.1, 100))
def test_backward_increasing(d1, d2, F):
    check_backward_increasing(d1, d2, F)


@given(st.floats(0.1, 1e3))
def test_forward_argmax(F):
    check_forward_argmax(F)


@given(st.floats(1e-3, 1e3))
def test_vanishing_bandwidth(d):
    check_efficiency_vanishes_as_F_to_zero(d)
