import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atompurify import polarizer as pol
from atompurify.errors import TotalInternalReflectionError, UnreachableTargetError

DEG = np.pi / 180


def test_refraction_examples():
    assert pol.refraction_angle(0.0, 1.0, 1.5) == 0.0
    assert pol.refraction_angle(30 * DEG, 1.0, 1.5) == pytest.approx(np.arcsin(1 / 3))
    assert pol.refraction_angle(30 * DEG, 1.0, 1.5) / DEG == pytest.approx(19.471, abs=1e-3)
    assert pol.refraction_angle(0.7, 1.3, 1.3) == pytest.approx(0.7)
    with pytest.raises(TotalInternalReflectionError):
        pol.refraction_angle(60 * DEG, 1.5, 1.0)


def test_interface_transmissions_limits():
    assert pol.interface_transmissions(0.0, 1.0, 1.5) == pytest.approx((0.8, 0.8))
    assert pol.interface_transmissions(0.4, 1.2, 1.2) == pytest.approx((1.0, 1.0))


def test_literal_slab_matches_fresnel_product():
    for theta in np.linspace(0.05, 1.4, 12):
        th1, tv1 = pol.interface_transmissions(theta, 1.0, 1.52)
        inner = pol.refraction_angle(theta, 1.0, 1.52)
        th2, tv2 = pol.interface_transmissions(inner, 1.52, 1.0)
        T = pol.stack_epsilon(pol.SlabStack(theta))
        assert T.T_h == pytest.approx(th1 * th2, rel=1e-12)
        assert T.T_v == pytest.approx(tv1 * tv2, rel=1e-12)


def test_physical_interface_matches_flux_form():
    # 1 - r^2 equals (n' cos theta' / n cos theta) t^2
    for theta in np.linspace(0.0, 1.4, 8):
        tp = pol.refraction_angle(theta, 1.0, 1.52)
        th, tv = pol.interface_transmissions(theta, 1.0, 1.52)
        flux = 1.52 * np.cos(tp) / np.cos(theta)
        Tp, Ts = pol._physical_interface(theta, 1.0, 1.52)
        assert Tp == pytest.approx(flux * th**2, rel=1e-12)
        assert Ts == pytest.approx(flux * tv**2, rel=1e-12)


def test_normal_incidence_and_brewster():
    T = pol.stack_epsilon(pol.SlabStack(0.0, slabs=4))
    assert T.epsilon_physical == pytest.approx(1.0)
    assert T.epsilon_literal == pytest.approx(1.0)
    brewster = np.arctan(1.52)
    Tb = pol.stack_epsilon(pol.SlabStack(brewster, slabs=1))
    assert Tb.T_p_physical == pytest.approx(1.0, abs=1e-12)
    assert Tb.T_h == pytest.approx(1.0, abs=1e-12)
    near = [pol.stack_epsilon(pol.SlabStack(brewster + d)).T_p_physical for d in (-0.05, 0.05)]
    assert max(near) < Tb.T_p_physical


def test_literal_values_are_flagged_above_one():
    flagged = [pol.stack_epsilon(pol.SlabStack(th)) for th in np.linspace(0.1, 1.5, 30)]
    assert all(T.literal_exceeds_one for T in flagged)
    assert all(T.T_h <= 1 + 1e-15 and T.epsilon_literal > 1 for T in flagged)
    for T in flagged:
        assert T.T_p_physical <= 1 + 1e-15 and T.T_s_physical <= 1 + 1e-15
        assert T.strong >= T.weak
        assert T.epsilon_amplitude == pytest.approx(np.sqrt(T.epsilon_physical))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.5), st.integers(1, 6))
def test_slab_product_law(theta, k):
    e1 = pol.epsilon_physical(theta, slabs=1)
    ek = pol.epsilon_physical(theta, slabs=k)
    assert ek == pytest.approx(e1**k, abs=1e-12)


def test_epsilon_monotone_and_below_one():
    th = np.linspace(0, pol.GRAZING, 400)
    eps = np.array([pol.epsilon_physical(t, slabs=4) for t in th])
    assert eps[0] == pytest.approx(1.0)
    assert np.all(np.diff(eps) < 0)
    assert np.all(eps[1:] < 1)


def test_slab_stack_validation():
    with pytest.raises(ValueError):
        pol.SlabStack(np.pi / 2)
    with pytest.raises(ValueError):
        pol.SlabStack(0.1, slabs=0)
    with pytest.raises(ValueError):
        pol.SlabStack(0.1, n_slab=0.5)


def test_theta_for_epsilon_round_trips():
    assert pol.theta_for_epsilon(1.0) == 0.0
    th = pol.theta_for_epsilon(0.2, 1.52, 4)
    assert abs(pol.epsilon_physical(th, 1.52, 4) - 0.2) < 1e-9
    assert th / DEG == pytest.approx(60.0056, abs=1e-3)
    th1 = pol.theta_for_epsilon(0.5, 1.52, 1)
    assert abs(pol.epsilon_physical(th1, 1.52, 1) - 0.5) < 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 0.999), st.integers(1, 4))
def test_theta_for_epsilon_property(target, k):
    try:
        th = pol.theta_for_epsilon(target, slabs=k)
    except UnreachableTargetError:
        assert target < pol.principal_branch(slabs=k)[1]
        return
    assert abs(pol.epsilon_physical(th, slabs=k) - target) < 1e-9


def test_unreachable_target_reports_interval():
    with pytest.raises(UnreachableTargetError) as info:
        pol.theta_for_epsilon(0.1, 1.52, 1)
    lo, hi = info.value.interval
    assert lo == pytest.approx(0.1873, abs=1e-3) and hi == 1.0
    with pytest.raises(ValueError):
        pol.theta_for_epsilon(0.0)
