import warnings

import numpy as np
import pytest

from atompurify import cavity as cv
from atompurify.errors import ResolutionError

REF = cv.reference_params()


def _pulse_for(kappa_T, params=REF):
    T = kappa_T / params.kappa
    n = max(4096, int(np.ceil(2 * kappa_T / 0.09)))
    return cv.gaussian_pulse(T, n)


def test_reflection_limits():
    assert cv.reflection_coefficient(0.0, False, REF) == -1
    strong = cv.CavityParams.from_mhz(500, 2.4, 2.6)
    assert cv.reflection_coefficient(0.0, True, strong) == pytest.approx(1.0, abs=1e-4)
    lossless = cv.CavityParams.from_mhz(27, 2.4, 0.0)
    w = np.linspace(-50, 50, 2001)
    for coupled in (True, False):
        assert np.abs(np.abs(cv.reflection_coefficient(w, coupled, lossless)) - 1).max() < 1e-12
    # dressed-mode picture: the coupled response is -1 at omega = +-g when gamma = 0
    assert cv.reflection_coefficient([-lossless.g, lossless.g], True, lossless) == pytest.approx([-1, -1])


def test_passivity():
    w = np.linspace(-400, 400, 4001)
    for gamma in (0.5, 2.6, 20.0):
        p = cv.CavityParams.from_mhz(27, 2.4, gamma)
        r = np.abs(cv.reflection_coefficient(w, True, p))
        assert r.max() <= 1 + 1e-12
        assert r.min() < 1 - 1e-6


def test_params_validation():
    with pytest.raises(ValueError):
        cv.CavityParams(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        cv.CavityParams(-1.0, 1.0, 1.0)
    assert REF.with_g(1.0).kappa == REF.kappa


def test_pulse_is_normalized():
    p = cv.gaussian_pulse(10.0)
    assert p.norm == pytest.approx(1.0, abs=1e-12)
    assert p.inner(p.samples) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cv.gaussian_pulse(-1.0)


def test_resolution_error():
    with pytest.raises(ResolutionError):
        cv.scatter_pulse(cv.gaussian_pulse(10.0, 256), REF)


def test_slow_pulse_warning():
    with pytest.warns(UserWarning):
        cv.scatter_pulse(cv.gaussian_pulse(1.0, 4096), REF)


def test_scatter_reference_point():
    sc = cv.scatter_pulse(cv.gaussian_pulse(10.0), REF)
    assert sc.overlap0.real > 0.99
    assert sc.loss0 <= 0.01
    assert sc.overlap1.real < -0.99


@pytest.mark.parametrize("gamma", [0.0, 2.6])
def test_energy_bookkeeping(gamma):
    sc = cv.scatter_pulse(cv.gaussian_pulse(10.0), cv.CavityParams.from_mhz(27, 2.4, gamma))
    for leak, loss, ov in ((sc.leakage0, sc.loss0, sc.overlap0), (sc.leakage1, sc.loss1, sc.overlap1)):
        assert leak + loss + abs(ov) ** 2 == pytest.approx(1.0, abs=1e-9)
        assert leak >= -1e-12
    assert abs(sc.loss1) < 1e-10
    if gamma == 0.0:
        assert abs(sc.loss0) < 1e-10


def test_slow_pulse_convergence():
    errs = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for kT in (50, 100, 200, 400):
            sc = cv.scatter_pulse(_pulse_for(kT), REF)
            errs.append(abs(1 + sc.overlap1))
    assert all(b < a for a, b in zip(errs, errs[1:]))
    # doubling kappa*T divides the error by about four
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all(ratios > 3.5)


def test_overlap_error_tracks_group_delay():
    # the bare cavity delays the pulse by 4/kappa; for a Gaussian of width T/5
    # that costs 1 - exp(-200 / (kappa T)^2) in overlap
    kT = 200
    sc = cv.scatter_pulse(_pulse_for(kT), REF)
    assert abs(1 + sc.overlap1) == pytest.approx(1 - np.exp(-200 / kT**2), rel=0.02)


def test_ideal_scattering_gives_unit_fidelity():
    pulse = cv.gaussian_pulse(10.0)
    f = pulse.samples
    ideal = cv.ScatterResult(f, -f, 1.0, -1.0, 0.0, 0.0)
    for eps in (0.2, 0.7, 1.0):
        for phase in (1, 1j):
            lam = phase * eps
            G = cv._detector_grams(ideal, pulse, lam)
            c, _ = cv._bloch_quadrature(8)
            F = cv._fidelities(c, G, np.zeros(2), lam, strict=False)
            assert np.abs(F - 1).max() < 1e-12


def test_reference_fidelity():
    st = cv.povm_fidelity_stats(REF, 0.2, cv.gaussian_pulse(10.0))
    assert st.average >= 0.99
    assert st.worst <= st.average
    strict = cv.povm_fidelity_stats(REF, 0.2, cv.gaussian_pulse(10.0), strict=True)
    assert strict.average < st.average


def test_point_fidelity_matches_average():
    pulse = cv.gaussian_pulse(10.0)
    st = cv.povm_fidelity_stats(REF, 0.2, pulse)
    assert cv.povm_fidelity(REF, 0.2, pulse) == st.average
    # computational states are POVM eigenstates and come out exact
    assert cv.povm_fidelity(REF, 0.2, pulse, [1, 0]) == pytest.approx(1.0, abs=1e-12)
    assert cv.povm_fidelity(REF, 0.2, pulse, [0, 1]) == pytest.approx(1.0, abs=1e-12)
    for s in ([1, 1], [1, 1j], [0.3, 0.95]):
        assert st.worst - 1e-3 <= cv.povm_fidelity(REF, 0.2, pulse, s) < 1
    with pytest.raises(ValueError):
        cv.povm_fidelity(REF, 0.0, pulse)
    with pytest.raises(ValueError):
        cv.povm_fidelity(REF, 0.2, pulse, phase=-1)


def test_lossless_long_pulse_approaches_one():
    lossless = cv.CavityParams.from_mhz(27, 2.4, 0.0)
    prev = 0.0
    for T, n in ((10, 4096), (25, 8192), (50, 16384)):
        F = cv.povm_fidelity(lossless, 0.2, cv.gaussian_pulse(T, n))
        assert F > prev
        prev = F
    assert prev > 0.9995


def test_converged_fidelity():
    st = cv.converged_povm_fidelity(REF, 0.2, 10.0)
    assert st.average == pytest.approx(cv.povm_fidelity(REF, 0.2, cv.gaussian_pulse(10.0)), abs=1e-6)


def test_sweep_rows_match_point_calls():
    g0 = 27.0
    rows = cv.sweep([0.5 * g0, g0], recurrence_fidelity=0.9)
    for row in rows:
        F = cv.povm_fidelity(REF.with_g(cv.TWO_PI * row.g_over_2pi_MHz), 0.2, cv.gaussian_pulse(10.0))
        assert row.F_POVM == pytest.approx(F, abs=1e-14)
        assert row.F_BSM == pytest.approx(row.F_POVM**2, abs=1e-15)
        assert row.final_fidelity == pytest.approx(0.9 * row.F_BSM)


def test_sweep_is_monotone_in_g_and_thread_independent():
    grid = np.arange(13.5, 40.01, 2.5)
    rows = cv.sweep(grid, threads=1)
    F = [r.F_POVM for r in rows]
    assert all(b >= a - 1e-12 for a, b in zip(F, F[1:]))
    assert rows == cv.sweep(grid, threads=4)
