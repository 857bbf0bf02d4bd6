"""Single-photon reflection off a single-sided atom-cavity system.

For one excitation the Heisenberg-Langevin equations are linear, so the
reflected mode is the input spectrum multiplied by a reflection coefficient
``r(omega)``. With time dependence ``exp(i omega t)`` and the atom in the
coupling state ``|0>``,

    r(w) = [(-kappa/2 + i(w + delta))(gamma/2 + i w) + g^2]
           / [(kappa/2 + i(w + delta))(gamma/2 + i w) + g^2]

The uncoupled branch (``|1>``) is the bare cavity, obtained at coupling 0.

Rates are angular frequencies in rad/us and times are in us.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ResolutionError

TWO_PI = 2 * np.pi
MAX_DT_KAPPA = 0.1
SLOW_PULSE_KT = 20.0
REFINE_TOL = 1e-6


@dataclass(frozen=True)
class CavityParams:
    """Coupling ``g``, cavity decay ``kappa``, atomic decay ``gamma`` and detuning ``delta`` (rad/us)."""

    g: float
    kappa: float
    gamma: float
    delta: float = 0.0

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        if self.g < 0 or self.gamma < 0:
            raise ValueError("g and gamma must be nonnegative")

    @classmethod
    def from_mhz(cls, g: float, kappa: float, gamma: float, delta: float = 0.0) -> "CavityParams":
        """Build from ``rate / 2 pi`` values in MHz."""
        return cls(TWO_PI * g, TWO_PI * kappa, TWO_PI * gamma, TWO_PI * delta)

    def with_g(self, g: float) -> "CavityParams":
        return CavityParams(g, self.kappa, self.gamma, self.delta)


def reference_params() -> CavityParams:
    """``(g, kappa, gamma) / 2 pi = (27, 2.4, 2.6)`` MHz."""
    return CavityParams.from_mhz(27.0, 2.4, 2.6)


def reflection_coefficient(omega, atom_coupled: bool, params: CavityParams):
    """Reflection coefficient at detuning ``omega`` from the cavity resonance."""
    w = np.asarray(omega, dtype=float)
    cav = 1j * (w + params.delta)
    if not atom_coupled:
        # g = 0: the atomic factor cancels (and would give 0/0 at w = 0 when gamma = 0)
        return (-params.kappa / 2 + cav) / (params.kappa / 2 + cav)
    atom = params.gamma / 2 + 1j * w
    g2 = params.g**2
    return ((-params.kappa / 2 + cav) * atom + g2) / ((params.kappa / 2 + cav) * atom + g2)


@dataclass(frozen=True)
class Pulse:
    """Single-photon temporal mode sampled on ``t = k * dt``, ``k = 0..n-1``."""

    T: float
    samples: np.ndarray
    dt: float

    @property
    def t(self) -> np.ndarray:
        return self.dt * np.arange(len(self.samples))

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.samples) ** 2) * self.dt)

    def inner(self, other: np.ndarray) -> complex:
        """``int conj(f) other dt``."""
        return complex(np.vdot(self.samples, other) * self.dt)


def gaussian_pulse(T: float, n_samples: int = 4096, window: float = 2.0) -> Pulse:
    """``f(t) ~ exp(-(t - T/2)^2 / (T/5)^2)`` on ``[0, window * T)``, unit norm."""
    if T <= 0 or n_samples < 2:
        raise ValueError("pulse needs T > 0 and at least two samples")
    dt = window * T / n_samples
    t = dt * np.arange(n_samples)
    f = np.exp(-((t - T / 2) ** 2) / (T / 5) ** 2).astype(complex)
    f /= np.sqrt(np.sum(np.abs(f) ** 2) * dt)
    return Pulse(T, f, dt)


@dataclass(frozen=True)
class ScatterResult:
    """Reflected modes and their overlaps ``<f|b_out>`` for both atomic branches.

    Branch 0 is the coupled atom (ideal overlap +1), branch 1 the bare
    cavity (ideal overlap -1). ``loss`` is the probability that the photon
    leaves through spontaneous emission.
    """

    output_mode_atom0: np.ndarray
    output_mode_atom1: np.ndarray
    overlap0: complex
    overlap1: complex
    loss0: float
    loss1: float

    @property
    def leakage0(self) -> float:
        return 1.0 - self.loss0 - abs(self.overlap0) ** 2

    @property
    def leakage1(self) -> float:
        return 1.0 - self.loss1 - abs(self.overlap1) ** 2


def _check_resolution(pulse: Pulse, params: CavityParams) -> None:
    if pulse.dt * params.kappa > MAX_DT_KAPPA:
        raise ResolutionError(
            f"time grid too coarse: dt*kappa = {pulse.dt * params.kappa:.3g} > {MAX_DT_KAPPA}"
        )
    if params.kappa * pulse.T < SLOW_PULSE_KT:
        warnings.warn(f"kappa*T = {params.kappa * pulse.T:.3g} is not in the slow-pulse regime", stacklevel=3)


def scatter_branch(pulse: Pulse, atom_state: int, params: CavityParams) -> np.ndarray:
    """Reflected mode for the atom in ``|atom_state>`` (0 couples, 1 does not)."""
    if atom_state not in (0, 1):
        raise ValueError("atom_state must be 0 or 1")
    _check_resolution(pulse, params)
    omega = TWO_PI * np.fft.fftfreq(len(pulse.samples), pulse.dt)
    r = reflection_coefficient(omega, atom_state == 0, params)
    return np.fft.ifft(r * np.fft.fft(pulse.samples))


def scatter_pulse(pulse: Pulse, params: CavityParams) -> ScatterResult:
    """Scatter ``pulse`` off both atomic branches."""
    b0 = scatter_branch(pulse, 0, params)
    b1 = scatter_branch(pulse, 1, params)
    return ScatterResult(
        output_mode_atom0=b0,
        output_mode_atom1=b1,
        overlap0=pulse.inner(b0),
        overlap1=pulse.inner(b1),
        loss0=1.0 - float(np.sum(np.abs(b0) ** 2) * pulse.dt),
        loss1=1.0 - float(np.sum(np.abs(b1) ** 2) * pulse.dt),
    )


# POVM circuit ------------------------------------------------------------
#
# The photon enters as (|h> + |v>)/sqrt 2. The h part reflects off the cavity
# (mode b_x for atom state x), the v part off an ideal mirror (-f). The
# polarization optics before detection act as W = H diag(lam, 1) H with
# lam = eps (P) or i eps (P'). Detector d sees g_{x,d} = (W[d,0] b_x - W[d,1] f)/sqrt 2.
# A D1 click is followed by sigma_z on the atom, so both clicks herald P.


def _detector_grams(scatter: ScatterResult, pulse: Pulse, lam: complex) -> np.ndarray:
    """``G[d, x, y] = <g_{y,d}|g_{x,d}>``."""
    W = 0.5 * np.array([[lam + 1, lam - 1], [lam - 1, lam + 1]])
    f = pulse.samples
    b = (scatter.output_mode_atom0, scatter.output_mode_atom1)
    G = np.empty((2, 2, 2), dtype=complex)
    for d in range(2):
        modes = [(W[d, 0] * b[x] - W[d, 1] * f) / np.sqrt(2) for x in range(2)]
        for x in range(2):
            for y in range(2):
                G[d, x, y] = np.vdot(modes[y], modes[x]) * pulse.dt
    return G


_CORRECTIONS = np.array([np.diag([1.0, -1.0]), np.eye(2)], dtype=complex)


def _fidelities(c: np.ndarray, G: np.ndarray, losses: np.ndarray, lam: complex, strict: bool) -> np.ndarray:
    """Conditional-state fidelities for a stack of input amplitude vectors ``c`` of shape (K, 2)."""
    outer = np.einsum("kx,ky->kxy", c, c.conj())
    rho = np.zeros_like(outer)
    for d in range(2):
        C = _CORRECTIONS[d]
        rho += C @ (outer * G[d]) @ C.conj().T
    phi = c * np.array([1.0, lam])
    phi /= np.linalg.norm(phi, axis=1, keepdims=True)
    num = np.einsum("kx,kxy,ky->k", phi.conj(), rho, phi).real
    den = np.einsum("kxx->k", rho).real
    if strict:
        den = den + 0.5 * (np.abs(c) ** 2) @ losses
    return num / den


def _bloch_quadrature(n_theta: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    phis = np.linspace(0, TWO_PI, 2 * n_theta, endpoint=False)
    th = np.arccos(x)
    TH, PH = np.meshgrid(th, phis, indexing="ij")
    W = np.repeat(w[:, None], len(phis), axis=1)
    c = np.stack([np.cos(TH / 2), np.exp(1j * PH) * np.sin(TH / 2)], axis=-1).reshape(-1, 2)
    return c, (W / W.sum()).ravel()


@dataclass(frozen=True)
class FidelityStats:
    average: float
    worst: float
    n_samples: int
    strict: bool


def _lam(eps: float, phase: complex) -> complex:
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    if phase not in (1, 1j):
        raise ValueError("phase must be 1 or 1j")
    return phase * eps


def povm_fidelity_stats(params: CavityParams, eps: float, pulse: Pulse, *, phase: complex = 1,
                        strict: bool = False, n_theta: int = 24) -> FidelityStats:
    """Bloch-sphere average and worst case of the conditional-state fidelity.

    By default spontaneous-emission loss is a heralded failure and only
    lowers the success probability. With ``strict=True`` the lost weight
    counts as zero fidelity.
    """
    lam = _lam(eps, phase)
    sc = scatter_pulse(pulse, params)
    G = _detector_grams(sc, pulse, lam)
    c, w = _bloch_quadrature(n_theta)
    F = _fidelities(c, G, np.array([sc.loss0, sc.loss1]), lam, strict)
    return FidelityStats(float(w @ F), float(F.min()), len(pulse.samples), strict)


def povm_fidelity(params: CavityParams, eps: float, pulse: Pulse, input_atom_state=None, *,
                  phase: complex = 1, strict: bool = False) -> float:
    """Fidelity of the cavity-implemented POVM with ``diag(1, eps)``.

    With ``input_atom_state = (a, b)`` returns the fidelity for that input;
    otherwise the uniform Bloch-sphere average.
    """
    if input_atom_state is None:
        return povm_fidelity_stats(params, eps, pulse, phase=phase, strict=strict).average
    lam = _lam(eps, phase)
    c = np.asarray(input_atom_state, dtype=complex).reshape(1, 2)
    c = c / np.linalg.norm(c)
    sc = scatter_pulse(pulse, params)
    G = _detector_grams(sc, pulse, lam)
    return float(_fidelities(c, G, np.array([sc.loss0, sc.loss1]), lam, strict)[0])


def converged_povm_fidelity(params: CavityParams, eps: float, T: float, n_samples: int = 4096, *,
                            tol: float = REFINE_TOL, max_doublings: int = 4, **kw) -> FidelityStats:
    """Average fidelity, doubling the time grid until it changes by less than ``tol``."""
    n = n_samples
    prev = povm_fidelity_stats(params, eps, gaussian_pulse(T, n), **kw)
    for _ in range(max_doublings):
        n *= 2
        cur = povm_fidelity_stats(params, eps, gaussian_pulse(T, n), **kw)
        if abs(cur.average - prev.average) < tol:
            return cur
        prev = cur
    return prev


@dataclass(frozen=True)
class SweepRow:
    g_over_2pi_MHz: float
    F_POVM: float
    F_BSM: float
    F_worst: float
    final_fidelity: float | None = None


def sweep(g_values_mhz, base: CavityParams | None = None, eps: float = 0.2, T: float = 10.0,
          n_samples: int = 4096, *, strict: bool = False, recurrence_fidelity: float | None = None,
          threads: int = 1) -> list[SweepRow]:
    """``F_POVM`` over coupling strengths ``g / 2 pi`` (MHz); ``F_BSM = F_POVM^2``.

    With ``recurrence_fidelity`` the row also carries ``A~ * F_BSM``. Rows
    are returned in grid order whatever the thread count.
    """
    base = base or reference_params()
    pulse = gaussian_pulse(T, n_samples)

    def point(g_mhz: float) -> SweepRow:
        st = povm_fidelity_stats(base.with_g(TWO_PI * g_mhz), eps, pulse, strict=strict)
        f_bsm = st.average**2
        final = None if recurrence_fidelity is None else recurrence_fidelity * f_bsm
        return SweepRow(float(g_mhz), st.average, f_bsm, st.worst, final)

    grid = list(g_values_mhz)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(point, grid))
    return [point(g) for g in grid]
