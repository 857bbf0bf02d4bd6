"""Tilted glass-slab partial polarizer.

Two sets of quantities are computed. The "literal" ones
(``T_h``, ``T_v``, ``epsilon_literal``) multiply the Fresnel amplitude
coefficients of the two interfaces of a slab, which is what the closed forms
below evaluate; they are not probabilities and ``T_h`` can exceed 1. The
physical ones are intensity transmittances ``1 - |r|^2`` per interface.
The p-polarized branch (labelled ``h`` in the literal formulas) is the
strong one and the s-polarized branch the weak one. Multiple reflections
inside a slab are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import TotalInternalReflectionError, UnreachableTargetError

DEFAULT_GLASS_INDEX = 1.52
SMALL_ANGLE = 1e-8
ROUNDTRIP_TOL = 1e-9
GRAZING = np.pi / 2 - 1e-9


@dataclass(frozen=True)
class SlabStack:
    """``slabs`` identical slabs of index ``n_slab`` in a medium ``n_outside``, tilted by ``theta``."""

    theta: float
    n_outside: float = 1.0
    n_slab: float = DEFAULT_GLASS_INDEX
    slabs: int = 1

    def __post_init__(self):
        for name in ("n_outside", "n_slab"):
            n = getattr(self, name)
            if not 1 <= n <= 3:
                raise ValueError(f"{name} must lie in [1, 3], got {n!r}")
        if not 0 <= self.theta < np.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2), got {self.theta!r}")
        if int(self.slabs) != self.slabs or self.slabs < 1:
            raise ValueError(f"slabs must be a positive integer, got {self.slabs!r}")


@dataclass(frozen=True)
class Transmission:
    """Whole-stack transmissions at one tilt angle.

    ``T_h``, ``T_v`` and ``epsilon_literal = T_h / T_v`` are the literal
    amplitude products. Each is ``1 - r^2`` of one interface and stays below
    one, but their ratio does not; ``literal_exceeds_one`` flags any literal
    value above one.
    ``T_p_physical`` and ``T_s_physical`` are intensity transmittances and
    ``epsilon_physical`` is their min/max ratio. ``epsilon_amplitude`` is
    its square root, the ratio that multiplies amplitudes in the POVM.
    """

    T_h: float
    T_v: float
    epsilon_literal: float
    T_p_physical: float
    T_s_physical: float
    epsilon_physical: float

    @property
    def literal_exceeds_one(self) -> bool:
        return self.T_h > 1 or self.T_v > 1 or self.epsilon_literal > 1

    @property
    def strong(self) -> float:
        return max(self.T_p_physical, self.T_s_physical)

    @property
    def weak(self) -> float:
        return min(self.T_p_physical, self.T_s_physical)

    @property
    def epsilon_amplitude(self) -> float:
        return float(np.sqrt(self.epsilon_physical))


def refraction_angle(theta: float, n: float, n_prime: float) -> float:
    """Snell's law ``n sin(theta) = n' sin(theta')``."""
    s = n * np.sin(theta) / n_prime
    if s > 1:
        raise TotalInternalReflectionError(
            f"total internal reflection at theta = {theta!r} for n = {n!r}, n' = {n_prime!r}"
        )
    return float(np.arcsin(s))


def interface_transmissions(theta: float, n: float, n_prime: float) -> tuple[float, float]:
    """Fresnel amplitude transmission coefficients ``(t_h, t_v)`` = (p, s) of one interface."""
    tp = refraction_angle(theta, n, n_prime)
    c, cp = np.cos(theta), np.cos(tp)
    t_h = 2 * n * c / (n_prime * c + n * cp)
    t_v = 2 * n * c / (n * c + n_prime * cp)
    return float(t_h), float(t_v)


def _literal_slab(theta: float, n: float, n_prime: float) -> tuple[float, float]:
    """Closed forms for ``t_h^(1) t_h^(2)`` and ``t_v^(1) t_v^(2)`` in terms of the angles."""
    if theta < SMALL_ANGLE:
        v = 4 * n * n_prime / (n + n_prime) ** 2
        return v, v
    tp = refraction_angle(theta, n, n_prime)
    num = np.sin(2 * theta) * np.sin(2 * tp)
    T_v = num / np.sin(theta + tp) ** 2
    return float(T_v / np.cos(theta - tp) ** 2), float(T_v)


def _physical_interface(theta: float, n: float, n_prime: float) -> tuple[float, float]:
    """Intensity transmittances ``(T_p, T_s)`` of one interface."""
    tp = refraction_angle(theta, n, n_prime)
    c, cp = np.cos(theta), np.cos(tp)
    r_s = (n * c - n_prime * cp) / (n * c + n_prime * cp)
    r_p = (n_prime * c - n * cp) / (n_prime * c + n * cp)
    return float(1 - r_p**2), float(1 - r_s**2)


def stack_epsilon(stack: SlabStack) -> Transmission:
    """Literal and physical transmissions of the whole stack (independent-slab product)."""
    n, n2, k = stack.n_outside, stack.n_slab, int(stack.slabs)
    lit_h, lit_v = _literal_slab(stack.theta, n, n2)
    # exit-face reflectance equals entry-face reflectance, so each slab squares the interface value
    Tp, Ts = _physical_interface(stack.theta, n, n2)
    Tp, Ts = Tp ** (2 * k), Ts ** (2 * k)
    return Transmission(
        T_h=lit_h**k,
        T_v=lit_v**k,
        epsilon_literal=(lit_h / lit_v) ** k,
        T_p_physical=Tp,
        T_s_physical=Ts,
        epsilon_physical=min(Tp, Ts) / max(Tp, Ts),
    )


def epsilon_physical(theta: float, n_slab: float = DEFAULT_GLASS_INDEX, slabs: int = 1,
                     n_outside: float = 1.0) -> float:
    return stack_epsilon(SlabStack(theta, n_outside, n_slab, slabs)).epsilon_physical


def principal_branch(n_slab: float = DEFAULT_GLASS_INDEX, slabs: int = 1, n_outside: float = 1.0) -> tuple[float, float]:
    """``(theta_max, eps_min)``: end of the monotone branch starting at ``theta = 0``."""
    f = lambda th: epsilon_physical(th, n_slab, slabs, n_outside)
    if f(GRAZING) <= f(GRAZING - 1e-3):
        return GRAZING, f(GRAZING)
    res = minimize_scalar(f, bounds=(0.0, GRAZING), method="bounded", options={"xatol": 1e-12})
    return float(res.x), float(res.fun)


def theta_for_epsilon(target_eps: float, n_slab: float = DEFAULT_GLASS_INDEX, slabs: int = 1,
                      n_outside: float = 1.0) -> float:
    """Tilt angle on the principal branch where ``epsilon_physical`` equals ``target_eps``.

    Raises
    ------
    UnreachableTargetError
        If ``target_eps`` is below the smallest value reachable with this stack.
    """
    if not 0 < target_eps <= 1:
        raise ValueError(f"target epsilon must lie in (0, 1], got {target_eps!r}")
    if target_eps == 1:
        return 0.0
    theta_max, eps_min = principal_branch(n_slab, slabs, n_outside)
    if target_eps < eps_min:
        raise UnreachableTargetError(f"epsilon {target_eps!r} is not reachable with {slabs} slab(s)", (eps_min, 1.0))
    g = lambda th: epsilon_physical(th, n_slab, slabs, n_outside) - target_eps
    return float(brentq(g, 0.0, theta_max, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200))
