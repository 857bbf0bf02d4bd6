"""Single-qubit Kraus channels and their bilocal action on two-qubit states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qtypes import IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z, symmetrize

COMPLETENESS_TOL = 1e-12


@dataclass(frozen=True)
class Channel:
    """A CPTP map on one qubit in Kraus form.

    Attributes
    ----------
    kraus : tuple of ndarray
        Kraus operators ``M_i`` with ``sum M_i^dag M_i = 1``.
    label : str
        Channel family name.
    p : float or None
        Noise parameter in [0, 1]; ``None`` for composed channels.
    """

    kraus: tuple
    label: str
    p: float | None

    def __post_init__(self):
        S = sum(M.conj().T @ M for M in self.kraus)
        dev = np.max(np.abs(S - IDENTITY))
        if dev > COMPLETENESS_TOL:
            raise ValueError(f"{self.label} Kraus set is not complete (deviation {dev:.3g})")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Act on a single-qubit density matrix."""
        return symmetrize(sum(M @ rho @ M.conj().T for M in self.kraus))

    def superoperator(self) -> np.ndarray:
        """4x4 matrix acting on row-major ``vec(rho)``."""
        return sum(np.kron(M, M.conj()) for M in self.kraus)

    def then(self, other: "Channel") -> "Channel":
        """Composition: first ``self``, then ``other``."""
        kraus = tuple(N @ M for N in other.kraus for M in self.kraus)
        return Channel(kraus, f"{other.label}*{self.label}", None)


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"noise parameter p must lie in [0, 1], got {p!r}")
    return p


def depolarizing(p: float) -> Channel:
    """Pauli channel with weights ``(1-p, p/3, p/3, p/3)``.

    ``p = 3/4`` maps every input to the maximally mixed state.
    """
    p = _check_p(p)
    if p == 0.0:
        return Channel((IDENTITY.copy(),), "depolarizing", p)
    w = np.sqrt(p / 3)
    return Channel((np.sqrt(1 - p) * IDENTITY, w * SIGMA_X, w * SIGMA_Y, w * SIGMA_Z), "depolarizing", p)


def amplitude_damping(p: float) -> Channel:
    """Decay ``|1> -> |0>`` with probability ``p``."""
    p = _check_p(p)
    K0 = np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex)
    K1 = np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)
    return Channel((K0, K1), "amplitude_damping", p)


def phase_damping(p: float) -> Channel:
    """Random sigma_z flip with probability ``p``; coherences shrink by ``1-2p``."""
    p = _check_p(p)
    return Channel((np.sqrt(1 - p) * IDENTITY, np.sqrt(p) * SIGMA_Z), "phase_damping", p)


CHANNELS = {
    "depolarizing": depolarizing,
    "amplitude_damping": amplitude_damping,
    "phase_damping": phase_damping,
}


def apply_bilocal(ch_a: Channel, ch_b: Channel, rho: np.ndarray) -> np.ndarray:
    """``sum_ij (M_i (x) N_j) rho (M_i (x) N_j)^dag`` for Kraus sets ``M`` of ``ch_a``, ``N`` of ``ch_b``."""
    out = np.zeros_like(rho, dtype=complex)
    for M in ch_a.kraus:
        for N in ch_b.kraus:
            K = np.kron(M, N)
            out += K @ rho @ K.conj().T
    return symmetrize(out)


# Closed-form output matrices for a|00> + b|11> sent through identical local channels.

def depolarized_pure_matrix(a: float, b: float, p: float) -> np.ndarray:
    """Reference closed form for the depolarized ``a|00> + b|11>`` (valid for a^2 + b^2 = 1)."""
    q = 3 - 4 * p
    off = a * b * q**2
    mid = 6 * p - 4 * p**2
    return np.array(
        [
            [3 * a**2 * q + 4 * p**2, 0, 0, off],
            [0, mid, 0, 0],
            [0, 0, mid, 0],
            [off, 0, 0, 3 * b**2 * q + 4 * p**2],
        ],
        dtype=complex,
    ) / 9


def amplitude_damped_pure_matrix(a: float, b: float, p: float, *, literal: bool = False) -> np.ndarray:
    """Closed form for amplitude-damped ``a|00> + b|11>``.

    With ``literal=True`` the ``|11><11|`` entry is the reference value ``b^2 (1-p) p``,
    which is not trace preserving; the default is the Kraus result ``b^2 (1-p)^2``.
    """
    corner = b**2 * (1 - p) * p if literal else b**2 * (1 - p) ** 2
    return np.array(
        [
            [a**2 + b**2 * p**2, 0, 0, a * b * (1 - p)],
            [0, b**2 * (1 - p) * p, 0, 0],
            [0, 0, b**2 * (1 - p) * p, 0],
            [a * b * (1 - p), 0, 0, corner],
        ],
        dtype=complex,
    )


def phase_damped_pure_matrix(a: float, b: float, p: float) -> np.ndarray:
    off = a * b * (-1 + 2 * p) ** 2
    return np.array([[a**2, 0, 0, off], [0, 0, 0, 0], [0, 0, 0, 0], [off, 0, 0, b**2]], dtype=complex)
