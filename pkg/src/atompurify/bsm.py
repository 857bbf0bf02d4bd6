"""Measurement algebra: atomic POVM elements, parity projectors and the full Bell measurement.

Photon polarization is modeled as an abstract qubit ``{h, v}`` here; pulse
shapes and imperfect scattering live in :mod:`atompurify.cavity`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .qtypes import HADAMARD, Bell, bell_state, kron

PROJECTOR_TOL = 1e-12
UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class PovmElement:
    """Single-qubit POVM element ``|0><0| + phase * eps |1><1|``.

    ``label`` is ``"P"`` for phase 1 and ``"P'"`` for phase i.
    """

    operator: np.ndarray
    label: str
    epsilon: float

    def apply(self, psi: np.ndarray) -> tuple[np.ndarray, float]:
        """Unnormalized output vector and its success probability."""
        out = self.operator @ np.asarray(psi, dtype=complex)
        return out, float(np.vdot(out, out).real)


def povm_element(eps: float, phase: complex = 1) -> PovmElement:
    """Return ``diag(1, eps)`` (``phase=1``) or ``diag(1, i eps)`` (``phase=1j``)."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    if phase == 1:
        label = "P"
    elif phase == 1j:
        label = "P'"
    else:
        raise ValueError(f"phase must be 1 or 1j, got {phase!r}")
    return PovmElement(np.diag([1.0, phase * eps]).astype(complex), label, float(eps))


@dataclass(frozen=True)
class ParityProjector:
    """Projector on a qubit pair with its outcome label."""

    operator: np.ndarray
    label: str

    def __post_init__(self):
        P = np.asarray(self.operator, dtype=complex)
        if P.shape != (4, 4):
            raise ValueError("parity projector must be 4x4")
        if np.max(np.abs(P @ P - P)) > PROJECTOR_TOL or np.max(np.abs(P - P.conj().T)) > PROJECTOR_TOL:
            raise ValueError("operator is not an orthogonal projector")
        object.__setattr__(self, "operator", P)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.operator).real))

    def probability(self, rho: np.ndarray) -> float:
        return float(np.trace(self.operator @ rho).real)


def parity_projectors() -> tuple[ParityProjector, ParityProjector]:
    """``P1 = |00><00| + |11><11|`` (span of Phi+-) and ``P2 = 1 - P1`` (span of Psi+-)."""
    P1 = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
    return ParityProjector(P1, "P1"), ParityProjector(np.eye(4) - P1, "P2")


def bell_subspace_projector(k1: Bell | int, k2: Bell | int) -> np.ndarray:
    """Projector onto ``span{bell k1, bell k2}``."""
    u, v = bell_state(k1), bell_state(k2)
    return np.outer(u, u.conj()) + np.outer(v, v.conj())


def permuted_projector(base: ParityProjector, U: np.ndarray, label: str | None = None) -> ParityProjector:
    """``U P U^dag`` for a two-qubit unitary ``U`` (typically a product of local gates)."""
    U = np.asarray(U, dtype=complex)
    if U.shape != (4, 4) or np.max(np.abs(U.conj().T @ U - np.eye(4))) > UNITARY_TOL:
        raise ValueError("conjugation must be a 4x4 unitary")
    P = U @ base.operator @ U.conj().T
    return ParityProjector(0.5 * (P + P.conj().T), label or f"U{base.label}U+")


@dataclass(frozen=True)
class BsmOutcome:
    bell: Bell
    probability: float
    post_state: np.ndarray | None = None


def full_bsm(rho: np.ndarray) -> list[BsmOutcome]:
    """Bell measurement from two non-destructive binary projections.

    The first stage separates the Phi and Psi subspaces with ``P1``/``P2``.
    The second uses ``(H (x) H) P1 (H (x) H)``, the projector onto
    ``span{Phi+, Psi+}``, to split each subspace by its relative sign.
    Outcomes are returned in :class:`Bell` order.
    """
    rho = np.asarray(rho, dtype=complex)
    P1, P2 = parity_projectors()
    Q = permuted_projector(P1, np.kron(HADAMARD, HADAMARD), "Q").operator
    Qc = np.eye(4) - Q
    branches = {
        Bell.PHI_PLUS: Q @ P1.operator,
        Bell.PHI_MINUS: Qc @ P1.operator,
        Bell.PSI_PLUS: Q @ P2.operator,
        Bell.PSI_MINUS: Qc @ P2.operator,
    }
    out = []
    for k in Bell:
        K = branches[k]
        unnorm = K @ rho @ K.conj().T
        p = float(np.trace(unnorm).real)
        out.append(BsmOutcome(k, p, unnorm / p if p > PROJECTOR_TOL else None))
    return out


# Atom-photon phase gate (qubit order: atom 1, atom 2, photon with h = |0>, v = |1>).

def conditional_phase_gate(n_atoms: int = 2) -> np.ndarray:
    """``prod_i exp(i pi |1><1|_i (x) |h><h|)`` on ``n_atoms`` atoms and one photon."""
    dim = 2 ** (n_atoms + 1)
    diag = np.ones(dim, dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n_atoms - q)) & 1 for q in range(n_atoms + 1)]
        if bits[-1] == 0:
            diag[idx] = (-1) ** sum(bits[:-1])
    return np.diag(diag)


def phase_gate_input(a1, b1, a2, b2) -> np.ndarray:
    """``(a1|0> + b1|1>)(a2|0> + b2|1>)(|h> + |v>)/sqrt 2``."""
    return kron(np.array([a1, b1]), np.array([a2, b2]), np.array([1, 1]) / np.sqrt(2)).ravel()


def phase_gate_output(a1, b1, a2, b2) -> np.ndarray:
    """Two-branch state: both atoms sign-flipped on ``|h>``, untouched on ``|v>`` (normalized)."""
    h = np.array([1, 0])
    v = np.array([0, 1])
    flipped = kron(np.array([a1, -b1]), np.array([a2, -b2]), h).ravel()
    plain = kron(np.array([a1, b1]), np.array([a2, b2]), v).ravel()
    return (flipped + plain) / np.sqrt(2)


def hv_detection_projectors(n_atoms: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """Atomic operators heralded by D1 / D2 after a Hadamard on the photon.

    Projecting the photon of the two-branch state onto ``(|h> +- |v>)/sqrt 2``
    leaves the two atoms in ``P1 psi`` (D1) or ``-P2 psi`` (D2).
    """
    G = conditional_phase_gate(n_atoms)
    da = 2**n_atoms
    ops = []
    for sign in (1, -1):
        bra = np.array([1, sign]) / np.sqrt(2)
        # A_d |psi> = (1 (x) <d|) G (|psi> (x) (|h> + |v>)/sqrt 2)
        K = np.kron(np.eye(da), bra[None, :]) @ G @ np.kron(np.eye(da), (np.array([1, 1]) / np.sqrt(2))[:, None])
        ops.append(K)
    return ops[0], ops[1]

