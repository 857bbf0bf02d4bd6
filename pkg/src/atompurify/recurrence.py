"""Two-copy recurrence purification of Bell-diagonal states.

Weights are ordered ``(A, B, C, D)`` over ``(Phi+, Phi-, Psi+, Psi-)``. One
round twirls both pairs, measures the bilateral parity of pairs (1, 1') and
(2, 2'), keeps pair (1, 2) when the outcomes agree, and maps

    A~ = (A A' + C C') / N      B~ = (B B' + D D') / N
    C~ = (B D' + D B') / N      D~ = (A C' + C A') / N

with ``N`` the success probability, the sum of the four numerators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidStateError, ProtocolFailureError
from .qtypes import HADAMARD, SIGMA_X, bell_basis, embed, partial_trace, symmetrize

WEIGHT_TOL = 1e-12
FAILURE_TOL = 1e-14
_XX = np.kron(SIGMA_X, SIGMA_X)
_BELL = bell_basis()


@dataclass(frozen=True)
class BellDiagonal:
    """Bell-basis weights ``(A, B, C, D)``; nonnegative, summing to one."""

    weights: tuple

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (4,):
            raise InvalidStateError("Bell-diagonal weights must be a 4-vector")
        if np.any(w < -WEIGHT_TOL):
            raise InvalidStateError(f"negative Bell weight in {w.tolist()}")
        if abs(w.sum() - 1) > WEIGHT_TOL:
            raise InvalidStateError(f"Bell weights sum to {w.sum()!r}, expected 1")
        object.__setattr__(self, "weights", tuple(float(x) for x in np.clip(w, 0, None)))

    @classmethod
    def werner(cls, F: float) -> "BellDiagonal":
        r = (1 - F) / 3
        return cls((F, r, r, r))

    @property
    def A(self) -> float:
        return self.weights[0]

    @property
    def fidelity(self) -> float:
        return self.weights[0]

    @property
    def in_basin(self) -> bool:
        """``A > B + C + D``: the stated condition for flowing to ``(1, 0, 0, 0)``."""
        A, B, C, D = self.weights
        return A > B + C + D

    def as_array(self) -> np.ndarray:
        return np.array(self.weights)

    def density_matrix(self) -> np.ndarray:
        return (_BELL * self.as_array()) @ _BELL.conj().T


@dataclass
class Round:
    state: BellDiagonal
    success_prob: float
    cumulative_yield: float
    in_basin: bool


@dataclass
class PurificationTrace:
    """Rounds of the identical-copy iteration; round 0 is the input.

    ``cumulative_yield`` after ``r`` rounds is ``prod N_k / 2^r``: pairs kept
    per initial pair, with every round consuming two pairs.
    """

    rounds: list = field(default_factory=list)
    converged: bool = False

    @property
    def fidelities(self) -> list[float]:
        return [r.state.fidelity for r in self.rounds]


def bell_diagonal_of(rho: np.ndarray) -> BellDiagonal:
    """Bell-basis diagonal ``<bell_k|rho|bell_k>``; coherences are discarded."""
    w = np.einsum("ik,ij,jk->k", _BELL.conj(), rho, _BELL).real
    return BellDiagonal(tuple(w / w.sum()))


def twirl(rho: np.ndarray) -> np.ndarray:
    """Apply ``sigma_x (x) sigma_x`` with probability 1/2."""
    return symmetrize(0.5 * rho + 0.5 * _XX @ rho @ _XX)


def recurrence_map(x: BellDiagonal, y: BellDiagonal) -> tuple[BellDiagonal, float]:
    """One round on Bell-diagonal pairs ``x`` and ``y``. Returns the kept weights and ``N``."""
    A, B, C, D = x.weights
    a, b, c, d = y.weights
    num = np.array([A * a + C * c, B * b + D * d, B * d + D * b, A * c + C * a])
    N = float(num.sum())
    if N < FAILURE_TOL:
        raise ProtocolFailureError(f"recurrence round never succeeds (N = {N:.3g})")
    return BellDiagonal(tuple(num / N)), N


def iterate(x0: BellDiagonal, max_rounds: int = 20, target_fidelity: float = 0.99) -> PurificationTrace:
    """Identical-copy iteration ``x <- map(x, x)`` until ``A >= target_fidelity``.

    The basin condition is recorded per round; iteration runs to ``max_rounds``
    regardless of it.
    """
    trace = PurificationTrace()
    x, yld = x0, 1.0
    trace.rounds.append(Round(x, 1.0, yld, x.in_basin))
    if x.fidelity >= target_fidelity:
        trace.converged = True
        return trace
    for r in range(1, max_rounds + 1):
        x, N = recurrence_map(x, x)
        yld *= N / 2
        trace.rounds.append(Round(x, N, yld, x.in_basin))
        if x.fidelity >= target_fidelity:
            trace.converged = True
            break
    return trace


# 16x16 reference simulation; qubit order 1, 2, 1', 2'.

def _pair_parity_projectors() -> list[np.ndarray]:
    """Parity projectors in the Hadamard-rotated basis on qubit pairs."""
    P1 = np.diag([1.0, 0.0, 0.0, 1.0]).astype(complex)
    HH = np.kron(HADAMARD, HADAMARD)
    Q1 = HH @ P1 @ HH
    return [Q1, np.eye(4) - Q1]


_S_FRAME = np.kron(np.diag([1, 1j]), np.diag([1, -1j]))


def simulate_round_exact(rho: np.ndarray, rho2: np.ndarray) -> tuple[np.ndarray, float]:
    """Brute-force one round on the full four-qubit state.

    Each pair is twirled, both parity measurements are applied on (1, 1') and
    (2, 2') and only agreeing outcomes are kept. The measured qubits 1', 2'
    are read out in the computational basis and the outcome-dependent
    ``sigma_x`` corrections are applied to qubits 1 and 2 before tracing them
    out. A final ``S (x) S^dag`` frame change brings the kept pair to the
    labeling of :func:`recurrence_map`.
    """
    full = np.kron(twirl(rho), twirl(rho2))
    out = np.zeros((4, 4), dtype=complex)
    z = [np.diag([1.0, 0.0]).astype(complex), np.diag([0.0, 1.0]).astype(complex)]
    corr = [np.eye(2, dtype=complex), SIGMA_X]
    for Q in _pair_parity_projectors():
        K = embed(Q, [0, 2], 4) @ embed(Q, [1, 3], 4)
        branch = K @ full @ K.conj().T
        for m1 in range(2):
            for m2 in range(2):
                Kc = embed(np.kron(corr[m1], corr[m2]), [0, 1], 4) @ embed(np.kron(z[m1], z[m2]), [2, 3], 4)
                out += partial_trace(Kc @ branch @ Kc.conj().T, [0, 1], 4)
    N = float(np.trace(out).real)
    if N < FAILURE_TOL:
        raise ProtocolFailureError(f"recurrence round never succeeds (N = {N:.3g})")
    kept = _S_FRAME @ (out / N) @ _S_FRAME.conj().T
    return symmetrize(kept), N
