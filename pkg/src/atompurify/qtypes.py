"""Two-qubit state algebra.

States are plain numpy arrays: a pure state is a complex vector, a density
matrix a complex square matrix, both in the computational basis ordered
``|00>, |01>, |10>, |11>`` (qubit 0 is the most significant bit). Functions
never mutate their inputs.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, Sequence

import numpy as np

from .errors import FilterAnnihilatesStateError, InvalidStateError, NormalizationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
ANNIHILATION_TOL = 1e-14

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
PAULIS = (IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z)

_S = 1 / np.sqrt(2)


class Bell(IntEnum):
    """Bell basis labels, in the fixed order used for Bell-diagonal weights."""

    PHI_PLUS = 0
    PHI_MINUS = 1
    PSI_PLUS = 2
    PSI_MINUS = 3


_BELL_VECTORS = np.array(
    [
        [_S, 0, 0, _S],
        [_S, 0, 0, -_S],
        [0, _S, _S, 0],
        [0, _S, -_S, 0],
    ],
    dtype=complex,
)


def bell_state(k: Bell | int) -> np.ndarray:
    """Return the normalized Bell vector for label ``k``."""
    return _BELL_VECTORS[Bell(k)].copy()


def bell_basis() -> np.ndarray:
    """Unitary whose columns are the Bell vectors in :class:`Bell` order."""
    return _BELL_VECTORS.T.copy()


def ket(bits: str) -> np.ndarray:
    """Computational basis vector from a bit string, e.g. ``ket("01")``."""
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def kron(*ops: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for op in ops:
        out = np.kron(out, op)
    return out


def canonical_pure(a: float, b: float) -> np.ndarray:
    """The state ``a|00> + b|11>``.

    Raises :class:`NormalizationError` unless ``|a|^2 + |b|^2 = 1``.
    """
    psi = np.array([a, 0, 0, b], dtype=complex)
    _check_norm(psi)
    return psi


def _check_norm(psi: np.ndarray) -> None:
    n2 = float(np.vdot(psi, psi).real)
    if abs(n2 - 1.0) > NORM_TOL:
        raise NormalizationError(f"state has squared norm {n2!r}, expected 1")


def pure_to_density(psi: np.ndarray) -> np.ndarray:
    """Projector ``|psi><psi|`` for a unit-norm vector."""
    psi = np.asarray(psi, dtype=complex)
    _check_norm(psi)
    return np.outer(psi, psi.conj())


def symmetrize(rho: np.ndarray) -> np.ndarray:
    return 0.5 * (rho + rho.conj().T)


def check_density(rho: np.ndarray, *, name: str = "rho") -> np.ndarray:
    """Validate a density matrix and return it as a complex array.

    Checks Hermiticity, unit trace and positivity at the module tolerances.
    Offending states raise :class:`InvalidStateError`; nothing is clipped.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"{name} must be a square matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"{name} is not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"{name} has trace {tr!r}, expected 1")
    lmin = np.linalg.eigvalsh(symmetrize(rho)).min()
    if lmin < -PSD_TOL:
        raise InvalidStateError(f"{name} is not positive semidefinite (min eigenvalue {lmin:.3g})")
    return rho


def is_density(rho: np.ndarray) -> bool:
    try:
        check_density(rho)
    except InvalidStateError:
        return False
    return True


def apply_local(A: np.ndarray, B: np.ndarray, rho: np.ndarray) -> tuple[np.ndarray, float]:
    """Apply the product operator ``A (x) B`` to ``rho``.

    Returns the normalized output state and the success probability
    ``Tr[(A(x)B) rho (A(x)B)^dag]``.

    Raises
    ------
    FilterAnnihilatesStateError
        If the success probability is below 1e-14.
    """
    K = np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))
    out = K @ rho @ K.conj().T
    p = float(np.trace(out).real)
    if p < ANNIHILATION_TOL:
        raise FilterAnnihilatesStateError(f"filter annihilates state (success probability {p:.3g})")
    return symmetrize(out / p), p


def conjugate(U: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return symmetrize(U @ rho @ U.conj().T)


def fidelity_with_pure(rho: np.ndarray, psi: np.ndarray) -> float:
    """``<psi|rho|psi>``; the Bell-state fidelity when ``psi`` is a Bell vector."""
    return float(np.vdot(psi, rho @ psi).real)


def partial_trace(rho: np.ndarray, keep: Iterable[int], n_qubits: int | None = None) -> np.ndarray:
    """Reduced state on the qubits listed in ``keep``.

    ``keep`` must be a set of distinct qubit indices in ``range(n_qubits)``;
    the kept qubits appear in increasing index order in the result.
    """
    rho = np.asarray(rho, dtype=complex)
    dim = rho.shape[0]
    if n_qubits is None:
        n_qubits = int(round(np.log2(dim)))
    if 2**n_qubits != dim or rho.shape != (dim, dim):
        raise ValueError(f"matrix of shape {rho.shape} is not an operator on {n_qubits} qubits")
    keep = list(keep)
    if len(set(keep)) != len(keep) or any(not 0 <= k < n_qubits for k in keep) or not keep:
        raise ValueError(f"malformed qubit index set {keep!r} for {n_qubits} qubits")
    keep = sorted(keep)
    t = rho.reshape([2] * (2 * n_qubits))
    row = list(range(n_qubits))
    col = [n_qubits + k for k in range(n_qubits)]
    for k in range(n_qubits):
        if k not in keep:
            col[k] = row[k]
    out_idx = [row[k] for k in keep] + [col[k] for k in keep]
    red = np.einsum(t, row + col, out_idx)
    d = 2 ** len(keep)
    return red.reshape(d, d)


def embed(op: np.ndarray, qubits: Sequence[int], n_qubits: int) -> np.ndarray:
    """Lift an operator on ``qubits`` (in the given order) to ``n_qubits`` qubits."""
    k = len(qubits)
    op = np.asarray(op, dtype=complex).reshape([2] * (2 * k))
    rest = [q for q in range(n_qubits) if q not in qubits]
    full = np.einsum(op, list(range(2 * k)), np.eye(2 ** len(rest)).reshape([2] * (2 * len(rest))),
                     list(range(2 * k, 2 * k + 2 * len(rest))))
    # axes of `full`: out(qubits), in(qubits), out(rest), in(rest)
    order = list(qubits) + rest
    out_axes = [None] * n_qubits
    in_axes = [None] * n_qubits
    for pos, q in enumerate(order):
        if pos < k:
            out_axes[q] = pos
            in_axes[q] = k + pos
        else:
            j = pos - k
            out_axes[q] = 2 * k + j
            in_axes[q] = 2 * k + len(rest) + j
    full = np.transpose(full, out_axes + in_axes)
    return full.reshape(2**n_qubits, 2**n_qubits)


def random_density(rng: np.random.Generator, rank: int = 4, dim: int = 4) -> np.ndarray:
    """Random mixed state with the induced (Hilbert-Schmidt for full rank) measure."""
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    return symmetrize(rho / np.trace(rho).real)


def random_unitary(rng: np.random.Generator, dim: int = 2) -> np.ndarray:
    """Haar-random unitary via QR of a Ginibre matrix."""
    Z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Q * (d / np.abs(d))
