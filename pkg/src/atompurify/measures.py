"""Entanglement and nonlocality measures for two-qubit states.

The R-picture is the real 4x4 matrix ``R_ij = Tr[rho (sigma_i (x) sigma_j)]``
with ``sigma_0`` the identity, so ``rho = (1/4) sum_ij R_ij sigma_i (x) sigma_j``.

CHSH values use the normalization in which local hidden-variable models are
bounded by 1 and quantum states by sqrt(2); multiply by 2 for the usual
Clauser-Horne-Shimony-Holt bound of 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, UnphysicalRMatrixError
from .qtypes import PAULIS, PSD_TOL, SIGMA_Y, symmetrize

# _PAULI_PAIRS[i, j] = sigma_i (x) sigma_j
_PAULI_PAIRS = np.array([[np.kron(si, sj) for sj in PAULIS] for si in PAULIS])
_YY = np.kron(SIGMA_Y, SIGMA_Y)
# eigenvalues of the Hermitian form are squared lambdas: 1e-15 floors lambdas near 3e-8
WOOTTERS_DUST = 1e-15

BOUND_1 = "classical-bound-1"
BOUND_2 = "classical-bound-2"


def to_rpicture(rho: np.ndarray) -> np.ndarray:
    """Real correlation matrix ``R_ij = Tr[rho sigma_i (x) sigma_j]``."""
    return np.einsum("ijba,ab->ij", _PAULI_PAIRS, rho).real


def from_rpicture(R: np.ndarray, *, check: bool = True) -> np.ndarray:
    """Inverse of :func:`to_rpicture`.

    Raises :class:`UnphysicalRMatrixError` if the reconstructed operator has an
    eigenvalue below -1e-10 (unless ``check=False``).
    """
    R = np.asarray(R, dtype=float)
    rho = symmetrize(np.einsum("ij,ijab->ab", R, _PAULI_PAIRS) / 4)
    if check:
        lmin = np.linalg.eigvalsh(rho).min()
        if lmin < -PSD_TOL:
            raise UnphysicalRMatrixError(f"R reconstructs to a non-PSD operator (min eigenvalue {lmin:.3g})")
    return rho


def correlation_block(rho_or_R: np.ndarray) -> np.ndarray:
    """The 3x3 block ``T_ij = R_ij``, i, j = 1..3."""
    M = np.asarray(rho_or_R)
    R = to_rpicture(M) if np.iscomplexobj(M) else M
    return R[1:, 1:]


def _sqrtm_psd(rho: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(rho)
    return (V * np.sqrt(np.clip(w, 0, None))[..., None, :]) @ np.swapaxes(V.conj(), -1, -2)


def wootters_lambdas(rho: np.ndarray) -> np.ndarray:
    """Decreasing square roots of the spectrum of ``rho (s_y s_y) rho* (s_y s_y)``.

    Computed through the Hermitian form ``sqrt(rho) rho~ sqrt(rho)``, which has
    the same spectrum. Works on stacks of matrices.
    """
    rho = np.asarray(rho, dtype=complex)
    sq = _sqrtm_psd(rho)
    tilde = _YY @ rho.conj() @ _YY
    herm = sq @ tilde @ sq
    herm = 0.5 * (herm + np.swapaxes(herm.conj(), -1, -2))
    ev = np.linalg.eigvalsh(herm)
    ev = np.where(ev < WOOTTERS_DUST, 0.0, ev)
    return np.sqrt(ev)[..., ::-1]


def concurrence(rho: np.ndarray) -> float | np.ndarray:
    """Wootters concurrence ``max(0, l1 - l2 - l3 - l4)``.

    Accepts a single 4x4 matrix or a stack ``(..., 4, 4)``; the latter is the
    vectorized path used for large random searches.
    """
    lam = wootters_lambdas(rho)
    c = np.maximum(0.0, lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3])
    c = np.minimum(c, 1.0)
    return float(c) if np.ndim(c) == 0 else c


def entanglement_of_formation(rho: np.ndarray) -> float:
    c = concurrence(rho)
    x = (1 + np.sqrt(max(0.0, 1 - c * c))) / 2
    if x >= 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1 - x) * np.log2(1 - x))


@dataclass(frozen=True)
class ChshValue:
    """Maximal CHSH expectation.

    ``beta`` is in the normalization named by ``normalization``:
    ``"classical-bound-1"`` (local bound 1, quantum bound sqrt 2) or
    ``"classical-bound-2"`` (the usual bound 2).
    """

    beta: float
    normalization: str = BOUND_1

    def __float__(self) -> float:
        return self.beta

    def to(self, normalization: str) -> "ChshValue":
        if normalization == self.normalization:
            return self
        if normalization not in (BOUND_1, BOUND_2):
            raise ValueError(f"unknown normalization {normalization!r}")
        factor = 2.0 if normalization == BOUND_2 else 0.5
        return ChshValue(self.beta * factor, normalization)

    @property
    def violates(self) -> bool:
        bound = 1.0 if self.normalization == BOUND_1 else 2.0
        return self.beta > bound


def chsh_max(rho: np.ndarray, normalization: str = BOUND_1) -> ChshValue:
    """Maximal CHSH value from the two largest eigenvalues of ``T^T T``."""
    T = correlation_block(to_rpicture(rho))
    u = np.linalg.eigvalsh(T.T @ T)
    beta = float(np.sqrt(max(0.0, u[-1] + u[-2])))
    return ChshValue(beta).to(normalization)


def bell_operator(a, b, c, d) -> np.ndarray:
    """``(1/2) sum_ij [a_i (c_j + d_j) + b_i (c_j - d_j)] sigma_i (x) sigma_j``."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    coef = 0.5 * (np.outer(a, c + d) + np.outer(b, c - d))
    return np.einsum("ij,ijab->ab", coef, _PAULI_PAIRS[1:, 1:])


def chsh_expectation(rho: np.ndarray, a, b, c, d) -> float:
    return float(np.trace(rho @ bell_operator(a, b, c, d)).real)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _unit_or(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 0 else fallback


def chsh_sampled(rho: np.ndarray, n_samples: int, rng: np.random.Generator, refine_steps: int = 0) -> float:
    """Best CHSH expectation over random measurement directions.

    Draws ``n_samples`` independent quadruples of unit vectors, evaluates
    ``Tr(rho B)`` for each and returns the largest. With ``refine_steps > 0``
    the best quadruple is then improved by alternating closed-form updates of
    (c, d) given (a, b) and vice versa; every update is non-decreasing.
    """
    T = correlation_block(to_rpicture(rho))
    vecs = _unit(rng.normal(size=(4, n_samples, 3)))
    a, b, c, d = vecs
    vals = 0.5 * (np.einsum("ni,ij,nj->n", a, T, c + d) + np.einsum("ni,ij,nj->n", b, T, c - d))
    k = int(np.argmax(vals))
    best = float(vals[k])
    a, b, c, d = a[k], b[k], c[k], d[k]
    for _ in range(refine_steps):
        c = _unit_or(T.T @ (a + b), c)
        d = _unit_or(T.T @ (a - b), d)
        a = _unit_or(T @ (c + d), a)
        b = _unit_or(T @ (c - d), b)
        best = max(best, float(0.5 * (a @ T @ (c + d) + b @ T @ (c - d))))
    return best


# Closed forms for three noisy families of a|00> + b|11>.

FAMILIES = ("depolarizing", "amplitude_damping", "phase_damping")


def depolarizing_delta(a: float, b: float, p: float) -> float:
    """The square-root term of the reference depolarizing normal form.

    Raises :class:`DegenerateInputError` where the radicand is negative.
    """
    rad = 9 * a**2 * b**2 * (3 - 4 * p) + 4 * p**2 * (3 - 2 * p) ** 2
    if rad < 0:
        raise DegenerateInputError(f"depolarizing closed form undefined at p = {p!r} (negative radicand)")
    return float(np.sqrt(rad))


def _ab(family: str, a, b):
    if family == "amplitude_damping":
        return 1 / np.sqrt(2), 1 / np.sqrt(2)
    if a is None or b is None:
        raise ValueError(f"family {family!r} needs amplitudes a and b")
    return float(a), float(b)


def concurrence_closed_form(family: str, p: float, a: float | None = None, b: float | None = None) -> tuple[float, float]:
    """``(C(rho), C(rho'))`` from the reference closed forms for the given family.

    The amplitude-damping forms are for the Bell input ``a = b = 1/sqrt 2``.
    """
    a, b = _ab(family, a, b)
    if family == "depolarizing":
        delta = depolarizing_delta(a, b, p)
        num = a * b * (3 - 4 * p) ** 2 + 4 * p**2 - 6 * p
        den = -4 * p**2 + 6 * p + delta
        if den == 0:
            raise DegenerateInputError("depolarizing closed form is singular at these parameters")
        return max(0.0, 2 / 9 * num), max(0.0, num / den)
    if family == "amplitude_damping":
        return max(0.0, (1 - p) ** 2), max(0.0, (1 - p) / (np.sqrt(p**2 + 1) + p))
    if family == "phase_damping":
        c_after = (1 - 2 * p) ** 2
        return 2 * abs(a * b) * c_after, c_after
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def chsh_closed_form(family: str, p: float, a: float | None = None, b: float | None = None) -> tuple[float, float]:
    """``(beta_rho, beta_rho')`` from the reference closed forms for the given family (bound-1 normalization).

    For phase damping the reference relation ``beta_rho' = beta_rho / (2|ab|)`` is
    used to obtain ``beta_rho``. These are literal evaluations; where they
    differ from :func:`chsh_max`, the latter is correct.
    """
    a, b = _ab(family, a, b)
    if family == "depolarizing":
        delta = depolarizing_delta(a, b, p)
        den = -4 * p**2 + 6 * p + delta
        if den == 0:
            raise DegenerateInputError("depolarizing closed form is singular at these parameters")
        q2 = (3 - 4 * p) ** 2
        return 2 * np.sqrt(2) / 9 * a * b * q2, np.sqrt(2) * a * b * q2 / den
    if family == "amplitude_damping":
        return np.sqrt(2) * (1 - p), np.sqrt(2) / (np.sqrt(p**2 + 1) + p)
    if family == "phase_damping":
        after = float(np.sqrt(1 + (1 - 2 * p) ** 4))
        return 2 * abs(a * b) * after, after
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
