"""Single-copy entanglement distillation by local filtering.

A local filter ``A (x) B`` acts on the R-picture as ``R -> L_A R L_B^T`` where
``L_A``, ``L_B`` are Lorentz transformations (up to a positive scalar). Writing
``R = L1 diag(s) L2^T`` with proper orthochronous ``L1``, ``L2`` (the Lorentz
singular value decomposition), the filter with ``L_A = L1^-1``,
``L_B = L2^-1`` brings the state to the Bell-diagonal normal form
``R' = diag(s) / s0``. For states with a diagonal normal form this maximizes
the concurrence over all local filters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import channels as ch
from .errors import (
    DegenerateInputError,
    FilterAnnihilatesStateError,
    NonDiagonalizableError,
)
from .measures import chsh_closed_form, chsh_max, concurrence, concurrence_closed_form, depolarizing_delta, to_rpicture
from .qtypes import IDENTITY, PAULIS, Bell, apply_local, bell_state, canonical_pure, fidelity_with_pure, ket, pure_to_density

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])
CLUSTER_RTOL = 1e-7
SPAN_RTOL = 1e-6
NULL_TOL = 1e-8
NORM_SLACK = 1e-12
SEPARABLE_TOL = 1e-12

# columns are row-major vec(sigma_k); S^dag S = 2 * identity
_VEC_PAULI = np.array([P.reshape(-1) for P in PAULIS]).T


@dataclass(frozen=True)
class LorentzDecomposition:
    """``R = L1 @ diag(sigma) @ L2.T`` with proper orthochronous ``L1``, ``L2``."""

    L1: np.ndarray
    L2: np.ndarray
    sigma: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.L1 @ np.diag(self.sigma) @ self.L2.T

    @property
    def normal_form(self) -> np.ndarray:
        """``diag(sigma) / s0``: the R-picture of the optimally filtered state."""
        return np.diag(self.sigma / self.sigma[0])


def is_lorentz(L: np.ndarray, atol: float = 1e-9) -> bool:
    """True if ``L`` preserves the Minkowski metric and is proper orthochronous."""
    L = np.asarray(L, dtype=float)
    return (
        np.allclose(L @ MINKOWSKI @ L.T, MINKOWSKI, atol=atol)
        and np.linalg.det(L) > 0
        and L[0, 0] >= 1 - atol
    )


def lorentz_inverse(L: np.ndarray) -> np.ndarray:
    return MINKOWSKI @ L.T @ MINKOWSKI


def _m_frame(X: np.ndarray):
    """M-orthonormal eigenbasis of the M-self-adjoint matrix ``X``.

    Returns (eigenvalues, vectors as columns, metric signs). Raises
    NonDiagonalizableError for complex spectra, defective eigenspaces or
    null directions.
    """
    lam, V = np.linalg.eig(X)
    scale = max(float(np.max(np.abs(lam))), 1e-300)
    if np.max(np.abs(lam.imag)) > 1e-8 * scale:
        raise NonDiagonalizableError("M R^T M R has a complex spectrum; no diagonal Lorentz normal form")
    lam = lam.real
    V = np.real_if_close(V, tol=1e6)
    if np.iscomplexobj(V):
        V = V.real
    order = np.argsort(-lam)
    lam, V = lam[order], V[:, order]

    clusters, start = [], 0
    for k in range(1, 5):
        if k == 4 or lam[k - 1] - lam[k] > CLUSTER_RTOL * scale:
            clusters.append(range(start, k))
            start = k

    values, vectors, signs = [], [], []
    for idx in clusters:
        mean = float(np.mean(lam[list(idx)]))
        if len(idx) == 1:
            U = V[:, list(idx)] / np.linalg.norm(V[:, idx[0]])
        else:
            # eig vectors inside a degenerate cluster are ill-conditioned; use the null space instead
            _, sv, Vh = np.linalg.svd(X - mean * np.eye(4))
            if sv[4 - len(idx)] > SPAN_RTOL * scale:
                raise NonDiagonalizableError("defective eigenspace in M R^T M R (Jordan block in the normal form)")
            U = Vh[4 - len(idx):].T
        G = U.T @ MINKOWSKI @ U
        g, W = np.linalg.eigh(0.5 * (G + G.T))
        if np.min(np.abs(g)) < NULL_TOL:
            raise NonDiagonalizableError("null eigenvector of M R^T M R (Jordan block in the normal form)")
        E = (U @ W) / np.sqrt(np.abs(g))
        for j in range(len(idx)):
            values.append(mean)
            vectors.append(E[:, j])
            signs.append(1.0 if g[j] > 0 else -1.0)
    if sum(s > 0 for s in signs) != 1:
        raise NonDiagonalizableError("eigenbasis of M R^T M R does not have Minkowski signature")
    return np.array(values), np.array(vectors).T, np.array(signs)


def _complete_spacelike(cols: dict[int, np.ndarray]) -> dict[int, np.ndarray]:
    """Fill missing spacelike columns so the set is M-orthonormal."""
    basis = [(k, v) for k, v in sorted(cols.items())]
    out = dict(cols)
    candidates = iter(np.eye(4)[1:])
    for k in range(1, 4):
        if k in out:
            continue
        while True:
            e = next(candidates).copy()
            for j, v in basis:
                m = MINKOWSKI[j, j]
                e -= m * (v @ MINKOWSKI @ e) * v
            n2 = -(e @ MINKOWSKI @ e)
            if n2 > 1e-6:
                v = e / np.sqrt(n2)
                out[k] = v
                basis.append((k, v))
                break
    return out


def lorentz_svd(R: np.ndarray) -> LorentzDecomposition:
    """Lorentz singular value decomposition ``R = L1 diag(s) L2^T``.

    The normal form has ``s0 >= |s_i|``, spacelike values ordered by
    decreasing magnitude, and at most ``s3`` negative.

    Raises
    ------
    NonDiagonalizableError
        If the normal form is not diagonal (Jordan-block case), including the
        degenerate ``s0 = 0`` case of product pure states.
    """
    R = np.asarray(R, dtype=float)
    M = MINKOWSKI
    X = M @ R.T @ M @ R
    lam, V, signs = _m_frame(X)

    t = int(np.argmax(signs))
    space = [k for k in range(4) if k != t]
    V = V[:, [t] + space]
    if V[0, 0] < 0:
        V[:, 0] = -V[:, 0]

    L2 = M @ V
    # orient spacelike columns so the dominant entry is positive (L2 = 1 when R is diagonal)
    for k in range(1, 4):
        j = int(np.argmax(np.abs(L2[:, k])))
        if L2[j, k] < 0:
            L2[:, k] = -L2[:, k]
    if np.linalg.det(L2) < 0:
        L2[:, 3] = -L2[:, 3]

    W = R @ M @ L2 @ M
    s0_sq = float(W[:, 0] @ M @ W[:, 0])
    scale = max(float(np.max(np.abs(R))), 1e-300)
    if s0_sq <= (1e-12 * scale) ** 2 or W[0, 0] <= 0:
        raise NonDiagonalizableError("degenerate Lorentz normal form (s0 = 0)")
    s0 = np.sqrt(s0_sq)
    sigma = np.zeros(4)
    sigma[0] = s0
    cols = {0: W[:, 0] / s0}
    for k in range(1, 4):
        sk_sq = -float(W[:, k] @ M @ W[:, k])
        sk = np.sqrt(max(sk_sq, 0.0))
        if sk > 1e-12 * s0:
            sigma[k] = sk
            cols[k] = W[:, k] / sk
    cols = _complete_spacelike(cols)
    L1 = np.array([cols[k] for k in range(4)]).T
    if np.linalg.det(L1) < 0:
        L1[:, 3] = -L1[:, 3]
        sigma[3] = -sigma[3]
    return LorentzDecomposition(L1=L1, L2=L2, sigma=sigma)


def lorentz_of_local(A: np.ndarray) -> np.ndarray:
    """``L_ik = (1/2) Tr[sigma_i A sigma_k A^dag]``: the R-picture action of ``A``."""
    A = np.asarray(A, dtype=complex)
    return np.array([[0.5 * np.trace(si @ A @ sk @ A.conj().T).real for sk in PAULIS] for si in PAULIS])


def local_of_lorentz(L: np.ndarray) -> np.ndarray:
    """2x2 operator ``A`` (defined up to phase) with ``lorentz_of_local(A) = L``.

    Uses ``A (x) A* = (1/2) S L S^dag`` where the columns of ``S`` are the
    vectorized Pauli matrices, then reads ``vec(A)`` off the rank-one
    rearrangement of that Kronecker product.
    """
    K = 0.5 * _VEC_PAULI @ np.asarray(L, dtype=complex) @ _VEC_PAULI.conj().T
    Kr = K.reshape(2, 2, 2, 2).transpose(0, 2, 1, 3).reshape(4, 4)
    Kr = 0.5 * (Kr + Kr.conj().T)
    w, U = np.linalg.eigh(Kr)
    if w[-1] <= 0 or abs(w[-2]) > 1e-8 * w[-1]:
        raise ValueError("matrix is not the image of a local operator (not proper orthochronous Lorentz)")
    return (np.sqrt(w[-1]) * U[:, -1]).reshape(2, 2)


def _unit_norm(A: np.ndarray) -> np.ndarray:
    return A / np.linalg.norm(A, 2)


def _singular_ratio(A: np.ndarray) -> float:
    s = np.linalg.svd(A, compute_uv=False)
    return float(s[-1] / s[0])


@dataclass(frozen=True)
class LocalFilter:
    """A product filter ``A (x) B`` with operator norms at most one.

    ``epsilon`` is the filter strength for the one-parameter families; for
    general filters the per-side strengths are :attr:`epsilon_a` and
    :attr:`epsilon_b` (ratio of singular values). ``distillable`` is False
    when the input had nothing to distill and the filter is the identity.
    """

    A: np.ndarray
    B: np.ndarray
    epsilon: float | None = None
    label: str = ""
    distillable: bool = True
    decomposition: LorentzDecomposition | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("A", "B"):
            op = np.asarray(getattr(self, name), dtype=complex)
            if op.shape != (2, 2):
                raise ValueError(f"filter factor {name} must be 2x2")
            if np.linalg.norm(op, 2) > 1 + NORM_SLACK:
                raise ValueError(f"filter factor {name} has operator norm above 1")
            object.__setattr__(self, name, op)

    @property
    def operator(self) -> np.ndarray:
        return np.kron(self.A, self.B)

    @property
    def epsilon_a(self) -> float:
        return _singular_ratio(self.A)

    @property
    def epsilon_b(self) -> float:
        return _singular_ratio(self.B)

    def apply(self, rho: np.ndarray) -> tuple[np.ndarray, float]:
        return apply_local(self.A, self.B, rho)

    def success_probability(self, rho: np.ndarray) -> float:
        K = self.operator
        return float(np.trace(K @ rho @ K.conj().T).real)

    def scaled(self, factor: float) -> "LocalFilter":
        """Same filter with ``A`` multiplied by ``factor`` in (0, 1]."""
        if not 0 < factor <= 1:
            raise ValueError("scale factor must lie in (0, 1]")
        return LocalFilter(self.A * factor, self.B, self.epsilon, self.label, self.distillable, self.decomposition)


IDENTITY_FILTER = LocalFilter(IDENTITY, IDENTITY, 1.0, "identity")


def optimal_filter(rho: np.ndarray) -> LocalFilter:
    """Concurrence-maximizing local filter from the Lorentz SVD of ``R``.

    Each factor is rescaled to unit operator norm, which maximizes the success
    probability without changing the output state. Separable inputs return
    the identity filter with ``distillable=False``.
    """
    if concurrence(rho) < SEPARABLE_TOL:
        return LocalFilter(IDENTITY, IDENTITY, 1.0, "identity", distillable=False)
    dec = lorentz_svd(to_rpicture(rho))
    A = _unit_norm(local_of_lorentz(lorentz_inverse(dec.L1)))
    B = _unit_norm(local_of_lorentz(lorentz_inverse(dec.L2)))
    return LocalFilter(A, B, None, "lorentz", True, dec)


# Rank-two protocol --------------------------------------------------------

def rank_two_state(F: float) -> np.ndarray:
    """``F |Psi+><Psi+| + (1-F) |11><11|``."""
    if not 0 <= F <= 1:
        raise ValueError(f"F must lie in [0, 1], got {F!r}")
    return F * pure_to_density(bell_state(Bell.PSI_PLUS)) + (1 - F) * pure_to_density(ket("11"))


def partial_filter(eps: float) -> np.ndarray:
    """``|0><0| + eps |1><1|``."""
    return np.diag([1.0, eps]).astype(complex)


def _check_rank_two(F, eps):
    if not 0 < F <= 1:
        raise ValueError(f"F must lie in (0, 1], got {F!r}")
    if eps == 0:
        raise FilterAnnihilatesStateError("eps = 0 annihilates the state")
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")


def rank_two_distill(F: float, eps: float) -> tuple[float, float]:
    """Fidelity and success probability after the bilateral ``diag(1, eps)`` filter.

    ``F' = F eps^2 / p`` with ``p = F eps^2 + (1-F) eps^4``.
    """
    _check_rank_two(F, eps)
    p = F * eps**2 + (1 - F) * eps**4
    return F * eps**2 / p, p


def rank_two_distill_matrix(F: float, eps: float) -> tuple[float, float]:
    """Same quantities as :func:`rank_two_distill`, computed on the 4x4 matrices."""
    _check_rank_two(F, eps)
    P = partial_filter(eps)
    out, p = apply_local(P, P, rank_two_state(F))
    return fidelity_with_pure(out, bell_state(Bell.PSI_PLUS)), p


# Noisy families and their reference filters ----------------------------------

def family_state(family: str, p: float, a: float | None = None, b: float | None = None) -> np.ndarray:
    """``a|00> + b|11>`` sent through identical local channels of ``family``.

    Amplitude damping defaults to the Bell input ``a = b = 1/sqrt 2``.
    """
    if family == "amplitude_damping" and a is None and b is None:
        a = b = 1 / np.sqrt(2)
    psi = canonical_pure(a, b)
    channel = ch.CHANNELS[family](p)
    return ch.apply_bilocal(channel, channel, pure_to_density(psi))


def depolarizing_normal_form(a: float, b: float, p: float) -> np.ndarray:
    """Reference closed form ``(s0, s1, s2, s3)`` for the depolarized ``a|00> + b|11>``."""
    delta = depolarizing_delta(a, b, p)
    s0 = 2 / 9 * (-4 * p**2 + 6 * p + delta)
    s1 = 2 / 9 * a * b * (3 - 4 * p) ** 2
    s3 = -2 / 9 * (4 * p**2 - 6 * p + delta)
    return np.array([s0, s1, s1, s3])


def closed_form_filter(family: str, p: float, a: float | None = None, b: float | None = None) -> LocalFilter:
    """The reference one-parameter filter for ``family``.

    ``depolarizing`` needs ``a != b`` and ``p != 3/4``; ``amplitude_damping``
    is for the Bell input; ``phase_damping`` is the unilateral filter
    ``1 (x) diag(eps, 1)`` with ``eps = b/a`` (``diag(1, a/b)`` when ``a < b``).
    """
    if family == "depolarizing":
        if a is None or b is None:
            raise ValueError("depolarizing filter needs a and b")
        if np.isclose(a, b, rtol=0, atol=1e-14) or np.isclose(p, 0.75, rtol=0, atol=1e-14):
            raise DegenerateInputError("depolarizing filter is singular for a = b or p = 3/4")
        delta = depolarizing_delta(a, b, p)
        c = (8 * p**2 - 12 * p + 9 + 2 * delta) / (3 * (a**2 - b**2) * (3 - 4 * p))
        if np.isclose(c, -1.0, rtol=0, atol=1e-14):
            raise DegenerateInputError("depolarizing filter is singular for c = -1")
        eps = float(np.sqrt(abs((1 - c) / (1 + c))))
        A = np.array([[0, 1], [1j * eps, 0]])
        B = np.array([[-1j * eps, 0], [0, 1]])
        if eps > 1:
            A, B = A / eps, B / eps
        return LocalFilter(A, B, eps, "depolarizing")
    if family == "amplitude_damping":
        eps = float(np.sqrt(abs((1 - p) / np.sqrt(p**2 + 1))))
        A = np.array([[eps, 0], [0, 1]])
        B = np.array([[0, 1], [eps, 0]])
        return LocalFilter(A, B, eps, "amplitude_damping")
    if family == "phase_damping":
        if a is None or b is None:
            raise ValueError("phase-damping filter needs a and b")
        if a == 0 or b == 0:
            raise DegenerateInputError("phase-damping filter needs a, b nonzero")
        if abs(a) >= abs(b):
            eps = abs(b / a)
            B = np.diag([eps, 1.0])
        else:
            eps = abs(a / b)
            B = np.diag([1.0, eps])
        return LocalFilter(IDENTITY, B, eps, "phase_damping")
    raise ValueError(f"unknown family {family!r}")


# Reports -------------------------------------------------------------------

@dataclass
class DistillationReport:
    """Before/after measures of one filtering step.

    ``closed_form`` holds the reference closed-form values for a named family (keys
    ``C_before``, ``C_after``, ``beta_before``, ``beta_after``) and
    ``discrepancies`` lists the keys where they disagree with the numerics.
    """

    input_state: np.ndarray
    output_state: np.ndarray
    success_prob: float
    C_before: float
    C_after: float
    beta_before: float
    beta_after: float
    filter: LocalFilter
    distillable: bool = True
    closed_form: dict = field(default_factory=dict)
    discrepancies: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def hidden_nonlocality(self) -> bool:
        return self.beta_before <= 1.0 < self.beta_after


def distill(rho: np.ndarray, filt: LocalFilter | None = None) -> DistillationReport:
    """Filter ``rho`` (with the optimal filter by default) and measure the result."""
    if filt is None:
        filt = optimal_filter(rho)
    out, p = filt.apply(rho)
    return DistillationReport(
        input_state=rho,
        output_state=out,
        success_prob=p,
        C_before=concurrence(rho),
        C_after=concurrence(out),
        beta_before=chsh_max(rho).beta,
        beta_after=chsh_max(out).beta,
        filter=filt,
        distillable=filt.distillable,
    )


DISCREPANCY_TOL = 1e-9


def distill_family(family: str, p: float, a: float | None = None, b: float | None = None, *,
                   use_closed_form_filter: bool = False, normalize: bool = True) -> DistillationReport:
    """Distill a member of a named noisy family and compare with the reference closed forms.

    Unnormalized amplitudes are rescaled when ``normalize`` is set, and the
    rescaling is recorded in ``notes``.
    """
    notes = []
    if family != "amplitude_damping" or a is not None:
        n = float(np.hypot(a, b))
        if abs(n - 1) > 1e-12:
            if not normalize:
                raise ValueError(f"amplitudes ({a}, {b}) are not normalized")
            notes.append(f"amplitudes ({a}, {b}) normalized by {n:.12g}")
            a, b = a / n, b / n
    rho = family_state(family, p, a, b)
    filt = None
    if use_closed_form_filter:
        try:
            filt = closed_form_filter(family, p, a, b)
        except DegenerateInputError as exc:
            # Bell-diagonal branch: no single-copy filter gains concurrence
            filt = IDENTITY_FILTER
            notes.append(f"closed-form filter replaced by identity: {exc}")
    report = distill(rho, filt)
    report.notes.extend(notes)
    try:
        c_b, c_a = concurrence_closed_form(family, p, a, b)
        b_b, b_a = chsh_closed_form(family, p, a, b)
    except DegenerateInputError as exc:
        report.notes.append(f"closed form unavailable: {exc}")
        return report
    report.closed_form = {"C_before": c_b, "C_after": c_a, "beta_before": b_b, "beta_after": b_a}
    for key, val in report.closed_form.items():
        if not abs(getattr(report, key) - val) <= DISCREPANCY_TOL:
            report.discrepancies.append(key)
    return report


def hidden_nonlocality_interval(ps, reports) -> tuple[float, float] | None:
    """Smallest and largest grid point where ``beta_before <= 1 < beta_after``."""
    hits = [p for p, r in zip(ps, reports) if r.hidden_nonlocality]
    if not hits:
        return None
    return min(hits), max(hits)


def crossings(xs, ys_a, ys_b) -> list[float]:
    """Linearly interpolated abscissae where curve ``a - b`` changes sign."""
    xs = np.asarray(xs, dtype=float)
    d = np.asarray(ys_a, dtype=float) - np.asarray(ys_b, dtype=float)
    out = []
    for i in range(len(xs) - 1):
        if d[i] == 0:
            out.append(float(xs[i]))
        elif d[i] * d[i + 1] < 0:
            out.append(float(xs[i] - d[i] * (xs[i + 1] - xs[i]) / (d[i + 1] - d[i])))
    return out
