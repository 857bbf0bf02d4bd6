import numpy as np
import pytest

from atompurify import bsm
from atompurify.filtering import rank_two_state
from atompurify.qtypes import HADAMARD, IDENTITY, SIGMA_X, Bell, bell_basis, bell_state, pure_to_density, random_density

S = 1 / np.sqrt(2)


def test_povm_examples():
    assert np.allclose(bsm.povm_element(1.0).operator, np.eye(2))
    out, p = bsm.povm_element(0.2).apply([S, S])
    assert np.allclose(out, np.array([1, 0.2]) * S)
    assert p == pytest.approx(0.52, abs=1e-15)
    e = bsm.povm_element(0.5, 1j)
    assert e.label == "P'"
    out, p = e.apply([0, 1])
    assert np.allclose(out, [0, 0.5j])
    assert p == pytest.approx(0.25)


@pytest.mark.parametrize("eps,phase", [(0.0, 1), (1.5, 1), (0.5, -1)])
def test_povm_rejects_bad_arguments(eps, phase):
    with pytest.raises(ValueError):
        bsm.povm_element(eps, phase)


def test_parity_projector_algebra():
    P1, P2 = bsm.parity_projectors()
    assert np.allclose(P1.operator + P2.operator, np.eye(4))
    assert np.abs(P1.operator @ P2.operator).max() < 1e-12
    assert P1.rank == P2.rank == 2
    for k in (Bell.PHI_PLUS, Bell.PHI_MINUS):
        assert np.allclose(P1.operator @ bell_state(k), bell_state(k))
    for k in (Bell.PSI_PLUS, Bell.PSI_MINUS):
        assert np.allclose(P1.operator @ bell_state(k), 0)
    assert np.allclose(P1.operator, bsm.bell_subspace_projector(Bell.PHI_PLUS, Bell.PHI_MINUS))
    assert P1.probability(pure_to_density(bell_state(0))) == pytest.approx(1.0)


def test_parity_projector_rejects_non_projector():
    with pytest.raises(ValueError):
        bsm.ParityProjector(np.eye(4) * 0.5, "half")


def test_permuted_projectors():
    P1, _ = bsm.parity_projectors()
    hh = bsm.permuted_projector(P1, np.kron(HADAMARD, HADAMARD))
    assert np.allclose(hh.operator, bsm.bell_subspace_projector(Bell.PHI_PLUS, Bell.PSI_PLUS))
    assert np.allclose(bsm.permuted_projector(P1, np.eye(4)).operator, P1.operator)
    xs = bsm.permuted_projector(P1, np.kron(SIGMA_X, IDENTITY))
    assert np.allclose(xs.operator, bsm.bell_subspace_projector(Bell.PSI_PLUS, Bell.PSI_MINUS))
    for P in (hh, xs):
        assert P.rank == 2
        assert np.abs(P.operator @ P.operator - P.operator).max() < 1e-12


def test_permuted_projector_rejects_non_unitary():
    P1, _ = bsm.parity_projectors()
    with pytest.raises(ValueError):
        bsm.permuted_projector(P1, 2 * np.eye(4))


def _probs(rho):
    return [o.probability for o in bsm.full_bsm(rho)]


def test_full_bsm_examples():
    assert _probs(pure_to_density(bell_state(Bell.PHI_PLUS))) == pytest.approx([1, 0, 0, 0], abs=1e-12)
    assert _probs(np.eye(4) / 4) == pytest.approx([0.25] * 4, abs=1e-12)
    assert _probs(rank_two_state(0.7)) == pytest.approx([0.15, 0.15, 0.7, 0.0], abs=1e-12)


def test_full_bsm_matches_bell_diagonal(rng):
    B = bell_basis()
    for _ in range(20):
        rho = random_density(rng)
        outcomes = bsm.full_bsm(rho)
        expected = np.diag(B.conj().T @ rho @ B).real
        assert np.abs(np.array([o.probability for o in outcomes]) - expected).max() < 1e-12
        for o in outcomes:
            if o.post_state is not None:
                psi = bell_state(o.bell)
                assert np.allclose(o.post_state, np.outer(psi, psi.conj()), atol=1e-10)


def test_phase_gate_fixture(rng):
    for _ in range(3):
        c = rng.normal(size=4) + 1j * rng.normal(size=4)
        a1, b1 = c[:2] / np.linalg.norm(c[:2])
        a2, b2 = c[2:] / np.linalg.norm(c[2:])
        out = bsm.conditional_phase_gate() @ bsm.phase_gate_input(a1, b1, a2, b2)
        assert np.allclose(out, bsm.phase_gate_output(a1, b1, a2, b2), atol=1e-12)


def test_phase_gate_is_diagonal_unitary():
    G = bsm.conditional_phase_gate(3)
    assert G.shape == (16, 16)
    assert np.allclose(G @ G, np.eye(16))


def test_detection_heralds_parity(rng):
    D1, D2 = bsm.hv_detection_projectors()
    P1, P2 = bsm.parity_projectors()
    assert np.allclose(D1, P1.operator)
    assert np.allclose(D2, -P2.operator)
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    psi /= np.linalg.norm(psi)
    total = sum(np.linalg.norm(D @ psi) ** 2 for D in (D1, D2))
    assert total == pytest.approx(1.0)
