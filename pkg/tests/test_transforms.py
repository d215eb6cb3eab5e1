from __future__ import annotations

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, strategies as st

from orbcorr.fock import WaveFunction, build_sector_basis, det_from_occupations, one_body_matrix
from orbcorr.transforms import (OrbitalRotation, apply_rotation, benzene_atomiclike,
                                benzene_mo_coefficients, benzene_step_labels,
                                benzene_step_sequence, construct_reference_state, jacobi,
                                load_rotation, pairwise_jacobi, save_rotation)

from . import oracles


def random_orthogonal(rng, D):
    Q, R = np.linalg.qr(rng.standard_normal((D, D)))
    return Q * np.sign(np.diag(R))


def random_state(rng, D, N, two_sz):
    basis = build_sector_basis(D, N, two_sz)
    v = rng.standard_normal(len(basis.dets)) + 1j * rng.standard_normal(len(basis.dets))
    return WaveFunction(basis, v / np.linalg.norm(v))


def fock_oracle_rotation(psi: WaveFunction, M: np.ndarray) -> np.ndarray:
    """Rotated state from the exponential of a one-body generator in the full Fock space."""
    D = psi.D
    A = M.T
    flip = np.eye(D)
    if np.linalg.det(A) < 0:
        flip[0, 0] = -1
        A = A @ flip
    kappa = scipy.linalg.logm(A).real
    a, c = oracles.operators(D)
    G = sum(kappa[p, q] * c[2 * p + s] @ a[2 * q + s]
            for p in range(D) for q in range(D) for s in (0, 1))
    v = oracles.embed(D, psi.basis.dets, psi.amplitudes)
    if flip[0, 0] < 0:
        n0 = c[0] @ a[0] + c[1] @ a[1]
        v = scipy.linalg.expm(1j * np.pi * n0) @ v
    return scipy.linalg.expm(G) @ v


def test_jacobi_matrix():
    R = jacobi(0, 2, 0.3, 3)
    c, s = np.cos(0.3), np.sin(0.3)
    assert np.allclose(R.matrix, [[c, 0, s], [0, 1, 0], [-s, 0, c]])
    with pytest.raises(ValueError):
        jacobi(1, 1, 0.1, 3)
    with pytest.raises(IndexError):
        jacobi(0, 3, 0.1, 3)


def test_jacobi_composition_adds_angles():
    R = jacobi(0, 1, 0.2, 2).then(jacobi(0, 1, 0.5, 2))
    assert np.allclose(R.matrix, jacobi(0, 1, 0.7, 2).matrix, atol=1e-14)
    assert np.allclose(R.then(R.inverse()).matrix, np.eye(2), atol=1e-14)


def test_non_orthogonal_rejected():
    with pytest.raises(ValueError):
        OrbitalRotation(np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        OrbitalRotation(np.ones((2, 3)))


def test_save_load_round_trip(tmp_path, rng):
    R = OrbitalRotation(random_orthogonal(rng, 5))
    save_rotation(R, tmp_path / "r.txt")
    assert np.array_equal(load_rotation(tmp_path / "r.txt").matrix, R.matrix)


def test_benzene_coefficients_orthogonal():
    U = benzene_mo_coefficients()
    assert np.abs(U @ U.T - np.eye(6)).max() < 1e-15


def test_benzene_steps_relabel_inverse_mo_matrix():
    steps = benzene_step_sequence()
    P = steps @ benzene_mo_coefficients()
    assert np.allclose(P, np.rint(P), atol=1e-14)
    assert sorted(benzene_step_labels()) == list(range(6))
    # each produced orbital sits mainly on one site
    assert np.all((P ** 2).max(axis=1) > 0.5)


def test_benzene_atomiclike_returns_sites():
    R = OrbitalRotation(benzene_mo_coefficients().T).then(benzene_atomiclike())
    assert np.abs(R.matrix - np.eye(6)).max() < 1e-14
    with pytest.raises(ValueError):
        benzene_atomiclike(D=4)


def test_single_electron_transforms_as_vector(rng):
    D = 4
    M = random_orthogonal(rng, D)
    psi = random_state(rng, D, 1, 1)
    out = apply_rotation(psi, OrbitalRotation(M))
    c = np.array([psi.amplitude(det_from_occupations([p])) for p in range(D)])
    c_new = np.array([out.amplitude(det_from_occupations([p])) for p in range(D)])
    assert np.allclose(c_new, M.T @ c, atol=1e-12)


@given(st.integers(2, 3), st.integers(0, 2**32 - 1), st.data())
def test_rotation_matches_fock_exponential(D, seed, data):
    rng = np.random.default_rng(seed)
    N = data.draw(st.integers(1, 2 * D - 1))
    two_sz = data.draw(st.sampled_from([s for s in range(-N, N + 1, 2) if abs(s) <= 2 * D - N]))
    psi = random_state(rng, D, N, two_sz)
    M = random_orthogonal(rng, D)
    ours = apply_rotation(psi, OrbitalRotation(M))
    ref = fock_oracle_rotation(psi, M)
    assert np.allclose(oracles.embed(D, ours.basis.dets, ours.amplitudes), ref, atol=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_rotation_round_trip_and_norm(seed):
    rng = np.random.default_rng(seed)
    psi = random_state(rng, 4, 4, 0)
    R = OrbitalRotation(random_orthogonal(rng, 4))
    out = apply_rotation(psi, R)
    assert out.basis is psi.basis
    assert out.norm() == pytest.approx(1.0, abs=1e-12)
    back = apply_rotation(out, R.inverse())
    assert np.allclose(back.amplitudes, psi.amplitudes, atol=1e-10)


def test_composition_matches_sequential(rng):
    psi = random_state(rng, 3, 3, 1)
    R1 = OrbitalRotation(random_orthogonal(rng, 3))
    R2 = OrbitalRotation(random_orthogonal(rng, 3))
    a = apply_rotation(apply_rotation(psi, R1), R2)
    b = apply_rotation(psi, R1.then(R2))
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-10)


def test_one_body_expectation_invariance(rng):
    D = 4
    psi = random_state(rng, D, 3, 1)
    M = random_orthogonal(rng, D)
    K = rng.standard_normal((D, D))
    K = K + K.T
    out = apply_rotation(psi, OrbitalRotation(M))
    lhs = np.vdot(out.amplitudes, one_body_matrix(psi.basis, K) @ out.amplitudes)
    rhs = np.vdot(psi.amplitudes, one_body_matrix(psi.basis, M @ K @ M.T) @ psi.amplitudes)
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_bond_psi2_rotated_by_quarter_turn():
    out = apply_rotation(construct_reference_state("bond_psi2"), jacobi(0, 1, np.pi / 4, 2))
    amps = {int(d): a for d, a in zip(out.basis.dets, out.amplitudes)}
    assert np.allclose([amps[3], amps[12], amps[6], amps[9]], [0.5, 0.5, -0.5, 0.5], atol=1e-12)


@given(st.floats(-np.pi, np.pi))
def test_filled_shell_invariant(theta):
    psi = construct_reference_state("bond_psi4")
    out = apply_rotation(psi, jacobi(0, 1, theta, 2))
    assert abs(abs(out.amplitudes[0]) - 1) < 1e-12


def test_reference_states():
    s = construct_reference_state("single_electron", theta=np.pi / 3, phi=0.5)
    assert s.norm() == pytest.approx(1.0)
    assert s.amplitude(det_from_occupations([1])) == pytest.approx(np.exp(0.5j) * np.sin(np.pi / 3))
    lr = construct_reference_state("bond_lr")
    assert lr.norm() == pytest.approx(1.0)
    k = construct_reference_state("k_fold", K=3)
    assert k.D == 6 and k.basis.N == 6
    with pytest.raises(ValueError):
        construct_reference_state("k_fold", K=0)
    with pytest.raises(ValueError):
        construct_reference_state("nope")


def test_bond_lr_is_rotated_bond():
    psi = apply_rotation(construct_reference_state("bond_psi2"), jacobi(0, 1, np.pi / 4, 2))
    lr = construct_reference_state("bond_lr")
    assert abs(np.vdot(psi.amplitudes, lr.amplitudes)) == pytest.approx(1.0, abs=1e-12)


def test_pairwise_jacobi_blocks():
    R = pairwise_jacobi([(0, 1), (2, 3)], 0.4, 4)
    assert np.allclose(R.matrix[:2, :2], jacobi(0, 1, 0.4, 2).matrix)
    assert np.allclose(R.matrix[:2, 2:], 0)


def test_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        apply_rotation(random_state(rng, 3, 2, 0), OrbitalRotation.identity(2))
