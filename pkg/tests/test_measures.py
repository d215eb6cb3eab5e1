from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orbcorr.measures import (LOCAL_N, SSRMode, binary_entropy, closest_product_state,
                              correlation_bound_check, entanglement_pure,
                              entanglement_pure_ssr, has_definite_total, is_pure,
                              ppt_min_eigenvalue, random_density_matrix, reduced_states,
                              relative_entropy, sector_entropy, shannon_entropy, ssr_project,
                              sum_rule_check, total_correlation, von_neumann_entropy)
from orbcorr.optimize import classical_state, haar_unitaries
from orbcorr.rdm import two_orbital_rdm
from orbcorr.transforms import construct_reference_state

LN2 = np.log(2)
seeds = st.integers(0, 2**32 - 1)


def pure(v):
    v = np.asarray(v, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def test_entropy_basics():
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(LN2)
    assert shannon_entropy([1.0, 0.0, 1e-20]) == 0.0
    assert von_neumann_entropy(np.eye(16) / 16) == pytest.approx(np.log(16))
    assert binary_entropy(np.pi / 4) == pytest.approx(LN2)
    with pytest.raises(ValueError):
        von_neumann_entropy(np.eye(2))


def test_relative_entropy_support():
    rho = np.diag([0.5, 0.5])
    assert relative_entropy(rho, np.diag([1.0, 0.0])) == float("inf")
    assert relative_entropy(np.diag([1.0, 0.0]), rho) == pytest.approx(LN2)
    with pytest.raises(ValueError):
        relative_entropy(rho, np.eye(3) / 3)


@given(seeds)
def test_relative_entropy_nonnegative(seed):
    rng = np.random.default_rng(seed)
    a, b = random_density_matrix(rng, 4), random_density_matrix(rng, 4)
    assert relative_entropy(a, b) >= -1e-12
    assert relative_entropy(a, a) == pytest.approx(0.0, abs=1e-10)


@given(seeds)
def test_mutual_information_is_relative_entropy_to_product(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 16)
    I = total_correlation(rho)
    assert I >= -1e-12
    assert I == pytest.approx(relative_entropy(rho, closest_product_state(rho)), abs=1e-10)


@given(seeds, st.sampled_from([SSRMode.PARITY, SSRMode.NUMBER]))
def test_ssr_projection_properties(seed, mode):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 16)
    r = ssr_project(rho, mode)
    assert np.trace(r).real == pytest.approx(1.0)
    assert np.linalg.eigvalsh(r).min() > -1e-12
    assert np.allclose(ssr_project(r, mode), r)
    # local dephasing cannot create correlation
    assert total_correlation(r) <= total_correlation(rho) + 1e-10
    # number blocks refine parity blocks
    assert total_correlation(ssr_project(rho, SSRMode.NUMBER)) <= \
        total_correlation(ssr_project(rho, SSRMode.PARITY)) + 1e-10
    # reduced states are left alone up to their own dephasing
    rA, _ = reduced_states(r)
    g = LOCAL_N % 2 if mode is SSRMode.PARITY else LOCAL_N
    assert np.allclose(rA, np.where(g[:, None] == g[None, :], reduced_states(rho)[0], 0))


def test_ssr_mode_parse():
    assert SSRMode.parse("P") is SSRMode.PARITY and SSRMode.parse("n") is SSRMode.NUMBER
    with pytest.raises(ValueError):
        SSRMode.parse("x")
    assert np.array_equal(ssr_project(np.eye(16) / 16, "none"), np.eye(16) / 16)


def test_bell_pair_and_product():
    bell = pure([1, 0, 0, 1])
    assert entanglement_pure(bell, (2, 2)) == pytest.approx(LN2)
    assert total_correlation(bell, (2, 2)) == pytest.approx(2 * LN2)
    assert ppt_min_eigenvalue(bell, (2, 2)) == pytest.approx(-0.5)
    prod = np.kron(np.diag([0.3, 0.7]), np.diag([0.5, 0.5]))
    assert total_correlation(prod, (2, 2)) == pytest.approx(0.0, abs=1e-14)
    assert ppt_min_eigenvalue(prod, (2, 2)) >= 0
    with pytest.raises(ValueError):
        entanglement_pure(np.eye(4) / 4, (2, 2))


def test_superselected_entanglement_of_split_electron():
    psi = construct_reference_state("single_electron", theta=np.pi / 4)
    rho = two_orbital_rdm(psi, 0, 1).matrix
    assert is_pure(rho) and has_definite_total(rho, "number")
    assert entanglement_pure(rho) == pytest.approx(LN2)
    assert entanglement_pure_ssr(rho, "parity") == pytest.approx(0.0, abs=1e-14)
    assert entanglement_pure_ssr(rho, "number") == pytest.approx(0.0, abs=1e-14)


def test_superselected_entanglement_of_split_pair():
    rho = two_orbital_rdm(construct_reference_state("bond_lr"), 0, 1).matrix
    assert entanglement_pure(rho) == pytest.approx(2 * LN2)
    assert entanglement_pure_ssr(rho, "parity") == pytest.approx(LN2)
    assert entanglement_pure_ssr(rho, "number") == pytest.approx(0.5 * LN2)
    rA, _ = reduced_states(rho)
    assert sector_entropy(rA, "none") == pytest.approx(2 * LN2)


def test_definite_total_detection():
    v = np.zeros(16)
    v[0], v[5] = 1, 1  # |00> + |uu>: N = 0 and 2
    rho = pure(v)
    assert not has_definite_total(rho, "number")
    assert has_definite_total(rho, "parity")
    with pytest.raises(ValueError):
        entanglement_pure_ssr(rho, "number")


@given(seeds)
def test_correlation_bound(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 16, rank=2)
    report = correlation_bound_check(rho, samples=30, seed=seed)
    assert report.ok and report.max_ratio <= report.bound + 1e-10


@given(seeds)
def test_sum_rules_for_dephased_states(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 16)
    UA, UB = haar_unitaries(rng, 1, 4)[0], haar_unitaries(rng, 1, 4)[0]
    chi = classical_state(rho, UA, UB)
    report = sum_rule_check(rho, chi)
    assert report.ok(1e-10)
    assert report.Q >= -1e-12


def test_commuting_case_equality(rng):
    rho = np.diag(rng.dirichlet(np.ones(16))).astype(complex)
    report = sum_rule_check(rho, classical_state(rho, np.eye(4), np.eye(4)))
    assert report.commuting and report.commuting_equality
    assert report.Q == pytest.approx(0.0, abs=1e-12)


def test_sum_rule_pure_state():
    rho = two_orbital_rdm(construct_reference_state("bond_lr"), 0, 1).matrix
    chi = classical_state(rho, np.eye(4), np.eye(4))
    report = sum_rule_check(rho, chi)
    assert report.ok()
    assert report.Q == pytest.approx(2 * LN2)
