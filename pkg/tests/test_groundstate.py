from __future__ import annotations

import logging

import numpy as np
import pytest

from orbcorr.groundstate import ConvergenceError, SolverConfig, ground_state
from orbcorr.hamiltonians import (IntegralSet, build_huckel, build_hubbard, build_ppp,
                                  chain_bonds, hamiltonian_for, load_geometry)

from . import oracles


def test_dense_matches_oracle(rng):
    h, g = oracles.random_integrals(rng, 3)
    H = hamiltonian_for(IntegralSet(3, h, g, 0.2), 3, 1)
    gs = ground_state(H, SolverConfig(method="dense"))
    full = oracles.hamiltonian(h, g, 0.2)
    idx = oracles.sector_indices(3, 3, 1)
    assert gs.energy == pytest.approx(np.linalg.eigvalsh(full[np.ix_(idx, idx)])[0], abs=1e-10)
    assert gs.method == "dense" and gs.residual < 1e-10


def test_lanczos_matches_dense_benzene_ppp():
    H = hamiltonian_for(build_ppp(load_geometry("benzene")), 6, 0)
    dense = ground_state(H, SolverConfig(method="dense"))
    lanczos = ground_state(H, SolverConfig(method="lanczos"))
    assert lanczos.energy == pytest.approx(dense.energy, abs=1e-10)
    assert abs(np.vdot(dense.wavefunction.amplitudes, lanczos.wavefunction.amplitudes)) == \
        pytest.approx(1.0, abs=1e-8)


def test_phase_is_deterministic():
    H = hamiltonian_for(build_hubbard(4, chain_bonds(4), 1.0, 2.0), 4, 0)
    a = ground_state(H).wavefunction.amplitudes
    b = ground_state(H).wavefunction.amplitudes
    assert np.array_equal(a, b)
    k = np.argmax(np.abs(a))
    assert a[k].imag == 0 and a[k].real > 0
    assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-14)


def test_degenerate_ground_state_flagged(caplog):
    # four-site ring at half filling minus two: open-shell degeneracy
    H = hamiltonian_for(build_huckel(4, chain_bonds(4, periodic=True)), 2, 2)
    with caplog.at_level(logging.WARNING):
        gs = ground_state(H)
    assert gs.degenerate and "degenerate" in caplog.text


def test_nondegenerate_has_gap():
    H = hamiltonian_for(build_hubbard(2, [(0, 1)], 1.0, 2.0), 2, 0)
    gs = ground_state(H)
    assert not gs.degenerate and gs.gap > 0.1


def test_convergence_error_carries_residual():
    H = hamiltonian_for(build_hubbard(6, chain_bonds(6), 1.0, 4.0), 6, 0)
    with pytest.raises(ConvergenceError) as err:
        ground_state(H, SolverConfig(method="lanczos", max_iter=1, tol=1e-14))
    assert err.value.residual > 0


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol=0)
    with pytest.raises(ValueError):
        SolverConfig(method="qr")
