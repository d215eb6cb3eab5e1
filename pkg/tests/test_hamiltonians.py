from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from orbcorr.fock import build_sector_basis
from orbcorr.hamiltonians import (BUNDLED_GEOMETRIES, FCIDumpError, Geometry, IntegralSet,
                                  assemble_hamiltonian, backbone_order, bonds_from_geometry,
                                  build_huckel, build_hubbard, build_ppp, chain_bonds,
                                  fcidump_string, hamiltonian_for, load_geometry, ohno,
                                  parse_fcidump, read_xyz, reorder_sites, ring_order,
                                  rotate_integrals, write_fcidump)

from . import oracles

H2_DUMP = """ &FCI NORB=2,NELEC=2,MS2=0,
  ORBSYM=1,1,
  ISYM=1,
 &END
 0.6757101548 1 1 1 1
 0.6645817440 2 2 1 1
 0.6986332277 2 2 2 2
 0.1809312700 2 1 2 1
-1.2563390730 1 1 0 0
-0.4718960244 2 2 0 0
 0.7137539936 0 0 0 0
"""


def test_parse_small_fcidump():
    ints = parse_fcidump(H2_DUMP)
    assert ints.D == 2 and ints.nelec == 2 and ints.ms2 == 0
    assert ints.g[0, 1, 0, 1] == ints.g[1, 0, 1, 0] == ints.g[0, 1, 1, 0] == 0.18093127
    assert ints.g[0, 0, 1, 1] == ints.g[1, 1, 0, 0]
    assert ints.e_core == pytest.approx(0.7137539936)
    ints.check_symmetry()


def test_parse_slash_terminated_header_and_fortran_exponent():
    text = "&FCI NORB=1, NELEC=1, MS2=1\n/\n 0.5D0 1 1 1 1\n -1.0 1 1 0 0\n"
    ints = parse_fcidump(text)
    assert ints.g[0, 0, 0, 0] == 0.5 and ints.h[0, 0] == -1.0


@pytest.mark.parametrize("body,line", [
    ("&FCI NORB=2,NELEC=2,\n&END\n 1.0 1 1 1\n", 3),
    ("&FCI NORB=2,NELEC=2,\n&END\n 1.0 1 1 3 3\n", 3),
    ("&FCI NORB=2,NELEC=2,\n&END\n 0.0 0 0 0 0\n x 1 1 0 0\n", 4),
    ("&FCI NORB=2,NELEC=2,\n&END\n 1.0 0 1 0 1\n", 3),
])
def test_malformed_records_report_line(body, line):
    with pytest.raises(FCIDumpError) as err:
        parse_fcidump(body)
    assert err.value.lineno == line


def test_header_errors():
    with pytest.raises(FCIDumpError):
        parse_fcidump("NORB=2\n1.0 1 1 1 1\n")
    with pytest.raises(FCIDumpError):
        parse_fcidump("&FCI NELEC=2,\n&END\n")


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_fcidump_round_trip(D, seed):
    rng = np.random.default_rng(seed)
    h, g = oracles.random_integrals(rng, D)
    ints = IntegralSet(D, h, g, float(rng.standard_normal()), nelec=D, ms2=D % 2)
    back = parse_fcidump(fcidump_string(ints))
    # averaging leaves symmetric partners unequal in the last bit
    assert np.allclose(back.g, ints.g, rtol=0, atol=1e-15)
    assert np.array_equal(back.h, ints.h)
    again = parse_fcidump(fcidump_string(back))
    assert np.array_equal(again.g, back.g)
    assert back.e_core == ints.e_core and back.nelec == D and back.ms2 == D % 2


def test_write_to_path(tmp_path):
    ints = parse_fcidump(H2_DUMP)
    write_fcidump(ints, tmp_path / "x.fcidump")
    assert np.array_equal(parse_fcidump(tmp_path / "x.fcidump").g, ints.g)


@pytest.mark.parametrize("D", [1, 2, 3])
def test_hamiltonian_matches_jordan_wigner(D, rng):
    h, g = oracles.random_integrals(rng, D)
    H_full = oracles.hamiltonian(h, g, 0.3)
    ints = IntegralSet(D, h, g, 0.3)
    for N in range(2 * D + 1):
        for s in range(-N, N + 1, 2):
            try:
                basis = build_sector_basis(D, N, s)
            except ValueError:
                continue
            idx = oracles.sector_indices(D, N, s)
            assert np.array_equal(basis.dets.astype(int), idx)
            ours = assemble_hamiltonian(ints, basis).matrix.toarray()
            assert np.allclose(ours, H_full[np.ix_(idx, idx)], atol=1e-12)


def test_noninteracting_aufbau(rng):
    D = 5
    h, _ = oracles.random_integrals(rng, D)
    ints = IntegralSet(D, h, np.zeros((D,) * 4))
    eps = np.sort(np.linalg.eigvalsh(h))
    H = hamiltonian_for(ints, 4, 0)
    E0 = np.linalg.eigvalsh(H.matrix.toarray())[0]
    assert E0 == pytest.approx(2 * eps[:2].sum(), abs=1e-10)


@pytest.mark.parametrize("U", [0.0, 1.0, 2.0, 4.0, 8.0])
def test_hubbard_dimer_closed_form(U):
    H = hamiltonian_for(build_hubbard(2, [(0, 1)], t=1.0, U=U), 2, 0)
    E0 = np.linalg.eigvalsh(H.matrix.toarray())[0]
    assert E0 == pytest.approx((U - np.sqrt(U * U + 16)) / 2, abs=1e-12)


def test_hubbard_dimer_reference_value():
    H = hamiltonian_for(build_hubbard(2, [(0, 1)], t=1.0, U=2.0), 2, 0)
    assert np.linalg.eigvalsh(H.matrix.toarray())[0] == pytest.approx(-1.2360679775, abs=1e-9)


def test_hamiltonian_is_hermitian(rng):
    h, g = oracles.random_integrals(rng, 4)
    M = hamiltonian_for(IntegralSet(4, h, g), 4, 0).matrix
    assert abs(M - M.T).max() < 1e-14


def test_disconnected_graph_rejected():
    with pytest.raises(ValueError):
        build_huckel(4, [(0, 1), (2, 3)])


def test_chain_and_ring_bonds():
    assert chain_bonds(3) == [(0, 1), (1, 2)]
    assert chain_bonds(4, periodic=True)[-1] == (0, 3)


def test_ohno_limits():
    assert ohno(0.0, 11.26) == pytest.approx(11.26)
    assert ohno(1000.0, 11.26) == pytest.approx(14.399645 / 1000.0, rel=1e-6)


@pytest.mark.parametrize("name,n_c,n_atoms", [("benzene", 6, 12), ("ethylene", 2, 6),
                                              ("decapentaene", 10, 22), ("eicosadecaene", 20, 42)])
def test_bundled_geometries(name, n_c, n_atoms):
    geom = load_geometry(name)
    assert len(geom.atoms) == n_atoms and len(geom.active) == n_c
    bonds = bonds_from_geometry(geom)
    assert len(bonds) == (6 if name == "benzene" else n_c - 1)
    order = backbone_order(bonds, n_c)
    d = geom.distance_matrix()
    assert all(d[order[k], order[k + 1]] < 1.6 for k in range(n_c - 1))
    assert set(BUNDLED_GEOMETRIES) >= {name}


def test_ring_order_rejects_chain():
    with pytest.raises(ValueError):
        ring_order([(0, 1), (1, 2)], 3)


def test_bond_threshold_warning():
    geom = Geometry([("C", 0, 0, 0), ("C", 1.59, 0, 0)])
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        assert bonds_from_geometry(geom) == [(0, 1)]
    assert caught


def test_read_xyz_text_and_errors(tmp_path):
    geom = read_xyz("2\nethyne fragment\nC 0 0 0\nC 0 0 1.2\n")
    assert len(geom.active) == 2
    with pytest.raises(ValueError):
        read_xyz("nothing\nhere\n")


def test_ppp_neutral_limit():
    # two sites far apart: core attraction cancels the electron repulsion
    geom = Geometry([("C", 0, 0, 0), ("C", 1.4, 0, 0)])
    ints = build_ppp(geom)
    V = ohno(1.4, 11.26)
    assert ints.h[0, 0] == pytest.approx(-V)
    assert ints.h[0, 1] == pytest.approx(-2.4)
    assert ints.e_core == pytest.approx(V)
    assert ints.g[0, 0, 1, 1] == pytest.approx(V) and ints.g[0, 0, 0, 0] == pytest.approx(11.26)


def test_ppp_hopping_slope():
    geom = Geometry([("C", 0, 0, 0), ("C", 1.5, 0, 0)])
    ints = build_ppp(geom, hopping_slope=3.0, reference_length=1.4)
    assert ints.h[0, 1] == pytest.approx(-(2.4 - 0.3))


def test_reorder_sites_and_rotation_preserve_spectrum(rng):
    h, g = oracles.random_integrals(rng, 3)
    ints = IntegralSet(3, h, g, 0.1)
    E = np.linalg.eigvalsh(hamiltonian_for(ints, 3, 1).matrix.toarray())
    perm = reorder_sites(ints, [2, 0, 1])
    E_perm = np.linalg.eigvalsh(hamiltonian_for(perm, 3, 1).matrix.toarray())
    Q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    rot = rotate_integrals(ints, Q)
    E_rot = np.linalg.eigvalsh(hamiltonian_for(rot, 3, 1).matrix.toarray())
    assert np.allclose(E, E_perm, atol=1e-10) and np.allclose(E, E_rot, atol=1e-10)
