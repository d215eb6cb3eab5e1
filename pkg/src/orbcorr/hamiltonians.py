"""Second-quantized Hamiltonians: integrals, FCIDUMP I/O, model builders, assembly."""

from __future__ import annotations

import io
import re
import warnings
from dataclasses import dataclass, field
from importlib import resources
from itertools import product
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .fock import SectorBasis, apply_string, build_sector_basis

# e^2 / (4 pi eps0) in eV * Angstrom
COULOMB_EV_ANGSTROM = 14.399645

PPP_HOPPING = 2.4
PPP_HUBBARD_U = 11.26
CC_BOND_THRESHOLD = 1.6


class FCIDumpError(ValueError):
    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}" if lineno is not None else message)


@dataclass(eq=False)
class IntegralSet:
    """One- and two-electron integrals in chemist notation ``g[i, j, k, l] = (ij|kl)``.

    ``g`` is held as a dense 4-index array with all eight permutational partners
    filled in; only canonical quadruples are written to FCIDUMP files.
    """

    D: int
    h: np.ndarray
    g: np.ndarray
    e_core: float = 0.0
    nelec: int | None = None
    ms2: int | None = None
    labels: list[str] | None = None

    def __post_init__(self):
        self.h = np.asarray(self.h, dtype=float).reshape(self.D, self.D)
        self.g = np.asarray(self.g, dtype=float).reshape((self.D,) * 4)

    def check_symmetry(self, tol: float = 1e-10) -> None:
        if np.abs(self.h - self.h.T).max(initial=0.0) > tol:
            raise ValueError("one-electron integrals are not symmetric")
        g = self.g
        for perm in [(1, 0, 2, 3), (0, 1, 3, 2), (2, 3, 0, 1)]:
            if np.abs(g - g.transpose(perm)).max(initial=0.0) > tol:
                raise ValueError(f"two-electron integrals break the {perm} symmetry")

    def one_particle_spectrum(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.h)


def symmetrize_eri(g: np.ndarray) -> np.ndarray:
    """Average over the eightfold permutation group of real chemist-notation integrals."""
    perms = [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
             (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)]
    return sum(g.transpose(p) for p in perms) / 8.0


def _fill_eri(g: np.ndarray, i: int, j: int, k: int, l: int, value: float) -> None:
    for a, b, c, d in {(i, j, k, l), (j, i, k, l), (i, j, l, k), (j, i, l, k),
                       (k, l, i, j), (l, k, i, j), (k, l, j, i), (l, k, j, i)}:
        g[a, b, c, d] = value


def canonical_quadruples(D: int):
    """Index quadruples ``i>=j, k>=l, ij>=kl`` (0-based)."""
    for i in range(D):
        for j in range(i + 1):
            ij = i * (i + 1) // 2 + j
            for k in range(D):
                for l in range(k + 1):
                    if ij >= k * (k + 1) // 2 + l:
                        yield i, j, k, l


# -- FCIDUMP -------------------------------------------------------------------

_HEADER_END = re.compile(r"&END|/\s*$", re.IGNORECASE)


def _parse_header(text: str, lineno: int) -> dict[str, list[str]]:
    body = re.sub(r"^\s*&FCI", "", text.strip(), flags=re.IGNORECASE)
    body = re.sub(r"(&END|/)\s*$", "", body.strip(), flags=re.IGNORECASE)
    body = re.sub(r"\s*=\s*", "=", body)
    fields: dict[str, list[str]] = {}
    key = None
    for token in re.split(r"[,\s]+", body):
        if not token:
            continue
        if "=" in token:
            key, _, value = token.partition("=")
            key = key.upper()
            fields[key] = [value] if value else []
        elif key is None:
            raise FCIDumpError(f"stray header token {token!r}", lineno)
        else:
            fields[key].append(token)
    for key in ("NORB", "NELEC"):
        if not fields.get(key):
            raise FCIDumpError(f"header lacks {key}", lineno)
    return fields


def parse_fcidump(stream: TextIO | str | Path) -> IntegralSet:
    """Read a Molpro-style FCIDUMP (``&FCI ... &END`` or ``... /`` header)."""
    if isinstance(stream, Path) or (isinstance(stream, str) and "\n" not in stream):
        text = Path(stream).read_text()
    elif isinstance(stream, str):
        text = stream
    else:
        text = stream.read()
    lines = text.splitlines()

    header, start = [], None
    for n, line in enumerate(lines):
        header.append(line)
        if _HEADER_END.search(line.strip()):
            start = n + 1
            break
    if start is None or not header[0].strip().upper().startswith("&FCI"):
        raise FCIDumpError("missing or unterminated &FCI header", 1)
    fields = _parse_header(" ".join(header), 1)
    try:
        norb = int(fields["NORB"][0])
        nelec = int(fields["NELEC"][0])
        ms2 = int((fields.get("MS2") or ["0"])[0])
    except ValueError as exc:
        raise FCIDumpError(f"non-integer header value ({exc})", 1) from None
    if norb < 1:
        raise FCIDumpError("NORB must be positive", 1)

    h = np.zeros((norb, norb))
    g = np.zeros((norb,) * 4)
    e_core = 0.0
    for n, line in enumerate(lines[start:], start=start + 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 5:
            raise FCIDumpError(f"expected 'value i j k l', got {line.strip()!r}", n)
        try:
            value = float(parts[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(x) for x in parts[1:])
        except ValueError:
            raise FCIDumpError(f"non-numeric record {line.strip()!r}", n) from None
        if not all(0 <= x <= norb for x in (i, j, k, l)):
            raise FCIDumpError(f"index out of range 0..{norb}", n)
        if i and j and k and l:
            _fill_eri(g, i - 1, j - 1, k - 1, l - 1, value)
        elif i and j and not k and not l:
            h[i - 1, j - 1] = h[j - 1, i - 1] = value
        elif not (i or j or k or l):
            e_core = value
        elif i and not (j or k or l):
            continue  # orbital energy record
        else:
            raise FCIDumpError(f"unrecognised index pattern {i} {j} {k} {l}", n)
    return IntegralSet(norb, h, g, e_core, nelec=nelec, ms2=ms2)


def write_fcidump(ints: IntegralSet, stream: TextIO | str | Path, tol: float = 0.0) -> None:
    """Write canonical integrals with round-trip float formatting."""
    if isinstance(stream, (str, Path)):
        with open(stream, "w") as fh:
            write_fcidump(ints, fh, tol)
        return
    nelec = ints.nelec if ints.nelec is not None else ints.D
    ms2 = ints.ms2 if ints.ms2 is not None else 0
    stream.write(f" &FCI NORB={ints.D},NELEC={nelec},MS2={ms2},\n")
    stream.write("  ORBSYM=" + ",".join("1" for _ in range(ints.D)) + ",\n")
    stream.write("  ISYM=1,\n &END\n")
    for i, j, k, l in canonical_quadruples(ints.D):
        v = ints.g[i, j, k, l]
        if abs(v) > tol:
            stream.write(f"{float(v)!r} {i + 1} {j + 1} {k + 1} {l + 1}\n")
    for i in range(ints.D):
        for j in range(i + 1):
            v = ints.h[i, j]
            if abs(v) > tol:
                stream.write(f"{float(v)!r} {i + 1} {j + 1} 0 0\n")
    stream.write(f"{float(ints.e_core)!r} 0 0 0 0\n")


def fcidump_string(ints: IntegralSet) -> str:
    buf = io.StringIO()
    write_fcidump(ints, buf)
    return buf.getvalue()


# -- geometry ------------------------------------------------------------------

@dataclass
class Geometry:
    atoms: list[tuple[str, float, float, float]]
    active: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.active:
            self.active = [n for n, atom in enumerate(self.atoms) if atom[0].upper() == "C"]

    @property
    def coords(self) -> np.ndarray:
        return np.array([a[1:] for a in self.atoms], dtype=float).reshape(-1, 3)

    def site_coords(self) -> np.ndarray:
        return self.coords[self.active]

    def distance_matrix(self) -> np.ndarray:
        xyz = self.site_coords()
        return np.linalg.norm(xyz[:, None, :] - xyz[None, :, :], axis=-1)


BUNDLED_GEOMETRIES = ("benzene", "ethylene", "decapentaene", "eicosadecaene")


def read_xyz(source: str | Path) -> Geometry:
    """Parse ``element x y z`` lines; a leading atom-count and comment line are skipped."""
    if isinstance(source, Path) or "\n" not in str(source):
        text = Path(source).read_text()
    else:
        text = str(source)
    atoms = []
    for line in text.splitlines():
        parts = line.split()
        if len(parts) < 4:
            continue
        try:
            xyz = tuple(float(x) for x in parts[1:4])
        except ValueError:
            continue
        atoms.append((parts[0], *xyz))
    if not atoms:
        raise ValueError(f"no atoms found in {source!r}")
    return Geometry(atoms)


def load_geometry(name: str) -> Geometry:
    """Bundled reference structure by name, or an XYZ file path."""
    if name in BUNDLED_GEOMETRIES:
        text = resources.files("orbcorr.data").joinpath(f"{name}.xyz").read_text()
        return read_xyz(text)
    return read_xyz(Path(name))


def bonds_from_geometry(geometry: Geometry, threshold: float = CC_BOND_THRESHOLD,
                        ambiguity: float = 0.02) -> list[tuple[int, int]]:
    """Active-site pairs closer than ``threshold`` (inclusive), sorted by site index.

    A warning is issued when a distance falls within ``ambiguity`` of the
    threshold; the inclusive comparison keeps the outcome deterministic.
    """
    dist = geometry.distance_matrix()
    n = len(dist)
    bonds = []
    for i in range(n):
        for j in range(i + 1, n):
            if abs(dist[i, j] - threshold) < ambiguity:
                warnings.warn(f"sites {i} and {j} are {dist[i, j]:.4f} A apart, "
                              f"near the bond threshold {threshold} A", stacklevel=2)
            if dist[i, j] <= threshold:
                bonds.append((i, j))
    return bonds


def ring_order(bonds: Sequence[tuple[int, int]], n: int) -> list[int]:
    """Site order walking a simple cycle from site 0 towards its lower-index neighbour."""
    nbrs: dict[int, list[int]] = {i: [] for i in range(n)}
    for i, j in bonds:
        nbrs[i].append(j)
        nbrs[j].append(i)
    if any(len(v) != 2 for v in nbrs.values()):
        raise ValueError("site graph is not a simple ring")
    order, prev = [0], None
    cur = 0
    while len(order) < n:
        nxt = min(x for x in nbrs[cur] if x != prev)
        if nxt in order:
            raise ValueError("site graph is not a single ring")
        order.append(nxt)
        prev, cur = cur, nxt
    return order


# -- model builders ------------------------------------------------------------

def _check_connected(n: int, bonds: Iterable[tuple[int, int]]) -> None:
    bonds = list(bonds)
    if n == 1:
        return
    rows = [i for i, _ in bonds]
    cols = [j for _, j in bonds]
    adj = sp.coo_matrix((np.ones(len(bonds)), (rows, cols)), shape=(n, n))
    if connected_components(adj, directed=False)[0] != 1:
        raise ValueError("site graph is not connected")


def chain_bonds(n: int, periodic: bool = False) -> list[tuple[int, int]]:
    bonds = [(i, i + 1) for i in range(n - 1)]
    if periodic and n > 2:
        bonds.append((0, n - 1))
    return bonds


def build_huckel(n_sites: int, bonds: Sequence[tuple[int, int]], t: float = 1.0) -> IntegralSet:
    """Tight-binding integrals: ``h_ij = -t`` on bonds, no interaction."""
    _check_connected(n_sites, bonds)
    h = np.zeros((n_sites, n_sites))
    for i, j in bonds:
        h[i, j] = h[j, i] = -t
    return IntegralSet(n_sites, h, np.zeros((n_sites,) * 4))


def build_hubbard(n_sites: int, bonds: Sequence[tuple[int, int]], t: float = 1.0,
                  U: float = 4.0) -> IntegralSet:
    ints = build_huckel(n_sites, bonds, t)
    for i in range(n_sites):
        ints.g[i, i, i, i] = U
    return ints


def ohno(r: np.ndarray, U: float) -> np.ndarray:
    """Ohno interpolation between ``U`` at contact and ``e^2/r`` at long range (eV, Angstrom)."""
    return COULOMB_EV_ANGSTROM / np.sqrt(np.asarray(r) ** 2 + (COULOMB_EV_ANGSTROM / U) ** 2)


def build_ppp(geometry: Geometry, t: float = PPP_HOPPING, U: float = PPP_HUBBARD_U,
              parametrization: str = "ohno", bond_threshold: float = CC_BOND_THRESHOLD,
              hopping_slope: float = 0.0, reference_length: float = 1.397,
              core_charges: bool = True) -> IntegralSet:
    """Pariser-Parr-Pople integrals for the active sites of ``geometry`` (eV).

    Hopping is ``t - hopping_slope * (r - reference_length)`` on bonded pairs, so
    the default slope of zero gives a uniform ``t``. With ``core_charges`` each
    site carries a +1 core, adding ``-sum_j V_ij`` to ``h_ii`` and the core-core
    repulsion to ``e_core``; this keeps the half-filled molecule neutral.
    """
    if parametrization != "ohno":
        raise ValueError(f"unknown parametrization {parametrization!r}")
    bonds = bonds_from_geometry(geometry, bond_threshold)
    n = len(geometry.active)
    _check_connected(n, bonds)
    dist = geometry.distance_matrix()
    V = ohno(dist, U)
    h = np.zeros((n, n))
    for i, j in bonds:
        h[i, j] = h[j, i] = -(t - hopping_slope * (dist[i, j] - reference_length))
    g = np.zeros((n,) * 4)
    for i in range(n):
        for j in range(n):
            g[i, i, j, j] = V[i, j]
    e_core = 0.0
    if core_charges:
        off = V - np.diag(np.diag(V))
        h -= np.diag(off.sum(axis=1))
        e_core = 0.5 * off.sum()
    return IntegralSet(n, h, g, e_core, nelec=n, ms2=0)


def reorder_sites(ints: IntegralSet, order: Sequence[int]) -> IntegralSet:
    """Integrals with orbital ``new_i`` equal to old orbital ``order[new_i]``."""
    o = np.asarray(order)
    return IntegralSet(ints.D, ints.h[np.ix_(o, o)], ints.g[np.ix_(o, o, o, o)], ints.e_core,
                       ints.nelec, ints.ms2)


def rotate_integrals(ints: IntegralSet, M: np.ndarray) -> IntegralSet:
    """Integrals in the orbitals ``new_q = sum_p M[p, q] old_p`` (real orthogonal ``M``)."""
    M = np.asarray(M, dtype=float)
    h = M.T @ ints.h @ M
    g = np.einsum("pqrs,pa,qb,rc,sd->abcd", ints.g, M, M, M, M, optimize=True)
    return IntegralSet(ints.D, 0.5 * (h + h.T), symmetrize_eri(g), ints.e_core, ints.nelec, ints.ms2)


# -- assembly ------------------------------------------------------------------

@dataclass(eq=False)
class SparseHamiltonian:
    """Hamiltonian matrix on a sector basis; the core energy sits on the diagonal."""

    basis: SectorBasis
    matrix: sp.csr_matrix

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def entries(self):
        coo = self.matrix.tocoo()
        return coo.row, coo.col, coo.data

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v


def assemble_hamiltonian(ints: IntegralSet, basis: SectorBasis, tol: float = 1e-14) -> SparseHamiltonian:
    """Matrix of ``H = sum h_pq E_pq + 1/2 sum (pq|rs) a+_p a+_r a_s a_q + e_core``.

    Density-density integrals ``(pp|rr)`` are evaluated directly on the
    diagonal; every other nonzero integral is applied as a signed operator
    string to the whole basis at once.
    """
    if ints.D != basis.D:
        raise ValueError(f"integrals have D={ints.D} but the basis has D={basis.D}")
    dets, n = basis.dets, len(basis)
    occ = basis.occupations().astype(float)
    n_orb = occ[:, 0::2] + occ[:, 1::2]

    diag = np.full(n, float(ints.e_core))
    diag += n_orb @ np.diag(ints.h)
    G = np.einsum("pprr->pr", ints.g)
    diag += 0.5 * (np.einsum("ip,pr,ir->i", n_orb, G, n_orb) - n_orb @ np.diag(G))

    rows, cols, vals = [np.arange(n)], [np.arange(n)], [diag]
    col_idx = np.arange(n)

    def add(coeff: float, ops) -> None:
        new, signs, valid = apply_string(dets, ops)
        if valid.any():
            rows.append(basis.index(new[valid]))
            cols.append(col_idx[valid])
            vals.append(coeff * signs[valid])

    for p, q in zip(*np.nonzero(np.abs(ints.h) > tol)):
        if p != q:
            for s in (0, 1):
                add(ints.h[p, q], [("+", 2 * p + s), ("-", 2 * q + s)])

    for p, q, r, s in zip(*np.nonzero(np.abs(ints.g) > tol)):
        if p == q and r == s:
            continue
        coeff = 0.5 * ints.g[p, q, r, s]
        for sig, tau in product((0, 1), repeat=2):
            P, Q, R, S = 2 * p + sig, 2 * q + sig, 2 * r + tau, 2 * s + tau
            if P == R or Q == S:
                continue
            add(coeff, [("+", P), ("+", R), ("-", S), ("-", Q)])

    H = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n, n))
    H = 0.5 * (H + H.T)
    H.sum_duplicates()
    H.eliminate_zeros()
    return SparseHamiltonian(basis, H.tocsr())


def hamiltonian_for(ints: IntegralSet, N: int, two_sz: int) -> SparseHamiltonian:
    return assemble_hamiltonian(ints, build_sector_basis(ints.D, N, two_sz))


def chain_order(bonds: Sequence[tuple[int, int]], n: int) -> list[int]:
    """Site order along an open chain, starting from its lower-index end."""
    nbrs: dict[int, list[int]] = {i: [] for i in range(n)}
    for i, j in bonds:
        nbrs[i].append(j)
        nbrs[j].append(i)
    ends = sorted(i for i, v in nbrs.items() if len(v) == 1)
    if n == 1:
        return [0]
    if len(ends) != 2 or any(len(v) > 2 for v in nbrs.values()):
        raise ValueError("site graph is not an open chain")
    order, prev = [ends[0]], None
    while len(order) < n:
        cur = order[-1]
        nxt = [x for x in nbrs[cur] if x != prev]
        prev = cur
        order.append(nxt[0])
    return order


def backbone_order(bonds: Sequence[tuple[int, int]], n: int) -> list[int]:
    """Ring or chain site order for a simple conjugated backbone."""
    degrees = np.bincount(np.ravel(bonds), minlength=n) if bonds else np.zeros(n, int)
    return ring_order(bonds, n) if np.all(degrees == 2) else chain_order(bonds, n)
