"""Occupation-number basis, signed fermionic operators and mode reordering.

Spin-orbitals are interleaved per spatial orbital: spin-orbital ``2*p`` is
``p`` with spin up and ``2*p + 1`` is ``p`` with spin down. A determinant is an
integer bitstring whose bit ``k`` is the occupation of spin-orbital ``k``; the
configuration it denotes is the product of creation operators applied to the
vacuum in ascending spin-orbital order. All orbital indices are 0-based.

Bitstrings are stored as ``uint64``, so at most 32 spatial orbitals are
representable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np
import scipy.sparse as sp

MAX_SPIN_ORBITALS = 64

UP, DOWN = "up", "down"


class EmptySectorError(ValueError):
    """Raised when no determinant is compatible with the requested (N, 2Sz)."""


@dataclass(frozen=True)
class SpinOrbital:
    orbital: int
    spin: str = UP

    def __post_init__(self):
        if self.spin not in (UP, DOWN):
            raise ValueError(f"spin must be 'up' or 'down', got {self.spin!r}")
        if self.orbital < 0:
            raise ValueError("orbital index must be non-negative")

    @property
    def index(self) -> int:
        return 2 * self.orbital + (0 if self.spin == UP else 1)

    @classmethod
    def from_index(cls, k: int) -> "SpinOrbital":
        return cls(k // 2, UP if k % 2 == 0 else DOWN)


# Determinants are plain Python ints in scalar code and uint64 in arrays.
Determinant = int


def particle_number(det: Determinant) -> int:
    return int(det).bit_count()


def two_sz(det: Determinant) -> int:
    det = int(det)
    n_up = (det & 0x5555555555555555).bit_count()
    n_dn = (det & 0xAAAAAAAAAAAAAAAA).bit_count()
    return n_up - n_dn


def two_sz_array(dets: np.ndarray) -> np.ndarray:
    dets = np.asarray(dets, dtype=np.uint64)
    n_up = np.bitwise_count(dets & np.uint64(0x5555555555555555)).astype(np.int64)
    n_dn = np.bitwise_count(dets & np.uint64(0xAAAAAAAAAAAAAAAA)).astype(np.int64)
    return n_up - n_dn


def det_from_occupations(up: Sequence[int] = (), down: Sequence[int] = ()) -> Determinant:
    """Bitstring with the given spatial orbitals occupied per spin."""
    det = 0
    for p in up:
        det |= 1 << (2 * p)
    for p in down:
        det |= 1 << (2 * p + 1)
    return det


def det_to_string(det: Determinant, D: int) -> str:
    """Human-readable occupation string, one symbol per orbital (0, a, b, 2)."""
    symbols = "0ab2"
    return "".join(symbols[(int(det) >> (2 * p)) & 3] for p in range(D))


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Sorted determinant basis over ``D`` spatial orbitals.

    ``two_sz`` is ``None`` when the determinants do not share a magnetization,
    which only happens for bases produced by spin-mixing mode permutations.
    Determinants are kept in ascending integer order; ``index`` relies on it.
    """

    D: int
    N: int
    two_sz: int | None
    dets: np.ndarray

    def __len__(self) -> int:
        return len(self.dets)

    @property
    def n_modes(self) -> int:
        return 2 * self.D

    def index(self, dets) -> np.ndarray:
        """Positions of ``dets`` in the basis; raises KeyError for strangers."""
        dets = np.asarray(dets, dtype=np.uint64)
        pos = np.searchsorted(self.dets, dets)
        pos = np.minimum(pos, len(self.dets) - 1)
        if not np.all(self.dets[pos] == dets):
            raise KeyError("determinant outside the basis")
        return pos

    def occupations(self) -> np.ndarray:
        """``(len, 2D)`` 0/1 matrix of spin-orbital occupations."""
        bits = (self.dets[:, None] >> np.arange(self.n_modes, dtype=np.uint64)) & np.uint64(1)
        return bits.astype(np.int8)


def _combination_masks(D: int, n: int, offset: int) -> np.ndarray:
    masks = [sum(1 << (2 * p + offset) for p in occ) for occ in combinations(range(D), n)]
    return np.array(masks, dtype=np.uint64)


def build_sector_basis(D: int, N: int, two_sz: int) -> SectorBasis:
    """All determinants of ``D`` orbitals with ``N`` electrons and magnetization ``two_sz/2``."""
    if D < 1 or 2 * D > MAX_SPIN_ORBITALS:
        raise ValueError(f"D must be in 1..{MAX_SPIN_ORBITALS // 2}, got {D}")
    if not 0 <= N <= 2 * D or abs(two_sz) > N or (N + two_sz) % 2:
        raise EmptySectorError(f"no determinants with N={N}, 2Sz={two_sz} in {D} orbitals")
    n_up, n_dn = (N + two_sz) // 2, (N - two_sz) // 2
    if n_up > D or n_dn > D:
        raise EmptySectorError(f"no determinants with N={N}, 2Sz={two_sz} in {D} orbitals")
    up = _combination_masks(D, n_up, 0)
    dn = _combination_masks(D, n_dn, 1)
    dets = np.sort((up[:, None] | dn[None, :]).ravel())
    return SectorBasis(D, N, two_sz, dets)


def full_fock_basis(D: int) -> SectorBasis:
    """Every determinant of ``D`` orbitals; only sensible for tiny ``D``."""
    dets = np.arange(1 << (2 * D), dtype=np.uint64)
    return SectorBasis(D, -1, None, dets)


@dataclass(eq=False)
class WaveFunction:
    basis: SectorBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (len(self.basis),):
            raise ValueError("amplitude vector does not match the basis size")

    @property
    def D(self) -> int:
        return self.basis.D

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "WaveFunction":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return WaveFunction(self.basis, self.amplitudes / nrm)

    def amplitude(self, det: Determinant) -> complex:
        return complex(self.amplitudes[self.basis.index([det])[0]])

    @classmethod
    def from_dict(cls, D: int, terms: dict[Determinant, complex], normalize: bool = True):
        """Wavefunction over the sector spanned by ``terms`` (all must share N, 2Sz)."""
        dets = list(terms)
        Ns = {particle_number(d) for d in dets}
        szs = {two_sz(d) for d in dets}
        if len(Ns) != 1 or len(szs) != 1:
            raise ValueError("terms do not share a particle number and magnetization")
        basis = build_sector_basis(D, Ns.pop(), szs.pop())
        amps = np.zeros(len(basis), dtype=complex)
        amps[basis.index(dets)] = [terms[d] for d in dets]
        psi = cls(basis, amps)
        return psi.normalized() if normalize else psi


# -- scalar operators ---------------------------------------------------------

def _sign_below(det: int, k: int) -> int:
    return -1 if (det & ((1 << k) - 1)).bit_count() % 2 else 1


def apply_creation(det: Determinant, so: SpinOrbital | int) -> tuple[Determinant, int] | None:
    """``f^dagger_so`` on a determinant: ``(new_det, sign)`` or ``None`` if occupied."""
    k = so.index if isinstance(so, SpinOrbital) else int(so)
    det = int(det)
    if det >> k & 1:
        return None
    return det | (1 << k), _sign_below(det, k)


def apply_annihilation(det: Determinant, so: SpinOrbital | int) -> tuple[Determinant, int] | None:
    k = so.index if isinstance(so, SpinOrbital) else int(so)
    det = int(det)
    if not det >> k & 1:
        return None
    return det ^ (1 << k), _sign_below(det, k)


# -- vectorized operators -----------------------------------------------------

_ONE = np.uint64(1)


def _parity_below(dets: np.ndarray, k: int) -> np.ndarray:
    mask = np.uint64((1 << k) - 1)
    return (np.bitwise_count(dets & mask) & 1).astype(np.int8)


def annihilate(dets: np.ndarray, k: int):
    """Vectorized ``f_k``: returns ``(new_dets, signs, valid)``."""
    bit = np.uint64(1 << k)
    valid = (dets & bit) != 0
    signs = 1 - 2 * _parity_below(dets, k)
    return dets ^ bit, signs, valid


def create(dets: np.ndarray, k: int):
    """Vectorized ``f^dagger_k``: returns ``(new_dets, signs, valid)``."""
    bit = np.uint64(1 << k)
    valid = (dets & bit) == 0
    signs = 1 - 2 * _parity_below(dets, k)
    return dets | bit, signs, valid


def apply_string(dets: np.ndarray, ops: Sequence[tuple[str, int]]):
    """Apply operators right-to-left as written, e.g. ``[("+", p), ("-", q)]`` is ``f+_p f_q``.

    Returns ``(new_dets, signs, valid)`` with invalid entries carrying garbage.
    """
    out = np.asarray(dets, dtype=np.uint64)
    signs = np.ones(len(out), dtype=np.int64)
    valid = np.ones(len(out), dtype=bool)
    for kind, k in reversed(ops):
        out, s, v = (create if kind == "+" else annihilate)(out, k)
        signs *= s
        valid &= v
    return out, signs, valid


def operator_matrix(basis: SectorBasis, terms, target: SectorBasis | None = None) -> sp.csr_matrix:
    """Sparse matrix of ``sum coeff * string`` from ``basis`` into ``target``.

    ``terms`` is an iterable of ``(coeff, ops)`` with ``ops`` as in ``apply_string``.
    Results falling outside ``target`` are dropped (they vanish by symmetry for
    number- and spin-conserving operators).
    """
    target = basis if target is None else target
    rows, cols, vals = [], [], []
    col_idx = np.arange(len(basis))
    for coeff, ops in terms:
        new, signs, valid = apply_string(basis.dets, ops)
        if not valid.any():
            continue
        new, signs, cidx = new[valid], signs[valid], col_idx[valid]
        pos = np.minimum(np.searchsorted(target.dets, new), len(target.dets) - 1)
        inside = target.dets[pos] == new
        rows.append(pos[inside])
        cols.append(cidx[inside])
        vals.append(coeff * signs[inside])
    if not rows:
        return sp.csr_matrix((len(target), len(basis)))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(len(target), len(basis)),
    )


def one_body_matrix(basis: SectorBasis, K: np.ndarray, tol: float = 0.0) -> sp.csr_matrix:
    """Matrix of ``sum_pq K[p, q] sum_s f+_{p s} f_{q s}`` on the sector."""
    K = np.asarray(K)
    terms = []
    for p, q in zip(*np.nonzero(np.abs(K) > tol)):
        for s in (0, 1):
            terms.append((K[p, q], [("+", 2 * p + s), ("-", 2 * q + s)]))
    return operator_matrix(basis, terms)


def number_operator_diagonal(basis: SectorBasis) -> np.ndarray:
    return np.bitwise_count(basis.dets).astype(float)


# -- mode reordering ----------------------------------------------------------

def _check_permutation(permutation: Sequence[int], n_modes: int) -> np.ndarray:
    perm = np.asarray(permutation, dtype=int)
    if perm.shape != (n_modes,) or not np.array_equal(np.sort(perm), np.arange(n_modes)):
        raise ValueError(f"permutation must be a bijection on 0..{n_modes - 1}")
    return perm


def permute_dets(dets: np.ndarray, permutation: Sequence[int], n_modes: int):
    """Relabel modes so that new mode ``m`` is old mode ``permutation[m]``.

    Returns ``(new_dets, signs)``; the sign is the parity of reordering each
    determinant's creation string into ascending new-mode order.
    """
    perm = _check_permutation(permutation, n_modes)
    pos = np.empty(n_modes, dtype=int)
    pos[perm] = np.arange(n_modes)
    dets = np.asarray(dets, dtype=np.uint64)
    new = np.zeros_like(dets)
    parity = np.zeros(len(dets), dtype=np.int64)
    for a in range(n_modes):
        occ = (dets >> np.uint64(a)) & _ONE
        new |= occ << np.uint64(pos[a])
        # later old modes that end up in front of mode a
        inv_mask = sum(1 << b for b in range(a + 1, n_modes) if pos[b] < pos[a])
        if inv_mask:
            parity += occ.astype(np.int64) * np.bitwise_count(dets & np.uint64(inv_mask))
    return new, 1 - 2 * (parity & 1)


def reorder_modes(psi: WaveFunction, permutation: Sequence[int]) -> WaveFunction:
    """Express ``psi`` with spin-orbitals relabelled by ``permutation``.

    New mode ``m`` is old mode ``permutation[m]``. The returned basis is sorted
    in the new labelling, so ``reorder_modes(reorder_modes(psi, p), inverse(p))``
    reproduces ``psi`` exactly.
    """
    basis = psi.basis
    new, signs = permute_dets(basis.dets, permutation, basis.n_modes)
    order = np.argsort(new, kind="stable")
    new_dets = new[order]
    szs = np.unique(two_sz_array(new_dets))
    sz = int(szs[0]) if len(szs) == 1 else None
    new_basis = SectorBasis(basis.D, basis.N, sz, new_dets)
    return WaveFunction(new_basis, psi.amplitudes[order] * signs[order])


def inverse_permutation(permutation: Sequence[int]) -> list[int]:
    perm = np.asarray(permutation, dtype=int)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(len(perm))
    return inv.tolist()


def orbitals_to_front(orbitals: Sequence[int], D: int) -> list[int]:
    """Mode permutation bringing the given spatial orbitals (both spins) to the front."""
    front = []
    for p in orbitals:
        if not 0 <= p < D:
            raise IndexError(f"orbital {p} out of range for D={D}")
        front += [2 * p, 2 * p + 1]
    if len(set(front)) != len(front):
        raise ValueError("orbitals must be distinct")
    rest = [k for k in range(2 * D) if k not in set(front)]
    return front + rest
