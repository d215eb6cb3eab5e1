"""Orbital reduced density matrices by mode reordering and amplitude grouping.

The local basis of one spatial orbital is ``(|0>, |up>, |down>, |up down>)``,
i.e. local index ``n_up + 2 n_down``. For several orbitals the product index
is ``sum_m a_m 4**(k-1-m)`` with the first listed orbital most significant, so
a two-orbital RDM is indexed by ``4 a_i + a_j``. Local states are created with
the listed orbitals' operators placed in front of all others.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import WaveFunction, orbitals_to_front, reorder_modes

LOCAL_LABELS = ("0", "u", "d", "2")
LOCAL_N = np.array([0, 1, 1, 2])
LOCAL_2SZ = np.array([0, 1, -1, 0])
CLEANUP = 1e-14


@dataclass(frozen=True, eq=False)
class OrbitalRDM:
    orbitals: tuple[int, ...]
    matrix: np.ndarray

    @property
    def k(self) -> int:
        return len(self.orbitals)

    def labels(self) -> list[str]:
        return product_labels(self.k)

    def to_json(self) -> str:
        return json.dumps({
            "orbitals": list(self.orbitals),
            "basis": self.labels(),
            "real": self.matrix.real.tolist(),
            "imag": self.matrix.imag.tolist(),
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "OrbitalRDM":
        data = json.loads(text)
        m = np.array(data["real"]) + 1j * np.array(data["imag"])
        return cls(tuple(data["orbitals"]), m)


def product_labels(k: int) -> list[str]:
    labels = [""]
    for _ in range(k):
        labels = [a + b for a in labels for b in LOCAL_LABELS]
    return labels


def local_particle_numbers(k: int) -> np.ndarray:
    """Local particle number of each product basis state of ``k`` orbitals."""
    n = np.zeros(1, dtype=int)
    for _ in range(k):
        n = (n[:, None] + LOCAL_N[None, :]).ravel()
    return n


def local_two_sz(k: int) -> np.ndarray:
    s = np.zeros(1, dtype=int)
    for _ in range(k):
        s = (s[:, None] + LOCAL_2SZ[None, :]).ravel()
    return s


def _local_index(bits: np.ndarray, k: int) -> np.ndarray:
    idx = np.zeros(len(bits), dtype=np.int64)
    for m in range(k):
        idx = idx * 4 + ((bits >> np.uint64(2 * m)) & np.uint64(3)).astype(np.int64)
    return idx


def orbital_rdm(psi: WaveFunction, orbitals: Sequence[int]) -> OrbitalRDM:
    """Reduced state of the listed spatial orbitals (0-based, distinct)."""
    orbitals = tuple(int(p) for p in orbitals)
    k = len(orbitals)
    if k == 0:
        raise ValueError("need at least one orbital")
    moved = reorder_modes(psi, orbitals_to_front(orbitals, psi.D))
    dets = moved.basis.dets
    local = _local_index(dets & np.uint64((1 << (2 * k)) - 1), k)
    rest = dets >> np.uint64(2 * k)
    _, env = np.unique(rest, return_inverse=True)
    amps = np.zeros((4 ** k, env.max() + 1), dtype=complex)
    amps[local, env] = moved.amplitudes
    rho = amps @ amps.conj().T
    rho /= np.trace(rho).real
    rho[np.abs(rho) < CLEANUP] = 0.0
    return OrbitalRDM(orbitals, rho)


def one_orbital_rdm(psi: WaveFunction, i: int) -> OrbitalRDM:
    return orbital_rdm(psi, [i])


def two_orbital_rdm(psi: WaveFunction, i: int, j: int) -> OrbitalRDM:
    if i == j:
        raise ValueError("two-orbital RDM needs distinct orbitals")
    return orbital_rdm(psi, [i, j])


def trace_out(rho: np.ndarray, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Partial trace of a bipartite matrix; ``keep`` is 0 (first factor) or 1."""
    dA, dB = dims
    r = rho.reshape(dA, dB, dA, dB)
    return np.einsum("ijkj->ik", r) if keep == 0 else np.einsum("ijil->jl", r)
