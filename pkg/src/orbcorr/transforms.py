"""Orbital rotations applied to CI vectors, and analytic reference states.

Convention: an :class:`OrbitalRotation` with matrix ``M`` expresses each old
orbital in the new ones, ``old_p = sum_q M[p, q] new_q``. The columns of ``M``
are the new orbitals written in the old basis; ``new_orbitals()`` returns them
as rows. Rotating a state substitutes ``f+_p -> sum_q M[p, q] f+_q`` in its
second-quantized expansion.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import expm_multiply

from .fock import WaveFunction, det_from_occupations, one_body_matrix

UNITARITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OrbitalRotation:
    matrix: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("rotation matrix must be square")
        if np.iscomplexobj(M):
            if np.abs(M.imag).max() > UNITARITY_TOL:
                raise ValueError("only real orthogonal rotations are supported")
            M = M.real
        M = M.astype(float)
        err = np.abs(M.T @ M - np.eye(len(M))).max()
        if err > UNITARITY_TOL:
            raise ValueError(f"rotation is not orthogonal (max deviation {err:.2e})")
        object.__setattr__(self, "matrix", M)

    @property
    def D(self) -> int:
        return len(self.matrix)

    def new_orbitals(self) -> np.ndarray:
        return self.matrix.T

    def inverse(self) -> "OrbitalRotation":
        return OrbitalRotation(self.matrix.T)

    def then(self, other: "OrbitalRotation") -> "OrbitalRotation":
        """Rotation equal to applying ``self`` and afterwards ``other``."""
        return OrbitalRotation(self.matrix @ other.matrix)

    @classmethod
    def identity(cls, D: int) -> "OrbitalRotation":
        return cls(np.eye(D))


def jacobi(i: int, j: int, theta: float, D: int) -> OrbitalRotation:
    """Two-orbital rotation: identity except the (i, j) block ``[[c, s], [-s, c]]``."""
    if i == j:
        raise ValueError("jacobi rotation needs two distinct orbitals")
    if not (0 <= i < D and 0 <= j < D):
        raise IndexError("orbital index out of range")
    M = np.eye(D)
    c, s = np.cos(theta), np.sin(theta)
    M[i, i], M[i, j], M[j, i], M[j, j] = c, s, -s, c
    return OrbitalRotation(M)


def pairwise_jacobi(pairs, theta: float, D: int) -> OrbitalRotation:
    """Product of commuting Jacobi rotations on disjoint orbital pairs."""
    R = OrbitalRotation.identity(D)
    for i, j in pairs:
        R = R.then(jacobi(i, j, theta, D))
    return R


def save_rotation(R: OrbitalRotation, path: str | Path) -> None:
    np.savetxt(path, R.matrix, fmt="%.17g")


def load_rotation(path: str | Path) -> OrbitalRotation:
    return OrbitalRotation(np.atleast_2d(np.loadtxt(path)))


# -- benzene ------------------------------------------------------------------

def benzene_mo_coefficients() -> np.ndarray:
    """Canonical pi MOs of a six-ring (rows) over ring-ordered p_z sites (columns)."""
    a, b, c = 1 / np.sqrt(6), 1 / np.sqrt(12), 1 / np.sqrt(3)
    return np.array([
        [a, a, a, a, a, a],
        [-b, -c, -b, b, c, b],
        [0.5, 0, -0.5, -0.5, 0, 0.5],
        [-0.5, 0, 0.5, -0.5, 0, 0.5],
        [-b, c, -b, -b, c, -b],
        [a, -a, a, -a, a, -a],
    ])


def benzene_step_sequence() -> np.ndarray:
    """Atomic-like orbitals (rows) in the canonical MOs, built from pairwise rotations.

    Each step updates two orbitals simultaneously from their previous values.
    The first pairing of step one is read as acting on orbitals 1 and 6 (its
    second target is printed as orbital 1 in the source listing).
    """
    r2, r3, w = 1 / np.sqrt(2), 1 / np.sqrt(3), np.sqrt(2 / 3)
    phi = {k: np.eye(6)[k - 1] for k in range(1, 7)}
    alpha = {}

    def pair(a, b, ca, cb, out_a=None, out_b=None):
        new_a = ca[0] * phi[a] + ca[1] * phi[b]
        new_b = cb[0] * phi[a] + cb[1] * phi[b]
        (alpha if out_a else phi)[out_a or a] = new_a
        (alpha if out_b else phi)[out_b or b] = new_b

    # step 1
    pair(1, 6, (-r2, r2), (r2, r2))
    pair(2, 5, (-r2, r2), (r2, r2))
    pair(3, 4, (-r2, r2), (r2, r2))
    # step 2
    pair(1, 2, (-r3, w), (w, r3), out_a=1)
    pair(5, 6, (-r3, w), (w, r3), out_b=6)
    # step 3
    pair(2, 4, (-r2, -r2), (-r2, r2), out_a=2, out_b=4)
    pair(3, 5, (-r2, r2), (r2, r2), out_a=3, out_b=5)
    return np.array([alpha[k] for k in range(1, 7)])


def benzene_atomiclike(D: int = 6) -> OrbitalRotation:
    """Rotation from canonical benzene MOs to ring-ordered atomic-like orbitals.

    The step sequence reproduces the inverse of the MO coefficient matrix up to
    a relabelling of its output orbitals; the relabelling is recovered here and
    checked to be an exact permutation before it is applied.
    """
    if D != 6:
        raise ValueError(f"the benzene transform acts on six orbitals, got D={D}")
    U = benzene_mo_coefficients()
    steps = benzene_step_sequence()
    P = np.rint(steps @ U)
    if np.abs(steps @ U - P).max() > UNITARITY_TOL or not np.array_equal(
            np.sort(P.sum(axis=0)), np.ones(6)) or np.abs(P).sum() != 6 or P.min() < 0:
        raise RuntimeError("benzene step sequence is not a relabelling of the inverse MO matrix")
    new_orbitals = P.T @ steps
    if np.abs(new_orbitals - U.T).max() > UNITARITY_TOL:
        raise RuntimeError("relabelled step sequence does not match the inverse MO matrix")
    return OrbitalRotation(new_orbitals.T)


def benzene_step_labels() -> list[int]:
    """0-based ring site carried by each orbital the step sequence produces."""
    P = np.rint(benzene_step_sequence() @ benzene_mo_coefficients())
    return [int(np.argmax(row)) for row in P]


# -- state rotation -----------------------------------------------------------

def _givens_factors(A: np.ndarray):
    """Write orthogonal ``A`` as ``G_1 ... G_m diag(signs)`` with plane rotations ``G_k``.

    Returns ``([(a, b, angle), ...], signs)``; each factor is ``exp(K)`` with
    ``K[a, b] = -angle`` and ``K[b, a] = angle``.
    """
    R = A.copy()
    D = len(R)
    factors = []
    for col in range(D):
        for row in range(D - 1, col, -1):
            a, b = row - 1, row
            x, y = R[a, col], R[b, col]
            if y == 0.0:
                continue
            r = np.hypot(x, y)
            c, s = x / r, y / r
            Ra, Rb = R[a].copy(), R[b].copy()
            R[a], R[b] = c * Ra + s * Rb, -s * Ra + c * Rb
            factors.append((a, b, np.arctan2(s, c)))
    signs = np.sign(np.diag(R))
    return factors, signs


def apply_rotation(psi: WaveFunction, R: OrbitalRotation) -> WaveFunction:
    """Re-express ``psi`` in the rotated orbitals.

    The one-particle map ``A = M^T`` is factored into plane rotations, and each
    is applied as the exponential of its spin-summed one-body generator; sign
    flips act as ``(-1)^{n_p}``. Particle number and magnetization are kept.
    """
    if R.D != psi.D:
        raise ValueError(f"rotation is {R.D}x{R.D} but the state has D={psi.D}")
    basis = psi.basis
    A = R.matrix.T
    factors, signs = _givens_factors(A)
    v = psi.amplitudes.copy()
    occ = basis.occupations()
    for p in np.nonzero(signs < 0)[0]:
        n_p = occ[:, 2 * p] + occ[:, 2 * p + 1]
        v = v * (1 - 2 * (n_p % 2))
    for a, b, angle in reversed(factors):
        K = np.zeros((psi.D, psi.D))
        K[a, b], K[b, a] = -angle, angle
        v = expm_multiply(one_body_matrix(basis, K).tocsc(), v)
    return WaveFunction(basis, v)


# -- reference states ---------------------------------------------------------

def construct_reference_state(kind: str, **params) -> WaveFunction:
    """Analytic states used to validate the correlation measures.

    ``single_electron`` (theta, phi): one up electron shared by orbitals A, B.
    ``bond_psi1`` .. ``bond_psi4``: definite bond-order states over (bonding,
    antibonding). ``bond_lr``: a doubly occupied bond written in its two
    half-space orbitals. ``k_fold`` (K): K doubly occupied bonds over orbitals
    ordered (bond_1, antibond_1, bond_2, ...).
    """
    if kind == "single_electron":
        theta, phi = params.get("theta", np.pi / 4), params.get("phi", 0.0)
        return WaveFunction.from_dict(2, {
            det_from_occupations(up=[0]): np.cos(theta),
            det_from_occupations(up=[1]): np.exp(1j * phi) * np.sin(theta),
        })
    bonds = {
        "bond_psi1": ([0], []),
        "bond_psi2": ([0], [0]),
        "bond_psi3": ([0, 1], [0]),
        "bond_psi4": ([0, 1], [0, 1]),
    }
    if kind in bonds:
        up, dn = bonds[kind]
        return WaveFunction.from_dict(2, {det_from_occupations(up, dn): 1.0})
    if kind == "bond_lr":
        return WaveFunction.from_dict(2, {
            det_from_occupations([0], [0]): 0.5,
            det_from_occupations([1], [1]): 0.5,
            det_from_occupations([0], [1]): 0.5,
            det_from_occupations([1], [0]): -0.5,
        })
    if kind == "k_fold":
        K = int(params.get("K", 1))
        if K < 1:
            raise ValueError("K must be positive")
        occ = [2 * k for k in range(K)]
        return WaveFunction.from_dict(2 * K, {det_from_occupations(occ, occ): 1.0})
    raise ValueError(f"unknown reference state {kind!r}")
