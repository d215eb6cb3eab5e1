"""Lowest eigenpair of a sector Hamiltonian (dense or Lanczos)."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse.linalg as spla

from .fock import WaveFunction
from .hamiltonians import SparseHamiltonian

log = logging.getLogger(__name__)

DEGENERACY_GAP = 1e-8


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (best residual {residual:.3e})")


@dataclass
class SolverConfig:
    method: str = "auto"  # dense | lanczos | auto
    tol: float = 1e-10
    max_iter: int = 5000
    seed: int = 0
    dense_max_dim: int = 1500

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.method not in ("dense", "lanczos", "auto"):
            raise ValueError(f"unknown solver method {self.method!r}")


@dataclass
class GroundState:
    energy: float
    wavefunction: WaveFunction
    residual: float
    gap: float | None
    method: str

    @property
    def degenerate(self) -> bool:
        return self.gap is not None and self.gap < DEGENERACY_GAP


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def ground_state(H: SparseHamiltonian, cfg: SolverConfig | None = None) -> GroundState:
    """Lowest eigenpair with an independently rechecked residual.

    The returned vector is normalized and its largest amplitude is made real
    positive, so repeated solves give identical vectors. ``gap`` is the
    distance to the next eigenvalue (``None`` for one-dimensional sectors).
    """
    cfg = cfg or SolverConfig()
    n = H.dimension
    if n < 1:
        raise ValueError("empty Hamiltonian")
    method = cfg.method
    if method == "auto":
        method = "dense" if n <= cfg.dense_max_dim else "lanczos"
    if n <= 3:
        method = "dense"

    if method == "dense":
        A = H.matrix.toarray()
        w, V = scipy.linalg.eigh(A, subset_by_index=[0, min(1, n - 1)])
        energy, vec = float(w[0]), V[:, 0]
        gap = float(w[1] - w[0]) if n > 1 else None
    else:
        rng = np.random.default_rng(cfg.seed)
        v0 = rng.standard_normal(n)
        try:
            w, V = spla.eigsh(H.matrix, k=2, which="SA", v0=v0, tol=cfg.tol * 1e-2,
                              maxiter=cfg.max_iter)
        except spla.ArpackNoConvergence as exc:
            if len(exc.eigenvalues):
                r = np.linalg.norm(H.matvec(exc.eigenvectors[:, 0]) - exc.eigenvalues[0] * exc.eigenvectors[:, 0])
            else:
                r = float("inf")
            raise ConvergenceError("Lanczos did not converge", r) from None
        order = np.argsort(w)
        w, V = w[order], V[:, order]
        energy, vec = float(w[0]), V[:, 0]
        gap = float(w[1] - w[0])

    vec = _fix_phase(vec / np.linalg.norm(vec))
    residual = float(np.linalg.norm(H.matvec(vec) - energy * vec))
    if residual > cfg.tol * max(1.0, abs(energy)):
        raise ConvergenceError(f"{method} solve missed tol={cfg.tol}", residual)
    if gap is not None and gap < DEGENERACY_GAP:
        log.warning("degenerate ground state (gap %.2e); orbital correlations depend on "
                    "the chosen vector within the degenerate space", gap)
    return GroundState(energy, WaveFunction(H.basis, vec.astype(complex)), residual, gap, method)
