"""Entropies, superselection projections and closed-form correlation measures.

All quantities are in nats. Bipartite matrices are indexed ``a * dB + b``
with ``a`` the local index of subsystem A.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .rdm import LOCAL_N, trace_out

log = logging.getLogger(__name__)

TRACE_TOL = 1e-8
EIG_CUTOFF = 1e-14
SUPPORT_SIGMA = 1e-12
SUPPORT_RHO = 1e-10
PURITY_TOL = 1e-10
ORBITAL_DIMS = (4, 4)


class SSRMode(str, Enum):
    NONE = "none"
    PARITY = "parity"
    NUMBER = "number"

    @classmethod
    def parse(cls, value: "SSRMode | str") -> "SSRMode":
        if isinstance(value, SSRMode):
            return value
        aliases = {"none": cls.NONE, "p": cls.PARITY, "parity": cls.PARITY,
                   "n": cls.NUMBER, "number": cls.NUMBER}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise ValueError(f"unknown SSR mode {value!r}") from None


ALL_MODES = (SSRMode.NONE, SSRMode.PARITY, SSRMode.NUMBER)


def _check_density(rho: np.ndarray) -> np.ndarray:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > TRACE_TOL:
        raise ValueError(f"density matrix has trace {tr:.10f}")
    return rho


def _hermitian_eigvalsh(rho: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))


def shannon_entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > EIG_CUTOFF]
    return max(float(-(p * np.log(p)).sum()), 0.0)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """``-Tr rho ln rho``; eigenvalues below 1e-14 contribute nothing."""
    return shannon_entropy(_hermitian_eigvalsh(_check_density(rho)))


def binary_entropy(theta: float) -> float:
    """Entropy of ``(cos^2 theta, sin^2 theta)``."""
    return shannon_entropy([np.cos(theta) ** 2, np.sin(theta) ** 2])


def relative_entropy(rho: np.ndarray, sigma: np.ndarray) -> float:
    """``Tr rho (ln rho - ln sigma)``, or ``inf`` when supp(rho) is not inside supp(sigma)."""
    rho, sigma = _check_density(rho), _check_density(sigma)
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    w, V = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
    weights = np.einsum("ki,kl,li->i", V.conj(), rho, V).real
    null = w < SUPPORT_SIGMA
    if np.any(weights[null] > SUPPORT_RHO):
        return float("inf")
    cross = float((weights[~null] * np.log(w[~null])).sum())
    return -von_neumann_entropy(rho) - cross


def reduced_states(rho: np.ndarray, dims=ORBITAL_DIMS) -> tuple[np.ndarray, np.ndarray]:
    return trace_out(rho, dims, 0), trace_out(rho, dims, 1)


def closest_product_state(rho: np.ndarray, dims=ORBITAL_DIMS) -> np.ndarray:
    rA, rB = reduced_states(rho, dims)
    return np.kron(rA, rB)


def total_correlation(rho: np.ndarray, dims=ORBITAL_DIMS) -> float:
    """Quantum mutual information ``S(rho_A) + S(rho_B) - S(rho)``."""
    rho = _check_density(rho)
    rA, rB = reduced_states(rho, dims)
    return von_neumann_entropy(rA) + von_neumann_entropy(rB) - von_neumann_entropy(rho)


# -- superselection -----------------------------------------------------------

def ssr_labels(mode: SSRMode | str, gradings) -> np.ndarray | None:
    """Joint block label per product basis state, or ``None`` for no projection."""
    mode = SSRMode.parse(mode)
    if mode is SSRMode.NONE:
        return None
    if gradings is None:
        raise ValueError("SSR projection needs local particle-number gradings")
    nA, nB = (np.asarray(g, dtype=int) for g in gradings)
    if mode is SSRMode.PARITY:
        nA, nB = nA % 2, nB % 2
    return (nA[:, None] * (nB.max() + 1) + nB[None, :]).ravel()


def ssr_project(rho: np.ndarray, mode: SSRMode | str, gradings=(LOCAL_N, LOCAL_N)) -> np.ndarray:
    """Dephase ``rho`` across local parity or particle-number blocks of both factors.

    ``gradings`` gives the local particle number of each basis state of A and
    of B; the default is one spatial orbital per side.
    """
    labels = ssr_labels(mode, gradings)
    if labels is None:
        return np.array(rho, copy=True)
    if len(labels) != len(rho):
        raise ValueError("gradings do not match the matrix dimension")
    return np.where(labels[:, None] == labels[None, :], rho, 0.0)


def dims_of(gradings) -> tuple[int, int]:
    return len(gradings[0]), len(gradings[1])


# -- pure states --------------------------------------------------------------

def purity(rho: np.ndarray) -> float:
    return float(np.einsum("ij,ji->", rho, rho).real)


def is_pure(rho: np.ndarray) -> bool:
    return purity(rho) > 1 - PURITY_TOL


def entanglement_pure(rho: np.ndarray, dims=ORBITAL_DIMS) -> float:
    """Entanglement entropy of a pure bipartite state; both reductions are checked."""
    rho = _check_density(rho)
    if not is_pure(rho):
        raise ValueError("state is mixed; use entanglement_mixed_upper for an upper bound")
    rA, rB = reduced_states(rho, dims)
    sA, sB = von_neumann_entropy(rA), von_neumann_entropy(rB)
    if abs(sA - sB) > 1e-10:
        raise ArithmeticError(f"reduced entropies differ: {sA} vs {sB}")
    return sA


def sector_entropy(rho_A: np.ndarray, mode: SSRMode | str, grading=LOCAL_N) -> float:
    """Superselected entanglement of a pure global state from its reduction ``rho_A``.

    With definite global particle number (or parity) the projected state is a
    mixture of locally distinguishable pure states, one per local sector, so
    its entanglement is ``sum_s p_s S(P_s rho_A P_s / p_s)``.
    """
    mode = SSRMode.parse(mode)
    rho_A = _check_density(rho_A)
    if mode is SSRMode.NONE:
        return von_neumann_entropy(rho_A)
    g = np.asarray(grading, dtype=int)
    if mode is SSRMode.PARITY:
        g = g % 2
    total = 0.0
    for s in np.unique(g):
        idx = np.nonzero(g == s)[0]
        block = rho_A[np.ix_(idx, idx)]
        p = np.trace(block).real
        if p > EIG_CUTOFF:
            total += p * shannon_entropy(_hermitian_eigvalsh(block / p))
    return total


def has_definite_total(rho: np.ndarray, mode: SSRMode | str, gradings=(LOCAL_N, LOCAL_N)) -> bool:
    """True when ``rho`` lives in one eigenspace of the total number (or parity)."""
    mode = SSRMode.parse(mode)
    if mode is SSRMode.NONE:
        return True
    nA, nB = (np.asarray(g, dtype=int) for g in gradings)
    tot = (nA[:, None] + nB[None, :]).ravel()
    if mode is SSRMode.PARITY:
        tot = tot % 2
    diag = np.diag(rho).real
    return len(np.unique(tot[diag > SUPPORT_RHO])) <= 1


def entanglement_pure_ssr(rho: np.ndarray, mode: SSRMode | str,
                          gradings=(LOCAL_N, LOCAL_N)) -> float:
    """Entanglement of the SSR projection of a pure state with definite total charge."""
    rho = _check_density(rho)
    if not is_pure(rho):
        raise ValueError("state is mixed")
    if not has_definite_total(rho, mode, gradings):
        raise ValueError("pure state mixes total particle-number sectors")
    rA = trace_out(rho, dims_of(gradings), 0)
    return sector_entropy(rA, mode, gradings[0])


def ppt_min_eigenvalue(rho: np.ndarray, dims=ORBITAL_DIMS) -> float:
    """Smallest eigenvalue of the partial transpose on B; negative certifies entanglement."""
    dA, dB = dims
    pt = np.asarray(rho).reshape(dA, dB, dA, dB).transpose(0, 3, 2, 1).reshape(dA * dB, dA * dB)
    return float(_hermitian_eigvalsh(pt).min())


# -- consistency checks -------------------------------------------------------

def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    X = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return 0.5 * (X + X.conj().T)


def correlation_function(rho: np.ndarray, A: np.ndarray, B: np.ndarray, dims=ORBITAL_DIMS) -> complex:
    rA, rB = reduced_states(rho, dims)
    return np.trace(rho @ np.kron(A, B)) - np.trace(rA @ A) * np.trace(rB @ B)


@dataclass
class BoundReport:
    samples: int
    bound: float
    max_ratio: float
    violations: int

    @property
    def ok(self) -> bool:
        return self.violations == 0


def correlation_bound_check(rho: np.ndarray, samples: int = 100, seed: int = 0,
                            dims=ORBITAL_DIMS) -> BoundReport:
    """Sample local observable pairs and compare their normalized correlation to ``sqrt(2 I)``."""
    rng = np.random.default_rng(seed)
    I = max(total_correlation(rho, dims), 0.0)
    bound = np.sqrt(2.0) * np.sqrt(I)
    max_ratio, violations = 0.0, 0
    for _ in range(samples):
        A, B = random_hermitian(rng, dims[0]), random_hermitian(rng, dims[1])
        ratio = abs(correlation_function(rho, A, B, dims)) / (
            np.linalg.norm(A, 2) * np.linalg.norm(B, 2))
        max_ratio = max(max_ratio, ratio)
        violations += ratio > bound + 1e-10
    return BoundReport(samples, float(bound), float(max_ratio), int(violations))


@dataclass
class SumRuleReport:
    dephasing_residual: float
    identity_b_residual: float
    commuting: bool
    I: float
    Q: float
    C: float
    gap: float = field(default=0.0)  # I - Q - C

    def ok(self, tol: float = 1e-10) -> bool:
        return self.dephasing_residual <= tol and self.identity_b_residual <= tol

    @property
    def commuting_equality(self) -> bool | None:
        return abs(self.gap) <= 1e-8 if self.commuting else None


def sum_rule_check(rho: np.ndarray, chi: np.ndarray, dims=ORBITAL_DIMS) -> SumRuleReport:
    """Verify the exact identities tying ``I``, ``S(rho||chi)`` and ``I(chi)`` for a dephased ``chi``."""
    S = von_neumann_entropy
    rA, rB = reduced_states(rho, dims)
    cA, cB = reduced_states(chi, dims)
    I = total_correlation(rho, dims)
    Q = relative_entropy(rho, chi)
    C = total_correlation(chi, dims)
    res_a = abs(Q - (S(chi) - S(rho)))
    res_b = abs((I - Q - C) - (S(rA) + S(rB) - S(cA) - S(cB)))
    pi = np.kron(rA, rB)
    commuting = bool(np.abs(pi @ chi - chi @ pi).max() < 1e-10)
    gap = I - Q - C
    log.debug("I - Q - C = %.3e (commuting=%s)", gap, commuting)
    return SumRuleReport(res_a, res_b, commuting, I, Q, C, gap)


def random_density_matrix(rng: np.random.Generator, d: int = 16, rank: int | None = None) -> np.ndarray:
    """Random mixed state ``X X^dagger / Tr`` with Gaussian ``X`` of the given rank."""
    rank = d if rank is None else rank
    X = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = X @ X.conj().T
    return rho / np.trace(rho).real
