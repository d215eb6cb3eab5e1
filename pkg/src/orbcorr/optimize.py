"""Stochastic searches for the closest classical state and closest separable state.

Both searches return upper bounds on the true minima together with the state
that achieves them, so every reported value can be re-evaluated exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .measures import (ORBITAL_DIMS, _check_density, entanglement_pure, is_pure,
                       reduced_states, relative_entropy, total_correlation,
                       von_neumann_entropy)

MAX_TOTAL_DIM = 64
TIE_TOL = 1e-10


# -- random unitaries ---------------------------------------------------------

def haar_unitaries(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    """``n`` Haar-random ``d x d`` unitaries (QR of complex Gaussians, phase-fixed)."""
    Z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2)
    Qm, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    return Qm * (diag / np.abs(diag))[:, None, :]


def fractional_power(V: np.ndarray, M: float) -> np.ndarray:
    """Principal ``V**(1/M)`` for a stack of unitaries.

    A unitary shares its eigenvectors with the Hermitian matrix
    ``Re V + c Im V`` (``c`` irrational breaks the cos/sin degeneracy), so a
    Hermitian eigensolver gives them; eigenphases follow from Rayleigh
    quotients. The result is exactly unitary.
    """
    Vh = V.conj().swapaxes(-1, -2)
    K = 0.5 * (V + Vh) + (np.sqrt(2) / 3) * (V - Vh) / 2j
    _, P = np.linalg.eigh(K)
    lam = np.einsum("...ki,...kl,...li->...i", P.conj(), V, P)
    phase = np.exp(1j * np.angle(lam) / M)
    return (P * phase[..., None, :]) @ P.conj().swapaxes(-1, -2)


def _reunitarize(U: np.ndarray) -> np.ndarray:
    Qm, R = np.linalg.qr(U)
    diag = np.diagonal(R, axis1=-2, axis2=-1)
    return Qm * (diag / np.abs(diag))[..., None, :]


# -- closest classical state --------------------------------------------------

@dataclass
class DiscordConfig:
    M: float = 1e3
    n_step: int = 10_000
    restarts: int = 10
    seed: int = 0
    acceptance: str = "greedy"  # greedy | annealed
    T0: float = 1e-3
    identity_start: bool = True
    chunk: int = 500

    def __post_init__(self):
        if self.acceptance not in ("greedy", "annealed"):
            raise ValueError(f"unknown acceptance rule {self.acceptance!r}")
        if self.M <= 0 or self.n_step < 0 or self.restarts < 1:
            raise ValueError("M must be positive, n_step >= 0, restarts >= 1")


@dataclass
class ClassicalStateResult:
    chi: np.ndarray
    U_A: np.ndarray
    U_B: np.ndarray
    Q_value: float
    diagnostics: dict = field(default_factory=dict)


def dephased_spectrum(rho: np.ndarray, U_A: np.ndarray, U_B: np.ndarray) -> np.ndarray:
    """Diagonal of ``rho`` in the product bases given by the columns of ``U_A``, ``U_B``.

    Accepts single unitaries or equally shaped stacks of them.
    """
    dA, dB = U_A.shape[-1], U_B.shape[-1]
    W = (U_A[..., :, None, :, None] * U_B[..., None, :, None, :])
    W = W.reshape(W.shape[:-4] + (dA * dB, dA * dB))
    return np.einsum("...ki,...ki->...i", W.conj(), rho @ W).real


def classical_state(rho: np.ndarray, U_A: np.ndarray, U_B: np.ndarray) -> np.ndarray:
    """Dephasing of ``rho`` in the product basis ``U_A (x) U_B``."""
    W = np.kron(U_A, U_B)
    return (W * dephased_spectrum(rho, U_A, U_B)) @ W.conj().T


def _entropy_rows(p: np.ndarray) -> np.ndarray:
    p = np.clip(p, 0.0, None)
    return -(p * np.log(np.clip(p, 1e-300, None))).sum(axis=-1)


def closest_classical_state(rho: np.ndarray, cfg: DiscordConfig | None = None,
                            dims=ORBITAL_DIMS) -> ClassicalStateResult:
    """Random walk over local unitaries minimizing ``S(rho || chi)``.

    All restarts advance in lockstep; each draws from its own stream spawned
    from ``cfg.seed``. Restart 0 starts from the computational basis when
    ``identity_start`` is set, the others from Haar-random bases.
    """
    cfg = cfg or DiscordConfig()
    rho = _check_density(rho)
    dA, dB = dims
    if dA * dB > MAX_TOTAL_DIM:
        raise ValueError(f"total dimension {dA * dB} exceeds {MAX_TOTAL_DIM}; search refused")
    if rho.shape != (dA * dB, dA * dB):
        raise ValueError("state does not match the declared factor dimensions")
    R = cfg.restarts
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(R)]

    UA = np.empty((R, dA, dA), complex)
    UB = np.empty((R, dB, dB), complex)
    for r, g in enumerate(rngs):
        if r == 0 and cfg.identity_start:
            UA[r], UB[r] = np.eye(dA), np.eye(dB)
        else:
            UA[r], UB[r] = haar_unitaries(g, 1, dA)[0], haar_unitaries(g, 1, dB)[0]

    S_rho = von_neumann_entropy(rho)
    cur = _entropy_rows(dephased_spectrum(rho, UA, UB)) - S_rho
    best, bestA, bestB = cur.copy(), UA.copy(), UB.copy()
    accepted = np.zeros(R, dtype=int)
    history = [best.tolist()]

    done = 0
    while done < cfg.n_step:
        n = min(cfg.chunk, cfg.n_step - done)
        stepA = np.stack([fractional_power(haar_unitaries(g, n, dA), cfg.M) for g in rngs], axis=1)
        stepB = np.stack([fractional_power(haar_unitaries(g, n, dB), cfg.M) for g in rngs], axis=1)
        u = np.stack([g.random(n) for g in rngs], axis=1)
        for s in range(n):
            cA, cB = UA @ stepA[s], UB @ stepB[s]
            val = _entropy_rows(dephased_spectrum(rho, cA, cB)) - S_rho
            delta = val - cur
            if cfg.acceptance == "greedy":
                acc = delta < 0
            else:
                T = cfg.T0 * max(1.0 - (done + s) / cfg.n_step, 1e-9)
                acc = (delta < 0) | (u[s] < np.exp(-np.clip(delta, 0, None) / T))
            if acc.any():
                UA = np.where(acc[:, None, None], cA, UA)
                UB = np.where(acc[:, None, None], cB, UB)
                cur = np.where(acc, val, cur)
                accepted += acc
                imp = cur < best
                if imp.any():
                    best = np.where(imp, cur, best)
                    bestA = np.where(imp[:, None, None], UA, bestA)
                    bestB = np.where(imp[:, None, None], UB, bestB)
        UA, UB = _reunitarize(UA), _reunitarize(UB)
        done += n
        history.append(best.tolist())

    pick = 0
    for r in range(1, R):
        if best[r] < best[pick] - TIE_TOL:
            pick = r
    U_A, U_B = _reunitarize(bestA[pick]), _reunitarize(bestB[pick])
    chi = classical_state(rho, U_A, U_B)
    chi = 0.5 * (chi + chi.conj().T)
    Q = relative_entropy(rho, chi)
    diag = {
        "seed": cfg.seed, "restarts": R, "n_step": cfg.n_step, "M": cfg.M,
        "acceptance": cfg.acceptance, "accepted": accepted.tolist(),
        "best_per_restart": best.tolist(), "best_restart": pick, "history": history,
    }
    return ClassicalStateResult(chi, U_A, U_B, Q, diag)


def classical_correlation(rho: np.ndarray, result: ClassicalStateResult, dims=ORBITAL_DIMS) -> float:
    """Mutual information of the closest classical state found for ``rho``."""
    return total_correlation(result.chi, dims)


# -- closest separable state --------------------------------------------------

@dataclass
class SeparableConfig:
    K: int = 64
    n_step: int = 1000
    restarts: int = 3
    seed: int = 0
    eps: float = 1e-9
    polish: bool = True
    polish_iter: int = 500

    def __post_init__(self):
        if self.K < 1 or self.restarts < 1 or self.n_step < 0:
            raise ValueError("K and restarts must be positive, n_step >= 0")
        if not 0 < self.eps < 1:
            raise ValueError("eps must lie in (0, 1)")


@dataclass
class SeparableResult:
    value: float
    sigma: np.ndarray
    exact: bool
    certificate: dict = field(default_factory=dict)


class _Ensemble:
    """Separable ensemble ``(1-eps) sum_k p_k |a_k b_k><a_k b_k| + eps I/d`` in a flat real vector."""

    def __init__(self, rho: np.ndarray, dims, K: int, eps: float):
        self.rho, self.dims, self.K, self.eps = rho, dims, K, eps
        self.d = dims[0] * dims[1]
        self.S_rho = von_neumann_entropy(rho)
        dA, dB = dims
        self.split = np.cumsum([K * dA, K * dA, K * dB, K * dB])

    def unpack(self, x):
        dA, dB = self.dims
        ra, ia, rb, ib, w = np.split(x, self.split)
        A = (ra + 1j * ia).reshape(self.K, dA)
        B = (rb + 1j * ib).reshape(self.K, dB)
        return A, B, w

    def pack(self, A, B, w):
        return np.concatenate([A.real.ravel(), A.imag.ravel(), B.real.ravel(), B.imag.ravel(), w])

    def parts(self, x):
        A, B, w = self.unpack(x)
        na, nb = np.linalg.norm(A, axis=1), np.linalg.norm(B, axis=1)
        a, b = A / na[:, None], B / nb[:, None]
        p = np.exp(w - w.max())
        p /= p.sum()
        v = (a[:, :, None] * b[:, None, :]).reshape(self.K, self.d)
        return a, b, na, nb, p, v

    def sigma(self, x):
        _, _, _, _, p, v = self.parts(x)
        s = (1 - self.eps) * (v.T * p) @ v.conj() + self.eps / self.d * np.eye(self.d)
        return 0.5 * (s + s.conj().T)

    def value(self, x) -> float:
        lam, U = np.linalg.eigh(self.sigma(x))
        rt = np.einsum("ki,kl,li->i", U.conj(), self.rho, U).real
        return float(-self.S_rho - rt @ np.log(lam))

    def value_and_grad(self, x):
        dA, dB = self.dims
        a, b, na, nb, p, v = self.parts(x)
        lam, U = np.linalg.eigh(self.sigma(x))
        lam = np.clip(lam, 1e-300, None)
        loglam = np.log(lam)
        rt = U.conj().T @ self.rho @ U
        f = float(-self.S_rho - np.diag(rt).real @ loglam)
        diff = lam[:, None] - lam[None, :]
        close = np.abs(diff) <= 1e-12 * lam.max()
        gamma = np.where(close, 2.0 / (lam[:, None] + lam[None, :]),
                         (loglam[:, None] - loglam[None, :]) / np.where(close, 1.0, diff))
        G = U @ (gamma * rt) @ U.conj().T
        Gv = v @ G.T
        c = 1 - self.eps
        g_p = -c * np.einsum("ki,ki->k", v.conj(), Gv).real
        g_w = p * (g_p - p @ g_p)
        Gm = Gv.reshape(self.K, dA, dB)
        ga = -2 * c * p[:, None] * np.einsum("kab,kb->ka", Gm, b.conj())
        gb = -2 * c * p[:, None] * np.einsum("kab,ka->kb", Gm, a.conj())
        ga = (ga - a * np.einsum("ka,ka->k", a.conj(), ga).real[:, None]) / na[:, None]
        gb = (gb - b * np.einsum("kb,kb->k", b.conj(), gb).real[:, None]) / nb[:, None]
        return f, self.pack(ga, gb, g_w)


def _random_start(ens: _Ensemble, rng: np.random.Generator) -> np.ndarray:
    dA, dB = ens.dims
    K = ens.K
    A = rng.standard_normal((K, dA)) + 1j * rng.standard_normal((K, dA))
    B = rng.standard_normal((K, dB)) + 1j * rng.standard_normal((K, dB))
    return ens.pack(A, B, np.zeros(K))


def _seed_from_classical(ens: _Ensemble, rng, U_A, U_B, chi_diag) -> np.ndarray:
    dA, dB = ens.dims
    n = dA * dB
    x = _random_start(ens, rng)
    A, B, w = ens.unpack(x)
    w[:] = -80.0
    ii, jj = np.divmod(np.arange(n), dB)
    A[:n], B[:n] = U_A[:, ii].T, U_B[:, jj].T
    w[:n] = np.log(np.clip(chi_diag, 1e-35, None))
    return ens.pack(A, B, w)


def entanglement_mixed_upper(rho: np.ndarray, cfg: SeparableConfig | None = None,
                             dims=ORBITAL_DIMS,
                             start: ClassicalStateResult | None = None) -> SeparableResult:
    """Upper bound on the relative entropy of entanglement by a separable-ensemble search.

    Each restart runs a perturb-and-accept walk on the ensemble parameters and
    is then polished by L-BFGS with the analytic gradient. With ``start`` given,
    restart 0 begins at that classical state (itself separable), so the bound
    never exceeds its ``Q_value`` by more than the ``eps`` admixture. Product
    and pure inputs are answered in closed form.
    """
    cfg = cfg or SeparableConfig()
    rho = _check_density(rho)
    rho = 0.5 * (rho + rho.conj().T)
    I = total_correlation(rho, dims)
    if I < 1e-12:
        rA, rB = reduced_states(rho, dims)
        return SeparableResult(max(I, 0.0), np.kron(rA, rB), True, {"method": "product"})
    if is_pure(rho):
        return SeparableResult(entanglement_pure(rho, dims), None, True, {"method": "pure"})
    if start is not None and cfg.K < dims[0] * dims[1]:
        raise ValueError("K too small to hold the classical starting state")

    ens = _Ensemble(rho, dims, cfg.K, cfg.eps)
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)]
    best_x, best_f, best_r = None, np.inf, -1
    accepted = []
    for r, rng in enumerate(rngs):
        if r == 0 and start is not None:
            x = _seed_from_classical(ens, rng, start.U_A, start.U_B,
                                     dephased_spectrum(rho, start.U_A, start.U_B))
        else:
            x = _random_start(ens, rng)
        f = ens.value(x)
        if r == 0 and start is not None and f < best_f:
            best_x, best_f, best_r = x.copy(), f, r
        scale, acc = 0.3, 0
        for _ in range(cfg.n_step):
            k = rng.integers(cfg.K)
            A, B, w = ens.unpack(x.copy())
            A[k] += scale * (rng.standard_normal(dims[0]) + 1j * rng.standard_normal(dims[0]))
            B[k] += scale * (rng.standard_normal(dims[1]) + 1j * rng.standard_normal(dims[1]))
            w[k] += scale * rng.standard_normal()
            y = ens.pack(A, B, w)
            fy = ens.value(y)
            if fy < f:
                x, f, acc = y, fy, acc + 1
                scale = min(scale * 1.2, 1.0)
            else:
                scale = max(scale * 0.98, 1e-4)
        if cfg.polish:
            res = minimize(ens.value_and_grad, x, jac=True, method="L-BFGS-B",
                           options={"maxiter": cfg.polish_iter, "ftol": 1e-15, "gtol": 1e-12})
            if res.fun < f:
                x, f = res.x, float(res.fun)
        accepted.append(acc)
        if f < best_f - TIE_TOL:
            best_x, best_f, best_r = x, f, r

    sigma = ens.sigma(best_x)
    sigma /= np.trace(sigma).real
    value = relative_entropy(rho, sigma)
    _, _, _, _, p, v = ens.parts(best_x)
    cert = {
        "method": "ensemble", "eps": cfg.eps, "K": cfg.K, "seed": cfg.seed,
        "restarts": cfg.restarts, "n_step": cfg.n_step, "accepted": accepted,
        "best_restart": best_r, "weights": p, "product_vectors": v,
        "seeded_from_classical": start is not None,
    }
    return SeparableResult(value, sigma, False, cert)
