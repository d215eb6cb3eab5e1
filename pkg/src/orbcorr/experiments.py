"""System and basis specifications shared by the CLI and the experiment scripts."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .fock import WaveFunction
from .groundstate import GroundState, SolverConfig, ground_state
from .hamiltonians import (IntegralSet, backbone_order, bonds_from_geometry, build_huckel,
                           build_hubbard, build_ppp, chain_bonds, hamiltonian_for,
                           load_geometry, parse_fcidump, reorder_sites, rotate_integrals,
                           PPP_HOPPING, PPP_HUBBARD_U)
from .transforms import (OrbitalRotation, apply_rotation, benzene_atomiclike,
                         benzene_mo_coefficients, jacobi, load_rotation, pairwise_jacobi)


class SpecError(ValueError):
    """Malformed or inconsistent experiment specification."""


@dataclass
class SystemSpec:
    """What to solve. Exactly one of ``fcidump`` or ``model`` must be set.

    Model sites come from ``geometry`` (bundled name or XYZ path, carbons are
    active and renumbered along the ring or chain) or from ``lattice``
    (``chain:N`` or ``ring:N``). ``t`` and ``U`` default to 1 and 0 for
    lattice models and to the standard carbon parameters for ``ppp``.
    """

    model: str | None = None
    fcidump: str | None = None
    geometry: str | None = None
    lattice: str | None = None
    t: float | None = None
    U: float | None = None
    hopping_slope: float = 0.0
    sector: tuple[int, int] | None = None

    def __post_init__(self):
        if (self.model is None) == (self.fcidump is None):
            raise SpecError("give exactly one of a model or an FCIDUMP file")
        if self.model is not None and self.model not in ("huckel", "hubbard", "ppp"):
            raise SpecError(f"unknown model {self.model!r}")
        if self.fcidump is not None and not Path(self.fcidump).exists():
            raise SpecError(f"FCIDUMP file {self.fcidump} not found")
        if self.model is not None and (self.geometry is None) == (self.lattice is None):
            raise SpecError("model systems need exactly one of geometry or lattice")
        if self.model == "ppp" and self.geometry is None:
            raise SpecError("the ppp model needs a geometry")


def parse_lattice(text: str) -> tuple[int, list[tuple[int, int]]]:
    m = re.fullmatch(r"(chain|ring):(\d+)", text.strip())
    if not m:
        raise SpecError(f"lattice must look like chain:N or ring:N, got {text!r}")
    n = int(m.group(2))
    if n < 1:
        raise SpecError("lattice needs at least one site")
    return n, chain_bonds(n, periodic=m.group(1) == "ring")


def build_integrals(spec: SystemSpec) -> IntegralSet:
    if spec.fcidump is not None:
        return parse_fcidump(Path(spec.fcidump))
    if spec.geometry is not None:
        try:
            geom = load_geometry(spec.geometry)
        except (OSError, ValueError) as exc:
            raise SpecError(f"cannot load geometry {spec.geometry!r}: {exc}") from None
        n = len(geom.active)
        bonds = bonds_from_geometry(geom)
        order = backbone_order(bonds, n)
        if spec.model == "ppp":
            ints = build_ppp(geom, t=PPP_HOPPING if spec.t is None else spec.t,
                             U=PPP_HUBBARD_U if spec.U is None else spec.U,
                             hopping_slope=spec.hopping_slope)
        else:
            ints = _lattice_model(spec, n, bonds)
        return reorder_sites(ints, order)
    n, bonds = parse_lattice(spec.lattice)
    return _lattice_model(spec, n, bonds)


def _lattice_model(spec: SystemSpec, n: int, bonds) -> IntegralSet:
    t = 1.0 if spec.t is None else spec.t
    if spec.model == "huckel":
        ints = build_huckel(n, bonds, t)
    elif spec.model == "hubbard":
        ints = build_hubbard(n, bonds, t, 0.0 if spec.U is None else spec.U)
    else:
        raise SpecError("the ppp model needs a geometry")
    ints.nelec, ints.ms2 = n, 0
    return ints


def default_sector(ints: IntegralSet, spec: SystemSpec) -> tuple[int, int]:
    if spec.sector is not None:
        return spec.sector
    if ints.nelec is not None:
        return ints.nelec, ints.ms2 or 0
    return ints.D, 0


@dataclass
class SolvedSystem:
    ints: IntegralSet
    sector: tuple[int, int]
    state: GroundState

    @property
    def psi(self) -> WaveFunction:
        return self.state.wavefunction


def solve(spec: SystemSpec, cfg: SolverConfig | None = None) -> SolvedSystem:
    ints = build_integrals(spec)
    N, two_sz = default_sector(ints, spec)
    H = hamiltonian_for(ints, N, two_sz)
    return SolvedSystem(ints, (N, two_sz), ground_state(H, cfg))


# -- orbital bases ------------------------------------------------------------

def canonical_matrix(h: np.ndarray) -> np.ndarray:
    """Eigenvectors of ``h`` as columns, ascending energy, largest entry made positive."""
    _, C = np.linalg.eigh(h)
    for q in range(C.shape[1]):
        k = np.argmax(np.abs(C[:, q]) > np.abs(C[:, q]).max() - 1e-8)
        if C[k, q] < 0:
            C[:, q] *= -1
    return C


def bond_pairs(D: int) -> list[tuple[int, int]]:
    return [(2 * k, 2 * k + 1) for k in range(D // 2)]


def pm_like_matrix(D: int) -> np.ndarray:
    """Bonding ``(s_2k + s_2k+1)/sqrt2`` and antibonding ``(s_2k+1 - s_2k)/sqrt2`` per bond.

    A model stand-in for localized bond orbitals; a pi/4 Jacobi rotation on
    each pair returns the two sites.
    """
    if D % 2:
        raise SpecError("pm-like basis needs an even number of sites")
    M = np.zeros((D, D))
    r = 1 / np.sqrt(2)
    for i, j in bond_pairs(D):
        M[i, i], M[j, i] = r, r
        M[i, j], M[j, j] = -r, r
    return M


RING_TOL = 1e-6


def _six_ring_mos(h: np.ndarray) -> np.ndarray | None:
    """Printed six-ring MO coefficients as columns, if they diagonalize ``h``.

    The tolerance is relative to ``|h|`` so that tabulated ring coordinates,
    symmetric only to their last printed digit, are still recognized.
    """
    if len(h) != 6:
        return None
    C = benzene_mo_coefficients().T
    t = C.T @ h @ C
    e = np.diag(t)
    tol = RING_TOL * max(np.abs(h).max(), 1.0)
    if np.abs(t - np.diag(e)).max() > tol or np.any(np.diff(e) < -tol):
        return None
    return C


def _eval_angle(text: str) -> float:
    text = text.strip().lower().replace("pi", str(np.pi))
    if not re.fullmatch(r"[0-9eE.+\-*/() ]+", text):
        raise SpecError(f"bad angle {text!r}")
    return float(eval(text, {"__builtins__": {}}))  # arithmetic only, checked above


def resolve_basis(text: str, ints: IntegralSet) -> tuple[OrbitalRotation, list[str]]:
    """Rotation from the native orbitals to the basis named by ``text``.

    ``text`` is a ``+``-separated list of stages, each relative to the result
    of the previous one: ``native``, ``canonical`` (for a six-ring, the
    printed MO coefficients), ``pm-like``, ``atomic-like`` (for a six-ring,
    canonical followed by ``benzene-atomiclike``; otherwise ``pm-like``
    followed by pi/4 rotations of each bond pair), ``benzene-atomiclike``
    (the localizing transform of the six-ring canonical MOs),
    ``jacobi:i-j:theta[;i-j:theta...]`` with 1-based orbitals, and
    ``matrix:PATH``.
    """
    D = ints.D
    total = OrbitalRotation.identity(D)
    stages = [s.strip() for s in text.split("+") if s.strip()] or ["native"]
    for stage in stages:
        current = rotate_integrals(ints, total.matrix)
        if stage == "native":
            step = OrbitalRotation.identity(D)
        elif stage == "canonical":
            ring = _six_ring_mos(current.h)
            step = OrbitalRotation(canonical_matrix(current.h) if ring is None else ring)
        elif stage == "pm-like":
            step = OrbitalRotation(pm_like_matrix(D))
        elif stage == "atomic-like":
            ring = _six_ring_mos(current.h)
            if ring is not None:
                step = OrbitalRotation(ring).then(benzene_atomiclike())
            else:
                step = OrbitalRotation(pm_like_matrix(D)).then(
                    pairwise_jacobi(bond_pairs(D), np.pi / 4, D))
        elif stage == "benzene-atomiclike":
            if D != 6:
                raise SpecError("benzene-atomiclike needs six orbitals")
            step = benzene_atomiclike()
        elif stage.startswith("jacobi:"):
            step = OrbitalRotation.identity(D)
            for item in stage[len("jacobi:"):].split(";"):
                m = re.fullmatch(r"\s*(\d+)-(\d+):(.+)", item)
                if not m:
                    raise SpecError(f"bad jacobi item {item!r}; expected i-j:theta")
                i, j = int(m.group(1)) - 1, int(m.group(2)) - 1
                if not (0 <= i < D and 0 <= j < D) or i == j:
                    raise SpecError(f"jacobi orbitals {i + 1}, {j + 1} invalid for D={D}")
                step = step.then(jacobi(i, j, _eval_angle(m.group(3)), D))
        elif stage.startswith("matrix:"):
            path = stage[len("matrix:"):]
            if not Path(path).exists():
                raise SpecError(f"rotation file {path} not found")
            step = load_rotation(path)
            if step.D != D:
                raise SpecError(f"rotation file is {step.D}x{step.D}, system has D={D}")
        else:
            raise SpecError(f"unknown basis stage {stage!r}")
        total = total.then(step)
    return total, stages


def state_in_basis(system: SolvedSystem, basis: str) -> WaveFunction:
    R, _ = resolve_basis(basis, system.ints)
    return apply_rotation(system.psi, R)
