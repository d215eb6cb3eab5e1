"""Correlation tables for analytic two-orbital states, with reference values.

Reference values are closed forms in ``P(theta)``, the binary entropy of
``cos^2 theta``, and multiples of ``ln 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .fock import WaveFunction
from .measures import ALL_MODES, binary_entropy, von_neumann_entropy
from .optimize import DiscordConfig, SeparableConfig
from .rdm import one_orbital_rdm, two_orbital_rdm
from .reports import MEASURES, AnalysisConfig, analyze_pair
from .transforms import apply_rotation, construct_reference_state, jacobi

LN2 = np.log(2)
EXACT_TOL = 1e-6
SEARCH_TOL = 2e-3
TABLE_ONE_THETAS = (np.pi / 6, np.pi / 4, np.pi / 3)
BOND_STATES = ("bond_psi1", "bond_psi2", "bond_psi3", "bond_psi4")


@dataclass
class Cell:
    table: str
    state: str
    mode: str
    measure: str
    value: float
    expected: float
    exact: bool

    @property
    def tol(self) -> float:
        return EXACT_TOL if self.exact else SEARCH_TOL

    @property
    def ok(self) -> bool:
        return abs(self.value - self.expected) <= self.tol

    def to_dict(self, scale: float = 1.0) -> dict:
        return {"table": self.table, "state": self.state, "mode": self.mode,
                "measure": self.measure, "value": self.value / scale,
                "expected": self.expected / scale, "tolerance": self.tol / scale,
                "exact": self.exact, "ok": self.ok}


def expected_table_one(theta: float) -> dict:
    P = binary_entropy(theta)
    ssr = {"I": P, "C": P, "Q": 0.0, "E": 0.0}
    return {"none": {"I": 2 * P, "C": P, "Q": P, "E": P}, "parity": ssr, "number": ssr}


def expected_table_two() -> dict:
    zero = {m: 0.0 for m in MEASURES}
    return {
        "bonding/antibonding": {mode.value: zero for mode in ALL_MODES},
        "left/right": {
            "none": {"I": 4 * LN2, "C": 2 * LN2, "Q": 2 * LN2, "E": 2 * LN2},
            "parity": {"I": 3 * LN2, "C": 2 * LN2, "Q": LN2, "E": LN2},
            "number": {"I": 2.5 * LN2, "C": 2 * LN2, "Q": 0.5 * LN2, "E": 0.5 * LN2},
        },
    }


EXPECTED_TABLE_THREE = {
    "bond_psi1": (LN2, 0.0), "bond_psi2": (2 * LN2, 0.0),
    "bond_psi3": (LN2, 0.0), "bond_psi4": (0.0, 0.0),
}


def table_config(seed: int = 0) -> AnalysisConfig:
    return AnalysisConfig(discord=DiscordConfig(seed=seed), separable=SeparableConfig(seed=seed))


def _cells(table: str, state: str, rho: np.ndarray, expected: dict, cfg: AnalysisConfig) -> list[Cell]:
    rep = analyze_pair(rho, cfg)
    return [Cell(table, state, mode, m, float(rep.values[mode][m]), expected[mode][m],
                 bool(rep.exact[mode][m]))
            for mode in rep.values for m in rep.values[mode]]


def table_one(thetas=TABLE_ONE_THETAS, cfg: AnalysisConfig | None = None) -> list[Cell]:
    """One electron shared by two orbitals, ``cos theta |10> + sin theta |01>``."""
    cfg = cfg or table_config()
    cells = []
    for theta in thetas:
        psi = construct_reference_state("single_electron", theta=theta)
        rho = two_orbital_rdm(psi, 0, 1).matrix
        cells += _cells("I", f"theta={theta:.6f}", rho, expected_table_one(theta), cfg)
    return cells


def table_two(cfg: AnalysisConfig | None = None) -> list[Cell]:
    """A doubly occupied bond split into its bond orbitals or into its two halves."""
    cfg = cfg or table_config()
    exp = expected_table_two()
    states = {
        "bonding/antibonding": construct_reference_state("bond_psi2"),
        "left/right": construct_reference_state("bond_lr"),
    }
    cells = []
    for name, psi in states.items():
        cells += _cells("II", name, two_orbital_rdm(psi, 0, 1).matrix, exp[name], cfg)
    return cells


# -- bond scans ---------------------------------------------------------------

def two_orbital_entanglement(psi: WaveFunction) -> float:
    """Entanglement between the two orbitals of a pure two-orbital state."""
    if psi.D != 2:
        raise ValueError("expected a two-orbital state")
    return von_neumann_entropy(one_orbital_rdm(psi, 0).matrix)


@dataclass
class BondScan:
    thetas: np.ndarray
    values: np.ndarray
    theta_max: float | None
    E_max: float
    E_min: float


def bond_scan(psi: WaveFunction, pair=(0, 1), thetas=None, entanglement=None) -> BondScan:
    """Entanglement of ``pair`` after a Jacobi rotation by each angle in ``thetas``.

    ``entanglement`` maps the rotated state to a value and defaults to the
    exact two-orbital entropy. The maximum is refined by a bounded scalar
    search around the best grid point; flat curves report no location.
    """
    i, j = pair
    thetas = np.linspace(0.0, np.pi / 2, 91) if thetas is None else np.asarray(thetas, float)
    entanglement = entanglement or two_orbital_entanglement

    def E(theta: float) -> float:
        return entanglement(apply_rotation(psi, jacobi(i, j, float(theta), psi.D)))

    values = np.array([E(t) for t in thetas])
    k = int(np.argmax(values))
    E_max, theta_max = float(values[k]), None
    if np.ptp(values) > 1e-12:
        lo, hi = thetas[max(k - 1, 0)], thetas[min(k + 1, len(thetas) - 1)]
        res = minimize_scalar(lambda t: -E(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        theta_max = float(res.x) if -res.fun >= E_max else float(thetas[k])
        E_max = max(E_max, float(-res.fun))
    return BondScan(thetas, values, theta_max, E_max, float(values.min()))


def table_three(thetas=None) -> list[Cell]:
    """Largest and smallest entanglement over orbital rotations for definite bond orders."""
    cells = []
    for name in BOND_STATES:
        scan = bond_scan(construct_reference_state(name), thetas=thetas)
        e_max, e_min = EXPECTED_TABLE_THREE[name]
        cells.append(Cell("III", name, "none", "E_max", scan.E_max, e_max, True))
        cells.append(Cell("III", name, "none", "E_min", scan.E_min, e_min, True))
    return cells


def all_tables(seed: int = 0) -> list[Cell]:
    cfg = table_config(seed)
    return table_one(cfg=cfg) + table_two(cfg) + table_three()
