"""Per-orbital and pairwise correlation reports for a wavefunction."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .fock import WaveFunction
from .measures import (ALL_MODES, SSRMode, entanglement_pure, entanglement_pure_ssr,
                       has_definite_total, is_pure, sector_entropy, ssr_project,
                       total_correlation, von_neumann_entropy)
from .optimize import (DiscordConfig, SeparableConfig, classical_correlation,
                       closest_classical_state, entanglement_mixed_upper)
from .rdm import one_orbital_rdm, two_orbital_rdm

MEASURES = ("I", "C", "Q", "E")
ZERO_TOL = 1e-12


@dataclass
class CorrelationReport:
    """Correlation values in nats per SSR mode.

    ``exact[mode][measure]`` is False for values produced by a stochastic
    search; such Q and E values are upper bounds and C is the mutual
    information of the classical state that search found.
    """

    orbitals: tuple[int, ...]
    values: dict = field(default_factory=dict)
    exact: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def get(self, mode: SSRMode | str, measure: str) -> float:
        return self.values[SSRMode.parse(mode).value][measure]

    def to_dict(self, scale: float = 1.0) -> dict:
        return {
            "orbitals": list(self.orbitals),
            "units": "nats" if scale == 1.0 else "ln2",
            "values": {m: {k: (None if v is None else v / scale) for k, v in d.items()}
                       for m, d in self.values.items()},
            "upper_bound": {m: {k: not ok for k, ok in d.items()} for m, d in self.exact.items()},
            "provenance": self.provenance,
        }


@dataclass
class AnalysisConfig:
    modes: tuple = ALL_MODES
    measures: tuple = MEASURES
    discord: DiscordConfig = field(default_factory=DiscordConfig)
    separable: SeparableConfig = field(default_factory=SeparableConfig)


def analyze_pair(rho: np.ndarray, cfg: AnalysisConfig | None = None,
                 orbitals: tuple[int, ...] = ()) -> CorrelationReport:
    """All requested measures for a two-orbital state under each SSR mode.

    Closed forms are used where they exist: uncorrelated states, pure states
    without SSR, and the superselected entanglement of pure states with a
    definite total particle number. Everything else comes from the searches.
    """
    cfg = cfg or AnalysisConfig()
    report = CorrelationReport(tuple(orbitals))
    pure = is_pure(rho)
    want = set(cfg.measures)
    for mode in (SSRMode.parse(m) for m in cfg.modes):
        r = ssr_project(rho, mode)
        vals, exact = {"I": total_correlation(r)}, {"I": True}
        prov = {}
        if vals["I"] < ZERO_TOL:
            vals.update(C=0.0, Q=0.0, E=0.0)
            exact.update(C=True, Q=True, E=True)
        elif pure and mode is SSRMode.NONE:
            e = entanglement_pure(r)
            vals.update(C=e, Q=e, E=e)
            exact.update(C=True, Q=True, E=True)
        else:
            res = None
            if want & {"C", "Q", "E"}:
                res = closest_classical_state(r, cfg.discord)
                vals.update(Q=res.Q_value, C=classical_correlation(r, res))
                exact.update(Q=False, C=False)
                prov["discord"] = {k: res.diagnostics[k] for k in
                                   ("seed", "restarts", "n_step", "accepted", "best_restart")}
            if "E" in want:
                if pure and has_definite_total(rho, mode):
                    vals["E"], exact["E"] = entanglement_pure_ssr(rho, mode), True
                else:
                    sep = entanglement_mixed_upper(r, cfg.separable, start=res)
                    vals["E"], exact["E"] = sep.value, sep.exact
                    if not sep.exact:
                        prov["separable"] = {k: sep.certificate[k] for k in
                                             ("seed", "restarts", "K", "eps", "accepted",
                                              "best_restart")}
        report.values[mode.value] = {k: vals.get(k) for k in MEASURES if k in want}
        report.exact[mode.value] = {k: exact.get(k, True) for k in MEASURES if k in want}
        if prov:
            report.provenance[mode.value] = prov
    return report


def single_orbital_profile(psi: WaveFunction) -> list[dict]:
    """Entanglement of each orbital with the rest, without SSR and under P- and N-SSR.

    The superselected values project both the orbital and its complement,
    which for a pure state of definite particle number reduces to a sector
    average of the orbital's own entropy.
    """
    rows = []
    for i in range(psi.D):
        rho = one_orbital_rdm(psi, i).matrix
        rows.append({
            "orbital": i,
            "none": von_neumann_entropy(rho),
            "parity": sector_entropy(rho, SSRMode.PARITY),
            "number": sector_entropy(rho, SSRMode.NUMBER),
        })
    return rows


def _pair_job(args):
    psi, i, j, cfg = args
    return (i, j), analyze_pair(two_orbital_rdm(psi, i, j).matrix, cfg, (i, j))


def pairwise_reports(psi: WaveFunction, cfg: AnalysisConfig | None = None,
                     pairs=None, workers: int = 1) -> dict[tuple[int, int], CorrelationReport]:
    """Reports for all orbital pairs (or ``pairs``); every pair uses the same seeds."""
    cfg = cfg or AnalysisConfig()
    pairs = list(combinations(range(psi.D), 2)) if pairs is None else list(pairs)
    jobs = [(psi, i, j, cfg) for i, j in pairs]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_pair_job, jobs))
    else:
        results = [_pair_job(job) for job in jobs]
    return dict(sorted(results))


def pairwise_matrices(reports: dict, D: int, modes=ALL_MODES, measures=MEASURES) -> dict:
    """Symmetric ``D x D`` matrices per mode and measure; the diagonal is zero."""
    out = {}
    for mode in (SSRMode.parse(m).value for m in modes):
        out[mode] = {}
        for meas in measures:
            M = np.zeros((D, D))
            for (i, j), rep in reports.items():
                M[i, j] = M[j, i] = rep.values[mode][meas]
            out[mode][meas] = M
    return out


def correlation_sums(reports: dict, mode: SSRMode | str = SSRMode.NONE,
                     measures=MEASURES) -> dict:
    """Sums of pairwise values over ``i < j``; ``upper_bound`` marks any inexact entry."""
    key = SSRMode.parse(mode).value
    sums = {f"{m}_sum": float(sum(rep.values[key][m] for rep in reports.values())) for m in measures}
    sums["upper_bound"] = {f"{m}_sum": not all(rep.exact[key][m] for rep in reports.values())
                           for m in measures}
    return sums
