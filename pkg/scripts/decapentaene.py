"""Pairwise entanglement pattern of decapentaene (PPP, ten pi orbitals) in atomic-like orbitals."""

from __future__ import annotations

import argparse
import json
from pathlib import Path

import numpy as np

from orbcorr.experiments import SystemSpec, solve, state_in_basis
from orbcorr.reports import AnalysisConfig, pairwise_matrices, pairwise_reports
from orbcorr.tables import LN2


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--hopping-slope", type=float, default=0.0,
                        help="eV per angstrom of bond-length dependence of the hopping")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=Path, help="write the E matrix (ln2 units) as JSON")
    args = parser.parse_args()

    system = solve(SystemSpec(model="ppp", geometry="decapentaene",
                              hopping_slope=args.hopping_slope))
    psi = state_in_basis(system, "atomic-like")
    cfg = AnalysisConfig(modes=("none",), measures=("I", "E"))
    cfg.discord.seed = cfg.separable.seed = args.seed
    reports = pairwise_reports(psi, cfg, workers=args.workers)
    E = pairwise_matrices(reports, psi.D, ("none",), ("E",))["none"]["E"] / LN2

    bonded = {(2 * k, 2 * k + 1) for k in range(psi.D // 2)}
    on = [E[i, j] for i, j in sorted(bonded)]
    off = max(E[i, j] for i, j in reports if (i, j) not in bonded)
    print(f"E0 = {system.state.energy:.8f} eV")
    np.set_printoptions(precision=3, suppress=True, linewidth=120)
    print(E)
    print("bonded pairs E [ln2]:", " ".join(f"{x:.4f}" for x in on))
    print(f"largest non-bonded E: {off:.4f} ln2; ratio {min(on) / off:.2f}")
    if args.out:
        args.out.write_text(json.dumps({"units": "ln2", "E": E.tolist()}, indent=1))


if __name__ == "__main__":
    main()
