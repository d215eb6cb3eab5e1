"""Command-line entry point: ``orbcorr {tables,solve,profile-single,pairwise,bond-scan}``.

Exit codes: 0 success, 2 tolerance failure, 3 solver failure, 4 bad specification.
Orbital indices on the command line and in written files are 1-based.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .experiments import SpecError, SystemSpec, resolve_basis, solve
from .fock import EmptySectorError
from .groundstate import ConvergenceError, SolverConfig
from .hamiltonians import FCIDumpError
from .measures import ALL_MODES, SSRMode
from .optimize import (DiscordConfig, SeparableConfig, closest_classical_state,
                       entanglement_mixed_upper)
from .rdm import two_orbital_rdm
from .reports import (MEASURES, AnalysisConfig, correlation_sums, pairwise_matrices,
                      pairwise_reports, single_orbital_profile)
from .tables import LN2, all_tables, bond_scan, two_orbital_entanglement
from .transforms import apply_rotation, construct_reference_state

log = logging.getLogger("orbcorr")

EXIT_OK, EXIT_TOLERANCE, EXIT_SOLVER, EXIT_SPEC = 0, 2, 3, 4
REFERENCE_STATES = ("single_electron", "bond_psi1", "bond_psi2", "bond_psi3", "bond_psi4",
                    "bond_lr")


# -- output helpers -----------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return None if not np.isfinite(obj) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: Path, data) -> None:
    path.write_text(json.dumps(_jsonable(data), sort_keys=True, indent=2) + "\n")


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([f"{v:.12g}" if isinstance(v, float) else v for v in row])


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "orbcorr"
    return plt


def _save_svg(fig, path: Path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})


def svg_single_profile(rows: list[dict], path: Path, unit: str) -> None:
    """Overlaid bars: full height without SSR, darker shares under P- and N-SSR."""
    plt = _pyplot()
    x = np.arange(1, len(rows) + 1)
    fig, ax = plt.subplots(figsize=(6, 3))
    ax.bar(x, [r["none"] for r in rows], color="tab:blue", label="no SSR")
    ax.bar(x, [r["parity"] for r in rows], color="black", label="P-SSR")
    ax.bar(x, [r["number"] for r in rows], color="dimgray", label="N-SSR")
    ax.set_xlabel("orbital")
    ax.set_ylabel(f"single-orbital E [{unit}]")
    ax.set_xticks(x)
    ax.legend(frameon=False)
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


def svg_heatmaps(mats: dict, path: Path, unit: str) -> None:
    plt = _pyplot()
    modes = list(mats)
    fig, axes = plt.subplots(len(modes), len(MEASURES), figsize=(3 * len(MEASURES), 2.8 * len(modes)),
                             squeeze=False)
    for r, mode in enumerate(modes):
        for c, meas in enumerate(MEASURES):
            ax = axes[r][c]
            M = mats[mode][meas]
            im = ax.imshow(M, cmap="viridis", vmin=0)
            ax.set_title(f"{meas} ({mode})")
            ticks = np.arange(len(M))
            ax.set_xticks(ticks, [str(t + 1) for t in ticks])
            ax.set_yticks(ticks, [str(t + 1) for t in ticks])
            fig.colorbar(im, ax=ax, label=unit)
    fig.tight_layout()
    _save_svg(fig, path)
    plt.close(fig)


# -- argument parsing ---------------------------------------------------------

def _sector(text: str) -> tuple[int, int]:
    try:
        n, s = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("sector must be N,2Sz") from None
    return n, s


def _modes(text: str) -> tuple[SSRMode, ...]:
    if text == "all":
        return ALL_MODES
    return (SSRMode.parse(text),)


def _formats(text: str) -> set[str]:
    fmts = {f.strip() for f in text.split(",") if f.strip()}
    bad = fmts - {"json", "csv", "svg"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s) {sorted(bad)}")
    return fmts


def _add_system(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system")
    g.add_argument("--model", choices=("huckel", "hubbard", "ppp"))
    g.add_argument("--fcidump", help="FCIDUMP integral file")
    g.add_argument("--geometry", help="bundled geometry name or XYZ path")
    g.add_argument("--lattice", help="chain:N or ring:N")
    g.add_argument("--t", type=float, help="hopping (eV for ppp)")
    g.add_argument("--U", type=float, help="on-site repulsion")
    g.add_argument("--hopping-slope", type=float, default=0.0,
                   help="ppp hopping change per Angstrom of bond length")
    g.add_argument("--sector", type=_sector, help="N,2Sz (default: from the integrals)")
    g.add_argument("--basis", default="native", help="basis stages joined by '+'")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=Path("."), help="output directory")
    p.add_argument("--format", type=_formats, default={"json"}, help="json,csv,svg")
    p.add_argument("--units", choices=("nats", "ln2"), default="nats")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbcorr", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("tables", help="regenerate the reference correlation tables")
    _add_common(p)

    p = sub.add_parser("solve", help="ground-state energy of a system")
    _add_system(p)
    _add_common(p)

    p = sub.add_parser("profile-single", help="single-orbital entanglement profile")
    _add_system(p)
    _add_common(p)

    p = sub.add_parser("pairwise", help="pairwise correlation matrices and sums")
    _add_system(p)
    _add_common(p)
    p.add_argument("--ssr", default="all", choices=("none", "p", "n", "all"))
    p.add_argument("--measures", default="I,C,Q,E")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--n-step", type=int, help="classical-state search steps")
    p.add_argument("--restarts", type=int, help="classical-state search restarts")

    p = sub.add_parser("bond-scan", help="entanglement of an orbital pair versus rotation angle")
    _add_system(p)
    _add_common(p)
    p.add_argument("--state", choices=REFERENCE_STATES, help="analytic two-orbital state")
    p.add_argument("--pair", default="1,2", help="orbital pair i,j (1-based)")
    p.add_argument("--points", type=int, default=91)
    return parser


def _system_spec(args) -> SystemSpec:
    return SystemSpec(model=args.model, fcidump=args.fcidump, geometry=args.geometry,
                      lattice=args.lattice, t=args.t, U=args.U,
                      hopping_slope=args.hopping_slope, sector=args.sector)


def _solved_state(args):
    system = solve(_system_spec(args), SolverConfig(seed=args.seed))
    R, stages = resolve_basis(args.basis, system.ints)
    return system, apply_rotation(system.psi, R), stages


# -- commands -----------------------------------------------------------------

def cmd_tables(args) -> int:
    cells = all_tables(seed=args.seed)
    scale = LN2 if args.units == "ln2" else 1.0
    rows = [c.to_dict(scale) for c in cells]
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in args.format:
        write_json(args.out / "tables.json", {"units": args.units, "cells": rows})
    if "csv" in args.format:
        keys = ["table", "state", "mode", "measure", "value", "expected", "tolerance", "exact", "ok"]
        write_csv(args.out / "tables.csv", keys, [[r[k] for k in keys] for r in rows])
    failed = [c for c in cells if not c.ok]
    for c in cells:
        print(f"{'PASS' if c.ok else 'FAIL'} table {c.table:3s} {c.state:20s} {c.mode:7s} "
              f"{c.measure:5s} {c.value / scale: .8f} (expected {c.expected / scale: .8f})")
    print(f"{len(cells) - len(failed)}/{len(cells)} cells within tolerance")
    return EXIT_TOLERANCE if failed else EXIT_OK


def cmd_solve(args) -> int:
    system = solve(_system_spec(args), SolverConfig(seed=args.seed))
    st = system.state
    out = {"energy": st.energy, "gap": st.gap, "residual": st.residual, "method": st.method,
           "sector": list(system.sector), "dimension": len(st.wavefunction.basis),
           "orbitals": system.ints.D, "degenerate": st.degenerate}
    print(json.dumps(_jsonable(out), sort_keys=True))
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in args.format:
        write_json(args.out / "solve.json", out)
    return EXIT_OK


def cmd_profile_single(args) -> int:
    _, psi, stages = _solved_state(args)
    scale = LN2 if args.units == "ln2" else 1.0
    rows = [{k: (v / scale if k != "orbital" else v + 1) for k, v in r.items()}
            for r in single_orbital_profile(psi)]
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in args.format:
        write_json(args.out / "profile_single.json",
                   {"units": args.units, "basis": stages, "orbitals": rows})
    if "csv" in args.format:
        write_csv(args.out / "profile_single.csv", ["orbital", "noSSR", "P", "N"],
                  [[r["orbital"], r["none"], r["parity"], r["number"]] for r in rows])
    if "svg" in args.format:
        svg_single_profile(rows, args.out / "profile_single.svg", args.units)
    for r in rows:
        print(f"{r['orbital']:3d} {r['none']:.8f} {r['parity']:.8f} {r['number']:.8f}")
    return EXIT_OK


def cmd_pairwise(args) -> int:
    _, psi, stages = _solved_state(args)
    modes = _modes(args.ssr)
    measures = tuple(m.strip() for m in args.measures.split(","))
    if set(measures) - set(MEASURES):
        raise SpecError(f"measures must be among {MEASURES}")
    dcfg = DiscordConfig(seed=args.seed)
    if args.n_step is not None:
        dcfg.n_step = args.n_step
    if args.restarts is not None:
        dcfg.restarts = args.restarts
    cfg = AnalysisConfig(modes=modes, measures=measures, discord=dcfg,
                         separable=SeparableConfig(seed=args.seed))
    reports = pairwise_reports(psi, cfg, workers=args.workers)
    scale = LN2 if args.units == "ln2" else 1.0
    mats = pairwise_matrices(reports, psi.D, modes, measures)
    mats = {m: {k: v / scale for k, v in d.items()} for m, d in mats.items()}
    sums = {}
    for mode in modes:
        s = correlation_sums(reports, mode, measures)
        sums[mode.value] = {k: (v / scale if isinstance(v, float) else v) for k, v in s.items()}
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in args.format:
        write_json(args.out / "pairwise.json", {
            "units": args.units, "basis": stages, "matrices": mats, "sums": sums,
            "pairs": {f"{i + 1},{j + 1}": rep.to_dict(scale) for (i, j), rep in reports.items()},
        })
    if "csv" in args.format:
        rows = [[mode, meas, i + 1, j + 1, float(mats[mode][meas][i, j])]
                for mode in mats for meas in measures for (i, j) in reports]
        write_csv(args.out / "pairwise.csv", ["mode", "measure", "i", "j", "value"], rows)
    if "svg" in args.format:
        svg_heatmaps(mats, args.out / "pairwise.svg", args.units)
    for mode, s in sums.items():
        print(mode, " ".join(f"{k}={s[k]:.8f}" for k in s if k != "upper_bound"))
    return EXIT_OK


def cmd_bond_scan(args) -> int:
    try:
        i, j = (int(x) - 1 for x in args.pair.split(","))
    except ValueError:
        raise SpecError("pair must be i,j") from None
    if args.state is not None:
        psi = construct_reference_state(args.state)
        stages = [args.state]
    else:
        _, psi, stages = _solved_state(args)
    if not (0 <= i < psi.D and 0 <= j < psi.D) or i == j:
        raise SpecError(f"pair {args.pair} invalid for D={psi.D}")
    if psi.D == 2:
        measure = two_orbital_entanglement
    else:
        def measure(phi):
            rho = two_orbital_rdm(phi, i, j).matrix
            res = closest_classical_state(rho, DiscordConfig(seed=args.seed))
            return entanglement_mixed_upper(rho, SeparableConfig(seed=args.seed), start=res).value
    thetas = np.linspace(0.0, np.pi / 2, args.points)
    scan = bond_scan(psi, (i, j), thetas, measure)
    scale = LN2 if args.units == "ln2" else 1.0
    out = {"units": args.units, "source": stages, "pair": [i + 1, j + 1],
           "theta": scan.thetas, "E": scan.values / scale, "theta_max": scan.theta_max,
           "E_max": scan.E_max / scale, "E_min": scan.E_min / scale}
    args.out.mkdir(parents=True, exist_ok=True)
    if "json" in args.format:
        write_json(args.out / "bond_scan.json", out)
    if "csv" in args.format:
        write_csv(args.out / "bond_scan.csv", ["theta", "E"],
                  [[float(t), float(e)] for t, e in zip(scan.thetas, scan.values / scale)])
    if "svg" in args.format:
        plt = _pyplot()
        fig, ax = plt.subplots(figsize=(5, 3))
        ax.plot(scan.thetas, scan.values / scale)
        ax.set_xlabel("theta [rad]")
        ax.set_ylabel(f"E [{args.units}]")
        fig.tight_layout()
        _save_svg(fig, args.out / "bond_scan.svg")
        plt.close(fig)
    loc = "none" if scan.theta_max is None else f"{scan.theta_max:.8f}"
    print(f"E_max={scan.E_max / scale:.8f} at theta={loc}; E_min={scan.E_min / scale:.8f}")
    return EXIT_OK


COMMANDS = {"tables": cmd_tables, "solve": cmd_solve, "profile-single": cmd_profile_single,
            "pairwise": cmd_pairwise, "bond-scan": cmd_bond_scan}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SPEC if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ConvergenceError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (SpecError, FCIDumpError, EmptySectorError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"specification error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
