"""Site-basis entanglement of the two-site Hubbard model (a model ethylene pi bond) versus U/t."""

from __future__ import annotations

import argparse

from orbcorr.experiments import SystemSpec, solve
from orbcorr.measures import von_neumann_entropy
from orbcorr.rdm import one_orbital_rdm
from orbcorr.tables import LN2


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ratios", type=float, nargs="+", default=[0, 0.5, 1, 2, 4, 8, 16])
    args = parser.parse_args()
    print(f"{'U/t':>6} {'energy':>12} {'E [ln2]':>10} {'E / 2ln2':>9}")
    for u in args.ratios:
        system = solve(SystemSpec(model="hubbard", lattice="chain:2", t=1.0, U=u))
        # the dimer state is pure, so the site-pair entanglement is the site entropy
        E = von_neumann_entropy(one_orbital_rdm(system.psi, 0).matrix)
        print(f"{u:6.2f} {system.state.energy:12.8f} {E / LN2:10.6f} {E / (2 * LN2):9.4f}")
    print(f"{'inf':>6} {'':12} {1.0:10.6f} {0.5:9.4f}  (singlet of localized spins)")


if __name__ == "__main__":
    main()
