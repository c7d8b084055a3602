#!/usr/bin/env python3
"""Dark-state fraction versus lattice size for several lattice variants.

At gamma = 0 the hopping eigenstates with no amplitude on the sink never
drain; their fraction controls the mu -> 0 efficiency limit.  This scan
prints the fraction for 2D lattices with open/periodic boundaries and
nearest-neighbor/dipolar couplings as L grows.
"""

import sys

from enaqt.gf import dark_count_from_hopping
from enaqt.lattice import Boundary, HoppingModel, LatticeSpec, build_hopping


def main(argv):
    sizes = [int(a) for a in argv] or [5, 11, 21, 31, 41]
    variants = [
        ("open nearest-neighbor", Boundary.OPEN, HoppingModel.NEAREST_NEIGHBOR),
        ("open dipolar", Boundary.OPEN, HoppingModel.DIPOLAR),
        ("periodic nearest-neighbor", Boundary.PERIODIC, HoppingModel.NEAREST_NEIGHBOR),
        ("periodic dipolar", Boundary.PERIODIC, HoppingModel.DIPOLAR),
    ]
    print(f"{'L':>4}  " + "  ".join(f"{name:>26}" for name, *_ in variants))
    for L in sizes:
        row = [f"{L:>4}"]
        for _, boundary, model in variants:
            spec = LatticeSpec.square(L, boundary=boundary, hopping_model=model)
            hop = build_hopping(spec)
            frac = dark_count_from_hopping(hop.j_mat, spec.sink) / spec.n_sites
            row.append(f"{frac:>26.4f}")
        print("  ".join(row), flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
