#!/usr/bin/env python3
"""Optimal dephasing rate versus chain length.

For odd nearest-neighbor chains with a central sink, compares

* gamma_opt -- numeric argmax of the exact efficiency over gamma,
* gamma0    -- crossing of the weak/strong-dephasing closed-form bounds,
* 5J/L - mu -- the large-L asymptote of that crossing.

Both scales shrink with L and the crossing disappears at finite L once
mu is large enough.
"""

import sys

from enaqt.lattice import HoppingModel, LatticeSpec
from enaqt.oned import gamma0_asymptote, gamma0_equation
from enaqt.superop import RateSet
from enaqt.sweep import gamma_opt_numeric


def main(argv):
    mu = float(argv[0]) if argv else 1e-3
    gamma_s = float(argv[1]) if len(argv) > 1 else 0.1
    rates = RateSet(J=1.0, mu=mu, gamma_s=gamma_s, gamma=0.0)
    print(f"mu = {mu}, gamma_s = {gamma_s}")
    print(f"{'L':>4} {'gamma_opt':>12} {'gamma0':>12} {'5J/L - mu':>12}")
    for L in (5, 9, 15, 21, 31, 41, 51):
        spec = LatticeSpec.chain(L, hopping_model=HoppingModel.NEAREST_NEIGHBOR)
        g_opt = gamma_opt_numeric(spec, rates)
        g0 = gamma0_equation(L, mu, gamma_s)
        g0_str = f"{g0:>12.5f}" if g0 is not None else f"{'none':>12}"
        print(
            f"{L:>4} {g_opt:>12.5f} {g0_str} {gamma0_asymptote(L, mu):>12.5f}",
            flush=True,
        )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
