"""
Tuning the near-extremal profiles behind the counterexample search
==================================================================

The ratio int f_x^4/f^2 / int f_xx^2 approaches Bernis' constant 9 only as
the vacuum core narrows, and a narrow core needs a fine grid.  This script
climbs the grid sizes, tunes the profile family at each one (continuing from
the previous size), and prints entries in the format of EXTREMAL_TABLE.
Expect about an hour for the full ladder up to 2**21 on one core.
"""

import math
import sys
import time

from nsk1d.coercivity import VacuumProfile, tune_extremal

top = int(sys.argv[1]) if len(sys.argv) > 1 else 21
prev = None
for e in range(9, top + 1):
    n = 2**e
    budget = 3000 if e <= 14 else (1500 if e <= 17 else 500)
    if prev is not None:
        # halving the core width: move the outer scale along with it
        prev = VacuumProfile(1.0, prev.shape, prev.log10_eta - 0.95 * math.log10(2.0), prev.log10_zeta,
                             prev.coefficients)
    t = time.time()
    prev, ratio = tune_extremal(n, prev, budget)
    entry = (round(prev.shape, 6), round(prev.log10_eta, 6), tuple(round(c, 6) for c in prev.coefficients),
             round(ratio, 6))
    print(f"    {n}: {entry!r},  # {time.time() - t:.0f} s", flush=True)
