"""
Which viscosity and capillarity exponents keep J nonnegative
=============================================================

For mu = rho**alpha and k = rho**beta the sign of J is decided by one number,
coefficient_1d(alpha, beta).  Inside the strip 2 alpha - 4 <= beta <= 2 alpha - 1
it is nonnegative; outside, a density close enough to vacuum makes J negative.
"""

import numpy as np

from nsk1d.coefficients import CoefficientLaw, derive_exponents
from nsk1d.coercivity import (
    MapSettings,
    admissibility_map,
    admissible_power,
    bernis_ratio_of,
    coefficient_1d,
    counterexample_search,
    required_ratio,
    sample_min_j,
)
from nsk1d.functionals import j_direct
from nsk1d.grid import make_grid

# closed form at three points: inside, on the lower line, above the upper line
for a, b in [(1, -1), (2, 0), (2, 4)]:
    print(f"({a}, {b}): coefficient {coefficient_1d(a, b):+.6f}  verdict {admissible_power(a, b).analytic}")

# random smooth densities never see the failure at (2, 4): J stays positive
print("sampled min J/scale at (2, 4):", sample_min_j(derive_exponents(2, 4), 200, seed=0))

# J < 0 needs int f_x^4/f^2 > 7.74 int f_xx^2 with f = rho**theta, close to Bernis' 9
print("Bernis ratio needed at (2, 4):", required_ratio(2, 4))
cx = counterexample_search(2, 4)
print(f"counterexample on {cx.n} points: normalized J {cx.j_normalized:.2e}, "
      f"direct J on {2 * cx.n} points {cx.j_confirm:.3e}")
print(f"min rho {cx.density().min():.3e}, Bernis ratio {bernis_ratio_of(cx.profile, cx.n):.4f}")

# the same density, checked once more with the defining formula
rho = cx.density()
print("j_direct at n:", j_direct(rho, CoefficientLaw(derive_exponents(2, 4)), make_grid(cx.n)))

# a coarse raster without the adversarial search: analytic verdicts and sampling only
verdicts = admissibility_map((0.6, 3.0), (-3.0, 5.0), 9, MapSettings(samples_per_cell=20, search=False))
symbols = {"admissible": "+", "boundary": "o", "inadmissible": "."}
betas = sorted({v.point[1] for v in verdicts}, reverse=True)
alphas = sorted({v.point[0] for v in verdicts})
grid = {v.point: symbols[v.analytic] for v in verdicts}
print("\nbeta \\ alpha  " + " ".join(f"{a:4.1f}" for a in alphas))
for b in betas:
    print(f"{b:12.2f}  " + " ".join(f"{grid[(a, b)]:>4}" for a in alphas))
print("min sampled J/scale over admissible cells:",
      np.min([v.sampled_min_J for v in verdicts if v.analytic == "admissible"]))
