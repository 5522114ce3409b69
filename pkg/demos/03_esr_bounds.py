"""Sandwiching the best ergodic secrecy rate.

When no input is known to be optimal, the ESR can still be bracketed. The
lower bound adds a Gaussian mask to the information signal and searches over
masks (or, for one transmit antenna, over the information/mask power split).
The upper bounds compare where the main and eavesdropper channels put their
probability mass.

Run: python demos/03_esr_bounds.py
"""

import numpy as np

from wiretap.analysis import (counterexample_channels, cs_minus_mimome, cs_minus_simome,
                              cs_plus_finite, cs_plus_simome)
from wiretap.channels import FiniteSupport, norm_law
from wiretap.inputs import GaussianNonPrecoded
from wiretap.metrics import SimomeRayleighScenario, finite_support_metric_exact

# A finite two-antenna pair: everything is exact.
rng = np.random.default_rng(0)
main = FiniteSupport([rng.standard_normal((2, 2)) for _ in range(3)], [0.2, 0.3, 0.5])
eve = FiniteSupport([rng.standard_normal((1, 2)) for _ in range(2)], [0.5, 0.5])
k_x = np.eye(2)
lo = cs_minus_mimome(main, eve, k_x)
print("finite 2x2 main vs 1x2 eavesdropper, K_x = I")
print(f"  Gaussian ESR      {finite_support_metric_exact(main, eve, GaussianNonPrecoded(k_x), 'esr'):.4f}")
print(f"  mask lower bound  {lo.value:.4f}")
print(f"  upper bound       {cs_plus_finite(main, eve, k_x):.4f}\n")

# The two-antenna example: masking antenna 2 removes the sign ambiguity Eve sees.
h, g = counterexample_channels()
lo = cs_minus_mimome(h, g, np.eye(2) * 1.5, [np.diag([0.0, 1.5])])
print(f"two-antenna example: best mask {np.real(np.diag(lo.argmax))}, lower bound {lo.value:.4f} "
      f"= log2(25/16) = {np.log2(25 / 16):.4f}\n")

# One transmit antenna, Rayleigh eavesdropper.
s = SimomeRayleighScenario(5.0, 2, 1.0, 3.0)
lo = cs_minus_simome(s.main_ensemble(), s.eve_ensemble(), s.power, n=200_000, seed=3)
up = cs_plus_simome(norm_law(s.main_ensemble()), norm_law(s.eve_ensemble()), s.power)
print("single antenna, ||h|| = 5, two Rayleigh eavesdropper antennas, P = 3")
print(f"  power-split lower bound {lo.value:.4f} +- {lo.stderr:.4f} (information power {lo.argmax:.3f})")
print(f"  CCDF upper bound        {up.upper_ccdf:.4f}")
