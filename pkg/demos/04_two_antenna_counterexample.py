"""Why channel ordering assumptions matter: two transmit antennas.

Bob sees antenna 1 only. Eve sees both, with a random sign on antenna 1.
Every non-precoded Gaussian covariance has min(R1, R2) <= 0, so its SOP is
at least 1/2. Sending information on antenna 1 and Gaussian noise on
antenna 2 gives a constant positive rate.

The sweep also shows that the Gaussian ESR is *not* always non-positive:
for total power above 1 it turns positive near a = P_T with strong
correlation. The artificial-noise input still beats it by a wide margin.

Run: python demos/04_two_antenna_counterexample.py
"""

import numpy as np

from wiretap.analysis import counterexample_report

rep = counterexample_report(power=3.0, resolution=101, r=0.5)
print(f"artificial noise: rate {rep.an_rate:.6f} bits (log2(25/16) = {np.log2(25 / 16):.6f}), "
      f"SOP(0.5) = {rep.an_sop}")
print(f"Gaussian sweep: max min(R1, R2) = {rep.max_min_rate:.3g}, min SOP(0.5) = {rep.sop.min()}")
a, beta = rep.argmax_esr
print(f"Gaussian sweep: max ESR = {rep.max_esr:.5f} bits at a = {a:.2f}, beta = {beta:.4f}")
print(f"grid points with positive ESR: {int(np.sum(rep.esr > 0))} of {rep.esr.size}")

for p in (0.5, 1.0, 2.0, 3.0, 10.0):
    r = counterexample_report(power=p, resolution=201)
    print(f"  P_T = {p:4.1f}: max Gaussian ESR {r.max_esr:+.5f}, artificial noise {r.an_rate:.5f}")
