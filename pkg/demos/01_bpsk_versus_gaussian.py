"""BPSK against Gaussian signalling: when does the "weaker" input win?

A Gaussian input maximises mutual information on every fixed channel, but the
ergodic secrecy rate subtracts the eavesdropper's information. Because BPSK
saturates at one bit, it can leak less to a strong eavesdropper than it loses
on the main link.

Run: python demos/01_bpsk_versus_gaussian.py
"""

import numpy as np

from wiretap.analysis import esr_dichotomy_replay, two_mass_esr
from wiretap.rates import delta_curve, find_convexity_interval, i_bpsk, i_gaussian

# The BPSK information curve: zero at zero SNR, about 0.97 bits at SNR 3, one bit in the limit.
for snr in (0.0, 0.5, 1.0, 3.0, 10.0, 50.0):
    print(f"SNR {snr:5.1f}: BPSK {i_bpsk(snr):.6f} bits, Gaussian {i_gaussian(snr):.6f} bits")

# Two-mass example: main SNR h0 = 3, eavesdropper SNR 0 or g0 with probability 1/2 each.
h0 = 3.0
lo, hi = ((1 + h0) / 2 ** 0.25) ** 2 - 1, (1 + h0) ** 2 - 1
print(f"\nBPSK is guaranteed to win for g0 in ({lo:.2f}, {hi:.0f})")
print("   g0   ESR Gaussian   ESR BPSK")
for g0 in (1.0, 3.0, 7.0, 10.5, 12.0, 14.5, 18.0):
    g, b = two_mass_esr(h0, g0)
    marker = "  <- BPSK better" if b > g else ""
    print(f"{g0:5.1f}   {g:12.4f}   {b:8.4f}{marker}")

# The general mechanism: a convex stretch of delta = I_gauss - I_bpsk lets a
# constant main channel sit below the chord spanned by two eavesdropper SNRs.
curve = delta_curve(1.0, "bpsk", np.linspace(0.0, 10.0, 101))
print("\nconvex, monotone stretch of delta:", find_convexity_interval(curve))
rep = esr_dichotomy_replay(1.0, "bpsk", curve.gamma)
print(f"eavesdropper SNRs {rep.gamma1:.2f} / {rep.gamma2:.2f}, main SNR {rep.h0_sq:.4f}")
print(f"ESR Gaussian {rep.esr_p:.5f} < ESR BPSK {rep.esr_q:.5f}")
