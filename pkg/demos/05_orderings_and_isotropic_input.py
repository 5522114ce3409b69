"""Channel orderings and the isotropic Gaussian input.

The checker implements the sufficient conditions it can decide and says
"undecided" otherwise. On a degraded Rayleigh cascade, spreading power
evenly across antennas is compared against random diagonal allocations of
the same total power.

Run: python demos/05_orderings_and_isotropic_input.py
"""

from wiretap.analysis import check_ordering, verify_isotropic_optimality
from wiretap.channels import DegradedCascade, Deterministic, FiniteSupport, RayleighIID

main = FiniteSupport([[[1.0]], [[3.0]]], [0.5, 0.5])
eve = Deterministic([[2.0]])
for kind in ("degraded", "uniformly-less-noisy", "ccdf-dominance"):
    v = check_ordering(main, eve, kind)
    print(f"||h|| in {{1, 3}} vs ||g|| = 2, {kind}: {v.holds} (witness {v.witness})")

print("Rayleigh 4 antennas vs 1:", check_ordering(RayleighIID(4, 1), RayleighIID(1, 1), "ccdf-dominance").holds)

h = RayleighIID(2, 2, 1.0)
g = DegradedCascade(h, RayleighIID(2, 2, 0.5))
print("cascade:", check_ordering(h, g, "degraded").holds)

rep = verify_isotropic_optimality(h, g, power=2.0, perturbations=8, n=100_000, seed=0, r=0.5)
print("\n diag(K)          ESR      SOP(0.5)")
for row in rep.rows:
    diag = ", ".join(f"{x:.2f}" for x in row["diag"])
    print(f"[{diag}]   {row['esr']:.4f}   {row['sop']:.4f}")
print(f"isotropic not beaten: ESR {rep.esr_optimal}, SOP {rep.sop_optimal}")
