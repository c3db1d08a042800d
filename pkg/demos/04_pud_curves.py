"""
Probability of undetected fault
===============================

Fraction tables turn into P_ud under independent bit errors by weighting
each fault weight m with its binomial probability.  Idealized curves for a
checksum of a given Hamming distance give the reference lines.
"""

from modsum import PRESETS
from modsum.faults import TrialConfig, sweep
from modsum.pud import curve_sweep, ideal_curve

ber = 1e-6
lengths = [16, 64, 256, 1024]
cfg = TrialConfig(trials=100_000, rng_seed=2, engine="delta", patterns_per_word=64)

curves = []
for name in ("fletcher16", "koopman16"):
    table = sweep(PRESETS[name], lengths, [1, 2, 3, 4], cfg, budget=100_000)
    curves.append(curve_sweep(name, table, lengths, ber, k=16))
for hd in (2, 3, 4):
    curves.append(ideal_curve(hd, 16, lengths, ber))

print("length  " + "  ".join(f"{c.algorithm:>13s}" for c in curves))
for i, n in enumerate(lengths):
    print(f"{n:6d}  " + "  ".join(f"{c.points[i][1]:13.3e}" for c in curves))
