"""
Spectral gap of the symmetric annealing Hamiltonian
===================================================

The plain Hamming-weight problem has a closed-form gap.  A plateau in the
cost shrinks the gap near the end of the anneal, and the Reichardt bound
stays below the computed gap.
"""

import numpy as np

from phwo.problems import make_plain_hw, make_plateau
from phwo.spectral import gap_profile, min_gap, reichardt_lower_bound, unperturbed_gap

s = np.linspace(0.0, 1.0, 11)

# the unperturbed gap does not depend on n
for n in (1, 16, 256):
    err = np.max(np.abs(gap_profile(make_plain_hw(n), s) - unperturbed_gap(s)))
    print(f"plain_hw({n:3d}): max |Gap - sqrt(1-2s+2s^2)| = {err:.1e}")

# a plateau moves the minimum gap towards s = 1 and makes it smaller
for n in (64, 128, 256, 512):
    s_min, g = min_gap(make_plateau(n, 0, 6))
    print(f"plateau({n}, 0, 6): minimum gap {g:.4e} at s = {s_min:.4f}")

# a narrow window far from w = 0 keeps the lower bound informative
cost = make_plateau(1024, 256, 258)
print("s     gap       Reichardt bound")
for x, g, b in zip(s, gap_profile(cost, s), reichardt_lower_bound(cost, s)):
    print(f"{x:.1f}  {g:.6f}  {b:.6f}")
