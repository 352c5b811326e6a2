"""
White noise washes out nonlocality
==================================

Mixing GHZ and W with the maximally mixed state and tracking N3.
"""
# %%
#

from rbn.experiments import sweep_noise, value_range
from rbn.optimize import Grid

noises = value_range(0, 1, 0.1)

# %%
#
# Both families are invariant under qubit permutations, so one cut
# suffices. For GHZ the optimal context stays at (z, z, z); for W it moves
# off the pole once the noise is large enough.

for chi in ("ghz", "w"):
    print(chi.upper())
    for row in sweep_noise(chi, noises, Grid(), symmetric=True):
        print(f"  noise {row.noise:.1f}  N3 {row.n3:.6f}  theta_a/pi {row.theta_a:g}")

# %%
#
# At full noise the state is I/8 and nothing is left to measure.
