"""
A tour of the realism measures
==============================

Dephasing, irreality and the contextual nonlocality of a few
three-qubit states, computed directly from density matrices.
"""
# %%
#

import math

from rbn import measures, states
from rbn.optimize import Grid, e3, n3
from rbn.states import Setting, pauli_observable

z, x = pauli_observable("z"), pauli_observable("x")
ghz, w = states.ghz_state(), states.w_state()

# %%
#
# Measuring sigma_z on the first qubit of GHZ and forgetting the outcome
# leaves a classical mixture of |000> and |111>. The entropy gained is the
# irreality of that observable.

print(measures.dephase(ghz, z, 0).matrix.real.diagonal())
print("irreality of z on GHZ:", measures.irreality(ghz, z, 0), "ln 2 =", math.log(2))

# %%
#
# eta_{A|B,C} splits into four entropies. For GHZ in the context (x, x, x)
# the remote measurement on B and C destroys all of A's irreality.

terms = measures.entropy_terms(ghz, Setting.from_axes("xxx"), target=0)
for name, value in terms._asdict().items():
    print(f"{name:>6}: {value:.6f}")
print("   eta:", terms.eta)

# %%
#
# The W state reaches its maximum in the computational basis.

print("eta_W(z,z,z) =", measures.contextual_nl_3(w, 0, Setting.from_axes("zzz")))

# %%
#
# N3 optimizes every cut over a grid of Bloch directions and keeps the
# weakest cut. Each call sweeps about three million settings per cut.

pi8 = Grid(math.pi / 8)
for name, rho in [("GHZ", ghz), ("W", w)]:
    res = n3(rho, pi8, symmetric=True)
    best = res.cuts[res.minimizing_cut]
    print(f"{name}: N3 = {res.value:.6f} on cut {res.minimizing_cut.label}, "
          f"argmax angles / pi = {best.argmax_setting.angles_in_pi()}")

# %%
#
# For generalized GHZ states the optimum equals the single-site
# entanglement entropy.

for xi in [(0.9, 0.1), (0.7, 0.3)]:
    rho = states.schmidt_pure_state(xi)
    print(xi, "N3 =", round(n3(rho, pi8).value, 9), "E3 =", round(e3(rho), 9))
