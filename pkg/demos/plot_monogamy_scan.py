"""
Monogamy of contextual nonlocality
==================================

The witness delta = N3^a - N2(AB)^a - N2(AC)^a as a function of the power a.
"""
# %%
#

import numpy as np

from rbn import states
from rbn.experiments import monogamy_scan, value_range
from rbn.optimize import monogamy_terms

# %%
#
# Tracing a qubit out of GHZ leaves a classically correlated pair that
# still carries ln 2 of nonlocality. All three terms equal ln 2, so the
# witness is -(ln 2)^a and no power restores monogamy.

ghz_terms = monogamy_terms(states.ghz_state(), symmetric=True)
print(ghz_terms)
print(ghz_terms.witness(np.array([0.5, 1.0, 2.0, 4.0])))

# %%
#
# For W the two-qubit reductions keep some nonlocality. delta changes sign
# at a moderate power and peaks a little later.

alphas = value_range(0.01, 10, 0.01)
_, summary = monogamy_scan("w", [0.0], alphas, symmetric=True)
print(f"threshold a* = {summary.threshold_alpha:.4f}")
print(f"peak at a = {summary.peak_alpha:.2f}, delta = {summary.peak_delta:.6f}")

# %%
#
# Over a noisy family the largest positive delta sets the normalization.

rows, summary = monogamy_scan("w", value_range(0, 0.5, 0.1), alphas, symmetric=True)
print(f"max delta {summary.max_delta:.6f} at a = {summary.max_delta_alpha:g}, "
      f"noise = {summary.max_delta_noise:g}")
