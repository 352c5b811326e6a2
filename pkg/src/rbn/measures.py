"""Unrevealed measurements, irreality and contextual realism-based nonlocality.

These are dense reference implementations working on any site dimensions.
The optimizer in :mod:`rbn.optimize` uses a vectorized qubit kernel instead
and is checked against the functions here.
"""
from __future__ import annotations

from collections.abc import Mapping
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import ConsistencyError, InvalidArgumentError
from .states import DensityMatrix, ProjectiveObservable, Setting

NEG_TOL = 1e-10


def clamp_nonnegative(value: float, what: str = "value") -> float:
    """Clamp values in ``[-NEG_TOL, 0)`` to zero; raise below that."""
    if value < -NEG_TOL:
        raise ConsistencyError(f"{what} = {value:.3g} is negative beyond tolerance")
    return max(float(value), 0.0)


def _site_operator(proj: np.ndarray, site: int, dims) -> np.ndarray:
    ops = [np.eye(d) for d in dims]
    ops[site] = proj
    return linalg.kron_all(*ops)


def dephase(rho: DensityMatrix, obs: ProjectiveObservable, site: int) -> DensityMatrix:
    """Unrevealed measurement of ``obs`` on ``site``: ``sum_a P_a rho P_a``."""
    if not 0 <= site < rho.n_sites:
        raise InvalidArgumentError(f"site {site} out of range for {rho.n_sites} sites")
    if obs.site_dim != rho.dims[site]:
        raise InvalidArgumentError(
            f"observable dimension {obs.site_dim} != site dimension {rho.dims[site]}")
    out = np.zeros_like(rho.matrix)
    for p in obs.projectors:
        full = _site_operator(p, site, rho.dims)
        out += full @ rho.matrix @ full
    return DensityMatrix((out + out.conj().T) / 2, rho.dims)


def dephase_multi(rho: DensityMatrix, obs_by_site: Mapping[int, ProjectiveObservable]) -> DensityMatrix:
    for site in sorted(obs_by_site):
        rho = dephase(rho, obs_by_site[site], site)
    return rho


def irreality(rho: DensityMatrix, obs: ProjectiveObservable, site: int) -> float:
    """Entropy gained by an unrevealed measurement of ``obs`` on ``site``."""
    value = dephase(rho, obs, site).entropy() - rho.entropy()
    return clamp_nonnegative(value, "irreality")


class EntropyTerms(NamedTuple):
    """The four entropies entering the contextual nonlocality."""
    state: float
    target: float
    remote: float
    full: float

    @property
    def eta(self) -> float:
        return self.target + self.remote - self.full - self.state


def entropy_terms(rho: DensityMatrix, setting: Setting, target: int = 0,
                  state_entropy: float | None = None) -> EntropyTerms:
    """Entropies of ``rho``, ``Phi_target rho``, ``Phi_remote rho`` and ``Phi_all rho``.

    ``setting`` supplies one observable per site; the target site's observable
    defines the irreality and the remaining ones the remote measurements.
    """
    if len(setting) != rho.n_sites:
        raise InvalidArgumentError(f"setting has {len(setting)} observables for {rho.n_sites} sites")
    if not 0 <= target < rho.n_sites:
        raise InvalidArgumentError(f"target site {target} out of range")
    remote = {s: setting[s] for s in range(rho.n_sites) if s != target}
    phi_remote = dephase_multi(rho, remote)
    s0 = rho.entropy() if state_entropy is None else state_entropy
    return EntropyTerms(
        state=s0,
        target=dephase(rho, setting[target], target).entropy(),
        remote=phi_remote.entropy(),
        full=dephase(phi_remote, setting[target], target).entropy(),
    )


def contextual_nl(rho: DensityMatrix, setting: Setting, target: int = 0,
                  state_entropy: float | None = None) -> float:
    """Drop in the target's irreality caused by remote unrevealed measurements."""
    eta = entropy_terms(rho, setting, target, state_entropy).eta
    return clamp_nonnegative(eta, "contextual nonlocality")


def contextual_nl_2(rho: DensityMatrix, a: ProjectiveObservable, b: ProjectiveObservable) -> float:
    if rho.n_sites != 2:
        raise InvalidArgumentError("contextual_nl_2 needs a two-site state")
    return contextual_nl(rho, Setting((a, b)), 0)


def contextual_nl_3(rho: DensityMatrix, target: int, setting: Setting) -> float:
    if rho.n_sites != 3:
        raise InvalidArgumentError("contextual_nl_3 needs a three-site state")
    return contextual_nl(rho, setting, target)
