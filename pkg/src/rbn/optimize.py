"""Optimized realism-based nonlocality: N2, N_{R|QS}, N3, E3 and the monogamy witness.

Qubit states are expanded in the Pauli basis,
``rho = 2**-n sum T[mu, nu, ...] sigma_mu (x) sigma_nu (x) ...``, and every
dephased entropy needed by the four-entropy form of the contextual
nonlocality is evaluated for whole batches of settings at once:

* the fully dephased state is diagonal, its spectrum is the outcome
  distribution obtained by contracting ``T`` with the vectors ``(1, +-n)``;
* dephasing the remote sites leaves 2x2 blocks on the target, whose
  eigenvalues follow from the block's Bloch vector;
* dephasing only the target leaves ``2**(n-1)``-dimensional blocks, handled
  with a batched ``eigvalsh``.

On a grid the terms factorize: the target-only entropy depends on one
direction, the remote entropy on two, and only the fully dephased entropy
needs the full product. The sweep over the product is split into fixed-size
chunks and reduced in chunk order, so the result never depends on the worker
count.
"""
from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import ConsistencyError, InvalidArgumentError, NotPureError
from .measures import NEG_TOL
from .states import PAULIS, DensityMatrix, RandomSettings, Setting, SettingGrid, bloch_vector

#: Settings whose value is within this of the maximum count as ties; the
#: first of them in enumeration order is reported.
TIE_TOL = 1e-12

_GRID_CHUNK = 8          # leading-site directions per chunk
_RANDOM_CHUNK = 1 << 14  # settings per chunk

_P = np.stack(PAULIS)                                  # (4, 2, 2)
_PP = np.einsum("nij,lkm->nlikjm", _P, _P).reshape(4, 4, 4, 4)  # sigma_n (x) sigma_l


@dataclass(frozen=True)
class Grid:
    """Exhaustive angular grid; ``increment`` in radians."""
    increment: float = math.pi / 8
    paper_faithful: bool = True

    def settings(self, sites: int) -> SettingGrid:
        return SettingGrid(self.increment, sites, self.paper_faithful)


@dataclass(frozen=True)
class RandomSampling:
    """``count`` settings drawn uniformly on the sphere from ``seed``."""
    count: int = 10 ** 6
    seed: int = 0

    def settings(self, sites: int) -> RandomSettings:
        return RandomSettings(self.count, self.seed, sites)


Strategy = Grid | RandomSampling


class Bipartition(enum.IntEnum):
    """Cut of a three-site system; the value is the index of the lone site."""
    A_BC = 0
    B_AC = 1
    C_AB = 2

    @property
    def label(self) -> str:
        sites = "ABC"
        rest = "".join(s for i, s in enumerate(sites) if i != self.value)
        return f"{sites[self.value]}|{rest}"


@dataclass
class NonlocalityResult:
    value: float
    argmax_setting: Setting
    evaluations: int
    strategy: Strategy
    argmax_index: int
    target: int = 0


@dataclass
class N3Result:
    value: float
    cuts: dict[Bipartition, NonlocalityResult] = field(default_factory=dict)

    @property
    def minimizing_cut(self) -> Bipartition:
        return min(self.cuts, key=lambda c: (self.cuts[c].value, c.value))


def default_workers() -> int:
    env = os.environ.get("RBN_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


# --------------------------------------------------------------------------
# batched entropy kernels

def pauli_tensor(rho: DensityMatrix) -> np.ndarray:
    """Real coefficients ``T[mu, nu, ...] = Tr(rho sigma_mu (x) sigma_nu ...)``."""
    if any(d != 2 for d in rho.dims):
        raise InvalidArgumentError("the optimizer supports qubit sites only")
    n = rho.n_sites
    t = rho.matrix.reshape((2,) * (2 * n))
    rows = list(range(n))
    cols = list(range(n, 2 * n))
    ops = []
    for k in range(n):
        ops += [_P, [2 * n + k, cols[k], rows[k]]]
    return np.einsum(t, rows + cols, *ops, list(range(2 * n, 3 * n))).real.copy()


def outcome_vectors(n: np.ndarray) -> np.ndarray:
    """``(1, +n)`` and ``(1, -n)`` stacked: shape ``(..., 2, 4)``."""
    n = np.asarray(n, dtype=float)
    u = np.ones(n.shape[:-1] + (2, 4))
    u[..., 0, 1:] = n
    u[..., 1, 1:] = -n
    return u


def _bloch_block_entropy(m: np.ndarray) -> np.ndarray:
    """Entropy summed over 2x2 blocks ``m0 + m.sigma`` (last axis holds m)."""
    r = np.sqrt(np.sum(m[..., 1:] ** 2, axis=-1))
    lam = np.stack([m[..., 0] + r, m[..., 0] - r], axis=-1)
    return linalg.spectrum_entropy(lam.reshape(lam.shape[0], -1))


class _QubitKernel:
    """Batched four-entropy evaluation for one 2- or 3-qubit state."""

    def __init__(self, rho: DensityMatrix):
        if rho.n_sites not in (2, 3):
            raise InvalidArgumentError("optimizer supports 2 or 3 sites")
        self.n = rho.n_sites
        self.T = pauli_tensor(rho)
        self.norm = 2.0 ** self.n
        self.state_entropy = rho.entropy()

    def _target_first(self, t: int) -> np.ndarray:
        return np.moveaxis(self.T, t, 0)

    def single(self, t: int, u: np.ndarray) -> np.ndarray:
        """Entropy after dephasing only site ``t``; ``u`` has shape (k, 2, 4)."""
        tt = self._target_first(t)
        if self.n == 2:
            return _bloch_block_entropy(np.einsum("ksm,mn->ksn", u, tt) / self.norm)
        k = np.einsum("ksm,mnl->ksnl", u, tt) / self.norm
        blocks = np.einsum("ksnl,nlij->ksij", k, _PP)
        lam = np.linalg.eigvalsh(blocks)
        return linalg.spectrum_entropy(lam.reshape(lam.shape[0], -1))

    def remote(self, t: int, us: list[np.ndarray]) -> np.ndarray:
        """Entropy after dephasing every site except ``t``.

        ``us`` lists outcome vectors for the remote sites in increasing site
        order, each of shape (k, 2, 4).
        """
        tt = self._target_first(t)
        if self.n == 2:
            m = np.einsum("mn,ksn->ksm", tt, us[0])
        else:
            m = np.einsum("mnl,ksn->ksml", tt, us[0])
            m = np.einsum("ksml,kvl->ksvm", m, us[1])
        return _bloch_block_entropy(m / self.norm)

    def full(self, us: list[np.ndarray]) -> np.ndarray:
        """Entropy after dephasing all sites, row-paired vectors."""
        if self.n == 2:
            p = np.einsum("ksm,mn,ktn->kst", us[0], self.T, us[1])
        else:
            w = np.einsum("ksm,mnl->ksnl", us[0], self.T)
            w = np.einsum("ksnl,ktn->kstl", w, us[1])
            p = np.einsum("kstl,kvl->kstv", w, us[2])
        return linalg.spectrum_entropy((p / self.norm).reshape(p.shape[0], -1))

    def full_outer(self, ua: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Fully dephased entropy on ``ua`` x ``u`` (x ``u``) products."""
        if self.n == 2:
            p = np.einsum("asm,mn,btn->abst", ua, self.T, u)
        else:
            w = np.einsum("asm,mnl->asnl", ua, self.T)
            w = np.einsum("asnl,btn->abstl", w, u)
            p = np.einsum("abstl,cvl->abcstv", w, u)
        lead = p.shape[:self.n]
        return linalg.spectrum_entropy((p / self.norm).reshape(lead + (-1,)))


def _remote_sites(n: int, t: int) -> list[int]:
    return [s for s in range(n) if s != t]


class _GridSweep:
    def __init__(self, kernel: _QubitKernel, grid: SettingGrid, targets):
        self.kernel = kernel
        self.grid = grid
        self.targets = list(targets)
        n, u = kernel.n, outcome_vectors(grid.vectors)
        self.u = u
        d = len(u)
        self.single = {t: kernel.single(t, u) for t in self.targets}
        self.remote = {}
        for t in self.targets:
            if n == 2:
                self.remote[t] = kernel.remote(t, [u])
            else:
                ur = np.repeat(u, d, axis=0)
                uq = np.tile(u, (d, 1, 1))
                self.remote[t] = kernel.remote(t, [ur, uq]).reshape(d, d)
        self.chunks = [(lo, min(lo + _GRID_CHUNK, d)) for lo in range(0, d, _GRID_CHUNK)]

    def evaluate(self, chunk) -> dict[int, np.ndarray]:
        lo, hi = chunk
        k = self.kernel
        s_full = k.full_outer(self.u[lo:hi], self.u)
        out = {}
        for t in self.targets:
            s1, s2 = self.single[t], self.remote[t]
            if k.n == 2:
                if t == 0:
                    eta = s1[lo:hi, None] + s2[None, :]
                else:
                    eta = s2[lo:hi, None] + s1[None, :]
            elif t == 0:
                eta = s1[lo:hi, None, None] + s2[None, :, :]
            elif t == 1:
                eta = s1[None, :, None] + s2[lo:hi, None, :]
            else:
                eta = s1[None, None, :] + s2[lo:hi, :, None]
            out[t] = (eta - s_full - k.state_entropy).ravel()
        return out

    def offset(self, chunk) -> int:
        return chunk[0] * len(self.u) ** (self.kernel.n - 1)


class _RandomSweep:
    def __init__(self, kernel: _QubitKernel, settings: RandomSettings, targets):
        self.kernel = kernel
        self.settings = settings
        self.targets = list(targets)
        self.chunks = [(lo, min(lo + _RANDOM_CHUNK, len(settings)))
                       for lo in range(0, len(settings), _RANDOM_CHUNK)]

    def evaluate(self, chunk) -> dict[int, np.ndarray]:
        k = self.kernel
        theta, phi = self.settings.angles(*chunk)
        us = [outcome_vectors(bloch_vector(theta[:, s], phi[:, s])) for s in range(k.n)]
        s_full = k.full(us)
        out = {}
        for t in self.targets:
            rem = [us[s] for s in _remote_sites(k.n, t)]
            out[t] = k.single(t, us[t]) + k.remote(t, rem) - s_full - k.state_entropy
        return out

    def offset(self, chunk) -> int:
        return chunk[0]


def _reduce(sweep, workers: int | None) -> dict[int, tuple[float, int]]:
    """Deterministic max over all chunks for every target.

    Pass one records per-chunk extrema in chunk order. The winner is the
    first index whose value lies within ``TIE_TOL`` of the global maximum;
    only its chunk is evaluated again to locate it.
    """
    workers = default_workers() if workers is None else max(1, int(workers))

    def stats(chunk):
        res = sweep.evaluate(chunk)
        return {t: (float(v.max()), float(v.min())) for t, v in res.items()}

    if workers == 1 or len(sweep.chunks) == 1:
        per_chunk = [stats(c) for c in sweep.chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_chunk = list(pool.map(stats, sweep.chunks))

    out = {}
    for t in sweep.targets:
        lows = min(s[t][1] for s in per_chunk)
        if lows < -NEG_TOL:
            raise ConsistencyError(f"contextual nonlocality {lows:.3g} below zero")
        best = max(s[t][0] for s in per_chunk)
        ci = next(i for i, s in enumerate(per_chunk) if s[t][0] >= best - TIE_TOL)
        values = sweep.evaluate(sweep.chunks[ci])[t]
        j = int(np.argmax(values >= best - TIE_TOL))
        out[t] = (max(float(values[j]), 0.0), sweep.offset(sweep.chunks[ci]) + j)
    return out


def _sweep(rho: DensityMatrix, strategy: Strategy, targets, workers):
    kernel = _QubitKernel(rho)
    settings = strategy.settings(kernel.n)
    if isinstance(strategy, Grid):
        sweep = _GridSweep(kernel, settings, targets)
    elif isinstance(strategy, RandomSampling):
        sweep = _RandomSweep(kernel, settings, targets)
    else:
        raise InvalidArgumentError(f"unknown strategy {strategy!r}")
    reduced = _reduce(sweep, workers)
    return {t: NonlocalityResult(value=v, argmax_setting=settings[i], evaluations=len(settings),
                                 strategy=strategy, argmax_index=i, target=t)
            for t, (v, i) in reduced.items()}


def eta_batch(rho: DensityMatrix, thetas: np.ndarray, phis: np.ndarray, target: int = 0) -> np.ndarray:
    """Contextual nonlocality for a batch of settings, through the fast kernel.

    ``thetas`` and ``phis`` have shape ``(k, n_sites)``. Values are not
    clamped.
    """
    kernel = _QubitKernel(rho)
    us = [outcome_vectors(bloch_vector(thetas[:, s], phis[:, s])) for s in range(kernel.n)]
    rem = [us[s] for s in _remote_sites(kernel.n, target)]
    return (kernel.single(target, us[target]) + kernel.remote(target, rem)
            - kernel.full(us) - kernel.state_entropy)


# --------------------------------------------------------------------------
# public measures

def n2(rho: DensityMatrix, strategy: Strategy = Grid(), workers: int | None = None) -> NonlocalityResult:
    """Bipartite realism-based nonlocality: max of ``eta_{A|B}`` over settings."""
    if rho.n_sites != 2:
        raise InvalidArgumentError("n2 needs a two-site state")
    return _sweep(rho, strategy, [0], workers)[0]


def n_bipartition(rho: DensityMatrix, cut: Bipartition, strategy: Strategy = Grid(),
                  workers: int | None = None) -> NonlocalityResult:
    """Max of ``eta_{R|Q,S}`` with the cut's lone site as the target ``R``."""
    if rho.n_sites != 3:
        raise InvalidArgumentError("n_bipartition needs a three-site state")
    cut = Bipartition(cut)
    return _sweep(rho, strategy, [cut.value], workers)[cut.value]


def _swap_sites(setting: Setting, a: int, b: int) -> Setting:
    obs = list(setting.observables)
    obs[a], obs[b] = obs[b], obs[a]
    return Setting(tuple(obs))


def check_permutation_symmetry(rho: DensityMatrix, samples: int = 100, seed: int = 0,
                               atol: float = 1e-9) -> None:
    """Spot-check that every cut sees the same contextual nonlocality.

    For random settings ``(a, b, c)`` the values of ``eta_{A|B,C}(a, b, c)``,
    ``eta_{B|A,C}(b, a, c)`` and ``eta_{C|A,B}(c, b, a)`` must agree.
    """
    rs = RandomSettings(samples, seed, 3)
    th, ph = rs.angles(0, samples)
    base = eta_batch(rho, th, ph, 0)
    for t in (1, 2):
        perm = [0, 1, 2]
        perm[0], perm[t] = perm[t], perm[0]
        other = eta_batch(rho, th[:, perm], ph[:, perm], t)
        if np.max(np.abs(other - base)) > atol:
            raise InvalidArgumentError("state is not symmetric under subsystem permutations")


def n3(rho: DensityMatrix, strategy: Strategy = Grid(), symmetric: bool = False,
       workers: int | None = None) -> N3Result:
    """Genuine tripartite nonlocality: the minimum of the three cut maxima.

    Each cut is maximized independently. With ``symmetric=True`` only the
    ``A|BC`` cut is optimized and reused for the others after a symmetry
    spot-check.
    """
    if rho.n_sites != 3:
        raise InvalidArgumentError("n3 needs a three-site state")
    if symmetric:
        check_permutation_symmetry(rho)
        res = _sweep(rho, strategy, [0], workers)[0]
        cuts = {Bipartition.A_BC: res}
        for t in (1, 2):
            cuts[Bipartition(t)] = NonlocalityResult(
                res.value, _swap_sites(res.argmax_setting, 0, t), res.evaluations,
                strategy, res.argmax_index, t)
    else:
        per = _sweep(rho, strategy, [0, 1, 2], workers)
        cuts = {Bipartition(t): r for t, r in per.items()}
    return N3Result(min(r.value for r in cuts.values()), cuts)


def e3(rho: DensityMatrix) -> float:
    """Genuine tripartite entanglement of a pure state: min single-site entropy."""
    if rho.n_sites != 3:
        raise InvalidArgumentError("e3 needs a three-site state")
    if rho.purity() < 1 - 1e-8:
        raise NotPureError(f"state purity {rho.purity():.10f} < 1 - 1e-8")
    return min(rho.reduce([s]).entropy() for s in range(3))


@dataclass
class MonogamyTerms:
    n3: float
    n2_ab: float
    n2_ac: float

    def witness(self, alpha):
        """``N3**alpha - N2(AB)**alpha - N2(AC)**alpha``; vectorizes over alpha."""
        alpha = np.asarray(alpha, dtype=float)
        if np.any(alpha <= 0):
            raise InvalidArgumentError("alpha must be positive")
        out = self.n3 ** alpha - self.n2_ab ** alpha - self.n2_ac ** alpha
        return float(out) if out.ndim == 0 else out


def monogamy_terms(rho: DensityMatrix, strategy: Strategy = Grid(), symmetric: bool = False,
                   workers: int | None = None) -> MonogamyTerms:
    """Optimized values entering the monogamy witness, computed once."""
    if rho.n_sites != 3:
        raise InvalidArgumentError("monogamy needs a three-site state")
    return MonogamyTerms(
        n3=n3(rho, strategy, symmetric, workers).value,
        n2_ab=n2(rho.reduce([0, 1]), strategy, workers).value,
        n2_ac=n2(rho.reduce([0, 2]), strategy, workers).value,
    )


def monogamy_witness(rho: DensityMatrix, alpha: float, strategy: Strategy = Grid(),
                     workers: int | None = None) -> float:
    """``N3(rho)**alpha - N2(rho_AB)**alpha - N2(rho_AC)**alpha``.

    Powers are applied after optimization; ``x -> x**alpha`` is increasing on
    ``x >= 0`` so the maximizers do not change.
    """
    if alpha <= 0:
        raise InvalidArgumentError("alpha must be positive")
    return monogamy_terms(rho, strategy, workers=workers).witness(alpha)


__all__ = [
    "Grid", "RandomSampling", "Bipartition", "NonlocalityResult", "N3Result", "MonogamyTerms",
    "n2", "n_bipartition", "n3", "e3", "monogamy_terms", "monogamy_witness", "pauli_tensor",
    "eta_batch", "check_permutation_symmetry", "default_workers",
]
