"""Reduced-scale invariant checks, run by ``rbn selftest``."""
from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from . import measures, optimize, states
from .errors import ConsistencyError
from .states import Setting

TOL = 1e-10


def _require(ok, detail) -> None:
    if not ok:
        raise ConsistencyError(str(detail))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _random_setting(rng: np.random.Generator, sites: int) -> Setting:
    th = np.arccos(rng.uniform(-1, 1, sites))
    ph = rng.uniform(0, 2 * math.pi, sites)
    return Setting.from_directions([states.BlochDirection(float(a), float(b)) for a, b in zip(th, ph)])


def _states(rng, count, pure=False):
    make = states.random_pure_state if pure else states.random_density_matrix
    return [make([2, 2, 2], rng) for _ in range(count)]


def check_dephase_idempotent(rng) -> str:
    worst = 0.0
    for rho in _states(rng, 20):
        s = _random_setting(rng, 3)
        for site in range(3):
            once = measures.dephase(rho, s[site], site)
            twice = measures.dephase(once, s[site], site)
            worst = max(worst, np.abs(twice.matrix - once.matrix).max())
    _require(worst <= 1e-12, worst)
    return f"max deviation {worst:.2e}"


def check_commutation(rng) -> str:
    worst = 0.0
    for rho in _states(rng, 20):
        s = _random_setting(rng, 3)
        bc = measures.dephase(measures.dephase(rho, s[2], 2), s[1], 1)
        cb = measures.dephase(measures.dephase(rho, s[1], 1), s[2], 2)
        worst = max(worst, np.abs(bc.matrix - cb.matrix).max())
    _require(worst <= 1e-12, worst)
    return f"max deviation {worst:.2e}"


def check_trace_and_unitality(rng) -> str:
    mixed = states.maximally_mixed([2, 2, 2])
    worst = 0.0
    for rho in _states(rng, 20):
        s = _random_setting(rng, 3)
        for site in range(3):
            worst = max(worst, abs(np.trace(measures.dephase(rho, s[site], site).matrix) - 1))
            worst = max(worst, np.abs(measures.dephase(mixed, s[site], site).matrix - mixed.matrix).max())
    _require(worst <= 1e-12, worst)
    return f"max deviation {worst:.2e}"


def check_entropy_chain(rng) -> str:
    for rho in _states(rng, 20) + _states(rng, 20, pure=True):
        s = _random_setting(rng, 3)
        s0 = rho.entropy()
        for r in range(3):
            one = measures.dephase(rho, s[r], r)
            _require(one.entropy() >= s0 - TOL, f"S(Phi_{r}) < S(rho)")
            for q in range(3):
                if q == r:
                    continue
                two = measures.dephase(one, s[q], q)
                _require(two.entropy() >= one.entropy() - TOL, f"S(Phi_{r}{q}) < S(Phi_{r})")
                full = measures.dephase(two, s[3 - r - q], 3 - r - q)
                _require(full.entropy() >= two.entropy() - TOL, "S(Phi_ABC) < S(Phi_RQ)")
    return "40 states"


def check_pure_state_inequality(rng) -> str:
    slack = math.inf
    for rho in _states(rng, 100, pure=True):
        s = _random_setting(rng, 3)
        terms = measures.entropy_terms(rho, s, 0)
        gap = 2 * terms.full - terms.target - terms.remote
        _require(gap >= -TOL, gap)
        slack = min(slack, gap)
    rho = states.schmidt_pure_state([0.7, 0.3])
    terms = measures.entropy_terms(rho, Setting.from_axes("zzz"), 0)
    _require(abs(2 * terms.full - terms.target - terms.remote) <= 1e-12, "Schmidt state does not saturate")
    return f"100 pure states, min slack {slack:.2e}; Schmidt state saturates"


def check_eta_nonnegative(rng) -> str:
    lowest = math.inf
    for rho in _states(rng, 100):
        th = np.arccos(rng.uniform(-1, 1, (100, 3)))
        ph = rng.uniform(0, 2 * math.pi, (100, 3))
        for t in range(3):
            lowest = min(lowest, float(optimize.eta_batch(rho, th, ph, t).min()))
    _require(lowest >= -TOL, lowest)
    return f"10^4 pairs per cut, min eta {lowest:.2e}"


def check_kernel_agreement(rng) -> str:
    worst = 0.0
    for rho in _states(rng, 10):
        th = np.arccos(rng.uniform(-1, 1, (10, 3)))
        ph = rng.uniform(0, 2 * math.pi, (10, 3))
        fast = optimize.eta_batch(rho, th, ph, 1)
        for k in range(10):
            s = Setting.from_directions([states.BlochDirection(float(a), float(b))
                                         for a, b in zip(th[k], ph[k])])
            worst = max(worst, abs(fast[k] - measures.entropy_terms(rho, s, 1).eta))
    _require(worst <= 1e-10, worst)
    return f"max deviation {worst:.2e}"


def check_schmidt_theorem(rng) -> str:
    grid = optimize.Grid(math.pi / 2)
    for xi in ((0.5, 0.5), (0.9, 0.1), (0.7, 0.3)):
        expected = -sum(x * math.log(x) for x in xi)
        rho = states.schmidt_pure_state(xi)
        n3 = optimize.n3(rho, grid, workers=1).value
        e3 = optimize.e3(rho)
        _require(abs(n3 - expected) <= 1e-9, (xi, n3, expected))
        _require(abs(e3 - expected) <= 1e-9, (xi, e3, expected))
    ghz = optimize.n3(states.ghz_state(), grid, workers=1).value
    _require(abs(ghz - math.log(2)) <= 1e-9, ("ghz", ghz))
    return "N3 = E3 = H(xi) on the pi/2 grid"


def check_grid_cardinality(rng) -> str:
    n3 = len(states.setting_grid(math.pi / 8, 3, True))
    n2 = len(states.setting_grid(math.pi / 8, 2, True))
    _require(n3 == 2_985_984, n3)
    _require(n2 == 20_736, n2)
    return f"{n3} three-site, {n2} two-site settings"


CHECKS: list[tuple[str, Callable]] = [
    ("dephase idempotence", check_dephase_idempotent),
    ("cross-site commutation", check_commutation),
    ("trace preservation and unitality", check_trace_and_unitality),
    ("entropy monotonicity chain", check_entropy_chain),
    ("pure-state entropy inequality", check_pure_state_inequality),
    ("eta nonnegativity", check_eta_nonnegative),
    ("fast kernel matches dense path", check_kernel_agreement),
    ("Schmidt-state theorem", check_schmidt_theorem),
    ("grid cardinality", check_grid_cardinality),
]


def run_selftest(seed: int = 2024) -> list[CheckResult]:
    results = []
    for name, fn in CHECKS:
        rng = np.random.default_rng(seed)
        try:
            results.append(CheckResult(name, True, fn(rng)))
        except Exception as exc:  # a failing check must not stop the others
            results.append(CheckResult(name, False, f"{type(exc).__name__}: {exc}"))
    return results
