"""Noise sweeps and monogamy scans over the noisy GHZ/W families, with writers."""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__
from .errors import ConsistencyError, InvalidArgumentError
from .optimize import Grid, MonogamyTerms, RandomSampling, Strategy, monogamy_terms, n3
from .states import increment_label, noisy_state

log = logging.getLogger(__name__)

MONOTONE_TOL = 1e-9


def value_range(start: float, stop: float, step: float, decimals: int = 10) -> np.ndarray:
    """Inclusive arithmetic range, rounded so values are exact in the output."""
    if step <= 0:
        raise InvalidArgumentError("step must be positive")
    if stop < start:
        raise InvalidArgumentError("range end precedes its start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), decimals)


def strategy_metadata(strategy: Strategy, symmetric: bool) -> dict:
    meta = {"tool": f"rbn {__version__}"}
    if isinstance(strategy, Grid):
        meta.update(strategy="grid", increment=increment_label(strategy.increment),
                    seed="none", dedupe=str(not strategy.paper_faithful).lower())
    else:
        meta.update(strategy=f"random({strategy.count})", increment="none",
                    seed=str(strategy.seed), dedupe="false")
    meta["symmetric"] = str(symmetric).lower()
    meta["rng"] = "PCG64/SeedSequence" if isinstance(strategy, RandomSampling) else "none"
    return meta


@dataclass
class SweepRow:
    chi: str
    noise: float
    n3: float
    theta_a: float
    phi_a: float
    theta_b: float
    phi_b: float
    theta_c: float
    phi_c: float
    evaluations: int
    wall_time_s: float


def sweep_noise(chi: str, noises, strategy: Strategy = Grid(), symmetric: bool = False,
                workers: int | None = None) -> list[SweepRow]:
    """N3 of the noisy family at each noise value, in the given order.

    The argmax angles (units of pi) belong to the cut that attains the
    minimum. Logs a warning when N3 increases by more than ``MONOTONE_TOL``.
    """
    rows = []
    for noise in noises:
        t0 = time.perf_counter()
        res = n3(noisy_state(chi, float(noise)), strategy, symmetric, workers)
        best = res.cuts[res.minimizing_cut]
        if res.value < 0:
            raise ConsistencyError(f"negative N3 at noise {noise}")
        rows.append(SweepRow(chi, float(noise), res.value, *best.argmax_setting.angles_in_pi(),
                             best.evaluations, time.perf_counter() - t0))
        if len(rows) > 1 and rows[-1].n3 > rows[-2].n3 + MONOTONE_TOL:
            log.warning("N3 increased from %.12g to %.12g between noise %g and %g",
                        rows[-2].n3, rows[-1].n3, rows[-2].noise, rows[-1].noise)
    return rows


@dataclass
class MonogamyRow:
    chi: str
    noise: float
    alpha: float
    n3: float
    n2_ab: float
    n2_ac: float
    delta: float
    delta_normalized: float


@dataclass
class MonogamySummary:
    chi: str
    threshold_alpha: float | None   # zero crossing of delta at the lowest noise
    peak_alpha: float               # argmax over alpha of delta at the lowest noise
    peak_delta: float
    max_delta: float                # normalization constant over the whole scan
    max_delta_alpha: float
    max_delta_noise: float


def zero_crossing(alphas: np.ndarray, delta: np.ndarray) -> float | None:
    """First alpha where ``delta`` goes from negative to nonnegative.

    Linear interpolation between neighbouring grid points.
    """
    for i in range(1, len(alphas)):
        if delta[i - 1] < 0 <= delta[i]:
            a0, a1, d0, d1 = alphas[i - 1], alphas[i], delta[i - 1], delta[i]
            return float(a0 + (a1 - a0) * (-d0) / (d1 - d0))
    return None


def monogamy_scan(chi: str, noises, alphas, strategy: Strategy = Grid(), symmetric: bool = False,
                  workers: int | None = None) -> tuple[list[MonogamyRow], MonogamySummary]:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.size == 0 or np.any(alphas <= 0):
        raise InvalidArgumentError("alpha grid must be nonempty and positive")
    noises = [float(x) for x in noises]
    if not noises:
        raise InvalidArgumentError("noise grid is empty")

    terms: list[MonogamyTerms] = [monogamy_terms(noisy_state(chi, x), strategy, symmetric, workers)
                                  for x in noises]
    deltas = np.array([t.witness(alphas) for t in terms]).reshape(len(noises), alphas.size)
    i, j = np.unravel_index(int(np.argmax(deltas)), deltas.shape)
    max_delta = float(deltas[i, j])
    scale = max_delta if max_delta > 0 else 1.0

    rows = []
    for x, t, drow in zip(noises, terms, deltas):
        for a, d in zip(alphas, drow):
            rows.append(MonogamyRow(chi, x, float(a), t.n3, t.n2_ab, t.n2_ac, float(d), float(d) / scale))

    first = deltas[int(np.argmin(noises))]
    k = int(np.argmax(first))
    summary = MonogamySummary(
        chi=chi,
        threshold_alpha=zero_crossing(alphas, first),
        peak_alpha=float(alphas[k]),
        peak_delta=float(first[k]),
        max_delta=max_delta,
        max_delta_alpha=float(alphas[j]),
        max_delta_noise=noises[i],
    )
    return rows, summary


def check_monogamy_rows(rows: list[MonogamyRow], atol: float = 1e-12) -> None:
    for r in rows:
        recomputed = r.n3 ** r.alpha - r.n2_ab ** r.alpha - r.n2_ac ** r.alpha
        if abs(recomputed - r.delta) > atol:
            raise ConsistencyError(f"delta mismatch at noise={r.noise}, alpha={r.alpha}")


# --------------------------------------------------------------------------
# writers

def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".12g")
    if v is None:
        return ""
    return str(v)


def rows_to_csv(rows, metadata: dict, timings: bool = False) -> str:
    """CSV text with ``#`` metadata lines, a header row and 12 significant digits."""
    buf = io.StringIO()
    for key, value in metadata.items():
        buf.write(f"# {key}: {value}\n")
    if not rows:
        return buf.getvalue()
    fields = [f for f in asdict(rows[0]) if timings or f != "wall_time_s"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for row in rows:
        d = asdict(row)
        writer.writerow([_fmt(d[f]) for f in fields])
    return buf.getvalue()


def rows_to_json(rows, metadata: dict, timings: bool = False, summary=None) -> str:
    out = {"metadata": metadata,
           "rows": [{k: v for k, v in asdict(r).items() if timings or k != "wall_time_s"}
                    for r in rows]}
    if summary is not None:
        out["summary"] = asdict(summary)
    return json.dumps(out, indent=2, sort_keys=False) + "\n"
