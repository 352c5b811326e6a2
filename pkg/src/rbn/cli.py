"""Command-line experiment runner.

Exit codes: 0 success, 1 usage error, 2 numerical-consistency failure,
3 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import math
import re
import sys
import time

from . import __version__, measures, states
from .errors import ConsistencyError, InvalidArgumentError, RBNError
from .experiments import (check_monogamy_rows, monogamy_scan, rows_to_csv, rows_to_json,
                          strategy_metadata, sweep_noise, value_range)
from .optimize import Grid, RandomSampling, default_workers
from .selftest import run_selftest

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("rbn")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_CALL = re.compile(r"^\s*([a-z]+)\s*(?:\((.*)\))?\s*$")


def parse_state(spec: str, chi: str = "ghz") -> states.DensityMatrix:
    """``ghz``, ``w``, ``ghz(0.3)``, ``w(0.3)``, ``mixed(n)``, ``schmidt(p,q)``, ``ccc(p,q)``.

    ``mixed(n)`` is the noisy family selected by ``chi`` at noise ``n``.
    """
    m = _CALL.match(spec.lower())
    if not m:
        raise UsageError(f"cannot parse state {spec!r}")
    name, args = m.group(1), m.group(2)
    try:
        values = [float(a) for a in args.split(",")] if args else []
    except ValueError:
        raise UsageError(f"bad numbers in state {spec!r}") from None
    try:
        if name in ("ghz", "w"):
            if len(values) > 1:
                raise UsageError(f"{name} takes at most one noise value")
            return states.noisy_state(name, values[0] if values else 0.0)
        if name == "mixed" and len(values) == 1:
            return states.noisy_state(chi, values[0])
        if name == "schmidt" and values:
            return states.schmidt_pure_state(values)
        if name == "ccc" and values:
            z = states.pauli_observable("z")
            return states.ccc_state(values, (z, z, z))
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None
    raise UsageError(f"unknown state {spec!r}")


def parse_setting(spec: str) -> states.Setting:
    """Comma-separated per-site entries: an axis ``x|y|z`` or ``theta:phi`` in units of pi."""
    observables = []
    for part in spec.split(","):
        part = part.strip().lower()
        if part in ("x", "y", "z"):
            observables.append(states.pauli_observable(part))
            continue
        try:
            t, p = (float(v) * math.pi for v in part.split(":"))
            observables.append(states.bloch_observable(states.BlochDirection(t, p % (2 * math.pi))))
        except (ValueError, InvalidArgumentError):
            raise UsageError(f"cannot parse observable {part!r}") from None
    return states.Setting(tuple(observables))


def _strategy(args) -> Grid | RandomSampling:
    if args.random is not None:
        if args.random < 1:
            raise UsageError("--random needs a positive count")
        return RandomSampling(args.random, args.seed)
    try:
        return Grid(states.parse_increment(args.increment), paper_faithful=not args.dedupe)
    except InvalidArgumentError as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def cmd_eval(args) -> int:
    rho = parse_state(args.state, args.chi)
    setting = parse_setting(args.setting)
    target = "ABC".index(args.target)
    if len(setting) != rho.n_sites:
        raise UsageError(f"setting has {len(setting)} entries for a {rho.n_sites}-site state")
    terms = measures.entropy_terms(rho, setting, target)
    eta = measures.clamp_nonnegative(terms.eta, "eta")
    sites = "ABC"
    rest = ",".join(sites[s] for s in range(rho.n_sites) if s != target)
    lines = [
        ("S(rho)", terms.state),
        (f"S(Phi_{sites[target]} rho)", terms.target),
        (f"S(Phi_{{{rest}}} rho)", terms.remote),
        (f"S(Phi_{{{','.join(sites[:rho.n_sites])}}} rho)", terms.full),
        (f"eta_{sites[target]}|{rest}", eta),
    ]
    width = max(len(label) for label, _ in lines)
    for label, value in lines:
        print(f"{label.ljust(width)} = {value:.12g}")
    return EXIT_OK


def cmd_sweep_noise(args) -> int:
    strategy = _strategy(args)
    noises = value_range(args.noise_start, args.noise_end, args.noise_step)
    t0 = time.perf_counter()
    rows = sweep_noise(args.chi, noises, strategy, args.symmetric, args.workers)
    elapsed = time.perf_counter() - t0
    log.info("swept %d noise values in %.2f s", len(rows), elapsed)
    meta = {"command": "sweep-noise", "chi": args.chi, **strategy_metadata(strategy, args.symmetric)}
    if args.timings:
        meta["runtime_s"] = f"{elapsed:.3f}"
    text = rows_to_json(rows, meta, args.timings) if args.format == "json" \
        else rows_to_csv(rows, meta, args.timings)
    _emit(text, args.out)
    return EXIT_OK


def cmd_monogamy(args) -> int:
    strategy = _strategy(args)
    noises = value_range(args.noise_start, args.noise_end, args.noise_step)
    alphas = value_range(args.alpha_start, args.alpha_end, args.alpha_step)
    if alphas[0] <= 0:
        raise UsageError("alpha grid must be positive")
    t0 = time.perf_counter()
    rows, summary = monogamy_scan(args.chi, noises, alphas, strategy, args.symmetric, args.workers)
    check_monogamy_rows(rows)
    elapsed = time.perf_counter() - t0
    meta = {"command": "monogamy", "chi": args.chi, **strategy_metadata(strategy, args.symmetric)}
    if args.timings:
        meta["runtime_s"] = f"{elapsed:.3f}"
    summary_meta = {
        "threshold_alpha": "none" if summary.threshold_alpha is None else f"{summary.threshold_alpha:.12g}",
        "peak_alpha": f"{summary.peak_alpha:.12g}",
        "max_delta": f"{summary.max_delta:.12g}",
        "max_delta_at": f"alpha={summary.max_delta_alpha:.12g} noise={summary.max_delta_noise:.12g}",
    }
    if args.format == "json":
        text = rows_to_json(rows, meta, summary=summary)
    else:
        text = rows_to_csv(rows, {**meta, **summary_meta})
    _emit(text, args.out)
    for k, v in summary_meta.items():
        print(f"{k}: {v}", file=sys.stderr)
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftest(args.seed)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_NUMERIC


def _workers_default() -> int:
    try:
        return default_workers()
    except ValueError:
        raise UsageError("RBN_WORKERS must be an integer") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rbn", description="Realism-based nonlocality experiments.")
    parser.add_argument("--version", action="version", version=f"rbn {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def strategy_flags(p):
        p.add_argument("--chi", choices=["ghz", "w"], default="ghz")
        p.add_argument("--noise-start", type=float, default=0.0)
        p.add_argument("--noise-end", type=float, default=1.0)
        p.add_argument("--noise-step", type=float, default=0.01)
        p.add_argument("--increment", default="pi/8", help="grid increment: pi/8, pi/4 or pi/2")
        p.add_argument("--random", type=int, metavar="N", help="use N random settings instead of the grid")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--dedupe", action="store_true", help="drop physically redundant grid directions")
        p.add_argument("--symmetric", action="store_true",
                       help="optimize one cut and reuse it (permutation-symmetric states only)")
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, metavar="FILE")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--timings", action="store_true",
                       help="include wall times (makes output run-dependent)")

    p = sub.add_parser("eval", help="contextual nonlocality of one state and setting")
    p.add_argument("--state", required=True)
    p.add_argument("--setting", required=True)
    p.add_argument("--target", choices=list("ABC"), default="A")
    p.add_argument("--chi", choices=["ghz", "w"], default="ghz", help="family used by mixed(n)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep-noise", help="N3 as a function of noise")
    strategy_flags(p)
    p.set_defaults(func=cmd_sweep_noise)

    p = sub.add_parser("monogamy", help="monogamy witness over noise and alpha")
    strategy_flags(p)
    p.add_argument("--alpha-start", type=float, default=0.01)
    p.add_argument("--alpha-end", type=float, default=10.0)
    p.add_argument("--alpha-step", type=float, default=0.01)
    p.set_defaults(func=cmd_monogamy)

    p = sub.add_parser("selftest", help="run the invariant checks at reduced scale")
    p.add_argument("--seed", type=int, default=2024)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if getattr(args, "workers", 0) is None:
            args.workers = _workers_default()
        return args.func(args)
    except UsageError as exc:
        print(f"rbn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConsistencyError as exc:
        print(f"rbn: numerical consistency failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"rbn: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except RBNError as exc:
        print(f"rbn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
