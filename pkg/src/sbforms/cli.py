"""Command-line entry point: ``sbforms <command> [options]``.

Exit status is 0 when every checked property held, 1 for a bad
configuration, 2 for I/O failures and 3 when any check was violated.
The worker count for batch commands comes from ``BREGMAN_THREADS``.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import batch
from .emit import FORMATS, emit
from .euclid import ConvergenceRow, local_constant_study
from .hardy_stein import DEFAULT_TOL, decay_curve, hardy_stein
from .inequalities import DISTRIBUTIONS, REGIONS, sweep
from .model import InvalidModelError, ModelFileError, SchemaError, load_model
from .semigroup import spectral_decompose

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_VIOLATION = 0, 1, 2, 3
COMMANDS = (
    "check-identity",
    "check-comparability",
    "check-lemmas",
    "approx-convergence",
    "hardy-stein",
    "euclid-study",
    "decay-curve",
)


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors (exit 1), not argparse's default 2
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


# ---------------------------------------------------------------------------
# option parsing


def parse_range(text: str) -> tuple[int, int]:
    """``"2..40"`` -> ``(2, 40)``; a single integer gives a one-point range."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
        else:
            lo = hi = int(text)
    except ValueError:
        raise ConfigError(f"bad range {text!r}, expected LO..HI") from None
    if not 1 <= lo <= hi:
        raise ConfigError(f"bad range {text!r}, need 1 <= LO <= HI")
    return lo, hi


def parse_floats(text: str) -> list[float]:
    """Comma list ``"1.1,2,3"`` or inclusive ``"start:stop:step"``."""
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0:
                raise ValueError
            k = int(math.floor((stop - start) / step + 1e-9))
            values = [round(start + i * step, 10) for i in range(k + 1)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"bad number list {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise ConfigError(f"number list {text!r} is empty or not finite")
    return values


def parse_ints(text: str) -> list[int]:
    values = parse_floats(text)
    if any(v != int(v) for v in values):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def thread_count() -> int:
    raw = os.environ.get("BREGMAN_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    try:
        k = int(raw)
    except ValueError:
        k = 0
    if k < 1:
        raise ConfigError(f"BREGMAN_THREADS must be an integer >= 1, got {raw!r}")
    return k


def _pmap(fn, items):
    items = list(items)
    k = thread_count()
    if k == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=k) as pool:
        return list(pool.map(fn, items))


def _p_list(text: str) -> list[float]:
    ps = parse_floats(text)
    if any(not p - 1.0 >= 1e-6 for p in ps):
        raise ConfigError("every p must exceed 1")
    return ps


def _killing(text: str) -> bool | None:
    return {"both": None, "on": True, "off": False}[text]


# ---------------------------------------------------------------------------
# commands


@dataclass
class Outcome:
    fields: list
    rows: list
    violations: int = 0
    summary: list = field(default_factory=list)


IDENTITY_FIELDS = [
    "index", "seed", "n", "killing", "p", "ep", "jump", "kill", "energy_half",
    "lower_margin", "upper_margin", "identity_residual", "identity_ok", "bracket_ok",
]


def _identity_rows(args):
    sizes = parse_range(args.sizes)
    ps = _p_list(args.p)
    kill = _killing(args.killing)

    def one(i):
        inst = batch.make_instance(args.seed, i, sizes, kill)
        return [batch.identity_record(inst, p) for p in ps]

    return [r for rows in _pmap(one, range(args.count)) for r in rows]


def cmd_check_identity(args) -> Outcome:
    rows = _identity_rows(args)
    bad = sum(not r["identity_ok"] for r in rows)
    worst = max((r["identity_residual"] for r in rows), default=0.0)
    return Outcome(IDENTITY_FIELDS, rows, bad, [
        f"instances: {args.count}, rows: {len(rows)}",
        f"worst relative residual: {worst:.3e} (limit {batch.IDENTITY_RTOL:g})",
        f"violations: {bad}",
    ])


def cmd_check_comparability(args) -> Outcome:
    rows = _identity_rows(args)
    bad = 0
    for r in rows:
        ok = r["bracket_ok"]
        if r["p"] == 2.0:
            # lower bound is an equality at p = 2
            scale = max(1.0, 2.0 * r["energy_half"])
            ok = ok and abs(r["lower_margin"]) <= batch.BRACKET_SLACK * scale
        bad += not ok
    lo = min((r["lower_margin"] for r in rows), default=0.0)
    up = min((r["upper_margin"] for r in rows), default=0.0)
    return Outcome(IDENTITY_FIELDS, rows, bad, [
        f"instances: {args.count}, rows: {len(rows)}",
        f"smallest lower margin: {lo:.3e}, smallest upper margin: {up:.3e}",
        f"violations: {bad}",
    ])


def cmd_check_lemmas(args) -> Outcome:
    alphas = parse_floats(args.alphas)
    ns = parse_floats(args.ns)
    if any(not 0 < a < 2 for a in alphas) or any(n < 2 for n in ns):
        raise ConfigError("need alphas in (0, 2) and ns >= 2")
    dists = [d.strip() for d in args.distributions.split(",")]
    if any(d not in DISTRIBUTIONS for d in dists):
        raise ConfigError(f"distributions must be among {DISTRIBUTIONS}")
    if args.samples < 1:
        raise ConfigError("--samples must be positive")
    count = -(-args.samples // (len(alphas) * len(ns)))
    reports = _pmap(lambda d: sweep(args.seed, count, alphas, ns, d), dists)

    rows, bad, summary = [], 0, []
    for rep in reports:
        rows.extend(rep.records())
        bad += rep.violations
        visited = rep.region_totals()
        missing = [r for r in REGIONS if visited[r] == 0]
        line = (f"{rep.distribution}: {rep.total_samples} samples, violations {rep.violations}, "
                f"min margin {rep.min_margin:.3e}, regions " + " ".join(f"{k}={v}" for k, v in visited.items()))
        if rep.distribution == "heavy-tail" and missing:
            bad += 1
            line += f" (missing {''.join(missing)})"
        summary.append(line)
    fields = list(rows[0]) if rows else []
    summary.append(f"violations: {bad}")
    return Outcome(fields, rows, bad, summary)


APPROX_FIELDS = [
    "index", "n", "killing", "p", "ep", "error_max_t", "error_min_t", "slope",
    "monotone_excess", "jump_rel_error", "kill_rel_error", "passed",
]
SLOPE_RANGE = (0.9, 1.1)
RECOVERY_RTOL = 1e-4


def cmd_approx_convergence(args) -> Outcome:
    sizes = parse_range(args.sizes)
    ps = _p_list(args.p)
    kill = _killing(args.killing)

    def one(i):
        inst = batch.make_instance(args.seed, i, sizes, kill)
        sg = spectral_decompose(inst.model)
        out = []
        for p in ps:
            r = batch.approx_record(inst, p, sg)
            r["passed"] = bool(
                SLOPE_RANGE[0] <= r["slope"] <= SLOPE_RANGE[1]
                and r["monotone_excess"] <= batch.MONOTONE_SLACK
                and r["jump_rel_error"] <= RECOVERY_RTOL
                and r["kill_rel_error"] <= RECOVERY_RTOL
            )
            out.append(r)
        return out

    rows = [r for rs in _pmap(one, range(args.count)) for r in rs]
    bad = sum(not r["passed"] for r in rows)
    slopes = [r["slope"] for r in rows]
    return Outcome(APPROX_FIELDS, rows, bad, [
        f"instances: {args.count}, rows: {len(rows)}",
        f"slopes in [{min(slopes, default=math.nan):.4f}, {max(slopes, default=math.nan):.4f}]",
        f"worst recovery error: jump {max((r['jump_rel_error'] for r in rows), default=0):.3e}, "
        f"kill {max((r['kill_rel_error'] for r in rows), default=0):.3e}",
        f"violations: {bad}",
    ])


HS_FIELDS = [
    "index", "n", "killing", "p", "lhs", "rhs_local", "rhs_jump", "rhs_kill", "rhs_total",
    "discrepancy", "truncation_time", "tail_bound", "quadrature_error_estimate", "min_integrand", "passed",
]


def _model_and_u(args):
    model = load_model(args.model)
    if args.u is None:
        raise ConfigError("--u is required with --model")
    u = np.array(parse_floats(args.u))
    if u.size != model.n:
        raise ConfigError(f"--u has {u.size} entries, model has {model.n} states")
    return model, u


def _hs_row(index, model, killing, u, p, tol):
    rep = hardy_stein(spectral_decompose(model), u, p, tol)
    row = {"index": index, "n": model.n, "killing": killing}
    row.update(rep.to_dict())
    row["discrepancy"] = rep.discrepancy
    allowed = max(10.0 * tol, 1e-6 * (1.0 + rep.lhs))
    row["passed"] = bool(rep.discrepancy <= allowed and rep.min_integrand >= -1e-12 * max(1.0, rep.lhs))
    return row


def cmd_hardy_stein(args) -> Outcome:
    ps = _p_list(args.p)
    if not args.tol > 0:
        raise ConfigError("--tol must be positive")
    if args.model is not None:
        model, u = _model_and_u(args)
        killing = bool(np.any(model.L.sum(axis=1) < 0))
        rows = _pmap(lambda p: _hs_row(0, model, killing, u, p, args.tol), ps)
    else:
        sizes = parse_range(args.sizes)
        kill = _killing(args.killing)

        def one(i):
            inst = batch.make_instance(args.seed, i, sizes, kill)
            return _hs_row(i, inst.model, inst.killing, inst.u, ps[i % len(ps)], args.tol)

        rows = _pmap(one, range(args.count))
    bad = sum(not r["passed"] for r in rows)
    summary = [f"instances: {len(rows)}"]
    if len(rows) == 1:
        r = rows[0]
        summary.append(f"lhs {r['lhs']!r}, rhs {r['rhs_total']!r} (jump {r['rhs_jump']!r}, kill {r['rhs_kill']!r})")
    summary.append(f"worst discrepancy: {max((r['discrepancy'] for r in rows), default=0):.3e}")
    summary.append(f"violations: {bad}")
    return Outcome(HS_FIELDS, rows, bad, summary)


ORDER_MIN = 1.9


def cmd_euclid_study(args) -> Outcome:
    ps = _p_list(args.p)
    grids = parse_ints(args.grids)
    if any(N < 2 for N in grids):
        raise ConfigError("grid sizes must be >= 2")
    if not args.offset > 1.0:
        raise ConfigError("--offset must exceed 1 so that u stays positive")
    c = args.offset

    def one(p):
        return p, local_constant_study(lambda x: c + np.sin(x), np.cos, p, grids)

    rows, bad, summary = [], 0, []
    for p, table in _pmap(one, ps):
        orders = [r.observed_order for r in table if not math.isnan(r.observed_order)]
        worst = min(orders, default=math.nan)
        bad += sum(o < ORDER_MIN for o in orders)
        summary.append(f"p = {p:g}: final error {table[-1].error:.3e}, lowest observed order {worst:.4f}")
        for r in table:
            rows.append({"p": p, **r.record()})
    summary.append(f"violations: {bad}")
    return Outcome(["p", *ConvergenceRow.FIELDS], rows, bad, summary)


def cmd_decay_curve(args) -> Outcome:
    p = _p_list(args.p)[0]
    ts = parse_floats(args.t_grid)
    if any(t < 0 for t in ts) or any(b <= a for a, b in zip(ts, ts[1:])):
        raise ConfigError("--t-grid must be increasing and nonnegative")
    if args.model is not None:
        model, u = _model_and_u(args)
    else:
        inst = batch.make_instance(args.seed, 0, (args.size, args.size), _killing(args.killing))
        model, u = inst.model, inst.u
    pts = decay_curve(spectral_decompose(model), u, p, ts)
    rows = [{"t": q.t, "norm_p": q.norm_p, "dissipation": q.dissipation} for q in pts]
    slack = 1e-12 * max(1.0, rows[0]["norm_p"])
    bad = sum(b["norm_p"] > a["norm_p"] + slack for a, b in zip(rows, rows[1:]))
    bad += sum(r["dissipation"] < -slack for r in rows)
    return Outcome(["t", "norm_p", "dissipation"], rows, bad, [
        f"points: {len(rows)}, ||u||_p^p = {rows[0]['norm_p']:.6g} -> {rows[-1]['norm_p']:.6g}",
        f"violations: {bad}",
    ])


HANDLERS = {
    "check-identity": cmd_check_identity,
    "check-comparability": cmd_check_comparability,
    "check-lemmas": cmd_check_lemmas,
    "approx-convergence": cmd_approx_convergence,
    "hardy-stein": cmd_hardy_stein,
    "euclid-study": cmd_euclid_study,
    "decay-curve": cmd_decay_curve,
}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbforms", description="Checks and experiments for Sobolev-Bregman forms.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0, help="batch seed (default 0)")
        sp.add_argument("--output", "-o", help="write results here ('-' for stdout)")
        sp.add_argument("--format", choices=FORMATS, default="csv")

    def instances(sp, count, sizes, p, killing="both"):
        sp.add_argument("--count", type=int, default=count, help=f"number of instances (default {count})")
        sp.add_argument("--sizes", default=sizes, help=f"state-count range LO..HI (default {sizes})")
        sp.add_argument("--p", default=p, help=f"exponents, comma list or a:b:step (default {p})")
        sp.add_argument("--killing", choices=("both", "on", "off"), default=killing,
                        help="killing on odd instances only (both), on all, or on none")

    for name, helptext in (
        ("check-identity", "generator route vs jump/killing breakdown"),
        ("check-comparability", "two-sided bound by the energy of u^<p/2>"),
    ):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        instances(sp, 200, "2..40", "1.1,1.5,2,2.5,3,5,10")

    sp = sub.add_parser("check-lemmas", help="sweep the scalar inequalities")
    common(sp)
    sp.add_argument("--samples", type=int, default=1_000_000, help="samples per distribution")
    sp.add_argument("--alphas", default="0.1:1.9:0.1")
    sp.add_argument("--ns", default="2,4,16,64")
    sp.add_argument("--distributions", default=",".join(DISTRIBUTIONS))

    sp = sub.add_parser("approx-convergence", help="t -> 0 limit of the approximate forms")
    common(sp)
    instances(sp, 20, "2..20", "2", killing="on")

    sp = sub.add_parser("hardy-stein", help="mass drop vs integrated dissipation")
    common(sp)
    instances(sp, 100, "2..40", "1.1,1.5,2,3,5")
    sp.add_argument("--model", help="JSON model file (otherwise a random batch)")
    sp.add_argument("--u", help="comma-separated initial function, required with --model")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)

    sp = sub.add_parser("euclid-study", help="grid convergence of E_p for u = c + sin on [0, 2pi]")
    common(sp)
    sp.add_argument("--p", default="1.5,2,3")
    sp.add_argument("--grids", default="32,64,128,256,512")
    sp.add_argument("--offset", type=float, default=2.0, help="the constant c (default 2)")

    sp = sub.add_parser("decay-curve", help="tabulate ||T_t u||_p^p and its dissipation")
    common(sp)
    sp.add_argument("--model")
    sp.add_argument("--u")
    sp.add_argument("--p", default="2")
    sp.add_argument("--t-grid", default="0:5:0.25")
    sp.add_argument("--size", type=int, default=10, help="states of the random model (default 10)")
    sp.add_argument("--killing", choices=("both", "on", "off"), default="off")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "count", 1) < 1:
            raise ConfigError("--count must be positive")
        if getattr(args, "size", 1) < 1:
            raise ConfigError("--size must be positive")
        outcome = HANDLERS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, InvalidModelError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ModelFileError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    if args.output is not None:
        meta = {"command": args.command, "seed": args.seed}
        try:
            emit(outcome.rows, outcome.fields, args.format, args.output, meta)
        except OSError as exc:
            print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
            return EXIT_IO
    out = sys.stderr if args.output == "-" else sys.stdout
    print(f"{args.command}:", file=out)
    for line in outcome.summary:
        print(f"  {line}", file=out)
    return EXIT_VIOLATION if outcome.violations else EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
