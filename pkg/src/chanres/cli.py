"""Batch command-line entry point.

Three commands:

  analyze: validate a JSON channel spec and report its measures, powers
           and class memberships.
  verify:  run one of the named randomized verification suites.
  sweep:   tabulate powers and game values over a generated channel set.

Reports are deterministic functions of the configuration (seed included),
so repeated runs emit byte-identical output.  Exit codes: 0 success,
1 verification-suite failure, 2 input validation failure, 3 solver
non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .errors import MaxIterations, NoConvergence, ValidationError
from .measures import DistanceMeasure, c_l1, c_robustness, c_trace
from .objects import (
    DensityMatrix,
    FreeChannelClass,
    apply_channel,
    dephasing_channel,
    haar_random_unitary,
    identity_channel,
    is_dio,
    is_mio,
    load_channel,
    random_channel,
    unitary_channel,
)
from .discrimination import explore_coherent_probe_advantage, p_succ_free_probes
from .power import generating_power, increasing_power_search, qubit_unitary_power
from .suites import PRNG_NAME, SUITE_TAGS, render_csv, render_json, report_csv, run_suite

EXIT_OK = 0
EXIT_SUITE_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _emit(data: bytes, path: str | None):
    if path:
        with open(path, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)


def _common_flags(sub):
    sub.add_argument("--dim", type=int, default=2)
    sub.add_argument("--tol", type=float, default=1e-6)
    sub.add_argument("--seed", type=int, default=7)
    sub.add_argument("--trials", type=int, default=20)
    sub.add_argument("--restarts", type=int, default=8)
    sub.add_argument("--class", dest="cls", choices=["mio", "dio"], default="mio")
    sub.add_argument("--measure", choices=["trace", "fidelity", "dmax"], default="trace")
    sub.add_argument("--out", choices=["json", "csv"], default="json")
    sub.add_argument("--output", default=None, help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chanres", description=__doc__)
    parser.add_argument("--version", action="version", version=f"chanres {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    analyze = subs.add_parser("analyze", help="measure a channel from a JSON spec")
    analyze.add_argument("--input", required=True, help="channel spec JSON path")
    _common_flags(analyze)

    verify = subs.add_parser("verify", help="run a named verification suite")
    verify.add_argument("tag", choices=list(SUITE_TAGS))
    _common_flags(verify)

    sweep = subs.add_parser("sweep", help="tabulate powers over generated channels")
    sweep.add_argument("--kind", choices=["haar-unitary", "random-channel"], default="haar-unitary")
    sweep.add_argument("--count", type=int, default=10)
    sweep.add_argument(
        "--include",
        action="append",
        default=[],
        choices=["identity", "dephasing", "fourier"],
        help="append a named channel to the sweep (repeatable)",
    )
    sweep.add_argument("--probe-restarts", type=int, default=2)
    sweep.add_argument("--probe-maxfev", type=int, default=12)
    _common_flags(sweep)
    return parser


# ---------------------------------------------------------------------------
# analyze


def cmd_analyze(args) -> int:
    try:
        channel = load_channel(args.input)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValidationError as exc:
        print(f"validation failure ({exc.invariant}): {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if channel.dim_in != channel.dim_out:
        print("validation failure (square_channel): analyze needs dim_in == dim_out", file=sys.stderr)
        return EXIT_VALIDATION

    try:
        probes = []
        for i in range(channel.dim_in):
            out = apply_channel(channel, DensityMatrix.basis_state(channel.dim_in, i))
            res = c_trace(out, tol=args.tol)
            probes.append(
                {
                    "basis_index": i,
                    "c_l1": c_l1(out),
                    "c_trace": res.value,
                    "c_trace_gap": res.solution.gap,
                    "c_robustness": c_robustness(out, tol=args.tol),
                }
            )
        power = generating_power(channel, DistanceMeasure.parse(args.measure), tol=args.tol)
        found, _ = increasing_power_search(
            channel,
            DistanceMeasure.parse(args.measure),
            restarts=args.restarts,
            rng=args.seed,
            tol=args.tol,
        )
    except (MaxIterations, NoConvergence) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER

    payload = {
        "command": "analyze",
        "version": __version__,
        "prng": PRNG_NAME,
        "config": {
            "input": args.input,
            "tol": args.tol,
            "seed": args.seed,
            "restarts": args.restarts,
            "measure": args.measure,
        },
        "channel": {
            "name": channel.name,
            "dim_in": channel.dim_in,
            "dim_out": channel.dim_out,
            "is_mio": is_mio(channel),
            "is_dio": is_dio(channel),
        },
        "basis_probes": probes,
        "generating_power": power.generating,
        "generating_power_gap": power.certificate_gap,
        "increasing_power_search": found,
    }
    if args.out == "json":
        _emit(render_json(payload), args.output)
    else:
        flat = {
            "name": channel.name or "",
            "dim": channel.dim_in,
            "is_mio": payload["channel"]["is_mio"],
            "is_dio": payload["channel"]["is_dio"],
            "generating_power": power.generating,
            "increasing_power_search": found,
        }
        _emit(render_csv([flat], payload["config"]), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args) -> int:
    report = run_suite(
        args.tag,
        dim=args.dim,
        trials=args.trials,
        seed=args.seed,
        tol=args.tol,
        cls=args.cls,
        measure=args.measure,
        restarts=args.restarts,
    )
    if args.out == "json":
        _emit(render_json(report.to_dict()), args.output)
    else:
        _emit(report_csv(report), args.output)
    return EXIT_OK if report.passed else EXIT_SUITE_FAILURE


# ---------------------------------------------------------------------------
# sweep


def _fourier_unitary(d: int) -> np.ndarray:
    idx = np.arange(d)
    return np.exp(2j * np.pi * np.outer(idx, idx) / d) / np.sqrt(d)


def _named_channel(name: str, dim: int):
    if name == "identity":
        return identity_channel(dim)
    if name == "dephasing":
        return dephasing_channel(dim)
    if name == "fourier":
        return unitary_channel(_fourier_unitary(dim), name="fourier")
    raise ValueError(name)


def cmd_sweep(args) -> int:
    rng = np.random.default_rng(args.seed)
    channels = []
    for name in args.include:
        channels.append((name, _named_channel(name, args.dim)))
    for k in range(args.count):
        if args.kind == "haar-unitary":
            u = haar_random_unitary(args.dim, rng)
            channels.append((f"haar-{k}", unitary_channel(u, name=f"haar-{k}")))
        else:
            channels.append((f"random-{k}", random_channel(args.dim, rng, kraus_rank=args.dim)))

    free_class = FreeChannelClass.from_tag(args.cls, args.dim)
    closed_form_col = args.kind == "haar-unitary" and args.dim == 2
    rows = []
    any_failed = False
    for idx, (name, channel) in enumerate(channels):
        row = {
            "id": idx,
            "name": name,
            "generating_power": float("nan"),
            "p_free_probes": float("nan"),
            "best_probe_value": float("nan"),
            "bound_slack": float("nan"),
            "status": "ok",
        }
        if closed_form_col:
            row["closed_form"] = float("nan")
        try:
            power = generating_power(channel, tol=args.tol)
            free_value = p_succ_free_probes(channel, free_class, tol=args.tol, cross_check=False)
            probe_rng = np.random.default_rng(args.seed + 1000 + idx)
            best = explore_coherent_probe_advantage(
                channel,
                free_class,
                restarts=args.probe_restarts,
                rng=probe_rng,
                tol=args.tol,
                maxfev=args.probe_maxfev,
            )
            probe_measure = c_trace(best.probe, tol=args.tol).value
            ceiling = free_value.value + 0.5 * probe_measure
            row.update(
                {
                    "generating_power": power.generating,
                    "p_free_probes": free_value.value,
                    "best_probe_value": best.p_succ,
                    "bound_slack": ceiling - best.p_succ,
                }
            )
            if closed_form_col and channel.kraus is not None and len(channel.kraus) == 1:
                row["closed_form"] = qubit_unitary_power(channel.kraus[0])
        except (MaxIterations, NoConvergence) as exc:
            any_failed = True
            row["status"] = f"solver-failure: {type(exc).__name__}"
        rows.append(row)

    meta = {
        "command": "sweep",
        "kind": args.kind,
        "count": args.count,
        "dim": args.dim,
        "seed": args.seed,
        "class": args.cls,
        "tol": args.tol,
        "prng": PRNG_NAME,
        "version": __version__,
    }
    if args.out == "csv":
        _emit(render_csv(rows, meta), args.output)
    else:
        _emit(render_json({"meta": meta, "rows": rows}), args.output)
    return EXIT_SOLVER if any_failed else EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "analyze":
        return cmd_analyze(args)
    if args.command == "verify":
        return cmd_verify(args)
    return cmd_sweep(args)


if __name__ == "__main__":
    sys.exit(main())
