"""Command-line entry point.

Output is JSON on stdout unless ``--format csv`` is given. Exit status is 0 on
success, 2 for invalid input and 1 when an internal invariant check fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional, Sequence

from . import ghz, hvm, mkc
from .errors import InvariantError, ValidationError
from .experiment import ExperimentConfig, Model, run_experiment
from .pipelines import pipeline_section2, pipeline_section3


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    return str(obj)


def _emit(payload, out) -> None:
    json.dump(payload, out, indent=2, default=_json_default, allow_nan=False)
    out.write("\n")


def _emit_csv(header: Sequence[str], rows, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)


def parse_triplet(text: str) -> ghz.DetectorTriplet:
    """``"t1,p1;t2,p2;t3,p3"`` (theta, phi in radians per detector)."""
    parts = [p for p in text.split(";")]
    if len(parts) != 3:
        raise ValidationError(f"expected three 'theta,phi' pairs separated by ';', got {text!r}")
    dirs = []
    for p in parts:
        try:
            theta, phi = (float(x) for x in p.split(","))
        except ValueError as exc:
            raise ValidationError(f"cannot parse 'theta,phi' from {p!r}") from exc
        dirs.append(ghz.Direction(theta, phi))
    return ghz.DetectorTriplet(*dirs)


def cmd_correlations(args, out) -> None:
    t = parse_triplet(args.triplet)
    _emit({"matrix_value": ghz.correlation(t), "closed_form_value": ghz.correlation_closed_form(t)}, out)


def cmd_epsilon_sweep(args, out) -> None:
    rows = ghz.epsilon_sweep(args.delta_max, args.steps, args.seed)
    if args.format == "csv":
        _emit_csv(["delta", "worst_eps"], rows, out)
    else:
        _emit([{"delta": d, "worst_eps": e} for d, e in rows], out)


def cmd_hvm_parity(args, out) -> None:
    rep = hvm.parity_exhaustive()
    _emit(
        {
            "valuations_checked": rep.checked,
            "product_always_minus_one": True,
            "valuations_with_all_f_plus": rep.all_plus_count,
            "f_patterns": [{"f": list(k), "valuations": n} for k, n in rep.pattern_counts.items()],
            "plus_one_counts": {str(k): n for k, n in rep.plus_one_counts.items()},
        },
        out,
    )


def cmd_hvm_maxmin(args, out) -> None:
    value, witness = hvm.max_min_correlation()
    rep = hvm.model_report(witness)
    _emit(
        {
            "max_min_E": str(value),
            "value": float(value),
            "witness": [
                {"index": i, "valuation": list(hvm.ALL_VALUATIONS[i].signs), "weight": str(w)}
                for i, w in enumerate(witness.exact)
                if w
            ],
            "E": [str(e) for e in rep.E],
            "muA": [str(m) for m in rep.muA],
            "mu_intersection": str(rep.mu_intersection),
        },
        out,
    )


def cmd_mkc_rationals(args, out) -> None:
    dirs = mkc.rational_directions(args.bound)
    if args.format == "csv":
        _emit_csv(["direction", "p1", "p2", "p3", "q"], ((str(d), *d.as_tuple()) for d in dirs), out)
    else:
        _emit({"bound": args.bound, "count": len(dirs), "directions": [str(d) for d in dirs]}, out)


def cmd_section2(args, out) -> None:
    _emit(pipeline_section2(args.delta, args.bound, args.seed), out)


def cmd_section3(args, out) -> None:
    _emit(pipeline_section3(args.eta, args.seed), out)


def cmd_simulate(args, out) -> None:
    cfg = ExperimentConfig(Model(args.model), args.rounds, args.delta, args.seed, args.bound)
    summary, log = run_experiment(cfg)
    payload = summary.as_dict()
    if args.records:
        with open(args.records, "w", encoding="utf-8") as fp:
            payload["records_written"] = log.write_ndjson(fp)
        payload["records"] = args.records
    _emit(payload, out)


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"{text!r} is not a finite number")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mkclab", description="GHZ contextuality toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("correlations", help="GHZ correlation for one detector triplet")
    c.add_argument("--triplet", required=True, help='"t1,p1;t2,p2;t3,p3" in radians')
    c.set_defaults(func=cmd_correlations)

    c = sub.add_parser("epsilon-sweep", help="worst eps over misalignments up to delta-max")
    c.add_argument("--delta-max", type=_finite, required=True)
    c.add_argument("--steps", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_epsilon_sweep)

    h = sub.add_parser("hvm", help="hidden-variable valuation checks").add_subparsers(dest="hvm_command", required=True)
    h.add_parser("parity", help="exhaustive parity check").set_defaults(func=cmd_hvm_parity)
    h.add_parser("maxmin", help="max over distributions of min E_a").set_defaults(func=cmd_hvm_maxmin)

    m = sub.add_parser("mkc", help="rational direction sets").add_subparsers(dest="mkc_command", required=True)
    c = m.add_parser("rationals", help="rational unit vectors up to a denominator bound")
    c.add_argument("--bound", type=int, required=True)
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_mkc_rationals)

    c = sub.add_parser("section2", help="local-detector contradiction report")
    c.add_argument("--delta", type=_finite, required=True)
    c.add_argument("--bound", type=int, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.set_defaults(func=cmd_section2)

    c = sub.add_parser("section3", help="non-local commuting-triplet report")
    c.add_argument("--eta", type=_finite, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.set_defaults(func=cmd_section3)

    c = sub.add_parser("simulate", help="Monte Carlo rounds under one model")
    c.add_argument("--model", choices=[m.value for m in Model], required=True)
    c.add_argument("--rounds", type=int, required=True)
    c.add_argument("--delta", type=_finite, required=True)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--bound", type=int, default=mkc.DEFAULT_BOUND)
    c.add_argument("--records", metavar="PATH", help="write one JSON object per round")
    c.set_defaults(func=cmd_simulate)
    return p


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors with status 2
        return int(exc.code or 0)
    buf = io.StringIO()
    try:
        args.func(args, buf)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InvariantError as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out.write(buf.getvalue())
    return 0


if __name__ == "__main__":
    sys.exit(main())
