"""Command-line front end.

Exit codes: 0 success, 2 bad input or unmet precondition, 3 enumeration
cap exceeded, 4 verification failure, 1 anything else (e.g. a solver that
did not converge).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from wiretap import __version__
from wiretap import channels as chans
from wiretap.coding import CodeFn
from wiretap.errors import (
    ConvergenceError,
    PreconditionNotMet,
    SizeCapExceeded,
    SpecParseError,
    WiretapError,
    set_size_cap,
)
from wiretap.metrics import adv_ds, adv_mis, adv_mis_r, adv_rs_r, adv_ss_bounds, induced_matrix
from wiretap.report import _jsonable, binomial_half_width, rng_stream
from wiretap.specs import as_encryption, parse_channel, parse_code, parse_scheme
from wiretap.suites import SUITES, run_suite
from wiretap.xtx import RATE_TABLE_P, XtXScheme, design_u, rate_table

EXIT_OK, EXIT_OTHER, EXIT_INPUT, EXIT_CAP, EXIT_VERIFY = 0, 1, 2, 3, 4

CONFIG_KEYS = ("scheme", "code", "chR", "chA", "mode", "trials", "seed", "tol", "out", "cap", "pairs")


class UsageError(WiretapError):
    pass


# -- output ---------------------------------------------------------------------------


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), obj


def _scalar(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return " ".join(_scalar(x) for x in v)
    return str(v)


def emit(payload: dict, fmt: str, rows: list[dict] | None = None, stream=None) -> None:
    """Write a result.  ``rows`` switches csv/table output to a record table."""
    stream = stream or sys.stdout
    payload = _jsonable(payload)
    if fmt == "json":
        stream.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
        return
    if rows is not None:
        rows = [_jsonable(r) for r in rows]
        cols = list(rows[0].keys()) if rows else []
        if fmt == "csv":
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([_scalar(r[c]) for c in cols])
            stream.write(buf.getvalue())
        else:
            cells = [[_scalar(r[c]) for c in cols] for r in rows]
            widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(cols)]
            stream.write("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip() + "\n")
            for row in cells:
                stream.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")
        return
    pairs = list(_flatten(payload))
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["key", "value"])
        for k, v in pairs:
            w.writerow([k, _scalar(v)])
        stream.write(buf.getvalue())
    else:
        width = max(len(k) for k, _ in pairs)
        for k, v in pairs:
            stream.write(f"{k.ljust(width)}  {_scalar(v)}\n")


def envelope(args, result) -> dict:
    config = {"command": args.command}
    for key in CONFIG_KEYS + ("metric", "suite", "m", "s", "p"):
        if hasattr(args, key):
            config[key] = getattr(args, key)
    return {"version": __version__, "config": config, "result": result}


# -- helpers -------------------------------------------------------------------------


def _require(args, name):
    value = getattr(args, name, None)
    if value is None:
        raise UsageError(f"--{name} is required for {args.command}")
    return value


def _pairs(text):
    if not text:
        return None
    out = []
    for chunk in text.split(";"):
        a, b = chunk.split(",")
        out.append((int(a, 0), int(b, 0)))
    return out


def _is_exact(args) -> bool:
    return args.mode == "exact"


# -- commands ---------------------------------------------------------------------


def cmd_design(args) -> int:
    spec = design_u(args.m, args.s, args.p)
    result = spec.to_json()
    result["meets_target"] = spec.bound_ds <= 2.0**-args.s * (1 + 1e-12)
    emit(envelope(args, result), args.out)
    return EXIT_OK


def cmd_rate_table(args) -> int:
    ps = [float(x) for x in args.p.split(",")] if args.p else list(RATE_TABLE_P)
    rows = rate_table(ps)
    if args.out == "json":
        emit(envelope(args, rows), "json")
    else:
        display = [{"p": r["p"], "rate": r["rate_display"], "rate2": r["rate2_display"]} for r in rows]
        emit({}, args.out, rows=display)
    return EXIT_OK


def cmd_metric(args) -> int:
    name = args.metric
    if name == "rsr":
        code_text = args.code or args.scheme
        if code_text is None:
            raise UsageError("metric rsr needs --code")
        code = parse_code(code_text)
        chA = parse_channel(_require(args, "chA"), code.b)
        report = adv_rs_r(code, chA, "exact" if _is_exact(args) else "mc", args.trials, args.seed)
        emit(envelope(args, report.to_json()), args.out)
        return EXIT_OK
    scheme = parse_scheme(_require(args, "scheme"))
    e = as_encryption(scheme)
    chA = parse_channel(_require(args, "chA"), e.c)
    if name == "ds":
        if _is_exact(args):
            report = adv_ds(e, chA, "exact", pairs=_pairs(args.pairs))
        else:
            pairs = _pairs(args.pairs)
            if not pairs:
                raise UsageError("monte-carlo ds needs --pairs 'M0,M1[;M0,M1...]'")
            report = adv_ds(e, chA, "mc", pairs=pairs, trials=args.trials, seed=args.seed)
        result = report.to_json()
    elif name in ("mis", "misr", "ss"):
        if not _is_exact(args):
            raise UsageError(f"metric {name} has no monte-carlo mode; use --mode exact")
        if name == "mis":
            result = adv_mis(e, chA, tol=args.tol).to_json()
        elif name == "misr":
            result = adv_mis_r(e, chA).to_json()
        else:
            lower, upper, restricted = adv_ss_bounds(e, chA)
            result = {
                "lower": lower.to_json(),
                "upper": upper.to_json(),
                "restricted_exact": restricted.to_json() if restricted else None,
            }
    else:
        raise UsageError(f"unknown metric {name!r}")
    emit(envelope(args, result), args.out)
    return EXIT_OK


def _adversary_first_block(chA: chans.Channel, n1: int):
    """The part of the adversary channel acting on the En1 block, if separable."""
    if isinstance(chA, chans.BSCChannel):
        return chans.make_bsc(chA.p, n1)
    if isinstance(chA, chans.ParallelChannel) and chA.left.in_width == n1:
        return chA.left
    return None


def cmd_simulate(args) -> int:
    scheme = parse_scheme(_require(args, "scheme"))
    e = as_encryption(scheme)
    chR = parse_channel(_require(args, "chR"), e.c)
    chA = parse_channel(_require(args, "chA"), e.c)
    if isinstance(scheme, XtXScheme):
        decoder = scheme.decoder()
    elif isinstance(scheme, CodeFn):
        decoder = scheme
    else:
        raise UsageError("simulate needs an xtx scheme or a code (the receiver must be able to decode)")
    if chR.out_width != decoder.d:
        raise UsageError(f"receiver channel emits {chR.out_width} bits, decoder expects {decoder.d}")
    n = args.trials
    rng = rng_stream(args.seed, 0)
    msgs = rng.integers(0, 1 << e.m, size=n)
    coins = rng.integers(0, 1 << e.r, size=n) if e.r else np.zeros(n, dtype=np.int64)
    xs = e.apply(coins, msgs)
    ys = chR.sample_batch(xs, rng_stream(args.seed, 1))
    zs = chA.sample_batch(xs, rng_stream(args.seed, 2))
    de = float(np.mean(decoder.decode_array(ys) != msgs))
    result = {
        "trials": n,
        "seed": args.seed,
        "de": de,
        "de_half_width": binomial_half_width(de, n),
        "messages": "uniform",
    }
    # maximum-likelihood message guess from the exact induced law, when it fits
    try:
        W = induced_matrix(e, chA)
        guess = np.argmax(W[:, zs], axis=0)
        rec = float(np.mean(guess == msgs))
        result["adversary_message_recovery"] = rec
        result["adversary_message_recovery_half_width"] = binomial_half_width(rec, n)
    except SizeCapExceeded as exc:
        result["adversary_message_recovery"] = None
        result["note"] = str(exc)
    if isinstance(scheme, XtXScheme):
        first = _adversary_first_block(chA, scheme.n1)
        if first is not None:
            us = coins & ((1 << scheme.fam.u) - 1)
            words = scheme.en1.codewords()
            z1 = zs >> scheme.n2
            hits = 0
            step = max(1, (1 << 22) // words.size)
            for start in range(0, n, step):
                lik = first.prob(words[None, :], z1[start : start + step, None])
                hits += int(np.sum(np.argmax(lik, axis=1) == us[start : start + step]))
            rec = hits / n
            result["adversary_u_recovery"] = rec
            result["adversary_u_recovery_half_width"] = binomial_half_width(rec, n)
    emit(envelope(args, result), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = run_suite(args.suite, args.seed)
    failed = [c for c in checks if c.precondition_met and not c.passed]
    records = [c.to_json() for c in checks]
    if args.out == "json":
        emit(envelope(args, {"checks": records, "failures": len(failed)}), "json")
    else:
        rows = [
            {k: r[k] for k in ("relation", "instance", "lhs", "rhs", "slack", "pass")} for r in records
        ]
        emit({}, args.out, rows=rows)
    return EXIT_VERIFY if failed else EXIT_OK


# -- argument handling ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scheme")
    p.add_argument("--code")
    p.add_argument("--chR")
    p.add_argument("--chA")
    p.add_argument("--mode", choices=("exact", "mc"))
    p.add_argument("--exact", dest="mode", action="store_const", const="exact")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--pairs", help="message pairs for ds, e.g. '0,3;1,2'")
    p.add_argument("--out", choices=("json", "csv", "table"))
    p.add_argument("--cap", type=float, help="enumeration cap (outcomes)")
    p.add_argument("--config", help="JSON file with default values for these flags")


DEFAULTS = {"mode": "exact", "trials": 10_000, "seed": 0, "tol": 1e-9, "out": "json"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wiretap", description="Wiretap-channel security metrics and XtX encryption")
    parser.add_argument("--version", action="version", version=f"wiretap {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="pick u for m message bits, s security bits, crossover p")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    _common(p)

    p = sub.add_parser("metric", help="evaluate ds | mis | misr | ss | rsr")
    p.add_argument("metric", choices=("ds", "mis", "misr", "ss", "rsr"))
    _common(p)

    p = sub.add_parser("rate-table", help="limiting rates per crossover probability")
    p.add_argument("--p", help="comma-separated crossover probabilities")
    _common(p)

    p = sub.add_parser("simulate", help="sample sender, receiver and adversary end to end")
    _common(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=SUITES + ("all",))
    _common(p)
    return parser


def _apply_config(args) -> None:
    loaded = {}
    if args.config:
        with open(args.config) as fh:
            loaded = json.load(fh)
        unknown = set(loaded) - set(CONFIG_KEYS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key in CONFIG_KEYS:
        if getattr(args, key, None) is None:
            setattr(args, key, loaded.get(key, DEFAULTS.get(key)))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if args.cap is not None:
            set_size_cap(int(args.cap))
        handler = {
            "design": cmd_design,
            "metric": cmd_metric,
            "rate-table": cmd_rate_table,
            "simulate": cmd_simulate,
            "verify": cmd_verify,
        }[args.command]
        return handler(args)
    except SizeCapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (SpecParseError, UsageError, PreconditionNotMet, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, WiretapError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_OTHER
    finally:
        set_size_cap(None)


if __name__ == "__main__":
    sys.exit(main())
