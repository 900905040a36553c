"""Command-line front end.

Subcommands: analyze, synthesize, estimate, verify, factorize, witness,
diagonal-table.  Output is canonical JSON (sorted keys, floats rounded to
12 significant digits) or CSV, so repeated runs are byte-identical.

Exit codes: 0 success, 1 relation violation, 2 input error,
3 level cap exceeded, 4 construction failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import List, Optional, Sequence

from .errors import ConstructionError, LevelCapError, MtypeLabError
from .factorization import DEFAULT_SCHEDULE, basis_witness, build_factorization, verify_factorization
from .haar import DEFAULT_LEVEL_CAP, HaarCoefficients, analyze, check_level, synthesize
from .ideal_norms import (
    EstimateCache,
    SearchConfig,
    diagonal_type_exact,
    diagonal_type_witness,
    estimate,
    summation_cotype_witness,
    summation_witness_function,
    verify_relations,
)
from .martingales import MDS
from .operators import (
    OperatorSpec,
    diagonal_operator,
    identity_operator,
    log_weights,
    summation_operator,
    zero_operator,
)
from .scalars import parse_rational
from .stepfn import NormKind, StepFunction

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CAP, EXIT_CONSTRUCTION = 0, 1, 2, 3, 4
SEED_ENV = "MTYPE_LAB_SEED"

KIND_NAMES = {
    "haar-type": "haar_type",
    "haar-cotype": "haar_cotype",
    "mtype": "mtype",
    "mcotype": "mcotype",
    "eq-mtype": "eq_mtype",
    "type-p": "type_p",
}


class InputError(MtypeLabError):
    """Bad command-line input or file contents."""


# ---------------------------------------------------------------------------
# parsing helpers


def parse_range(text: str) -> List[int]:
    """``"3"``, ``"1..5"`` or ``"1,2,4"``."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"bad range {text!r}; expected N, A..B or a comma list") from None


def parse_rationals(text: str) -> List[Fraction]:
    try:
        return [parse_rational(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError):
        raise InputError(f"bad rational list {text!r}") from None


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _from_json(cls, obj, path: str):
    try:
        return cls.from_json(obj)
    except MtypeLabError:
        raise
    except (KeyError, TypeError, ValueError, IndexError, ZeroDivisionError) as exc:
        what = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        raise InputError(f"{path}: invalid {cls.__name__}: {what}") from None


def _space(name: str) -> NormKind:
    try:
        return NormKind.from_json(name)
    except (ValueError, KeyError, TypeError):
        raise InputError(f"unknown space {name!r}") from None


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer") from None
    return args.seed


def _config(args) -> SearchConfig:
    if args.budget < 1 or args.cap < 1:
        raise InputError("--budget and --cap must be positive")
    return SearchConfig(seed=_seed(args), enum_budget=args.budget, level_cap=args.cap,
                        restarts=args.restarts, search_levels=args.search_levels)


def _operator(args, n: Optional[int] = None, kind: Optional[str] = None):
    """Resolve the operator for one row; builtins may depend on ``n``."""
    if args.operator:
        return args.operator, _from_json(OperatorSpec, _load_json(args.operator), args.operator)
    b = args.builtin
    if b is None:
        raise InputError("give --operator FILE or --builtin NAME")
    if b == "diagonal":
        if not args.t:
            raise InputError("--builtin diagonal needs --t")
        t = parse_rationals(args.t)
        try:
            return f"diagonal({args.t})", diagonal_operator(t, args.dim)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if b == "log-diagonal":
        size = args.dim or max(n or 1, 1)
        return f"log-diagonal({size})", diagonal_operator(log_weights(size), size)
    # default sizes: 2^n for the summation operator, 2^n - 1 for identity/zero
    if args.dim:
        size = args.dim
    elif n is not None:
        size = (1 << n) if b == "summation" else max((1 << n) - 1, 1)
    else:
        raise InputError(f"--builtin {b} needs --dim or --n")
    if b == "summation":
        return f"summation({size})", summation_operator(size)
    if b == "identity":
        return f"identity({args.space},{size})", identity_operator(size, _space(args.space))
    if b == "zero":
        sp = _space(args.space)
        return f"zero({size})", zero_operator(size, size, sp, sp)
    raise InputError(f"unknown builtin {b!r}")


# ---------------------------------------------------------------------------
# output


def _canon(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {str(k): _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def dumps(obj) -> str:
    return json.dumps(_canon(obj), sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def _emit(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(rows: Sequence[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (f"{v:.12g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_analyze(args) -> int:
    if args.input:
        f = _from_json(StepFunction, _load_json(args.input), args.input)
        if args.n is None:
            raise InputError("--n (finest level) is required with an input file")
        n = parse_range(args.n)[-1]
    elif args.builtin == "summation-witness":
        if args.n is None:
            raise InputError("--n is required")
        n = parse_range(args.n)[-1]
        check_level(n, args.cap)
        f = summation_witness_function(n, args.cap)
    else:
        raise InputError("give an input function file or --builtin summation-witness")
    m = args.m if args.m is not None else 0
    c = analyze(f, m, n, args.cap)
    _emit(args, dumps(c.to_json()))
    return EXIT_OK


def cmd_synthesize(args) -> int:
    c = _from_json(HaarCoefficients, _load_json(args.input), args.input)
    check_level(c.n, args.cap)
    _emit(args, dumps(synthesize(c).to_json()))
    return EXIT_OK


def _kind(args) -> str:
    try:
        return KIND_NAMES[args.kind]
    except KeyError:
        raise InputError(f"unknown kind {args.kind!r}; choose from {sorted(KIND_NAMES)}") from None


def cmd_estimate(args) -> int:
    kind = _kind(args)
    cfg = _config(args)
    ns = parse_range(args.n)
    p = parse_rational(args.p) if args.p else None
    if kind == "type_p" and p is None:
        raise InputError("--kind type-p needs --p")
    rows = []
    for n in ns:
        if kind in ("haar_type", "haar_cotype", "type_p"):
            check_level(n, cfg.level_cap)
        name, T = _operator(args, n, kind)
        if kind in ("haar_type", "haar_cotype"):
            m = args.m if args.m is not None else (1 if kind == "haar_type" else 0)
            index = (m, n)
        else:
            index = n
        try:
            est = estimate(T, kind, index, cfg, p=p)
        except LevelCapError:
            raise
        except (ValueError, TypeError) as exc:
            raise InputError(str(exc)) from None
        row = est.to_json(include_witness=not args.no_witness)
        row["operator"] = name
        rows.append(row)
    if args.format == "csv":
        flat = []
        for r in rows:
            idx = r["index"]
            m, n = (idx if isinstance(idx, list) else ("", idx))
            flat.append({
                "operator": r["operator"], "kind": r["kind"], "m": m, "n": n,
                "lower": r["lower"], "upper": r["upper"], "exact": r["exact"],
                "lower_sq": json.dumps(r["lower_sq"]), "upper_sq": json.dumps(r["upper_sq"]),
                "lower_source": r["lower_source"], "upper_source": r["upper_source"],
                "seed": r["seed"], "budget": r["budget"],
            })
        cols = ["operator", "kind", "m", "n", "lower", "upper", "exact", "lower_sq", "upper_sq",
                "lower_source", "upper_source", "seed", "budget"]
        _emit(args, _csv(flat, cols))
    else:
        _emit(args, dumps({"command": "estimate", "seed": cfg.seed, "budget": cfg.enum_budget, "rows": rows}))
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = _config(args)
    ns = parse_range(args.n)
    for n in ns:
        check_level(n, cfg.level_cap)
    out = []
    ok = True
    caches = {}
    for n in ns:
        name, T = _operator(args, n)
        cache = caches.setdefault(name, EstimateCache(cfg))
        rep = verify_relations(T, n, cfg, cache)
        ok = ok and rep.ok
        entry = rep.to_json()
        entry["operator"] = name
        entry["n"] = n
        out.append(entry)
    if args.format == "csv":
        flat = [dict(operator=e["operator"], **c) for e in out for c in e["checks"]]
        cols = ["operator", "n", "name", "left", "right", "constant_sq", "lower_left", "upper_right", "passed"]
        _emit(args, _csv(flat, cols))
    else:
        _emit(args, dumps({"command": "verify", "seed": cfg.seed, "ok": ok, "reports": out}))
    return EXIT_OK if ok else EXIT_VIOLATION


def _parse_schedule(text: Optional[str]):
    if not text:
        return DEFAULT_SCHEDULE
    sched = parse_rationals(text)
    if not sched or any(not 0 < d < 1 for d in sched):
        raise InputError("delta schedule entries must lie in (0, 1)")
    return tuple(sched)


def cmd_factorize(args) -> int:
    schedule = _parse_schedule(args.delta_schedule)
    g = None
    if args.witness:
        obj = _load_json(args.witness)
        if isinstance(obj, dict) and "mds" in obj:
            mds = _from_json(MDS, obj["mds"], args.witness)
            if obj.get("g") is not None:
                g = _from_json(StepFunction, obj["g"], args.witness)
        else:
            mds = _from_json(MDS, obj, args.witness)
        n = len(mds) // 2
        _, T = _operator(args, n)
    else:
        if args.n is None:
            raise InputError("give --witness FILE or --n")
        n = parse_range(args.n)[-1]
        check_level(2 * n, args.cap)
        if args.builtin == "identity" and not args.dim:
            args.dim = 2 * n
        _, T = _operator(args, n)
        mds = basis_witness(T.cols, n)
    try:
        res = build_factorization(T, mds, g, schedule=schedule)
    except ConstructionError:
        raise
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from None
    rep = verify_factorization(res, T)
    payload = res.to_json()
    payload["verification"] = rep.to_json()
    _emit(args, dumps(payload))
    sys.stderr.write(f"norm product {res.product_bound:.12g}; witness-relative bound 6 sqrt(n)/(delta r) = "
                     f"{res.witness_bound:.12g}\n")
    return EXIT_OK if rep.ok else EXIT_CONSTRUCTION


def cmd_witness(args) -> int:
    n = parse_range(args.n)[-1]
    check_level(n, args.cap)
    if args.name == "summation-cotype":
        c = summation_cotype_witness(n, args.cap)
    elif args.name == "summation-function":
        _emit(args, dumps(summation_witness_function(n, args.cap).to_json()))
        return EXIT_OK
    elif args.name == "diagonal":
        if not args.t:
            raise InputError("--name diagonal needs --t")
        p = parse_rational(args.p) if args.p else 2
        m = args.m if args.m is not None else 1
        try:
            c = diagonal_type_witness(parse_rationals(args.t), n, p, m)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    elif args.name == "basis-martingale":
        dim = args.dim or 2 * n
        _emit(args, dumps(basis_witness(dim, n).to_json()))
        return EXIT_OK
    else:
        raise InputError(f"unknown witness {args.name!r}")
    _emit(args, dumps(c.to_json()))
    return EXIT_OK


def cmd_diagonal_table(args) -> int:
    ns = parse_range(args.n)
    ps = parse_rationals(args.p) if args.p else [Fraction(2)]
    if args.t:
        t = parse_rationals(args.t)
        label = args.t
    else:
        t = log_weights(max(ns))
        label = "1/(1+log k)"
    rows = []
    for n in ns:
        for p in ps:
            try:
                v = diagonal_type_exact(t, n, p)
            except ValueError as exc:
                raise InputError(str(exc)) from None
            rows.append({"t": label, "n": n, "p": str(p), "value": v.value,
                         "value_sq": json.dumps(v.squared.to_json()) if v.squared is not None else ""})
    if args.format == "csv":
        _emit(args, _csv(rows, ["t", "n", "p", "value", "value_sq"]))
    else:
        _emit(args, dumps({"command": "diagonal-table", "rows": rows}))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help=f"search seed (overridden by ${SEED_ENV})")
    p.add_argument("--budget", type=int, default=10 ** 6, help="enumeration budget")
    p.add_argument("--cap", type=int, default=DEFAULT_LEVEL_CAP, help="maximal dyadic level")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write here instead of stdout")


def _operator_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--operator", help="operator JSON file")
    p.add_argument("--builtin", choices=("summation", "diagonal", "log-diagonal", "identity", "zero"))
    p.add_argument("--t", help="diagonal entries, comma separated rationals")
    p.add_argument("--dim", type=int, help="dimension for builtin operators")
    p.add_argument("--space", default="l1", help="l1, l2 or linf for identity/zero")
    p.add_argument("--restarts", type=int, default=8)
    p.add_argument("--search-levels", type=int, default=6)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtype-lab", description="Exact Haar/martingale type and cotype toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="Haar coefficients of a step function")
    p.add_argument("input", nargs="?")
    p.add_argument("--builtin", choices=("summation-witness",))
    p.add_argument("--m", type=int)
    p.add_argument("--n")
    _common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="step function from Haar coefficients")
    p.add_argument("input")
    _common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("estimate", help="certified bounds for an ideal norm")
    _operator_args(p)
    p.add_argument("--kind", required=True, help="|".join(KIND_NAMES))
    p.add_argument("--n", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--p")
    p.add_argument("--no-witness", action="store_true", help="omit witness payloads")
    _common(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="check the relations between ideal norms")
    _operator_args(p)
    p.add_argument("--n", required=True)
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("factorize", help="factor the summation matrix through [L2,T]")
    _operator_args(p)
    p.add_argument("--witness", help="MDS JSON, or {\"mds\": ..., \"g\": ...}")
    p.add_argument("--n")
    p.add_argument("--delta-schedule")
    _common(p)
    p.set_defaults(func=cmd_factorize)

    p = sub.add_parser("witness", help="emit a named witness")
    p.add_argument("--name", required=True,
                   choices=("summation-cotype", "summation-function", "diagonal", "basis-martingale"))
    p.add_argument("--n", required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--t")
    p.add_argument("--p")
    p.add_argument("--dim", type=int)
    _common(p)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("diagonal-table", help="closed-form Haar type p values of diagonal operators")
    p.add_argument("--t", help="entries; default 1/(1+log k)")
    p.add_argument("--n", required=True)
    p.add_argument("--p", help="comma separated exponents in (1,2]")
    _common(p)
    p.set_defaults(func=cmd_diagonal_table)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except LevelCapError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CAP
    except ConstructionError as exc:
        sys.stderr.write(f"construction failed: {exc}\n")
        return EXIT_CONSTRUCTION
    except (InputError, MtypeLabError, ValueError) as exc:
        sys.stderr.write(f"input error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
