"""Command-line entry point: ``fracwave <subcommand> [flags]``.

Exit codes: 0 success, 1 invalid input (including malformed flags),
2 numerical failure. JSON output carries ``"schema": 1``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from importlib import resources

import numpy as np

from .covariance import WaveModel
from .errors import NumericalError, ValidationError
from .estimators import METHODS, estimate
from .experiments import (
    SCHEMA,
    ExperimentConfig,
    clt_diagnostic,
    histogram_csv,
    noncentral_diagnostic,
    run_mc,
)
from .filters import parse_filter
from .limits import (
    DEFAULT_TOL,
    LimitConstants,
    cumulant_limit,
    k0_constant,
    sigma2_by_chaos,
    sigma_total,
    theta_matrix,
)
from .sampler import read_slice_csv, sample_slice

PRESETS = ("paper-table-1",)
RATE_NOTE = (
    "Wasserstein-distance rates are not computed; the deterministic rate of "
    "exact_variance_chaos towards its limit is checked instead."
)


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("fracwave").joinpath("data", f"{name}.json").read_text()
    return json.loads(text)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        sys.stderr.write(f"\n{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _filter_arg(text: str):
    try:
        return parse_filter(text)
    except ValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _finite(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fracwave", description="Spatial variations of the fractional stochastic wave equation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, h=True, t=True, n=True, seed=True, fmt="json"):
        if h:
            sp.add_argument("--h", type=_finite, required=True, help="Hurst index in (1/2, 1)")
        if t:
            sp.add_argument("--t", type=_finite, default=3.0, help="observation time t > 1 (default 3)")
        if n:
            sp.add_argument("--n", type=_positive_int, default=1000, help="grid size N (default 1000)")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="integer seed (default 0)")
        if fmt:
            sp.add_argument("--format", choices=("json", "csv"), default=fmt, help=f"output format (default {fmt})")
        sp.add_argument("--out", help="output file (default stdout)")

    sp = sub.add_parser("simulate", help="sample one slice u(t, i/N), i = 0..N")
    common(sp, fmt="csv")

    sp = sub.add_parser("estimate", help="estimate H from a slice CSV or a simulated slice")
    common(sp, h=False)
    sp.add_argument("--h", type=_finite, help="Hurst index used to simulate when --input is absent")
    sp.add_argument("--input", help="slice CSV with columns x,value")
    sp.add_argument("--k", type=_positive_int, default=2, help="power k (default 2)")
    sp.add_argument("--filter", type=_filter_arg, action="append", help="filter, e.g. 1,-2,1 (repeatable; default 1,-1)")
    sp.add_argument("--estimator", choices=METHODS, action="append", help="hat, bar or tilde (repeatable; default bar)")

    sp = sub.add_parser("experiment", help="Monte-Carlo estimator study")
    common(sp, h=False)
    sp.add_argument("--h", type=_finite, action="append", help="true Hurst index (repeatable)")
    sp.add_argument("--preset", choices=PRESETS, help="named reference configuration")
    sp.add_argument("--iters", type=_positive_int, help="replicates M (default 100)")
    sp.add_argument("--k", type=_positive_int, help="power k (default 2)")
    sp.add_argument("--filter", type=_filter_arg, action="append", help="filter (repeatable; default 1,-1)")
    sp.add_argument("--estimator", choices=METHODS, action="append", help="estimator (repeatable; default bar)")
    for a in sp._actions:
        if a.dest in ("t", "n", "seed"):
            a.default = None

    sp = sub.add_parser("constants", help="limit-theorem constants")
    common(sp, n=False, seed=False)
    sp.add_argument("--k", type=_positive_int, default=2, help="power k (default 2)")
    sp.add_argument("--filter", type=_filter_arg, action="append", help="filter (repeatable; default 1,-1)")
    sp.add_argument("--tol", type=_finite, default=DEFAULT_TOL, help=f"series tolerance (default {DEFAULT_TOL:g})")

    sp = sub.add_parser("clt-check", help="variance and normality of sqrt(N-l) V_N")
    common(sp)
    sp.add_argument("--iters", type=_positive_int, default=1000, help="replicates M (default 1000)")
    sp.add_argument("--k", type=_positive_int, default=2, help="power k (default 2)")
    sp.add_argument("--filter", type=_filter_arg, action="append", help="filter (default 1,-1)")
    sp.add_argument("--tol", type=_finite, default=1e-10, help="series tolerance (default 1e-10)")

    sp = sub.add_parser("noncentral-check", help="cumulants of V_N / sqrt(v_N) for H > 3/4")
    common(sp)
    sp.add_argument("--iters", type=_positive_int, default=5000, help="replicates M (default 5000)")
    return p


# ---------------------------------------------------------------------------
# output helpers


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def _dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _flatten(obj, prefix="") -> list[tuple[str, object]]:
    rows = []
    if isinstance(obj, dict):
        for k in sorted(obj):
            rows += _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            rows += _flatten(v, f"{prefix}[{i}]")
    else:
        rows.append((prefix, obj))
    return rows


def _csv_kv(obj) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "value"])
    for k, v in _flatten(_jsonable(obj)):
        w.writerow([k, "" if v is None else (repr(v) if isinstance(v, float) else v)])
    return buf.getvalue()


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args) -> str:
    s = sample_slice(WaveModel(args.h, args.t), args.n, args.seed)
    if args.format == "csv":
        return s.to_csv()
    return _dump_json({
        "schema": SCHEMA, "kind": "slice", "H": args.h, "t": args.t, "N": args.n,
        "seed": args.seed, "x": s.x, "value": s.values,
    })


def cmd_estimate(args) -> str:
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            values = read_slice_csv(fh.read())
        source = {"input": args.input}
    else:
        if args.h is None:
            raise ValidationError("either --input or --h (to simulate) is required")
        values = sample_slice(WaveModel(args.h, args.t), args.n, args.seed).values
        source = {"simulated": {"H": args.h, "t": args.t, "N": args.n, "seed": args.seed}}
    if values.size < 3:
        raise ValidationError("a slice needs at least 3 grid values")
    filters = args.filter or [parse_filter("1,-1")]
    methods = args.estimator or ["bar"]
    results = [estimate(m, values, f, args.k, args.t).to_dict() for m in methods for f in filters]
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["method", "filter", "k", "N", "H_est", "raw", "clamped", "se_asymptotic"])
        for r in results:
            se = r["se_asymptotic"]
            w.writerow([r["method"], r["inputs"]["filter"], r["inputs"]["k"], r["inputs"]["N"],
                        repr(r["H_est"]), repr(r["raw"]), int(r["clamped"]), "" if se is None else repr(se)])
        return buf.getvalue()
    return _dump_json({"schema": SCHEMA, "kind": "estimate", "source": source, "results": results})


def experiment_configs(args) -> tuple[list[ExperimentConfig], dict | None]:
    preset = load_preset(args.preset) if args.preset else None
    base = preset or {}
    hs = args.h or base.get("H_grid")
    if not hs:
        raise ValidationError("give --h or --preset")
    t = args.t if args.t is not None else base.get("t", 3.0)
    N = args.n if args.n is not None else base.get("N", 1000)
    M = args.iters if args.iters is not None else base.get("M", 100)
    k = args.k if args.k is not None else base.get("k", 2)
    seed = args.seed if args.seed is not None else base.get("seed", 0)
    if args.estimator or args.filter or not preset:
        methods = args.estimator or ["bar"]
        filters = args.filter or [parse_filter("1,-1")]
        cells = tuple((m, f.coeffs) for m in methods for f in filters)
    else:
        cells = tuple((m, parse_filter(f).coeffs) for m, f in preset["cells"])
    configs = [ExperimentConfig(H_true=h, t=t, N=N, M=M, seed=seed, k=k, cells=cells) for h in hs]
    return configs, preset


def cmd_experiment(args) -> str:
    configs, preset = experiment_configs(args)
    runs = []
    for cfg in configs:
        rep = run_mc(cfg)
        sys.stderr.write(f"H={cfg.H_true}: {rep.wall_time:.2f} s\n")
        runs.append(rep)
    if args.format == "csv":
        parts = [r.to_csv() for r in runs]
        return parts[0] + "".join(p.split("\n", 1)[1] for p in parts[1:])
    out = {"schema": SCHEMA, "kind": "experiment", "preset": args.preset,
           "runs": [r.to_dict() for r in runs]}
    for r in out["runs"]:
        r.pop("schema")
        r.pop("kind")
    if preset:
        out["reference_means"] = preset.get("reference_means")
        out["reference_mse"] = preset.get("reference_mse")
    return _dump_json(out)


def constants_for(H: float, t: float, filters, k: int, tol: float) -> LimitConstants:
    f = filters[0]
    by_q, total = {}, None
    if H < f.order - 0.25:
        by_q = sigma2_by_chaos(H, f, k, tol)
        total = sigma_total(H, f, k, tol)
    theta = None
    if all(g.order > H + 0.25 for g in filters):
        theta = theta_matrix(H, t, filters, tol).tolist()
    k0, cum = None, {}
    if H > 0.75:
        k0 = k0_constant(H, t)
        cum = {3: cumulant_limit(H, t, 3).value}
    return LimitConstants(H, k, [g.label for g in filters], by_q, total, dict(by_q), theta, k0, cum)


def cmd_constants(args) -> str:
    filters = args.filter or [parse_filter("1,-1")]
    if not 0.5 < args.h < 1:
        raise ValidationError(f"H must lie in (1/2, 1), got {args.h}")
    if not args.t > 0:
        raise ValidationError(f"t must be positive, got {args.t}")
    if not args.tol > 0:
        raise ValidationError("--tol must be positive")
    lc = constants_for(args.h, args.t, filters, args.k, args.tol)
    out = {"schema": SCHEMA, "kind": "constants", "t": args.t, "tol": args.tol, **lc.to_dict()}
    return _csv_kv(out) if args.format == "csv" else _dump_json(out)


def cmd_clt(args) -> str:
    f = (args.filter or [parse_filter("1,-1")])[0]
    d = clt_diagnostic(args.h, args.t, args.n, args.iters, f, args.k, args.seed, args.tol)
    d["note"] = RATE_NOTE
    if args.format == "csv":
        return histogram_csv(d["histogram"])
    return _dump_json(d)


def cmd_noncentral(args) -> str:
    d = noncentral_diagnostic(args.h, args.t, args.n, args.iters, args.seed)
    if args.format == "csv":
        return histogram_csv(d["histogram"])
    return _dump_json(d)


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "experiment": cmd_experiment,
    "constants": cmd_constants,
    "clt-check": cmd_clt,
    "noncentral-check": cmd_noncentral,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = COMMANDS[args.command](args)
    except ValidationError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except NumericalError as exc:
        sys.stderr.write(f"numerical failure: {exc}\n")
        return 2
    _emit(text, args.out)
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
