"""Command-line front end: simulate paths, estimate drift, run experiments.

Configuration files are flat ``key = value`` text (lists comma-separated,
'#' comments); command-line overrides win over file values.  Every output
is a CSV with 17-significant-digit values, and a given flag set (seed
included) reproduces identical bytes.
"""

from __future__ import annotations

import argparse
import os
import sys

from .estimator import EstimatorConfig, minimize_l1
from .harness import (
    KINDS,
    SCHEMAS,
    ExperimentConfig,
    band_summaries,
    run_experiment,
    write_rows_csv,
)
from .hermite import (
    HermiteSpec,
    read_path_csv,
    simulate_fbm,
    simulate_kernel,
    simulate_partial_sum,
    write_path_csv,
)
from .ou import OuSpec, exact_solution
from .rng import make_rng

__all__ = ["main"]


def _float_list(text: str) -> tuple:
    return tuple(float(part) for part in str(text).split(","))


_FIELD_PARSERS = {
    "kind": str,
    "theta0": float,
    "x0": float,
    "q": int,
    "H": float,
    "n": int,
    "m": int,
    "eps": _float_list,
    "delta": _float_list,
    "T": _float_list,
    "p": _float_list,
    "replications": int,
    "seed": int,
    "out_dir": str,
    "ks_samples": int,
    "theta_lo": float,
    "theta_hi": float,
    "coarse_points": int,
    "refine_tol": float,
    "generator": str,
}


class CliError(Exception):
    """User-facing CLI failure; the message names the offending input."""


def _parse_config_file(path: str) -> dict:
    if not os.path.exists(path):
        raise CliError(f"config file not found: {path}")
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _coerce_config(raw: dict) -> dict:
    out = {}
    for key, value in raw.items():
        if key not in _FIELD_PARSERS:
            valid = ", ".join(sorted(_FIELD_PARSERS))
            raise CliError(f"unknown config field {key!r}; valid fields: {valid}")
        try:
            out[key] = _FIELD_PARSERS[key](value)
        except ValueError as exc:
            raise CliError(f"config field {key!r}: cannot parse {value!r} ({exc})") from exc
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hermite-ou",
        description="Hermite-driven OU simulation and minimum-L1 drift estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write one simulated path as CSV")
    sim.add_argument("--process", choices=("hermite", "ou"), required=True)
    sim.add_argument("--q", type=int, default=1)
    sim.add_argument("--H", type=float, default=0.7)
    sim.add_argument("--n", type=int, default=512)
    sim.add_argument("--m", type=int, default=32, help="partial-sum refinement factor")
    sim.add_argument("--t-max", type=float, default=1.0)
    sim.add_argument(
        "--generator", choices=("auto", "fbm", "partial-sum", "kernel"), default="auto"
    )
    sim.add_argument("--trunc", type=float, default=None, help="kernel truncation (default 10 t_max)")
    sim.add_argument("--theta", type=float, default=1.0, help="OU drift")
    sim.add_argument("--eps", type=float, default=0.1, help="OU noise scale")
    sim.add_argument("--x0", type=float, default=1.0, help="OU initial value")
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--stream", type=int, default=0)
    sim.add_argument("--out", default="path.csv")

    est = sub.add_parser("estimate", help="minimum-L1 drift estimate from a path CSV")
    est.add_argument("--input", required=True)
    est.add_argument("--x0", type=float, required=True)
    est.add_argument("--theta-lo", type=float, default=-2.0)
    est.add_argument("--theta-hi", type=float, default=2.0)
    est.add_argument("--coarse-points", type=int, default=201)
    est.add_argument("--refine-tol", type=float, default=1e-8)
    est.add_argument("--out", default=None, help="optionally write the result as CSV")

    exp = sub.add_parser("experiment", help="run a Monte Carlo experiment from a config file")
    exp.add_argument("--kind", choices=KINDS, default=None, help="overrides the config file")
    exp.add_argument("--config", required=True)
    exp.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field (repeatable; flags win over the file)",
    )
    exp.add_argument("--seed", type=int, default=None)
    exp.add_argument("--out-dir", default=None)
    return parser


def _simulate_driver(args, rng):
    generator = args.generator
    if generator == "auto":
        generator = "fbm" if args.q == 1 else "partial-sum"
    if args.n < 2:
        raise CliError(f"--n must be >= 2, got {args.n}")
    if generator == "fbm":
        if args.q != 1:
            raise CliError(f"--generator fbm requires --q 1, got q={args.q}")
        if not 0.0 < args.H < 1.0:
            raise CliError(f"--H must be in (0, 1) for the fbm generator, got {args.H}")
        return simulate_fbm(args.H, args.n, args.t_max, rng)
    try:
        spec = HermiteSpec(args.q, args.H)
    except ValueError as exc:
        field = "--q" if "order q" in str(exc) else "--H"
        raise CliError(f"{field}: {exc}") from exc
    if generator == "partial-sum":
        if args.m < 1:
            raise CliError(f"--m must be >= 1, got {args.m}")
        return simulate_partial_sum(spec, args.n, args.m, args.t_max, rng)
    trunc = args.trunc if args.trunc is not None else 10.0 * args.t_max
    if trunc <= 0:
        raise CliError(f"--trunc must be positive, got {trunc}")
    return simulate_kernel(spec, args.n, trunc, rng, t_max=args.t_max)


def cmd_simulate(args) -> int:
    if args.t_max <= 0:
        raise CliError(f"--t-max must be positive, got {args.t_max}")
    rng = make_rng(args.seed, args.stream)
    z = _simulate_driver(args, rng)
    if args.process == "ou":
        if args.eps <= 0:
            raise CliError(f"--eps must be positive, got {args.eps}")
        path = exact_solution(OuSpec(args.theta, args.eps, args.x0), z)
    else:
        path = z
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        write_path_csv(path, fh)
    print(f"wrote {args.out} ({path.n + 1} grid points, generator {path.provenance.tag})")
    return 0


def cmd_estimate(args) -> int:
    if not os.path.exists(args.input):
        raise CliError(f"input path CSV not found: {args.input}")
    if not args.theta_lo < args.theta_hi:
        raise CliError(
            f"--theta-lo must be below --theta-hi, got [{args.theta_lo}, {args.theta_hi}]"
        )
    with open(args.input, "r", encoding="utf-8") as fh:
        try:
            path = read_path_csv(fh)
        except ValueError as exc:
            raise CliError(f"malformed path CSV {args.input}: {exc}") from exc
    cfg = EstimatorConfig(args.theta_lo, args.theta_hi, args.coarse_points, args.refine_tol)
    res = minimize_l1(path, args.x0, cfg)
    print(f"theta_hat={res.theta_hat:.17g}")
    print(f"objective={res.objective_value:.17g}")
    print(f"n_evals={res.n_evals}")
    print(f"bracket=[{res.bracket[0]:.17g},{res.bracket[1]:.17g}]")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("theta_hat,objective_value,n_evals,bracket_lo,bracket_hi\n")
            fh.write(
                f"{res.theta_hat:.17g},{res.objective_value:.17g},{res.n_evals},"
                f"{res.bracket[0]:.17g},{res.bracket[1]:.17g}\n"
            )
    return 0


def _validate_csv(path: str, kind: str) -> None:
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        expected = ",".join(SCHEMAS[kind])
        if header != expected:
            raise CliError(f"{path}: header {header!r} does not match schema {expected!r}")
        count = 0
        for lineno, line in enumerate(fh, start=2):
            cells = line.rstrip("\n").split(",")
            if len(cells) != len(SCHEMAS[kind]):
                raise CliError(f"{path}:{lineno}: expected {len(SCHEMAS[kind])} columns")
            for cell in cells:
                float(cell)
            count += 1
        if count == 0:
            raise CliError(f"{path}: no data rows were written")


def cmd_experiment(args) -> int:
    raw = _parse_config_file(args.config)
    for item in args.overrides:
        if "=" not in item:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        raw[key.strip()] = value.strip()
    if args.kind is not None:
        raw["kind"] = args.kind
    if args.seed is not None:
        raw["seed"] = str(args.seed)
    if args.out_dir is not None:
        raw["out_dir"] = args.out_dir
    if "kind" not in raw:
        raise CliError(f"experiment kind missing; pass --kind or set it in the config "
                       f"(valid kinds: {', '.join(KINDS)})")
    try:
        cfg = ExperimentConfig(**_coerce_config(raw))
    except (TypeError, ValueError) as exc:
        raise CliError(f"invalid experiment configuration: {exc}") from exc
    rows = run_experiment(cfg)
    os.makedirs(cfg.out_dir, exist_ok=True)
    out_path = os.path.join(cfg.out_dir, f"{cfg.kind}.csv")
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        write_rows_csv(rows, cfg.kind, fh)
    _validate_csv(out_path, cfg.kind)
    print(f"wrote {out_path} ({len(rows)} rows)")
    for name, passed, detail in band_summaries(cfg.kind, rows, wide_audit=cfg.q >= 2):
        print(f"band {name}: {'PASS' if passed else 'FAIL'} ({detail})")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {"simulate": cmd_simulate, "estimate": cmd_estimate, "experiment": cmd_experiment}
    try:
        return handlers[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
