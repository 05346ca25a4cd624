"""Command-line front end.

    hfes estimate     --input data.csv [--hac B]
    hfes sensitivity  --input data.csv [--config run.cfg] [--rho-grid ...] [--reps N] [--out-dir DIR]
    hfes diagnose     --input data.csv [--series NAME=FILE[:COLUMN] ...] [--out-dir DIR]
    hfes simulate     --spec sim.toml --out sim.csv
    hfes oracle-check --spec spec.toml --sweep 1,10,100,1000 [--out sweep.csv]
    hfes report       --inputs a.csv b.csv --out report.md

Every subcommand takes ``--seed`` (default from $HFES_SEED) and stamps the
tool version, seed and a SHA-256 digest of its inputs at the top of every
output. Exit codes: 0 success, 2 invalid input, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path
from typing import Sequence

from . import __version__, diagnostics, oracle, sensitivity
from .data_io import (
    Criterion,
    EndogeneityForm,
    RunConfig,
    default_seed,
    load_dataset,
    load_run_config,
    write_dataset,
)
from .dgp import (
    LeakageParams,
    LinearSemParams,
    PotentialOutcomeSpec,
    simulate_leakage_paths,
    simulate_linear_sem,
    simulate_potential_system,
    simulated_dataset,
)
from .errors import HfesError, InvalidConfig, ValidationError
from .estimator import event_study_estimate

try:  # Python 3.11+
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 itself; keep it but print the usage contract
        self.print_usage(sys.stderr)
        raise UsageError(message)


def digest(paths: Sequence[str | Path]) -> str:
    h = hashlib.sha256()
    for p in paths:
        h.update(Path(p).name.encode())
        h.update(b"\0")
        h.update(Path(p).read_bytes())
    return h.hexdigest()[:16]


def header(seed: int, inputs: Sequence[str | Path], command: str) -> dict:
    return {"tool": "hfes", "version": __version__, "command": command, "seed": seed,
            "input_digest": digest(inputs)}


def header_line(h: dict) -> str:
    return " ".join(f"{k}={v}" for k, v in h.items())


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def _json(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def _load_toml(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}")


def _grid(raw: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise InvalidConfig(f"cannot parse grid {raw!r}")


# --------------------------------------------------------------------------
# subcommands


def cmd_estimate(args) -> int:
    ds = load_dataset(args.input)
    res = event_study_estimate(ds, hac_bandwidth=args.hac)
    out = {"header": header(args.seed, [args.input], "estimate"), **res.to_dict()}
    _emit(_json(out), args.out)
    return 0


def _run_config(args) -> RunConfig:
    flags = {
        "seed": args.seed,
        "replications": args.reps,
        "rho_grid": args.rho_grid,
        "delta_grid": args.delta_grid,
        "criterion": args.criterion,
        "endogeneity_form": args.form,
        "beta0": args.beta0,
        "delta_max": args.delta_max,
    }
    overrides = {k: v for k, v in flags.items() if v is not None}
    if args.no_rho_star:
        overrides["rho_star"] = False
    for key in ("rho_grid", "delta_grid"):
        if key in overrides:
            overrides[key] = _grid(overrides[key])
    if args.config:
        return load_run_config(args.config, **overrides)
    try:
        return RunConfig(**overrides)
    except InvalidConfig:
        raise
    except ValueError as exc:
        raise InvalidConfig(str(exc))


def cmd_sensitivity(args) -> int:
    cfg = _run_config(args)
    inputs = [args.input] + ([args.config] if args.config else [])
    h = header(cfg.seed, inputs, "sensitivity")
    ds = load_dataset(args.input)
    cal = sensitivity.calibrate(ds, beta0=cfg.beta0)
    report = sensitivity.sensitivity_report(cal, cfg)
    payload = _json({"header": h, **report.to_dict()})
    if args.out_dir is None:
        _emit(payload, None)
        return 0
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(payload, encoding="utf-8")
    (out / "cells.csv").write_text(report.cells_csv([header_line(h)]), encoding="utf-8")
    (out / "delta_star.csv").write_text(report.delta_star_csv([header_line(h)]), encoding="utf-8")
    return 0


def _read_series(spec: str) -> tuple[str, list[float], str]:
    if "=" not in spec:
        raise InvalidConfig(f"--series expects NAME=FILE[:COLUMN], got {spec!r}")
    name, rest = spec.split("=", 1)
    path, _, column = rest.partition(":")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise ValidationError(f"{path} is empty")
    head, body = rows[0], rows[1:]
    col = head.index(column) if column else 0
    if column and column not in head:
        raise ValidationError(f"column {column!r} not in {path}")
    try:
        return name, [float(r[col]) for r in body], path
    except ValueError as exc:
        raise ValidationError(f"{path}: {exc}")


def cmd_diagnose(args) -> int:
    series = [_read_series(s) for s in args.series or []]
    inputs = [args.input] + [p for _, _, p in series]
    h = header_line(header(args.seed, inputs, "diagnose"))
    ds = load_dataset(args.input)
    plan = diagnostics.window_plan(ds.t_p, ds.t_c)
    outputs = {
        "panel_a.csv": diagnostics.panel_a_csv(diagnostics.subsample_variances(ds), [h, f"plan {plan}"]),
    }
    try:
        outputs["panel_b.csv"] = diagnostics.panel_b_csv(diagnostics.pre_announcement_variances(ds), [h])
    except ValidationError as exc:
        outputs["panel_b.csv"] = f"# {h}\n# skipped: {exc}\n"
    ladder = diagnostics.autoregression_ladder(diagnostics.ladder_from_dataset(ds))
    outputs["panel_c.csv"] = diagnostics.panel_c_csv(ladder, [h])
    if series:
        rows = diagnostics.variance_comparison({name: vals for name, vals, _ in series})
        outputs["variances.csv"] = diagnostics.variance_table_csv(rows, [h])
    if args.out_dir is None:
        sys.stdout.write("".join(f"## {name}\n{text}" for name, text in outputs.items()))
        return 0
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in outputs.items():
        (out / name).write_text(text, encoding="utf-8")
    return 0


def cmd_simulate(args) -> int:
    conf = _load_toml(args.spec)
    kind = str(conf.pop("kind", "potential")).lower()
    h = header(args.seed, [args.spec], "simulate")
    if kind == "leakage":
        n_paths = int(conf.pop("n_paths", 1))
        p = LeakageParams(**conf)
        paths = simulate_leakage_paths(p, n_paths, args.seed)
        lines = [f"# {header_line(h)}", "path,window,e"]
        lines += [f"{i},{t},{float(v)!r}" for i, row in enumerate(paths) for t, v in enumerate(row)]
        _emit("\n".join(lines) + "\n", args.out)
        return 0
    n_p = int(conf.pop("n_policy", 74))
    n_c = int(conf.pop("n_control", 762))
    control_over = dict(conf.pop("control", {}))
    policy = dict(conf.pop("policy", conf))
    control = policy | control_over
    if kind == "linear_sem":
        pp, pc = LinearSemParams(**policy), LinearSemParams(**control)
        a = simulate_linear_sem(pp, n_p, args.seed)
        b = simulate_linear_sem(pc, n_c, args.seed + 1)
    elif kind == "potential":
        sp, sc = PotentialOutcomeSpec.from_mapping(policy), PotentialOutcomeSpec.from_mapping(control)
        a = simulate_potential_system(sp, n_p, args.seed)
        b = simulate_potential_system(sc, n_c, args.seed + 1)
    else:
        raise InvalidConfig(f"unknown kind {kind!r}; use potential, linear_sem or leakage")
    ds = simulated_dataset(a.y, a.d, b.y, b.d)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_dataset(ds, args.out, [header_line(h)])
    return 0


def cmd_oracle_check(args) -> int:
    spec = PotentialOutcomeSpec.from_mapping(_load_toml(args.spec))
    sweep = _grid(args.sweep)
    rows = oracle.exogeneity_sweep(spec, sweep, args.draws, args.seed, args.grid)
    h = header_line(header(args.seed, [args.spec], "oracle-check"))
    _emit(oracle.sweep_to_csv(rows, [h]), args.out)
    return 0


def cmd_report(args) -> int:
    h = header(args.seed, args.inputs, "report")
    lines = [f"<!-- {header_line(h)} -->", "# Event-study report", ""]
    for path in args.inputs:
        ds = load_dataset(path)
        res = event_study_estimate(ds, hac_bandwidth=args.hac)
        lines += [f"## {Path(path).name}", "", f"T_P = {ds.t_p}, T_C = {ds.t_c}", ""]
        lo, hi = res.ci95
        lines += [
            "| quantity | value |",
            "|---|---|",
            f"| slope | {res.fit.slope:.6g} |",
            f"| intercept | {res.fit.intercept:.6g} |",
            f"| se (HC1) | {res.fit.se_hc1:.6g} |",
            f"| 95% CI | [{lo:.6g}, {hi:.6g}] |",
        ]
        if ds.t_c >= 4 and ds.t_p >= 4:
            cal = sensitivity.calibrate(ds)
            lines.append(f"| Var(D) policy / control | {cal.variance_ratio:.6g} |")
            if cal.variance_ratio >= 1:
                rho_star = sensitivity.find_rho_star(cal, replications=args.reps, seed=args.seed)
                lines.append(f"| rho* (MSE, {args.reps} reps) | {rho_star:.4g} |")
        if ds.t_c >= ds.t_p >= 2:
            rows = diagnostics.subsample_variances(ds)
            lines += ["", "| window | Var(D) treatment | Var(D) control | ratio |", "|---|---|---|---|"]
            for r in rows:
                name = "full" if r.window_index is None else str(r.window_index)
                lines.append(f"| {name} | {r.var_treatment:.6g} | {r.var_control:.6g} | {r.ratio:.4g} |")
        lines.append("")
    _emit("\n".join(lines), args.out)
    return 0


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hfes", description="High-frequency event-study estimation and diagnostics.")
    p.add_argument("--version", action="version", version=f"hfes {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None, help="master seed (default $HFES_SEED)")

    sp = sub.add_parser("estimate", help="event-study regression on the policy sample")
    sp.add_argument("--input", required=True)
    sp.add_argument("--hac", type=int, default=None, help="Bartlett HAC bandwidth")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_estimate)

    sp = sub.add_parser("sensitivity", help="Monte Carlo sensitivity analysis")
    sp.add_argument("--input", required=True)
    sp.add_argument("--config", help="key = value run configuration")
    sp.add_argument("--rho-grid")
    sp.add_argument("--delta-grid")
    sp.add_argument("--reps", type=int)
    sp.add_argument("--criterion", choices=[c.value for c in Criterion])
    sp.add_argument("--form", choices=[f.value for f in EndogeneityForm])
    sp.add_argument("--beta0", type=float)
    sp.add_argument("--delta-max", type=float)
    sp.add_argument("--no-rho-star", action="store_true")
    sp.add_argument("--out-dir")
    common(sp)
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("diagnose", help="variance-ratio and leakage diagnostics")
    sp.add_argument("--input", required=True)
    sp.add_argument("--series", action="append", help="NAME=FILE[:COLUMN] for variance comparison")
    sp.add_argument("--out-dir")
    common(sp)
    sp.set_defaults(func=cmd_diagnose)

    sp = sub.add_parser("simulate", help="simulate a dataset from a TOML spec")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("oracle-check", help="decomposition sweep over policy-shock variances")
    sp.add_argument("--spec", required=True)
    sp.add_argument("--sweep", default="1,10,100,1000")
    sp.add_argument("--draws", type=int, default=10**6)
    sp.add_argument("--grid", type=int, default=oracle.DEFAULT_GRID)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_oracle_check)

    sp = sub.add_parser("report", help="markdown summary of one or more datasets")
    sp.add_argument("--inputs", nargs="+", required=True)
    sp.add_argument("--hac", type=int, default=None)
    sp.add_argument("--reps", type=int, default=1000)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_report)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"hfes: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.seed is None:
            args.seed = default_seed()
        return args.func(args)
    except (ValidationError, FileNotFoundError, KeyError, TypeError, ValueError) as exc:
        print(f"hfes: invalid input: {exc}", file=sys.stderr)
        return 2
    except HfesError as exc:
        print(f"hfes: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"hfes: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
