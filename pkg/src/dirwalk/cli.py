"""Command-line experiments.

Every subcommand writes one JSON report (sorted keys, the resolved
configuration and seed included).  Exit status: 0 when all checks pass,
1 on a statistical failure, 2 on a usage or configuration error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import _accel
from .applications import (
    AffineFrame,
    beta_params,
    exchange_stationary_test,
    polling_stationary_test,
    simplices_batch,
)
from .characterization import (
    check_c1,
    check_dirichlet_fixed_point,
    check_pushforward,
    charfn_check,
    default_u_grid,
    limit_battery,
)
from .core import row_col_sums
from .ensembles import CyclicEnsemble, DirichletEnsemble, Ensemble, LeaderEnsemble, cyclic, dirichlet, from_dict, leader
from .errors import DirwalkError
from .products import DEFAULT_EPSILON, DEFAULT_MAX_N, limit_rows, positivity_time
from .rng import RngStream
from .sampling import sample_matrix
from .stats import DEFAULT_LEVEL, TestReport, jsonable

SEED_ENV = "DIRWALK_SEED"

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing helpers


def parse_floats(text) -> list[float] | None:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def parse_matrix(text):
    """JSON array of arrays, or ``onesRxC`` for an all-ones matrix."""
    if text is None:
        return None
    if isinstance(text, list):
        return text
    s = str(text).strip()
    if s.startswith("ones"):
        try:
            r, c = (int(v) for v in s[4:].split("x"))
        except ValueError as exc:
            raise UsageError(f"bad shorthand {s!r}; use e.g. ones2x2") from exc
        return np.ones((r, c)).tolist()
    try:
        return json.loads(s)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse matrix {s!r}: {exc}") from exc


def build_ensemble(cfg: dict) -> Ensemble:
    spec = cfg.get("ensemble")
    if spec is None:
        raise UsageError("no ensemble given")
    if isinstance(spec, (dict, list)):
        return from_dict(spec)
    spec = str(spec)
    if spec.startswith("file:"):
        path = Path(spec[5:])
        try:
            return from_dict(json.loads(path.read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot load ensemble from {path}: {exc}") from exc
    if spec in ("cyclic", "leader"):
        d = cfg.get("d")
        if d is None:
            raise UsageError(f"--d is required for the {spec} ensemble")
        return cyclic(int(d)) if spec == "cyclic" else leader(int(d))
    if spec == "dirichlet":
        a = parse_matrix(cfg.get("A"))
        if a is None:
            raise UsageError("--A is required for the dirichlet ensemble")
        return dirichlet(a)
    raise UsageError(f"unknown ensemble {spec!r}")


def default_t(e: Ensemble):
    """Known fixed-point parameters of the built-in families, if any."""
    if isinstance(e, (CyclicEnsemble, LeaderEnsemble)):
        return [2.0] * e.d
    if isinstance(e, DirichletEnsemble):
        return row_col_sums(e.param_matrix())[0].tolist()
    return None


def _resolve_t(cfg, e, key="t"):
    t = parse_floats(cfg.get(key))
    if t is None:
        t = default_t(e)
    if t is None:
        raise UsageError(f"--{key} is required for this ensemble")
    return t


# ---------------------------------------------------------------- commands


def _finish(reports: list[TestReport], extra: dict) -> tuple[dict, bool]:
    passed = all(r.passed for r in reports)
    body = {"tests": [r.to_dict() for r in reports], "pass": passed}
    body.update(extra)
    return body, passed


def cmd_limit(cfg: dict):
    e = build_ensemble(cfg)
    rng = RngStream(cfg["seed"])
    sample = limit_rows(e, int(cfg["replicates"]), float(cfg["epsilon"]), int(cfg["max_n"]), rng)
    rows = sample.converged_rows()
    extra = {
        "converged": sample.n_converged,
        "replicates": int(cfg["replicates"]),
        "steps_mean": float(sample.steps.mean()),
        "steps_max": int(sample.steps.max()),
    }
    all_converged = sample.n_converged == int(cfg["replicates"])
    t = parse_floats(cfg.get("t")) or default_t(e)
    reports = [
        TestReport(
            "limit.converged", float(int(cfg["replicates"]) - sample.n_converged), n=int(cfg["replicates"]),
            threshold=0.0, seed=rng.seed_record(),
        )
    ]
    if all_converged and t is not None and rows.shape[0] >= 1000:
        battery, fit = limit_battery(rows, t, float(cfg["level"]), seed=rng.seed_record())
        reports.append(battery)
        extra["t"] = t
        extra["t_hat"] = None if fit is None else fit.tolist()
        if fit is not None:
            t_arr = np.asarray(t)
            live = t_arr > 0
            extra["max_rel_error"] = float(np.max(np.abs(fit[live] - t_arr[live]) / t_arr[live]))
    body, passed = _finish(reports, extra)
    csv_rows = rows if cfg.get("csv") else None
    return body, passed, csv_rows


def cmd_check(cfg: dict):
    e = build_ensemble(cfg)
    t = _resolve_t(cfg, e)
    level = float(cfg["level"])
    n = int(cfg["samples"])
    rng = RngStream(cfg["seed"])
    c1 = check_c1(e, t, n, level, rng)
    pos = positivity_time(e, int(cfg["max_m"]), int(cfg["trials"]), rng)
    fixed = check_dirichlet_fixed_point(e, t, n, level, rng)
    cf = charfn_check(e, t, default_u_grid(e.d), n, rng)
    c2 = TestReport(
        "c2.positivity", 0.0 if pos.m_star is not None else 1.0, n=int(cfg["trials"]), threshold=0.0,
        seed=rng.seed_record(), details=pos.to_dict(),
    )
    body, passed = _finish(
        [c2, fixed, cf], {"t": t, "c1": c1.to_dict(), "m_star": pos.m_star}
    )
    passed = passed and c1.passed
    body["pass"] = passed
    return body, passed, None


def cmd_pushforward(cfg: dict):
    if cfg.get("ensemble") is None and cfg.get("A") is not None:
        cfg["ensemble"] = "dirichlet"
    e = build_ensemble(cfg)
    a = e.param_matrix()
    sums = row_col_sums(a) if a is not None else None
    t = parse_floats(cfg.get("t")) or (sums[0].tolist() if sums is not None else None)
    s = parse_floats(cfg.get("s")) or (sums[1].tolist() if sums is not None else None)
    if t is None or s is None:
        raise UsageError("--t and --s are required for this ensemble")
    rng = RngStream(cfg["seed"])
    dir_side, gam_side = check_pushforward(e, t, s, int(cfg["samples"]), float(cfg["level"]), rng)
    body, passed = _finish([dir_side, gam_side], {"t": t, "s": s, "agree": dir_side.passed == gam_side.passed})
    return body, passed, None


def cmd_apps(cfg: dict):
    which = cfg["app"]
    e = build_ensemble(cfg)
    rng = RngStream(cfg["seed"])
    level = float(cfg["level"])
    n = int(cfg.get("samples", 0))
    csv_rows = None
    if which == "exchange":
        t = _resolve_t(cfg, e)
        thin = cfg.get("thin")
        report = exchange_stationary_test(
            e, t, int(cfg["burn_in"]), n, None if thin is None else int(thin), level, rng, int(cfg["chains"])
        )
        body, passed = _finish([report], {"t": t, "t_hat": report.details.get("t_hat")})
    elif which == "polling":
        r = int(cfg.get("r") or 1)
        beta = parse_floats(cfg.get("beta"))
        target = beta if beta is not None else (beta_params(e.param_matrix(), r).tolist() if e.param_matrix() is not None else None)
        if target is None:
            raise UsageError("--beta is required for this ensemble")
        thin = cfg.get("thin")
        report = polling_stationary_test(
            e, np.asarray(target), r, int(cfg["burn_in"]), n, 20 if thin is None else int(thin), level, rng,
            int(cfg["chains"]), bool(cfg.get("fresh_per_step")),
        )
        body, passed = _finish([report], {"beta": target, "r": r, "t_hat": report.details.get("t_hat")})
    elif which == "simplices":
        t = _resolve_t(cfg, e)
        frame_spec = parse_matrix(cfg.get("frame"))
        frame = AffineFrame(frame_spec) if frame_spec is not None else AffineFrame.standard(e.d)
        batch = simplices_batch(frame, e, int(cfg["runs"]), float(cfg["epsilon"]), int(cfg["max_n"]), rng)
        seed = rng.seed_record()
        recon = float(np.max(np.abs(frame.to_cartesian(batch.barycentric) - batch.points)))
        ok = batch.converged.all()
        reports = [
            TestReport("simplices.converged", float((~batch.converged).sum()), n=int(cfg["runs"]), threshold=0.0, seed=seed),
            TestReport("simplices.reconstruction", recon, n=int(cfg["runs"]), threshold=1e-8, seed=seed),
        ]
        extra = {"t": t, "frame": frame.vertices.tolist()}
        if ok and batch.barycentric.shape[0] >= 1000:
            battery, fit = limit_battery(batch.barycentric, t, level, seed=seed, name="simplices_limit")
            reports.append(battery)
            extra["t_hat"] = None if fit is None else fit.tolist()
        body, passed = _finish(reports, extra)
        if cfg.get("csv"):
            csv_rows = np.hstack([batch.barycentric, batch.points])
    else:
        raise UsageError(f"unknown application {which!r}")
    return body, passed, csv_rows


def cmd_sample(cfg: dict):
    e = build_ensemble(cfg)
    rng = RngStream(cfg["seed"])
    n = int(cfg["n"])
    draws = sample_matrix(e, rng, size=n)
    body = {"ensemble": e.to_dict(), "draws": draws.tolist(), "pass": True}
    csv_rows = draws.reshape(n, -1) if cfg.get("csv") else None
    return body, True, csv_rows


COMMANDS = {
    "limit": cmd_limit,
    "check": cmd_check,
    "pushforward": cmd_pushforward,
    "apps": cmd_apps,
    "sample": cmd_sample,
}

_STAT = {"level": DEFAULT_LEVEL}
_LIMIT = {"epsilon": DEFAULT_EPSILON, "max_n": DEFAULT_MAX_N}
_CHAIN = {"samples": 20_000, "burn_in": 1000, "chains": 100}

DEFAULTS = {
    "limit": {**_STAT, **_LIMIT, "replicates": 100_000},
    "check": {**_STAT, "samples": 100_000, "trials": 10_000, "max_m": 50},
    "pushforward": {**_STAT, "samples": 100_000},
    "apps exchange": {**_STAT, **_CHAIN},
    "apps polling": {**_STAT, **_CHAIN, "r": 1},
    "apps simplices": {**_STAT, **_LIMIT, "runs": 10_000},
    "sample": {"n": 10},
}

# keys that never enter the report, so it is identical across thread counts
RUNTIME_KEYS = ("threads", "out", "csv", "config")


# ---------------------------------------------------------------- argparse


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of settings; flags override it")
    common.add_argument("--ensemble", help="cyclic | leader | dirichlet | file:PATH")
    common.add_argument("--d", type=int, help="dimension for cyclic/leader")
    common.add_argument("--A", dest="A", help="parameter matrix as JSON, or onesRxC")
    common.add_argument("--t", help="comma-separated parameter vector")
    common.add_argument("--seed", type=int, help=f"base seed (default ${SEED_ENV} or 0)")
    common.add_argument("--level", type=float)
    common.add_argument("--threads", type=int, help="cap on worker threads (results do not depend on it)")
    common.add_argument("--backend", choices=_accel.BACKENDS)
    common.add_argument("--out", help="report path (default stdout)")
    common.add_argument("--csv", help="also write raw rows as CSV here")

    p = argparse.ArgumentParser(prog="dirwalk", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    lim = sub.add_parser("limit", parents=[common], help="limit rows of left products")
    lim.add_argument("--replicates", type=int)
    lim.add_argument("--epsilon", type=float)
    lim.add_argument("--max-n", dest="max_n", type=int)

    chk = sub.add_parser("check", parents=[common], help="fixed-point and positivity checks")
    chk.add_argument("--samples", type=int)
    chk.add_argument("--trials", type=int)
    chk.add_argument("--max-m", dest="max_m", type=int)

    pf = sub.add_parser("pushforward", parents=[common], help="Dirichlet/Gamma push-forward pair")
    pf.add_argument("--s", help="comma-separated target parameters")
    pf.add_argument("--samples", type=int)

    apps = sub.add_parser("apps", help="exchange chain, nested simplices, polling walk")
    asub = apps.add_subparsers(dest="app", required=True)
    for name in ("exchange", "simplices", "polling"):
        a = asub.add_parser(name, parents=[common])
        a.add_argument("--samples", type=int)
        if name in ("exchange", "polling"):
            a.add_argument("--burn-in", dest="burn_in", type=int)
            a.add_argument("--thin", type=int)
            a.add_argument("--chains", type=int)
        if name == "polling":
            a.add_argument("--r", type=int, help="served node, 1-based")
            a.add_argument("--beta", help="explicit target parameters")
            a.add_argument("--fresh-per-step", dest="fresh_per_step", action="store_const", const=True)
        if name == "simplices":
            a.add_argument("--runs", type=int)
            a.add_argument("--frame", help="vertices as JSON array of arrays")
            a.add_argument("--epsilon", type=float)
            a.add_argument("--max-n", dest="max_n", type=int)

    smp = sub.add_parser("sample", parents=[common], help="dump raw matrix draws")
    smp.add_argument("--n", type=int)
    return p


def resolve_config(args: argparse.Namespace) -> dict:
    name = args.command if args.command != "apps" else f"apps {args.app}"
    cfg = dict(DEFAULTS[name])
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError("config must be a JSON object")
        cfg.update(loaded)
    for k, v in vars(args).items():
        if v is not None:
            cfg[k] = v
    if cfg.get("seed") is None:
        env = os.environ.get(SEED_ENV)
        try:
            cfg["seed"] = int(env) if env else 0
        except ValueError as exc:
            raise UsageError(f"{SEED_ENV} must be an integer") from exc
    return cfg


def _write_csv(path: str, rows: np.ndarray) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow([f"c{j + 1}" for j in range(rows.shape[1])])
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def render(report: dict) -> str:
    return json.dumps(jsonable(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        cfg = resolve_config(args)
        if cfg.get("backend"):
            _accel.set_backend(cfg["backend"])
        if cfg.get("threads"):
            _accel.set_threads(int(cfg["threads"]))
        body, passed, csv_rows = COMMANDS[cfg["command"]](cfg)
    except (UsageError, DirwalkError, ValueError, RuntimeError) as exc:
        print(f"dirwalk: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    shown = {k: v for k, v in cfg.items() if k not in RUNTIME_KEYS}
    report = {
        "command": cfg["command"] if cfg["command"] != "apps" else f"apps {cfg['app']}",
        "config": shown,
        "backend": _accel.backend(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    report.update(body)
    text = render(report)
    if cfg.get("out"):
        Path(cfg["out"]).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if cfg.get("csv") and csv_rows is not None:
        _write_csv(cfg["csv"], np.asarray(csv_rows))
    return EXIT_PASS if passed else EXIT_FAIL


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
