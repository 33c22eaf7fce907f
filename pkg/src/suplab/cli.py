"""``suplab`` command-line front end.

Every command materializes its full configuration (defaults included) before
running.  Result files are CSV with a header row, ``\\n`` line endings and
floats in shortest round-trip form; next to each result file a JSON manifest
records the configuration, so ``--config <manifest>`` reproduces the file
byte for byte.

Exit codes: 0 success, 1 runtime or check failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import fields
from datetime import datetime, timezone
from typing import Any, Callable

import numpy as np

from . import __version__, bounds, poissonization as po
from .bounds import BoundParams, NotApplicableError
from .empirical import SamplePath, modulus_statistic
from .errors import DomainError
from .montecarlo import ExperimentConfig, compare_with_bounds, estimate_tail
from .rng import block_generator, map_blocks, stream_key

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
PARAM_NAMES = tuple(f.name for f in fields(BoundParams))


class UsageError(Exception):
    """Bad flags or configuration; reported with exit code 2."""


# ------------------------------------------------------------ formatting


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def render_csv(header: list[str], rows: list[list[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------- parsing


def parse_grid(text: str, integer: bool = False) -> list:
    """``"a,b,c"`` or ``"log:a:b:num"`` (``num`` points from ``10**a`` to ``10**b``)."""
    text = text.strip()
    try:
        if text.startswith("log:"):
            parts = text[4:].split(":")
            if len(parts) != 3:
                raise ValueError
            lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
            if num < 1:
                raise ValueError
            values = [float(x) for x in np.logspace(lo, hi, num)]
        else:
            values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad grid {text!r}; expected 'a,b,c' or 'log:a:b:num'") from None
    if not values:
        raise UsageError(f"grid {text!r} is empty")
    if integer:
        values = list(dict.fromkeys(int(round(v)) for v in values))
    return values


def _grid_value(value, name: str, integer: bool) -> list:
    if isinstance(value, str):
        return parse_grid(value, integer)
    if not isinstance(value, list) or not value:
        raise UsageError(f"{name} must be a non-empty list or a grid string")
    for v in value:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise UsageError(f"{name} entries must be numbers, got {v!r}")
    if integer:
        if any(v != int(v) for v in value):
            raise UsageError(f"{name} entries must be integers")
        return [int(v) for v in value]
    return [float(v) for v in value]


def load_config_file(path: str, command: str) -> dict:
    """Read a JSON config or a manifest written by a previous run of ``command``."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: config must be a JSON object")
    if "config" in data and "command" in data:
        if data["command"] != command:
            raise UsageError(f"{path}: manifest is for command {data['command']!r}, not {command!r}")
        data = data["config"]
        if not isinstance(data, dict):
            raise UsageError(f"{path}: manifest config must be a JSON object")
    return data


def _parse_constants(text: str) -> dict[str, float]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        name = name.strip()
        if not sep or name not in PARAM_NAMES:
            raise UsageError(f"bad constant {item!r}; expected name=value with name in {', '.join(PARAM_NAMES)}")
        try:
            out[name] = float(value)
        except ValueError:
            raise UsageError(f"constant {name} has non-numeric value {value!r}") from None
    return out


def _resolve_params(constants: Any) -> BoundParams:
    if not isinstance(constants, dict):
        raise UsageError("constants must be a JSON object of name: number")
    try:
        return BoundParams().with_overrides(**constants)
    except (DomainError, TypeError) as exc:
        raise UsageError(f"invalid constants: {exc}") from None


def _merge(defaults: dict, file_cfg: dict, flags: dict) -> dict:
    unknown = set(file_cfg) - set(defaults)
    if unknown:
        raise UsageError(f"unknown config key(s): {', '.join(sorted(unknown))}; allowed: {', '.join(defaults)}")
    cfg = dict(defaults)
    cfg.update(file_cfg)
    constants = dict(cfg.get("constants") or {})
    if "constants" in flags:
        constants.update(flags.pop("constants"))
    cfg.update({k: v for k, v in flags.items() if v is not None})
    if "constants" in defaults:
        cfg["constants"] = _resolve_params(constants).as_dict()
    return cfg


def _int_field(cfg: dict, name: str, minimum: int) -> int:
    value = cfg[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value) or value < minimum:
        raise UsageError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def _float_field(cfg: dict, name: str) -> float:
    value = cfg[name]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise UsageError(f"{name} must be a finite number, got {value!r}")
    return float(value)


# -------------------------------------------------------------- commands


def _bounds_defaults() -> dict:
    return {"n_grid": [10, 100, 1000, 10**4, 10**6], "sigma2_grid": [1e-300, 1e-6, 1e-3, 0.01, 0.1], "L": 1.0, "D": 1.0, "constants": {}}


def _bounds_prepare(cfg: dict) -> dict:
    cfg["n_grid"] = _grid_value(cfg["n_grid"], "n_grid", integer=True)
    cfg["sigma2_grid"] = _grid_value(cfg["sigma2_grid"], "sigma2_grid", integer=False)
    cfg["L"], cfg["D"] = _float_field(cfg, "L"), _float_field(cfg, "D")
    if any(n < 2 for n in cfg["n_grid"]):
        raise UsageError("n_grid entries must be >= 2")
    if any(not (0 < s <= 1) for s in cfg["sigma2_grid"]):
        raise UsageError("sigma2_grid entries must lie in (0, 1]")
    if cfg["L"] < 1 or cfg["D"] < 1:
        raise UsageError("L and D must be >= 1")
    return cfg


def _bounds_run(cfg: dict, workers: int) -> tuple[list[str], list[list], dict]:
    params = BoundParams(**cfg["constants"])
    L, D = cfg["L"], cfg["D"]
    header = ["n", "sigma2", "regime", "u", "u_bar", "hat_u", "two_sqrtn_sigma2", "bound_at_u", "bennett_at_u"]
    rows = []
    for n in cfg["n_grid"]:
        for s2 in cfg["sigma2_grid"]:
            u = bounds.threshold_u(n, s2, L, D, params)
            try:
                at_u = bounds.upper_bound_theorem1(n, s2, u, L, D, params)
            except NotApplicableError:
                at_u = None
            rows.append([
                n, s2, str(bounds.classify_regime(n, s2)), u,
                bounds.threshold_u_bar(s2, L, D, params),
                bounds.lower_bound_level(n, s2, params),
                2 * math.sqrt(n) * s2, at_u, bounds.bennett_bound(n, s2, u),
            ])
    return header, rows, {}


def _simulate_defaults() -> dict:
    return {"n": None, "sigma2": None, "levels": None, "reps": 10000, "seed": 0, "L": 1.0, "D": 1.0, "constants": {}}


def _simulate_prepare(cfg: dict) -> dict:
    for name in ("n", "sigma2", "levels"):
        if cfg[name] is None:
            raise UsageError(f"config needs {name!r}")
    cfg["n"] = _int_field(cfg, "n", 1)
    cfg["reps"] = _int_field(cfg, "reps", 1)
    cfg["seed"] = _int_field(cfg, "seed", 0)
    cfg["sigma2"] = _float_field(cfg, "sigma2")
    cfg["L"], cfg["D"] = _float_field(cfg, "L"), _float_field(cfg, "D")
    if not isinstance(cfg["levels"], list):
        raise UsageError("levels must be a list of numbers or rule names")
    try:
        _experiment(cfg)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    return cfg


def _experiment(cfg: dict) -> ExperimentConfig:
    return ExperimentConfig(
        n=cfg["n"], sigma2=cfg["sigma2"], levels=cfg["levels"], reps=cfg["reps"],
        master_seed=cfg["seed"], params=BoundParams(**cfg["constants"]), L=cfg["L"], D=cfg["D"],
    )


def _simulate_run(cfg: dict, workers: int) -> tuple[list[str], list[list], dict]:
    config = _experiment(cfg)
    estimates = estimate_tail(config, workers)
    rows = compare_with_bounds(estimates, config.n, config.sigma2, config.L, config.D, config.params)
    header = [
        "v", "hits", "reps", "p_hat", "ci_low", "ci_high", "bound_thm1", "bound_ext", "bound_bennett",
        "applicable_thm1", "applicable_ext", "dominance",
    ]
    out = [
        [r.v, r.hits, r.reps, r.p_hat, r.ci_low, r.ci_high, r.bound_thm1, r.bound_ext, r.bound_bennett,
         r.applicable_thm1, r.applicable_ext, r.dominance]
        for r in rows
    ]
    resolved = {"levels": {str(k): config.resolve(k) for k in config.levels}}
    return header, out, resolved


def _lower_defaults() -> dict:
    return {"n": 1000, "sigma2": 1e-300, "reps": 1000, "seed": 0, "delta": 0.1, "constants": {}}


def _lower_prepare(cfg: dict) -> dict:
    cfg["n"] = _int_field(cfg, "n", 2)
    cfg["reps"] = _int_field(cfg, "reps", 1)
    cfg["seed"] = _int_field(cfg, "seed", 0)
    cfg["sigma2"] = _float_field(cfg, "sigma2")
    cfg["delta"] = _float_field(cfg, "delta")
    if not (0 < cfg["sigma2"] <= 1):
        raise UsageError("sigma2 must lie in (0, 1]")
    if not (0 < cfg["delta"] < 1):
        raise UsageError("delta must lie in (0, 1)")
    return cfg


def _lower_run(cfg: dict, workers: int) -> tuple[list[str], list[list], dict]:
    n, s2, reps, seed, delta = cfg["n"], cfg["sigma2"], cfg["reps"], cfg["seed"], cfg["delta"]
    params = BoundParams(**cfg["constants"])
    header = ["quantity", "model", "level", "value", "ci_low", "ci_high", "reps", "status", "note"]
    regime = bounds.classify_regime(n, s2)
    est = po.lower_bound_experiment(n, s2, reps, seed, params, workers=workers)
    rows = [["estimate", "empirical", est.v, est.p_hat, est.ci_low, est.ci_high, est.reps, "ok", f"regime {regime}"]]
    try:
        m_star = po.poisson_level_count(n, s2)
    except DomainError as exc:
        reason = str(exc)
        for quantity, level in (("estimate", None), ("analytic_lower_bound", None), ("inequality_margin", delta)):
            rows.append([quantity, "poisson", level, None, None, None, None, "skipped", reason])
        return header, rows, {"regime": str(regime)}
    pest = po.poisson_max_experiment(n, s2, reps, seed, workers)
    holds, margin = po.check_inequality_24(n, s2, delta)
    rows += [
        ["estimate", "poisson", m_star, pest.p_hat, pest.ci_low, pest.ci_high, pest.reps, "ok", "count threshold m*"],
        ["analytic_lower_bound", "poisson", m_star, po.analytic_lower_bound(n, s2), None, None, None, "ok", "1 - exp(-T)"],
        ["inequality_margin", "poisson", delta, margin, None, None, None, "holds" if holds else "fails",
         "log T - log log(1/delta)"],
    ]
    return header, rows, {"regime": str(regime)}


def _modulus_defaults() -> dict:
    return {"n_grid": [100, 1000], "delta_grid": [0.01, 0.1, 1.0], "reps": 200, "seed": 0, "constants": {}}


def _modulus_prepare(cfg: dict) -> dict:
    cfg["n_grid"] = _grid_value(cfg["n_grid"], "n_grid", integer=True)
    cfg["delta_grid"] = _grid_value(cfg["delta_grid"], "delta_grid", integer=False)
    cfg["reps"] = _int_field(cfg, "reps", 1)
    cfg["seed"] = _int_field(cfg, "seed", 0)
    if any(n < 1 for n in cfg["n_grid"]):
        raise UsageError("n_grid entries must be >= 1")
    if any(not (0 < d <= 1) for d in cfg["delta_grid"]):
        raise UsageError("delta_grid entries must lie in (0, 1]")
    return cfg


def modulus_normalizer(delta: float, params: BoundParams) -> float:
    """Candidate scale ``Cbar sigma sqrt(log(2/sigma))`` with ``sigma**2 = delta``."""
    sigma = math.sqrt(delta)
    return params.Cbar * sigma * math.sqrt(math.log(2.0 / sigma))


def _modulus_run(cfg: dict, workers: int) -> tuple[list[str], list[list], dict]:
    params = BoundParams(**cfg["constants"])
    deltas = cfg["delta_grid"]
    header = ["n", "delta", "reps", "mean", "max", "q50", "q90", "q99", "hat_u", "ratio_mean", "ratio_max"]
    rows = []
    for n in cfg["n_grid"]:
        key = stream_key(cfg["seed"], "modulus", n)

        def run(block: int, start: int, stop: int) -> np.ndarray:
            samples = block_generator(key, block).random((stop - start, n))
            return np.array([[modulus_statistic(SamplePath(x), d) for d in deltas] for x in samples])

        stats = np.concatenate(map_blocks(run, cfg["reps"], workers))
        for i, d in enumerate(deltas):
            col = stats[:, i]
            q50, q90, q99 = np.quantile(col, [0.5, 0.9, 0.99])
            scale = modulus_normalizer(d, params)
            rows.append([n, d, cfg["reps"], col.mean(), col.max(), q50, q90, q99, scale, col.mean() / scale, col.max() / scale])
    return header, rows, {}


COMMANDS: dict[str, tuple[Callable, Callable, Callable]] = {
    "bounds": (_bounds_defaults, _bounds_prepare, _bounds_run),
    "simulate": (_simulate_defaults, _simulate_prepare, _simulate_run),
    "lower-bound": (_lower_defaults, _lower_prepare, _lower_run),
    "modulus": (_modulus_defaults, _modulus_prepare, _modulus_run),
}


# ---------------------------------------------------------------- driver


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="suplab", description="Tail bounds and simulations for suprema of normalized partial sums.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, *, reps: bool = True) -> None:
        p.add_argument("--config", help="JSON config, or a manifest from an earlier run")
        p.add_argument("--seed", type=int, help="master seed (non-negative)")
        if reps:
            p.add_argument("--reps", type=int, help="Monte Carlo replications")
        p.add_argument("--out", help="result CSV path (default: stdout)")
        p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json; none for stdout)")
        p.add_argument("--constants", default="", help="constant overrides, e.g. C1=2,C2=0.4")
        p.add_argument("--workers", type=int, default=1, help="threads for replication blocks (results do not depend on it)")

    p = sub.add_parser("bounds", help="tabulate thresholds and bounds over a grid")
    common(p, reps=False)
    p.add_argument("--n-grid", help="sample sizes: 'a,b,c' or 'log:a:b:num'")
    p.add_argument("--sigma2-grid", help="variances: 'a,b,c' or 'log:a:b:num'")
    p.add_argument("--L", type=float)
    p.add_argument("--D", type=float)

    p = sub.add_parser("simulate", help="estimate tail probabilities and compare with the bounds")
    common(p)

    p = sub.add_parser("lower-bound", help="lower-bound experiments, empirical and Poisson")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--sigma2", type=float)
    p.add_argument("--delta", type=float, help="target failure probability of the Poisson construction")

    p = sub.add_parser("modulus", help="modulus of continuity of the normalized empirical process")
    common(p)
    p.add_argument("--n-grid", help="sample sizes: 'a,b,c' or 'log:a:b:num'")
    p.add_argument("--delta-grid", help="window widths in (0, 1]")

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--constants", default="", help="constant overrides, e.g. C2=0.4")
    p.add_argument("--only", default="", help="comma-separated check id prefixes")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _flag_config(args: argparse.Namespace) -> dict:
    flags: dict[str, Any] = {}
    if args.constants:
        flags["constants"] = _parse_constants(args.constants)
    if args.seed is not None:
        flags["seed"] = args.seed
    if getattr(args, "reps", None) is not None:
        flags["reps"] = args.reps
    for attr, key in (("n_grid", "n_grid"), ("sigma2_grid", "sigma2_grid"), ("delta_grid", "delta_grid")):
        value = getattr(args, attr, None)
        if value is not None:
            flags[key] = parse_grid(value, integer=(key == "n_grid"))
    for attr in ("L", "D", "n", "sigma2", "delta"):
        value = getattr(args, attr, None)
        if value is not None:
            flags[attr] = value
    return flags


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _run_command(args: argparse.Namespace) -> int:
    defaults_fn, prepare, run = COMMANDS[args.command]
    defaults = defaults_fn()
    file_cfg = load_config_file(args.config, args.command) if args.config else {}
    flags = _flag_config(args)
    if "seed" in flags and "seed" not in defaults:
        raise UsageError(f"{args.command} takes no seed")
    cfg = prepare(_merge(defaults, file_cfg, flags))
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")

    started = _timestamp()
    try:
        header, rows, resolved = run(cfg, args.workers)
    except (DomainError, ValueError, MemoryError) as exc:
        print(f"suplab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    text = render_csv(header, rows)
    manifest = {
        "command": args.command,
        "config": cfg,
        "master_seed": cfg.get("seed"),
        "version": __version__,
        "started": started,
        "finished": _timestamp(),
        "resolved": resolved,
    }
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    manifest_path = args.manifest or (f"{args.out}.manifest.json" if args.out else None)
    if manifest_path:
        with open(manifest_path, "w") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _run_verify(args: argparse.Namespace) -> int:
    from .verify import run_suite

    if args.seed < 0:
        raise UsageError("--seed must be non-negative")
    only = [s.strip() for s in args.only.split(",") if s.strip()] or None
    start = time.perf_counter()
    results = run_suite(args.seed, args.constants, only, args.workers, stream=sys.stdout)
    failed = [r.id for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed in {time.perf_counter() - start:.1f}s")
    if failed:
        print(f"failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    try:
        if args.command == "verify":
            return _run_verify(args)
        return _run_command(args)
    except UsageError as exc:
        print(f"suplab {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
