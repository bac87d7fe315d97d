"""Command-line entry point for every experiment in the package.

Every subcommand takes an explicit seed (default 0), writes one artifact
(JSON or CSV) to --output or stdout, and is byte-reproducible: identical
configurations produce identical numeric payloads (wall-clock timing is
reported outside the payload).  Exit codes: 0 success, 1 I/O error,
2 precondition violation, 3 assertion failure (an inequality that must
always hold was observed to fail).

Environment: UL_LOG sets the logging level (debug, info, warning, error).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import annihilation, geometry, lattice, periodization, turan
from .functions import function_from_dict
from .geometry import EuclideanSet
from .mc import trial_rng

log = logging.getLogger("ulat")

EXIT_OK = 0
EXIT_IO = 1
EXIT_PRECONDITION = 2
EXIT_ASSERTION = 3

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Resolved invocation: subcommand plus its validated parameters."""

    command: str
    options: dict = field(default_factory=dict)
    trials: int = 1000
    seed: int = 0
    threads: int = 1
    output: str | None = None
    fmt: str = "json"
    dry_run: bool = False

    def plan(self) -> dict:
        return {
            "command": self.command,
            "options": self.options,
            "trials": self.trials,
            "seed": self.seed,
            "threads": self.threads,
            "output": self.output,
            "format": self.fmt,
        }


class PreconditionError(ValueError):
    pass


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IOError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IOError(f"{path} is not valid JSON: {exc}") from exc


def _load_set(path: str) -> EuclideanSet:
    return EuclideanSet.from_dict(_load_json(path))


def _load_function(path: str):
    return function_from_dict(_load_json(path))


def _emit(config: RunConfig, payload, rows=None, header=None) -> None:
    """Write the artifact.  JSON payloads are key-sorted so identical
    configurations are byte-identical; wall time lives outside the payload."""
    if config.fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        if header:
            writer.writerow(header)
        for row in rows or []:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        doc = {
            "schema": SCHEMA_VERSION,
            "command": config.command,
            "seed": config.seed,
            "payload": payload,
            "wall_time_ms": round(1000.0 * (time.perf_counter() - config.options["_t0"]), 3),
        }
        text = json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"
    if config.output:
        try:
            with open(config.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise IOError(f"cannot write {config.output}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------


def _profile_from_spec(spec: str, d: int):
    parts = spec.split(":")
    kind = parts[0]
    if kind == "annulus":
        return lattice.AnnulusIndicator(d, float(parts[1]), float(parts[2]))
    if kind == "ball":
        return lattice.AnnulusIndicator(d, 0.0, float(parts[1]))
    if kind == "gaussian":
        a = float(parts[1]) if len(parts) > 1 else 1.0
        return lattice.GaussianProfile(d, a)
    raise PreconditionError(f"unknown profile spec {spec!r}; use annulus:r1:r2, ball:r or gaussian[:a]")


def cmd_lal(config: RunConfig) -> int:
    opts = config.options
    phi = _profile_from_spec(opts["phi"], opts["dim"])
    rep_a, rep_b = lattice.check_lattice_averaging(
        phi, trials=config.trials, seed=config.seed, threads=config.threads
    )
    _emit(config, {"outer_dilation": rep_a.to_dict(), "inner_dilation": rep_b.to_dict()})
    return EXIT_OK


def cmd_turan(config: RunConfig) -> int:
    opts = config.options
    rows = turan.run_campaign(opts["dim"], opts["random"], seed=config.seed)
    violations = [r for r in rows if not r["holds"]]
    if config.fmt == "csv":
        _emit(
            config,
            None,
            rows=[[r["seed"], r["lhs"], r["rhs"], r["factor"], r["holds"]] for r in rows],
            header=["seed", "lhs", "rhs", "factor", "holds"],
        )
    else:
        _emit(config, {"rows": rows, "violations": len(violations)})
    if violations:
        log.error("%d certified inequality violations", len(violations))
        return EXIT_ASSERTION
    return EXIT_OK


def cmd_periodize(config: RunConfig) -> int:
    opts = config.options
    f = _load_function(opts["function"])
    lat = lattice.sample_lattice(f.dimension, trial_rng(config.seed, 0))
    gamma = periodization.Periodization(f, lat)
    n = opts.get("grid") or periodization.default_grid_size(f.dimension)
    if config.fmt == "csv":
        rows = gamma.grid_rows(n)
        header = [f"t{i+1}" for i in range(f.dimension)] + ["re", "im"]
        _emit(config, None, rows=rows, header=header)
        return EXIT_OK
    payload = {
        "dilation": lat.dilation,
        "rotation": lat.rotation.matrix.tolist(),
        "parseval_gap": gamma.parseval_gap(),
        "energy": gamma.energy(),
        "grid": n,
    }
    _emit(config, payload)
    return EXIT_OK


def cmd_geometry(config: RunConfig) -> int:
    opts = config.options
    s = _load_set(opts["set"])
    op = opts["op"]
    if op == "mean-width":
        est = geometry.mean_width(s, trials=config.trials, seed=config.seed)
        payload = est.to_dict()
    elif op == "measure":
        est = geometry.lebesgue_measure(s, trials=config.trials, seed=config.seed)
        payload = est.to_dict()
    elif op == "cover-upper":
        cover = geometry.cover_measure_upper(s)
        payload = {"value": cover.value, "balls": len(cover.balls)}
    else:
        raise PreconditionError(f"unknown geometry op {op!r}")
    _emit(config, payload)
    return EXIT_OK


def cmd_ratio(config: RunConfig) -> int:
    opts = config.options
    inst = annihilation.AnnihilationInstance(
        _load_function(opts["function"]), _load_set(opts["s_set"]), _load_set(opts["sigma_set"])
    )
    _emit(config, annihilation.observed_ratio(inst, seed=config.seed))
    return EXIT_OK


def cmd_pipeline(config: RunConfig) -> int:
    opts = config.options
    inst = annihilation.AnnihilationInstance(
        _load_function(opts["function"]), _load_set(opts["s_set"]), _load_set(opts["sigma_set"])
    )
    trace = annihilation.pipeline_trace(inst, seed=config.seed, grid_n=opts.get("grid"))
    if not trace.events["zero_coeff_dominated"]:
        log.error("zero-coefficient domination failed; this must never happen")
        return EXIT_ASSERTION
    _emit(config, trace.to_dict())
    return EXIT_OK


def cmd_sweep(config: RunConfig) -> int:
    opts = config.options
    inst = annihilation.AnnihilationInstance(
        _load_function(opts["function"]), _load_set(opts["s_set"]), _load_set(opts["sigma_set"])
    )
    result = annihilation.translated_sweep(
        inst, per_axis=opts.get("ygrid", 5), seed=config.seed, grid_n=opts.get("grid")
    )
    if config.fmt == "csv":
        d = inst.dimension
        rows = [[*r["y"], r["bound"], r["direct"]] for r in result["rows"]]
        header = [f"y{i+1}" for i in range(d)] + ["bound", "direct"]
        _emit(config, None, rows=rows, header=header)
    else:
        _emit(config, result)
    return EXIT_OK


def cmd_sharpness(config: RunConfig) -> int:
    opts = config.options
    report = annihilation.disc_ring_experiment(
        opts["n"],
        ring_radius=opts.get("ring_radius"),
        trials=config.trials,
        seed=config.seed,
        threads=config.threads,
    )
    _emit(config, report)
    return EXIT_OK


_COMMANDS = {
    "lal": cmd_lal,
    "turan": cmd_turan,
    "periodize": cmd_periodize,
    "geometry": cmd_geometry,
    "ratio": cmd_ratio,
    "pipeline": cmd_pipeline,
    "sweep": cmd_sweep,
    "sharpness": cmd_sharpness,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ulat",
        description="Seeded experiments: lattice averaging, periodization, "
        "Turan bounds, annihilating-pair pipelines.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--output", "-o", default=None)
        p.add_argument("--format", dest="fmt", choices=["json", "csv"], default=None)
        p.add_argument("--dry-run", action="store_true")
        p.add_argument("--config", default=None, help="JSON file with option overrides")

    p = sub.add_parser("lal", help="lattice averaging estimates for a profile")
    p.add_argument("--phi", required=True, help="annulus:r1:r2 | ball:r | gaussian[:a]")
    p.add_argument("--dim", type=int, default=2)
    common(p)

    p = sub.add_parser("turan", help="randomized sup-norm inequality campaign")
    p.add_argument("--dim", type=int, choices=[1, 2], default=1)
    p.add_argument("--random", type=int, default=1000, help="number of random instances")
    common(p)

    p = sub.add_parser("periodize", help="periodize a function over one lattice draw")
    p.add_argument("--function", required=True, help="function document (JSON)")
    p.add_argument("--grid", type=int, default=None)
    common(p)

    p = sub.add_parser("geometry", help="measure / mean width / cover bound of a set")
    p.add_argument("--set", required=True, help="set document (JSON)")
    p.add_argument("--op", required=True, choices=["measure", "mean-width", "cover-upper"])
    common(p)

    p = sub.add_parser("ratio", help="observed annihilation ratio of an instance")
    p.add_argument("--function", required=True)
    p.add_argument("--s-set", required=True)
    p.add_argument("--sigma-set", required=True)
    common(p)

    p = sub.add_parser("pipeline", help="single proof-pipeline trace")
    p.add_argument("--function", required=True)
    p.add_argument("--s-set", required=True)
    p.add_argument("--sigma-set", required=True)
    p.add_argument("--grid", type=int, default=None)
    common(p)

    p = sub.add_parser("sweep", help="modulation sweep of the pipeline over Sigma")
    p.add_argument("--function", required=True)
    p.add_argument("--s-set", required=True)
    p.add_argument("--sigma-set", required=True)
    p.add_argument("--ygrid", type=int, default=5)
    p.add_argument("--grid", type=int, default=None)
    common(p)

    p = sub.add_parser("sharpness", help="ring-of-discs order growth experiment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--ring-radius", type=float, default=None)
    common(p)

    return parser


_DEFAULT_FORMATS = {"turan": "csv", "sweep": "csv"}


def _resolve_config(args: argparse.Namespace) -> RunConfig:
    options = {
        k: v
        for k, v in vars(args).items()
        if k not in {"command", "trials", "seed", "threads", "output", "fmt", "dry_run", "config"}
        and v is not None
    }
    if args.config:
        overrides = _load_json(args.config)
        for key, value in overrides.items():
            if key in {"trials", "seed", "threads", "output", "format"}:
                setattr(args, "fmt" if key == "format" else key, value)
            else:
                options[key] = value
    if args.trials < 1:
        raise PreconditionError("trials must be >= 1")
    fmt = args.fmt or _DEFAULT_FORMATS.get(args.command, "json")
    options["_t0"] = time.perf_counter()
    return RunConfig(
        command=args.command,
        options=options,
        trials=args.trials,
        seed=args.seed,
        threads=max(args.threads, 1),
        output=args.output,
        fmt=fmt,
        dry_run=args.dry_run,
    )


def run(config: RunConfig) -> int:
    """Dispatch one resolved configuration; returns the process exit code."""
    if config.dry_run:
        plan = config.plan()
        plan["options"] = {k: v for k, v in plan["options"].items() if k != "_t0"}
        # Validate referenced documents without computing.
        for key in ("set", "function", "s_set", "sigma_set"):
            if key in config.options:
                _load_json(config.options[key])
        sys.stdout.write(json.dumps({"dry_run": True, "plan": plan}, sort_keys=True, indent=2) + "\n")
        return EXIT_OK
    return _COMMANDS[config.command](config)


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("UL_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        return run(config)
    except PreconditionError as exc:
        log.error("precondition violated: %s", exc)
        sys.stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except ValueError as exc:
        sys.stderr.write(f"precondition violated: {exc}\n")
        return EXIT_PRECONDITION
    except IOError as exc:
        sys.stderr.write(f"i/o error: {exc}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
