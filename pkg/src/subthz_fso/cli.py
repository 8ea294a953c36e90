"""Command-line front end: run sweeps, write CSV tables and run manifests.

Exit status is 0 on success, 2 on a configuration or usage error and 3 on an
I/O error. Outputs are written to a temporary file and renamed into place, so
a failed run never leaves a partial CSV behind.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .montecarlo import AXES, SweepRow, SweepSpec, run_sweep
from .scenario import ConfigError, Scenario, dump_scenario, load_scenario, table1_defaults
from .studies import STUDIES, study_spec

CONFIG_ENV = "SUBTHZ_FSO_CONFIG"
CSV_HEADER = "axis,strategy,estimate,std_error,ci_low,ci_high,trials,flags"

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3


class UsageError(Exception):
    pass


def format_number(x: float) -> str:
    """Locale-independent; magnitudes below 1e-3 use fixed scientific notation."""
    x = float(x)
    if x != 0.0 and abs(x) < 1e-3:
        return f"{x:.6e}"
    return f"{x:.10g}"


def render_csv(rows: list[SweepRow]) -> str:
    lines = [CSV_HEADER]
    for row in rows:
        e = row.estimate
        lines.append(",".join([
            format_number(row.axis_value), row.strategy, format_number(e.value),
            format_number(e.std_error), format_number(e.ci95[0]), format_number(e.ci95[1]),
            str(e.trials), e.flags,
        ]))
    return "\n".join(lines) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _read_config(path: str | None) -> tuple[Scenario, str]:
    """Scenario and raw config text ('' when running on defaults)."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return table1_defaults(), ""
    text = Path(path).read_text(encoding="utf-8")
    return load_scenario(text), text


def _output_paths(out: str) -> tuple[Path, Path]:
    base = out[:-4] if out.endswith(".csv") else out
    return Path(base + ".csv"), Path(base + ".manifest.json")


def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _execute(spec: SweepSpec, scenario: Scenario, out: str, workers: int, command: str,
             config_text: str) -> None:
    csv_path, manifest_path = _output_paths(out)
    if not csv_path.parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {csv_path.parent}")
    durations: list[dict] = []

    def progress(value: float, seconds: float) -> None:
        durations.append({"axis_value": value, "seconds": round(seconds, 6)})
        _log(f"{spec.axis}={format_number(value)} done in {seconds:.2f} s")

    rows = run_sweep(spec, scenario, workers=workers, progress=progress)
    csv_text = render_csv(rows)
    resolved = dump_scenario(scenario)
    manifest = {
        "tool": "subthz-fso",
        "version": __version__,
        "command": command,
        "config_sha256": sha256_text(config_text) if config_text else None,
        "scenario_sha256": sha256_text(resolved),
        "scenario": resolved,
        "sweep": {**asdict(spec), "points": list(spec.points), "strategies": list(spec.strategies)},
        "seed": spec.seed,
        "csv_sha256": sha256_text(csv_text),
        "point_seconds": durations,
    }
    atomic_write(csv_path, csv_text)
    atomic_write(manifest_path, json.dumps(manifest, indent=2) + "\n")
    _log(f"wrote {csv_path} and {manifest_path}")


def _parse_axis(text: str) -> tuple[str, tuple[float, ...]]:
    try:
        name, start, stop, step = text.split(":")
        start, stop, step = float(start), float(stop), float(step)
    except ValueError:
        raise UsageError(f"--axis expects name:start:stop:step, got {text!r}") from None
    if name not in AXES:
        raise UsageError(f"unknown axis {name!r}; choose from {', '.join(AXES)}")
    if not step > 0 or stop < start:
        raise UsageError("--axis needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return name, tuple(float(np.round(start + k * step, 10)) for k in range(n))


def _strategies(text: str | None) -> tuple[str, ...] | None:
    if text is None:
        return None
    items = tuple(s.strip() for s in text.split(",") if s.strip())
    if not items:
        raise UsageError("--strategies is empty")
    return items


def cmd_sweep(args: argparse.Namespace) -> int:
    study = STUDIES[args.command]
    base, config_text = _read_config(args.config)
    spec = study_spec(study, args.trials, args.seed, _strategies(args.strategies))
    _execute(spec, study.scenario(base), args.out or args.command, args.workers,
             args.command, config_text)
    return EXIT_OK


def cmd_custom(args: argparse.Namespace) -> int:
    scenario, config_text = _read_config(args.config)
    axis, points = _parse_axis(args.axis)
    strategies = _strategies(args.strategies) or ("fso", "subthz", "hard", "soft", "mrc")
    trials = args.trials or (100_000 if args.metric == "outage" else 10_000)
    spec = SweepSpec(axis, points, trials, args.seed, strategies, args.metric)
    _execute(spec, scenario, args.out or "custom", args.workers, "custom", config_text)
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    scenario, _ = _read_config(args.config)
    sys.stdout.write(dump_scenario(scenario))
    return EXIT_OK


def cmd_replay(args: argparse.Namespace) -> int:
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    try:
        scenario_text = manifest["scenario"]
        sweep = dict(manifest["sweep"])
    except (KeyError, TypeError):
        raise UsageError("manifest lacks 'scenario' or 'sweep'") from None
    if sha256_text(scenario_text) != manifest.get("scenario_sha256"):
        raise UsageError("manifest scenario does not match its digest")
    sweep["points"] = tuple(sweep["points"])
    sweep["strategies"] = tuple(sweep["strategies"])
    spec = SweepSpec(**sweep)
    out = args.out or str(Path(args.manifest).with_name("replay"))
    _execute(spec, load_scenario(scenario_text), out, args.workers,
             manifest.get("command", "replay"), "")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subthz-fso",
        description="Monte Carlo outage and rate studies of hybrid sub-THz/FSO backhaul.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help=f"scenario file (default: ${CONFIG_ENV} or built-in defaults)")
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--trials", type=int, help="trials per point")
        p.add_argument("--out", help="output prefix; writes <out>.csv and <out>.manifest.json")
        p.add_argument("--strategies", help="comma-separated strategy list")
        p.add_argument("--workers", type=int, default=1, help="worker processes (never changes output)")

    for name, study in STUDIES.items():
        p = sub.add_parser(name, help=f"{study.metric} versus {study.axis}")
        common(p)
        p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("custom", help="sweep any axis with any strategies")
    common(p)
    p.add_argument("--axis", required=True, help="name:start:stop:step")
    p.add_argument("--metric", choices=("outage", "rate"), default="outage")
    p.set_defaults(func=cmd_custom)

    p = sub.add_parser("validate", help="check a scenario file and print the resolved configuration")
    p.add_argument("--config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("replay", help="re-run a sweep from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "trials", None) is not None and args.trials < 1:
        _log("error: --trials must be >= 1")
        return EXIT_CONFIG
    if getattr(args, "workers", 1) < 1:
        _log("error: --workers must be >= 1")
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        _log(f"config error: {exc}")
        return EXIT_CONFIG
    except (UsageError, ValueError) as exc:
        _log(f"error: {exc}")
        return EXIT_CONFIG
    except OSError as exc:
        _log(f"I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
