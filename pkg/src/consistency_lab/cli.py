"""Command-line front end: scenario loading, execution, report emission.

Exit codes: 0 success, 1 operational error (bad input, missing file, worker
failure), 2 domain verdict (zero separation margin on the requested partition,
or a schedule piece that cannot be built).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import __version__
from .distances import hull_variation
from .errors import ConstructionError, ValidationError
from .measures import FiniteMeasure, discretize, induced_vector
from .partition_tests import separation
from .reports import (
    format_value,
    scenario_hash,
    svg_line_chart,
    write_csv,
    write_json,
)
from .scenarios import Scenario, nested_schedule, run_scenario, scenario_from_dict


@dataclass
class RunConfig:
    """Verbatim run parameters; recorded in every output manifest."""

    scenario_path: Path
    out_dir: Path
    seed: int
    replications: Optional[int]
    workers: int
    plots: bool


def _default_workers() -> int:
    env = os.environ.get("CONSISTENCY_LAB_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def load_scenario(path: Path) -> Scenario:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read scenario file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"malformed scenario JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return scenario_from_dict(data)


def _cell_measures(scenario: Scenario):
    """Hypothesis/alternative reduced to cell-probability measures on the partition."""
    h = [FiniteMeasure(induced_vector(m, scenario.partition)) for m in scenario.hypothesis]
    a = [FiniteMeasure(induced_vector(m, scenario.partition)) for m in scenario.alternative]
    return h, a


def _manifest(scenario: Scenario, config: RunConfig, command: str) -> dict:
    return {
        "command": command,
        "scenario": scenario.name,
        "scenario_hash": scenario_hash(scenario.to_json_dict()),
        "seed": config.seed,
        "replications": (
            config.replications
            if config.replications is not None
            else scenario.sim.replications
        ),
        "workers": config.workers,
        "version": __version__,
    }


def cmd_distinguish(scenario: Scenario, config: RunConfig) -> int:
    if scenario.partition is None:
        raise ValidationError("distinguish requires a scenario with a partition")
    report = separation(scenario.hypothesis, scenario.alternative, scenario.partition)
    h, a = _cell_measures(scenario)
    bound = 1.0 - hull_variation(h, a).value
    i, j = report.witness_pair
    print(f"margin={format_value(report.margin)}")
    print(f"witness=hypothesis[{i}] vs alternative[{j}]")
    print(f"kraft_bound={format_value(bound)}")
    if report.margin <= 0.0:
        print("verdict=weakly-indistinguishable-on-this-partition")
        return 2
    print("verdict=separated")
    return 0


def cmd_bound(scenario: Scenario, config: RunConfig) -> int:
    if scenario.model_type == "finite":
        h, a = scenario.hypothesis, scenario.alternative
    elif scenario.model_type == "density":
        grid_size = int(scenario.model_options.get("grid_size", 64))
        h = [discretize(m, grid_size) for m in scenario.hypothesis]
        a = [discretize(m, grid_size) for m in scenario.alternative]
    else:
        raise ValidationError("bound requires finite or density models")
    hull = hull_variation(h, a)
    print(f"hull_variation={format_value(hull.value)}")
    print(f"kraft_bound={format_value(1.0 - hull.value)}")
    print(f"mixture_p={','.join(format_value(float(x)) for x in hull.mixture_p)}")
    print(f"mixture_q={','.join(format_value(float(x)) for x in hull.mixture_q)}")
    print(f"lp_iterations={hull.iterations}")
    return 0


def _write_tables(run, out_dir: Path, manifest: dict, plots: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, table in run.tables.items():
        write_csv(out_dir / f"{name}.csv", table.columns, table.rows, manifest)
        if plots and len(table.rows) > 1:
            numeric = [
                c
                for c in range(len(table.columns))
                if all(isinstance(r[c], (int, float)) for r in table.rows)
            ]
            if len(numeric) >= 2:
                x_col = numeric[0]
                series = {
                    table.columns[c]: [float(r[c]) for r in table.rows]
                    for c in numeric[1:]
                }
                chart = svg_line_chart(
                    name, [float(r[x_col]) for r in table.rows], series
                )
                (out_dir / f"{name}.svg").write_text(chart, encoding="utf-8")
    for name, report in run.reports.items():
        write_json(out_dir / f"{name}.json", report)
    write_json(out_dir / "manifest.json", manifest)


def cmd_simulate(scenario: Scenario, config: RunConfig) -> int:
    run = run_scenario(
        scenario,
        seed=config.seed,
        replications=config.replications,
        workers=config.workers,
    )
    manifest = _manifest(scenario, config, "simulate")
    _write_tables(run, config.out_dir, manifest, config.plots)
    print(f"wrote {len(run.tables)} metric tables to {config.out_dir}")
    return 0


def cmd_schedule(scenario: Scenario, config: RunConfig) -> int:
    if scenario.schedule is None:
        scenario.schedule = {"exponents": [], "onsets": []}  # derive certificates
    schedule = nested_schedule(scenario)
    manifest = _manifest(scenario, config, "schedule")
    run = run_scenario(
        scenario,
        seed=config.seed,
        replications=config.replications,
        workers=config.workers,
    )
    config.out_dir.mkdir(parents=True, exist_ok=True)
    write_json(config.out_dir / "schedule.json", schedule.to_json_dict())
    _write_tables(run, config.out_dir, manifest, config.plots)
    print(f"wrote schedule and discernibility curve to {config.out_dir}")
    return 0


_COMMANDS = {
    "distinguish": cmd_distinguish,
    "bound": cmd_bound,
    "simulate": cmd_simulate,
    "schedule": cmd_schedule,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="consistency-lab",
        description="Distinguishability bounds, partition tests, and discernible schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("distinguish", "partition separation margin and the error-floor bound"),
        ("bound", "convex-hull variation distance and the attainable error floor"),
        ("simulate", "run every metric the scenario supports; write CSV/JSON reports"),
        ("schedule", "build the interleaved test schedule and its discernibility curve"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
        cmd.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        cmd.add_argument("--seed", type=int, default=0, help="64-bit RNG seed")
        cmd.add_argument("--reps", type=int, default=None, help="replication override")
        cmd.add_argument(
            "--workers",
            type=int,
            default=None,
            help="worker processes (default: CONSISTENCY_LAB_WORKERS or 1)",
        )
        cmd.add_argument("--plots", action="store_true", help="emit SVG line charts")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = RunConfig(
        scenario_path=args.scenario,
        out_dir=args.out,
        seed=args.seed,
        replications=args.reps,
        workers=args.workers if args.workers is not None else _default_workers(),
        plots=args.plots,
    )
    try:
        scenario = load_scenario(args.scenario)
        return _COMMANDS[args.command](scenario, config)
    except ConstructionError as exc:
        print(f"verdict: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # operational failure: report, never traceback
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
