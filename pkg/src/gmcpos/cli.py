"""Command-line runner.

Subcommands: ``plan``, ``compare``, ``baseline``, ``graph``, ``oracle`` and
``render``.  Scenarios come from flags, from a built-in preset
(``--preset loop-1A``) or from an INI-style config file with one scenario per
section::

    [DEFAULT]
    radius = 6.0
    iterations = 50

    [corner]
    map = fixture:loop_corridor
    operator = 1.3, 1.3
    robots = 3

Flags override file values, which override built-in defaults.  Maps are
either file paths or ``fixture:<name>``.  Log level comes from ``GMCPOS_LOG``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from gmcpos import baseline, coverage, distill, fixtures, oracle, planner, roadmap
from gmcpos.errors import GmcPosError, MapParseError, MapValidationError, ScenarioError
from gmcpos.mapio import COVERAGE_UNIVERSES, OccupancyGrid, WorldPoint, parse_map
from gmcpos.render import DEFAULT_SCALE, render

log = logging.getLogger("gmcpos")

_DEFAULT_PARAMS = distill.SkeletonParams()


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    map: str
    operator: tuple[float, float]
    robots: int
    radius: float = planner.DEFAULT_RADIUS
    seed: int = 0
    iterations: int = baseline.DEFAULT_ITERATIONS
    coverage_universe: str = "known"
    segment_length: float = _DEFAULT_PARAMS.segment_length
    crossing_merge_radius: float = _DEFAULT_PARAMS.crossing_merge_radius
    end_segment_min_length: float = _DEFAULT_PARAMS.end_segment_min_length
    min_clearance: float = _DEFAULT_PARAMS.min_clearance

    def __post_init__(self):
        if self.coverage_universe not in COVERAGE_UNIVERSES:
            raise ScenarioError(f"coverage_universe must be one of {COVERAGE_UNIVERSES}, got {self.coverage_universe!r}")
        if self.iterations < 1:
            raise ScenarioError(f"iterations must be >= 1, got {self.iterations}")
        if not self.map.startswith("fixture:") and not Path(self.map).is_file():
            raise MapParseError(f"map file not found: {self.map}")

    @property
    def params(self) -> distill.SkeletonParams:
        return distill.SkeletonParams(
            self.segment_length, self.crossing_merge_radius, self.end_segment_min_length, self.min_clearance
        )

    def scenario(self) -> planner.Scenario:
        return planner.Scenario(WorldPoint(*self.operator), self.robots, self.radius, self.seed)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["operator"] = list(self.operator)
        return d


_FIELD_TYPES = {
    "map": str,
    "robots": int,
    "radius": float,
    "seed": int,
    "iterations": int,
    "coverage_universe": str,
    "segment_length": float,
    "crossing_merge_radius": float,
    "end_segment_min_length": float,
    "min_clearance": float,
}


def parse_point(text: str) -> tuple[float, float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected X,Y but got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y but got {text!r}") from None


def load_map(spec: str) -> OccupancyGrid:
    if spec.startswith("fixture:"):
        name = spec.split(":", 1)[1]
        try:
            return fixtures.load_fixture(name)
        except KeyError as exc:
            raise MapParseError(str(exc.args[0])) from None
    return parse_map(spec)


def _overrides(args) -> dict:
    out = {}
    for key in _FIELD_TYPES:
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    if getattr(args, "operator", None) is not None:
        out["operator"] = args.operator
    return out


def _build(name: str, values: dict) -> ScenarioConfig:
    missing = [k for k in ("map", "operator", "robots") if k not in values]
    if missing:
        raise ScenarioError(f"scenario {name!r} is missing {', '.join(missing)}")
    return ScenarioConfig(name=name, **values)


def resolve_configs(args) -> list[ScenarioConfig]:
    """Scenario list from ``--config``/``--preset`` plus flag overrides."""
    flags = _overrides(args)
    configs = []
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise MapParseError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        parser.read(path, encoding="utf-8")
        for section in parser.sections():
            values = {}
            for key, raw in parser[section].items():
                if key == "operator":
                    values[key] = parse_point(raw)
                elif key in _FIELD_TYPES:
                    try:
                        values[key] = _FIELD_TYPES[key](raw)
                    except ValueError:
                        raise ScenarioError(f"[{section}] {key}: cannot parse {raw!r}") from None
                else:
                    raise ScenarioError(f"[{section}] unknown key {key!r}")
            if "map" in values and not values["map"].startswith("fixture:") and not Path(values["map"]).is_absolute():
                values["map"] = str(path.parent / values["map"])
            configs.append(_build(section, {**values, **flags}))
    for preset in getattr(args, "preset", None) or []:
        if preset not in fixtures.SCENARIOS:
            raise ScenarioError(f"unknown preset {preset!r}; choose from {sorted(fixtures.SCENARIOS)}")
        fs = fixtures.SCENARIOS[preset]
        base = {"map": f"fixture:{fs.map_name}", "operator": tuple(fs.operator), "robots": fs.robot_count}
        configs.append(_build(preset, {**base, **flags}))
    if not configs:
        configs.append(_build(getattr(args, "name", None) or "scenario", flags))
    return configs


# --------------------------------------------------------------------------
# pipeline


def build_graph(cfg: ScenarioConfig, grid: OccupancyGrid | None = None):
    grid = grid if grid is not None else load_map(cfg.map)
    raw = distill.distill(grid, cfg.params)
    return grid, roadmap.finalize_graph(raw, grid.origin), raw


def run_plan(cfg: ScenarioConfig) -> dict:
    grid, graph, raw = build_graph(cfg)
    sc = cfg.scenario()
    placement = planner.select_positions(graph, grid, sc)
    report = coverage.acp(grid, placement.positions, sc.operator, sc.coverage_radius, cfg.coverage_universe)
    return {
        "config": cfg.to_dict(),
        "graph": {"nodes": len(graph), "edges": len(graph.edges()), "dropped_components": raw.dropped_components},
        "placement": placement.to_dict(),
        "coverage": report.to_dict(),
        "_objects": (grid, graph, placement, report),
    }


def run_compare(cfg: ScenarioConfig, workers: int = 1) -> dict:
    plan = run_plan(cfg)
    grid = plan["_objects"][0]
    summary = baseline.average_acp(grid, cfg.scenario(), cfg.iterations, cfg.coverage_universe, workers)
    gmc = plan["coverage"]["acp"]
    return {
        "scenario": cfg.name,
        "config": cfg.to_dict(),
        "gmcpos": {k: v for k, v in plan.items() if k not in ("config", "_objects")},
        "conditional_random": summary.to_dict(),
        "gmcpos_acp": gmc,
        "cr_mean": summary.mean_acp,
        "cr_stddev": summary.stddev,
        "delta": gmc - summary.mean_acp,
    }


def _compare_job(args):
    cfg, workers = args
    return run_compare(cfg, workers)


def compare_rows(results: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["scenario", "gmcpos_acp", "cr_mean", "cr_stddev", "delta"])
    for res in results:
        writer.writerow([res["scenario"], repr(res["gmcpos_acp"]), repr(res["cr_mean"]), repr(res["cr_stddev"]), repr(res["delta"])])
    return buf.getvalue()


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(out_dir, filename, text):
    if out_dir is None:
        sys.stdout.write(text)
        return None
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / filename
    path.write_text(text, encoding="utf-8", newline="\n")
    log.info("wrote %s", path)
    return path


# --------------------------------------------------------------------------
# commands


def cmd_plan(args) -> int:
    for cfg in resolve_configs(args):
        plan = run_plan(cfg)
        grid, graph, placement, report = plan.pop("_objects")
        _write(args.out, f"{cfg.name}.plan.json", _dump(plan))
        if args.emit_graph:
            _write(args.out, f"{cfg.name}.graph.json", graph.to_json() + "\n")
        if args.render:
            target = Path(args.out or ".") / f"{cfg.name}.png"
            target.parent.mkdir(parents=True, exist_ok=True)
            render(grid, graph, placement.positions, cfg.operator, cfg.radius, report.mask, target, args.scale, cfg.coverage_universe)
    return 0


def cmd_compare(args) -> int:
    configs = resolve_configs(args)
    workers = max(1, args.workers)
    if len(configs) > 1 and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_compare_job, [(cfg, 1) for cfg in configs]))
    else:
        results = [run_compare(cfg, workers) for cfg in configs]
    _write(args.out, "compare.json", _dump(results))
    _write(args.out, "compare.csv", compare_rows(results))
    return 0


def cmd_baseline(args) -> int:
    out = []
    for cfg in resolve_configs(args):
        grid = load_map(cfg.map)
        summary = baseline.average_acp(grid, cfg.scenario(), cfg.iterations, cfg.coverage_universe, max(1, args.workers))
        first = baseline.conditional_random(grid, cfg.scenario())
        out.append({"scenario": cfg.name, "config": cfg.to_dict(), "summary": summary.to_dict(), "first_placement": first.to_dict()})
    _write(args.out, "baseline.json", _dump(out))
    return 0


def cmd_graph(args) -> int:
    cfg_values = _overrides(args)
    if "map" not in cfg_values:
        raise ScenarioError("graph needs --map")
    grid = load_map(cfg_values["map"])
    params = distill.SkeletonParams(
        cfg_values.get("segment_length", _DEFAULT_PARAMS.segment_length),
        cfg_values.get("crossing_merge_radius", _DEFAULT_PARAMS.crossing_merge_radius),
        cfg_values.get("end_segment_min_length", _DEFAULT_PARAMS.end_segment_min_length),
        cfg_values.get("min_clearance", _DEFAULT_PARAMS.min_clearance),
    )
    raw = distill.distill(grid, params)
    graph = roadmap.finalize_graph(raw, grid.origin)
    _write(args.out, "graph.json", graph.to_json() + "\n")
    return 0


def cmd_oracle(args) -> int:
    results = []
    for cfg in resolve_configs(args):
        grid, graph, _ = build_graph(cfg)
        sc = cfg.scenario()
        placement = planner.select_positions(graph, grid, sc)
        achieved = coverage.acp(grid, placement.positions, sc.operator, sc.coverage_radius, cfg.coverage_universe).acp
        entry = {"scenario": cfg.name, "config": cfg.to_dict(), "planner_acp": achieved}
        entry["audit_violations"] = oracle.audit_placement(graph, grid, sc, placement)
        if args.check in ("all", "exhaustive"):
            best = oracle.exhaustive_best_acp(grid, graph, sc.operator, cfg.robots, sc.coverage_radius, cfg.coverage_universe)
            entry["exhaustive"] = {"best_acp": best.acp, "nodes": list(best.nodes), "subsets": best.subsets}
        if args.check in ("all", "coverage"):
            total, covered, value = oracle.brute_force_acp(grid, placement.positions, sc.operator, sc.coverage_radius, cfg.coverage_universe)
            entry["brute_force_acp"] = {"A": total, "A_cover": covered, "acp": value, "matches": value == achieved}
        results.append(entry)
    _write(args.out, "oracle.json", _dump(results))
    return 1 if any(r["audit_violations"] for r in results) else 0


def cmd_render(args) -> int:
    plan = json.loads(Path(args.plan).read_text(encoding="utf-8"))
    cfg = ScenarioConfig(**{**plan["config"], "operator": tuple(plan["config"]["operator"])})
    grid, graph, _ = build_graph(cfg)
    positions = [WorldPoint(*p) for p in plan["placement"]["positions"]]
    report = coverage.acp(grid, positions, cfg.operator, cfg.radius, cfg.coverage_universe)
    target = Path(args.image)
    target.parent.mkdir(parents=True, exist_ok=True)
    render(grid, graph, positions, cfg.operator, cfg.radius, report.mask, target, args.scale, cfg.coverage_universe)
    return 0


def _scenario_flags(p: argparse.ArgumentParser, with_seed: bool = True):
    p.add_argument("--map", help="map file (.yaml metadata or ASCII grid) or fixture:<name>")
    p.add_argument("--operator", type=parse_point, metavar="X,Y")
    p.add_argument("--robots", type=int, metavar="N")
    p.add_argument("--radius", type=float, metavar="R", help="coverage radius in meters (default 6.0)")
    if with_seed:
        p.add_argument("--seed", type=int, metavar="S")
        p.add_argument("--iterations", type=int, metavar="K")
    p.add_argument("--coverage-universe", dest="coverage_universe", choices=COVERAGE_UNIVERSES)
    p.add_argument("--segment-length", dest="segment_length", type=float)
    p.add_argument("--crossing-merge-radius", dest="crossing_merge_radius", type=float)
    p.add_argument("--end-segment-min-length", dest="end_segment_min_length", type=float)
    p.add_argument("--min-clearance", dest="min_clearance", type=float)
    p.add_argument("--config", help="INI file, one scenario per section")
    p.add_argument("--preset", action="append", choices=sorted(fixtures.SCENARIOS), help="built-in scenario (repeatable)")
    p.add_argument("--name", help="scenario name when built from flags only")
    p.add_argument("--out", help="output directory (default: stdout)")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gmcpos", description="Graph-based multi-robot coverage positioning.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="place robots and score coverage")
    _scenario_flags(p)
    p.add_argument("--emit-graph", action="store_true", help="also write the roadmap graph JSON")
    p.add_argument("--render", action="store_true", help="also write a PNG figure")
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE, help="pixels per map cell in figures")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("compare", help="planner vs. Conditional Random, CSV + JSON")
    _scenario_flags(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("baseline", help="Conditional Random statistics only")
    _scenario_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("graph", help="distill a map into a roadmap graph JSON")
    _scenario_flags(p, with_seed=False)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("oracle", help="audit the planner against the reference checks")
    _scenario_flags(p)
    p.add_argument("--check", choices=("all", "audit", "exhaustive", "coverage"), default="all")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("render", help="draw a saved plan report")
    p.add_argument("plan", help="a *.plan.json written by 'plan'")
    p.add_argument("image", help="output image path (.png)")
    p.add_argument("--scale", type=int, default=DEFAULT_SCALE)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("GMCPOS_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MapParseError, MapValidationError, ScenarioError, ValueError) as exc:
        print(f"gmcpos: error: {exc}", file=sys.stderr)
        return 2
    except (GmcPosError, OSError) as exc:
        print(f"gmcpos: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
