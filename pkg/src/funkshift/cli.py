"""Command-line experiments: ``funkshift {forward,invert-single,reconstruct-two,diagnose,phantom list}``.

Every run reads a JSON config, writes CSV/JSON into the output directory and
is deterministic for a fixed config and seed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from ._validation import check_center, check_positive_int, check_section_dim
from .funk import SectionField, forward_funk, point_pair_transform, read_section_field_csv
from .inversion import IllConditionedError, invert_funk_a, save_multiplier_json
from .parity import even_part
from .phantoms import list_phantoms, make_phantom
from .planes import PlaneFamily, sample_plane_family
from .sphere import (
    GridFunction,
    build_sphere_grid,
    geodesic_distance,
    lp_norm,
    sup_norm_outside_cap,
)
from .two_center import (
    TwoCenterSystem,
    _jsonable,
    attractor_escape_time,
    convergence_diagnostics,
    reconstruct_two_center,
    reconstruct_two_center_k1,
)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    n: int = 2
    k: int = 2
    center: list = field(default_factory=lambda: [0.0, 0.0, 0.0])
    center_b: Optional[list] = None
    grid_resolution: int = 32
    plane_count: int = 1000
    section_resolution: int = 64
    phantom: dict = field(default_factory=lambda: {"kind": "exp_linear"})
    m_max: int = 40
    delta: float = 0.2
    p_list: list = field(default_factory=lambda: [1.0, 2.0, 4.0])
    degree_max: int = 24
    route: str = "harmonic"
    seed: int = 0
    output_dir: str = "out"
    epsilon: float = 0.3
    frames: Optional[list] = None
    data: Optional[str] = None

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        cfg = cls(**raw)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        try:
            check_positive_int(self.n, "n")
            check_section_dim(self.k, self.n)
            check_center(self.center, self.n + 1)
            if self.center_b is not None:
                check_center(self.center_b, self.n + 1)
            check_positive_int(self.grid_resolution, "grid_resolution", 4)
            check_positive_int(self.plane_count, "plane_count")
            check_positive_int(self.section_resolution, "section_resolution", 8)
            check_positive_int(self.m_max, "m_max")
            check_positive_int(self.degree_max, "degree_max", 0)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if not 0 < self.delta < math.pi:
            raise ConfigError("delta must lie in (0, pi)")
        if not self.epsilon > 0:
            raise ConfigError("epsilon must be positive")
        if any(p < 1 for p in self.p_list):
            raise ConfigError("p_list entries must be >= 1")
        if self.route not in ("harmonic", "meanvalue"):
            raise ConfigError(f"unknown route {self.route!r}")
        if not isinstance(self.phantom, dict) or "kind" not in self.phantom:
            raise ConfigError("phantom must be an object with a 'kind'")

    def phantom_callable(self):
        try:
            return make_phantom(self.phantom, dim=self.n + 1)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def system(self) -> TwoCenterSystem:
        if self.center_b is None:
            raise ConfigError("center_b is required for two-center runs")
        try:
            return TwoCenterSystem(self.center, self.center_b, self.k)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


def _planes(cfg: ExperimentConfig, center) -> PlaneFamily:
    if cfg.frames is not None:
        try:
            return PlaneFamily(center, np.asarray(cfg.frames, dtype=float))
        except ValueError as exc:
            raise ConfigError(f"frames: {exc}") from None
    return sample_plane_family(center, cfg.n, cfg.k, cfg.plane_count, cfg.seed)


def _write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _metadata(cfg: ExperimentConfig, command: str, **extra) -> dict:
    return {"version": __version__, "command": command, "config": asdict(cfg), **extra}


def _errors(rec: np.ndarray, truth: np.ndarray, grid) -> dict:
    err = GridFunction(grid, rec - truth)
    return {"sup_error": lp_norm(err, math.inf), "L2_error": lp_norm(err, 2.0)}


def cmd_forward(cfg: ExperimentConfig, out: str) -> dict:
    f = cfg.phantom_callable()
    planes = _planes(cfg, cfg.center)
    g = forward_funk(f, planes, cfg.section_resolution)
    g.to_csv(os.path.join(out, "forward.csv"))
    meta = _metadata(cfg, "forward", planes=len(planes))
    _write_json(os.path.join(out, "metadata.json"), meta)
    return meta


def cmd_invert_single(cfg: ExperimentConfig, out: str) -> dict:
    grid = build_sphere_grid(cfg.n, cfg.grid_resolution)
    f = cfg.phantom_callable()
    target = even_part(f, cfg.center, cfg.k)
    if cfg.k == 1:
        # lines through a: the datum is f(x) + f(tau_a x) = 2 f_a^+(x)
        rec = grid.sample(lambda x: 0.5 * point_pair_transform(f, cfg.center, x))
        route = "point-pair"
    else:
        if cfg.n != 2 or cfg.k != 2:
            raise ConfigError("single-center inversion is implemented for n = 2, k = 2 (and k = 1)")
        route = cfg.route
        if route == "harmonic":
            if cfg.data is not None:
                g = read_section_field_csv(cfg.data, cfg.center, cfg.k)
            else:
                g = forward_funk(f, _planes(cfg, cfg.center), cfg.section_resolution)
            save_multiplier_json(os.path.join(out, "multipliers.json"), cfg.degree_max)
        else:
            from .funk import funk_data
            g = funk_data(f, cfg.section_resolution)
        rec = invert_funk_a(g, cfg.center, grid, route, cfg.degree_max, cfg.k)
    rec.to_csv(os.path.join(out, "reconstruction.csv"))
    summary = _metadata(cfg, "invert-single", route=route,
                        **_errors(rec.values, target(grid.nodes), grid))
    _write_json(os.path.join(out, "summary.json"), summary)
    return summary


def cmd_reconstruct_two(cfg: ExperimentConfig, out: str) -> dict:
    system = cfg.system()
    grid = build_sphere_grid(cfg.n, cfg.grid_resolution)
    f = cfg.phantom_callable()
    if cfg.k == 1:
        rec = reconstruct_two_center_k1(
            lambda x: point_pair_transform(f, system.a, x),
            lambda x: point_pair_transform(f, system.b, x),
            system, cfg.m_max, grid)
        rec.to_csv(os.path.join(out, "reconstruction.csv"))
        away = (geodesic_distance(grid.nodes, system.a_star) >= cfg.delta) & (
            geodesic_distance(grid.nodes, system.b_star) >= cfg.delta)
        err = np.abs(rec.values - f(grid.nodes))
        summary = _metadata(cfg, "reconstruct-two", chord_constant=float(
            point_pair_transform(f, system.a, system.a_star)[0]),
            sup_error_away_from_endpoints=float(err[away].max()))
        _write_json(os.path.join(out, "summary.json"), summary)
        return summary
    g = forward_funk(f, _planes(cfg, system.a), cfg.section_resolution)
    h = forward_funk(f, _planes(cfg, system.b), cfg.section_resolution)
    rec, report = reconstruct_two_center(g, h, system, cfg.m_max, grid, cfg.delta, cfg.degree_max,
                                         truth=f, p_list=cfg.p_list)
    rec.to_csv(os.path.join(out, "reconstruction.csv"))
    report.to_csv(os.path.join(out, "convergence.csv"))
    summary = _metadata(cfg, "reconstruct-two", report=report.meta,
                        sup_error_Kdelta=sup_norm_outside_cap(
                            GridFunction(grid, rec.values - f(grid.nodes)), system.a_star, cfg.delta))
    _write_json(os.path.join(out, "convergence.json"), summary)
    return summary


def cmd_diagnose(cfg: ExperimentConfig, out: str) -> dict:
    system = cfg.system()
    if system.k < 2:
        raise ConfigError("diagnostics need k > 1")
    grid = build_sphere_grid(cfg.n, cfg.grid_resolution)
    f = cfg.phantom_callable()
    report = convergence_diagnostics(system, f, cfg.m_max, cfg.delta, cfg.p_list, grid)
    report.meta["escape_time"] = attractor_escape_time(system, grid, cfg.delta, cfg.epsilon)
    report.to_csv(os.path.join(out, "diagnostics.csv"))
    summary = _metadata(cfg, "diagnose", report=report.meta)
    _write_json(os.path.join(out, "diagnostics.json"), summary)
    return summary


COMMANDS = {
    "forward": cmd_forward,
    "invert-single": cmd_invert_single,
    "reconstruct-two": cmd_reconstruct_two,
    "diagnose": cmd_diagnose,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="funkshift", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output directory (overrides output_dir)")
        p.add_argument("--threads", type=int, help="BLAS thread count (default: all cores)")
        p.add_argument("--seed", type=int, help="overrides the config seed")
    ph = sub.add_parser("phantom")
    ph.add_argument("action", choices=["list"])
    return parser


def _load_config(args) -> ExperimentConfig:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.out is not None:
        raw["output_dir"] = args.out
    try:
        return ExperimentConfig.from_dict(raw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "phantom":
        for name, doc in list_phantoms().items():
            print(f"{name}\t{doc}")
        return EXIT_OK
    try:
        cfg = _load_config(args)
        os.makedirs(cfg.output_dir, exist_ok=True)
        with threadpool_limits(limits=args.threads):
            COMMANDS[args.command](cfg, cfg.output_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IllConditionedError, FloatingPointError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
