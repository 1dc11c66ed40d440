"""Run configuration: an INI file whose keys fully determine a run.

::

    [run]
    group = Z2
    alphabet = 0, 1
    seed = 7                # or: point_file = point.json
    eps = 1/2
    n0 = 1
    deltas = 3/2, 3/2       # or: derived
    window_radius = 20      # negative means an empty window
    probe_radius = 40       # default: window_radius + 2 * largest shape index
    max_cover_radius = 16
    disjointify = false

    [verify]
    checks = recompute, witness, flow, disjoint, density, covering, equivariance
    equivariance_samples = 3
    equivariance_radius = 3
    equivariance_window = 6
    flow_max_tiles = 300

    [output]
    dump = tiling.json
    render = tiling.svg
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .errors import QuasitilingError
from .groups import Group, get_group
from .rationals import as_rational
from .symbolic import ShiftPoint, load_point

ALL_CHECKS = ("recompute", "witness", "flow", "disjoint", "density", "covering", "equivariance")


class ConfigError(QuasitilingError, ValueError):
    pass


@dataclass
class RunConfig:
    group: Group
    alphabet: tuple = ("0", "1")
    seed: Optional[int] = None
    point_file: Optional[str] = None
    eps: Fraction = Fraction(1, 2)
    n0: int = 1
    deltas: Optional[tuple] = None
    window_radius: int = 10
    probe_radius: Optional[int] = None
    max_cover_radius: int = 16
    disjointify: bool = False
    checks: tuple = ALL_CHECKS
    equivariance_samples: int = 3
    equivariance_radius: int = 3
    equivariance_window: int = 6
    flow_max_tiles: int = 300
    dump: Optional[str] = None
    render: Optional[str] = None
    base_dir: str = field(default=".", repr=False)

    def point(self) -> ShiftPoint:
        if self.point_file:
            x = load_point(self._path(self.point_file))
            if x.group is not self.group:
                raise ConfigError(f"point file is over {x.group.tag}, config says {self.group.tag}")
            return x
        if self.seed is None:
            raise ConfigError("config needs either seed or point_file")
        return ShiftPoint.from_seed(self.group, self.alphabet, self.seed)

    def _path(self, p: str) -> str:
        return p if os.path.isabs(p) else os.path.join(self.base_dir, p)

    def output_path(self, key: str) -> Optional[str]:
        value = getattr(self, key)
        return None if value is None else self._path(value)

    def header(self) -> dict:
        """The config as stored in dumps (paths excluded so reruns elsewhere stay byte-identical)."""
        return {
            "group": self.group.tag,
            "alphabet": list(self.alphabet),
            "seed": self.seed,
            "point_file": self.point_file,
            "eps": f"{self.eps.numerator}/{self.eps.denominator}",
            "n0": self.n0,
            "deltas": None if self.deltas is None else [f"{d.numerator}/{d.denominator}" for d in self.deltas],
            "window_radius": self.window_radius,
            "probe_radius": self.probe_radius,
            "max_cover_radius": self.max_cover_radius,
            "disjointify": self.disjointify,
        }


def _list(value: str) -> list[str]:
    return [v.strip() for v in value.replace(";", ",").split(",") if v.strip()]


def parse_config(text: str, base_dir: str = ".") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config: {exc}") from None
    if not cp.has_section("run"):
        raise ConfigError("config needs a [run] section")
    run = cp["run"]
    try:
        cfg = RunConfig(group=get_group(run.get("group", "Z2")), base_dir=base_dir)
        if "alphabet" in run:
            cfg.alphabet = tuple(_list(run["alphabet"]))
        if run.get("seed"):
            cfg.seed = int(run["seed"])
        cfg.point_file = run.get("point_file") or None
        cfg.eps = as_rational(run.get("eps", "1/2"))
        cfg.n0 = run.getint("n0", 1)
        deltas = run.get("deltas", "derived").strip()
        cfg.deltas = None if deltas in ("", "derived") else tuple(as_rational(d) for d in _list(deltas))
        cfg.window_radius = run.getint("window_radius", 10)
        cfg.probe_radius = run.getint("probe_radius") if run.get("probe_radius") else None
        cfg.max_cover_radius = run.getint("max_cover_radius", 16)
        cfg.disjointify = run.getboolean("disjointify", False)
        if cp.has_section("verify"):
            ver = cp["verify"]
            if "checks" in ver:
                checks = tuple(_list(ver["checks"]))
                unknown = set(checks) - set(ALL_CHECKS)
                if unknown:
                    raise ConfigError(f"unknown checks {sorted(unknown)}")
                cfg.checks = checks
            cfg.equivariance_samples = ver.getint("equivariance_samples", cfg.equivariance_samples)
            cfg.equivariance_radius = ver.getint("equivariance_radius", cfg.equivariance_radius)
            cfg.equivariance_window = ver.getint("equivariance_window", cfg.equivariance_window)
            cfg.flow_max_tiles = ver.getint("flow_max_tiles", cfg.flow_max_tiles)
        if cp.has_section("output"):
            out = cp["output"]
            cfg.dump = out.get("dump") or None
            cfg.render = out.get("render") or None
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad config value: {exc}") from None
    return cfg


def load_config(path: str) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=os.path.dirname(os.path.abspath(path)))
