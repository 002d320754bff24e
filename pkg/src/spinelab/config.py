"""Declarative experiment configs: plain-text key-value sections with a
versioned schema id, parsed into a validated ExperimentConfig."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

SCHEMA = "spinelab/1"
TASKS = ("heat", "eigen", "fkprofile", "hitprob", "green", "exponent", "verify")
SUITES = ("core-invariants", "fk", "spine-bounds", "appendix-b", "potential")


class ConfigError(ValueError):
    def __init__(self, path, message):
        super().__init__(f"[{path}] {message}")
        self.path = path


def parse_vertex(text: str):
    """Vertex syntax 'tag:c1,c2,...'; 's:' denotes the empty-coordinate spine."""
    if ":" not in text:
        raise ConfigError("vertex", f"expected 'tag:coords', got {text!r}")
    tag, _, coords = text.partition(":")
    coords = coords.strip()
    if not coords:
        return (tag, ())
    try:
        return (tag, tuple(int(c) for c in coords.split(",")))
    except ValueError:
        raise ConfigError("vertex", f"non-integer coordinate in {text!r}") from None


def format_vertex(v) -> str:
    return f"{v[0]}:{','.join(str(c) for c in v[1])}"


def parse_times(text: str) -> list:
    """Either 'n0..n1' (dyadic doubling) or a comma list of integers."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        lo, hi = int(lo), int(hi)
        if lo < 0 or hi < lo:
            raise ConfigError("task.times", f"bad range {text!r}")
        out = []
        n = lo
        while n <= hi:
            out.append(n)
            n *= 2
            if lo == 0:
                break
        return out
    return sorted({int(t) for t in text.split(",")})


@dataclass
class ExperimentConfig:
    graph_name: str
    graph_params: dict
    task: str
    source: Optional[tuple] = None
    target: Optional[tuple] = None
    times: list = field(default_factory=list)
    radius: Optional[int] = None          # None = auto
    quotient: str = "auto"
    tolerance: float = 1e-10
    seed: int = 0
    suite: Optional[str] = None
    region_radius: int = 2
    s_max: int = 4
    window: int = 40
    shell: tuple = (5, 15)
    width_frac: float = 0.05
    fast: bool = False
    out_dir: Path = Path("out")
    raw: dict = field(default_factory=dict)


def _parse_graph_params(items: dict) -> dict:
    params = {}
    for key, val in items.items():
        if key == "gallery":
            continue
        if key in ("d", "k", "h"):
            params[key if key != "d" else "d"] = int(val)
        elif key in ("D",):
            params["D"] = tuple(int(x) for x in val.split(","))
        elif key == "alpha":
            params["alpha"] = str(Fraction(val))
        elif key == "mode":
            params["mode"] = val
        else:
            raise ConfigError(f"graph.{key}", "unknown graph parameter")
    return params


def load_config(path) -> ExperimentConfig:
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(str(path), "config file not found")
    if not cp.has_section("meta") or cp.get("meta", "schema", fallback="") != SCHEMA:
        raise ConfigError("meta.schema", f"missing or unsupported schema "
                          f"(expected {SCHEMA!r})")
    if not cp.has_section("graph") or not cp.has_option("graph", "gallery"):
        raise ConfigError("graph.gallery", "a gallery graph name is required")
    if not cp.has_section("task") or not cp.has_option("task", "kind"):
        raise ConfigError("task.kind", "a task kind is required")
    kind = cp.get("task", "kind")
    if kind not in TASKS:
        raise ConfigError("task.kind", f"unknown task {kind!r}; one of {TASKS}")

    from . import gallery as gal
    name = cp.get("graph", "gallery")
    if name not in gal.GALLERY:
        raise ConfigError("graph.gallery", f"unknown gallery graph {name!r}")
    cfg = ExperimentConfig(
        graph_name=name,
        graph_params=_parse_graph_params(dict(cp.items("graph"))),
        task=kind,
        raw={s: dict(cp.items(s)) for s in cp.sections()},
    )
    t = cp["task"]
    if "source" in t:
        cfg.source = parse_vertex(t["source"])
    if "target" in t:
        cfg.target = parse_vertex(t["target"])
    if "times" in t:
        cfg.times = parse_times(t["times"])
    if "radius" in t and t["radius"] != "auto":
        cfg.radius = int(t["radius"])
    cfg.quotient = t.get("quotient", "auto")
    if cfg.quotient not in ("auto", "none"):
        raise ConfigError("task.quotient", "must be 'auto' or 'none'")
    cfg.tolerance = float(t.get("tolerance", "1e-10"))
    cfg.seed = int(t.get("seed", "0"))
    cfg.region_radius = int(t.get("region_radius", "2"))
    cfg.s_max = int(t.get("s_max", "4"))
    cfg.window = int(t.get("window", "40"))
    cfg.width_frac = float(t.get("width_frac", "0.05"))
    cfg.fast = t.get("fast", "false").lower() in ("1", "true", "yes")
    if "shell" in t:
        lo, hi = t["shell"].split(",")
        cfg.shell = (int(lo), int(hi))
    if kind == "verify":
        suite = t.get("suite", "")
        if suite not in SUITES:
            raise ConfigError("task.suite", f"unknown suite {suite!r}; one of {SUITES}")
        cfg.suite = suite
    if kind in ("heat", "exponent") and (cfg.source is None or not cfg.times):
        raise ConfigError("task", f"{kind} needs source and times")
    if kind in ("hitprob", "green") and cfg.source is None:
        raise ConfigError("task", f"{kind} needs a source/target vertex")
    if cp.has_section("output") and cp.has_option("output", "dir"):
        cfg.out_dir = Path(cp.get("output", "dir"))
    return cfg


def validate_vertices(cfg: ExperimentConfig, graph):
    for v in (cfg.source, cfg.target):
        if v is not None and not graph.contains(v):
            raise ConfigError("task", f"vertex {format_vertex(v)} not in "
                              f"{graph.name}")
