"""Experiment runner: deterministic task execution, CSV artifacts, manifests
and the heat-state cache."""

from __future__ import annotations

import hashlib
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from . import __version__, gallery
from .config import ExperimentConfig, format_vertex, validate_vertices
from .fits import fit_exponent
from .graphs import MarkovKernel, ball
from .heat import heat_states
from .potential import green, hitting_prob, radial_barrier
from .spectral import fit_harnack_fk, fk_profile, lambda1
from .windows import HeatCache, auto_radius, resolve_quotient

FLOAT_FMT = "%.17g"


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return FLOAT_FMT % float(x)


def write_csv(path: Path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(x) if not isinstance(x, str) else x
                              for x in row))
    path.write_text("\n".join(lines) + "\n")


def sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


@dataclass
class RunReport:
    config: ExperimentConfig
    outputs: list
    manifest_path: Path
    passed: bool = True
    details: dict = field(default_factory=dict)


def run(cfg: ExperimentConfig, cache_dir: Optional[str] = None,
        threads: int = 1) -> RunReport:
    """Execute a task config; outputs are deterministic functions of cfg."""
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = cache_dir or os.environ.get("SPINELAB_CACHE_DIR")
    cache = HeatCache(cache_dir) if cache_dir else None
    g = gallery.build(cfg.graph_name, **cfg.graph_params)
    validate_vertices(cfg, g)
    outputs = []
    details = {}
    passed = True

    if cfg.task in ("heat", "exponent"):
        src = cfg.source
        tgt = cfg.target if cfg.target is not None else src
        quo = None if cfg.quotient == "none" else "auto"
        radius = cfg.radius
        if radius is None:
            radius = auto_radius(max(cfg.times))
        om = resolve_quotient(g, (src, tgt), quo) if quo else None
        states = heat_states(g, src, cfg.times, radius, quotient=om, cache=cache)
        rows = []
        for s in states:
            b = s.bracket(tgt)
            rows.append((s.time, format_vertex(src), format_vertex(tgt),
                         b.lower, b.upper, s.rim_lost))
        out = cfg.out_dir / "heat.csv"
        write_csv(out, ["n", "x", "y", "lower", "upper", "lost_mass"], rows)
        outputs.append(out)
        details["radius"] = radius
        details["quotient"] = om.name if om else None
        if cfg.task == "exponent":
            series = [(n, (lo + up) / 2, up - lo)
                      for (n, _, _, lo, up, _) in rows]
            fit = fit_exponent(series, width_frac=cfg.width_frac)
            fit_out = cfg.out_dir / "exponent.json"
            fit_out.write_text(json.dumps(
                {"slope": fit.slope, "intercept": fit.intercept,
                 "drift": fit.drift, "points": fit.points,
                 "width_frac": cfg.width_frac}, indent=2, sort_keys=True) + "\n")
            outputs.append(fit_out)
            details["slope"] = fit.slope
            details["drift"] = fit.drift

    elif cfg.task == "eigen":
        center = cfg.source or gallery.origin_of(g)
        region = sorted(ball(g, center, cfg.region_radius))
        lam = lambda1(g, region, tol=cfg.tolerance)
        out = cfg.out_dir / "eigen.csv"
        write_csv(out, ["center", "radius", "vertices", "lambda1"],
                  [(format_vertex(center), cfg.region_radius, len(region), lam)])
        outputs.append(out)
        details["lambda1"] = lam

    elif cfg.task == "fkprofile":
        center = cfg.source or gallery.origin_of(g)
        prof = fk_profile(g, center, cfg.region_radius, s_max=cfg.s_max)
        out = cfg.out_dir / "fkprofile.csv"
        write_csv(out, ["nu", "value", "exhaustive"],
                  [(m, v, int(e)) for (m, v), e in zip(prof.samples, prof.exhaustive)])
        outputs.append(out)
        fit = fit_harnack_fk(g, [(center, cfg.region_radius)], s_max=cfg.s_max)
        man = cfg.out_dir / "fkfit.json"
        man.write_text(json.dumps(
            {"a": fit.a, "alpha": fit.alpha, "window": fit.window,
             "residual": fit.residual, "witnesses": fit.witnesses},
            indent=2, sort_keys=True) + "\n")
        outputs.append(man)

    elif cfg.task == "hitprob":
        target = cfg.target or cfg.source
        barrier = _maybe_barrier(g, cfg)
        sol = hitting_prob(g, [target], cfg.window, tol=cfg.tolerance,
                           barrier=barrier,
                           quotient=None if cfg.quotient == "none" else "auto")
        rows = []
        for i, v in enumerate(sol.window.ids):
            rows.append((format_vertex(v), int(sol.window.dist[i]),
                         sol.lower[i], sol.upper[i]))
        out = cfg.out_dir / "hitprob.csv"
        write_csv(out, ["vertex", "dist", "psi_minus", "psi_plus"], rows)
        outputs.append(out)
        details.update(residual=sol.residual, rim_bound=sol.rim_bound,
                       certified_upper=sol.certified_upper)

    elif cfg.task == "green":
        source = cfg.source
        targets = [cfg.target] if cfg.target else [source]
        barrier = _maybe_barrier(g, cfg)
        res = green(g, source, targets, cfg.window, barrier=barrier,
                    sweep_radii=[cfg.window // 2, 3 * cfg.window // 4])
        rows = [(format_vertex(x), b.lower, b.upper, b.width)
                for x, b in sorted(res.brackets.items())]
        out = cfg.out_dir / "green.csv"
        write_csv(out, ["vertex", "lower", "upper", "width"], rows)
        outputs.append(out)
        details.update(psi_bar=res.psi_bar, lower_only=res.lower_only,
                       sweep=[(int(r), v) for r, v in res.sweep])

    elif cfg.task == "verify":
        from .suites import verify
        report = verify(cfg.suite, fast=cfg.fast)
        out = cfg.out_dir / f"verify-{cfg.suite}.json"
        out.write_text(report.to_json() + "\n")
        outputs.append(out)
        passed = report.passed
        details["checks"] = [(c.name, c.passed) for c in report.checks]

    manifest = {
        "schema": "spinelab/manifest/1",
        "versions": {"spinelab": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "config": cfg.raw,
        "graph": g.name,
        "task": cfg.task,
        "seed": cfg.seed,
        "tolerance": cfg.tolerance,
        "workers": threads,
        "details": details,
        "outputs": {str(p.name): sha256_file(p) for p in outputs},
    }
    cache_stats = {"hits": cache.hits, "misses": cache.misses} if cache else None
    manifest_path = cfg.out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True,
                                        default=str) + "\n")
    if cache_stats is not None:
        (cfg.out_dir / "cache-stats.json").write_text(
            json.dumps(cache_stats, sort_keys=True) + "\n")
    return RunReport(cfg, outputs, manifest_path, passed, details)


def _maybe_barrier(g, cfg):
    """Point-target barrier for plain lattice graphs of dimension >= 3."""
    dim = g.meta.get("dim")
    if dim is not None and dim >= 3:
        return radial_barrier(dim)
    return None
