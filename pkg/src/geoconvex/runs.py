"""Run configurations, operation runners, expectation checks and reports.

A run picks catalog entries (or inline operation lists), executes the
requested audits / probes / searches with a fixed seed, checks results against
expectations, and emits a JSON report whose bytes depend only on the config
and seed (timings are quarantined under the "timing" key).

Exit semantics: 0 all expectations met, 1 at least one mismatch, 2 no
mismatch but some check inconclusive, 3 config/IO error.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import __version__
from .audit import (
    geometric_convexity_check,
    infinitesimal_audit,
    local_convexity_probe,
    quasiconv_witness,
)
from .catalog import CatalogEntry, Expectation, _build_region, catalog_ids, load_catalog_entry
from .causal import CausalSearchParams, max_causal_geodesic
from .charts import FuncRegion, christoffel_at, metric_at
from .errors import ConfigError, GeoConvexError
from .expressions import compile_scalar
from .geodesics import integrate_geodesic
from .surfaces import surface_points, tangent_sample

__all__ = ["RunConfig", "run_audit", "render_catalog_table"]

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG_ERROR = 3


@dataclass
class RunConfig:
    """Fully serializable description of one batch run."""

    entries: list[str]
    operations: Optional[list[dict]] = None  # overrides catalog expectations
    seed: int = 0
    tol_scale: float = 1.0
    variant: Optional[str] = None
    workers: int = 1
    out: Optional[str] = None
    csv_dir: Optional[str] = None
    catalog_path: Optional[str] = None
    entry_params: dict = field(default_factory=dict)

    @classmethod
    def from_mapping(cls, cfg: dict) -> "RunConfig":
        entry = cfg.get("entry", "all")
        if isinstance(entry, str):
            entries = catalog_ids(cfg.get("catalog_path")) if entry == "all" else [entry]
        else:
            entries = list(entry)
        known = {
            "entry", "operations", "seed", "tol_scale", "variant", "workers",
            "out", "csv_dir", "catalog_path", "entry_params",
        }
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            entries=entries,
            operations=cfg.get("operations"),
            seed=int(cfg.get("seed", 0)),
            tol_scale=float(cfg.get("tol_scale", 1.0)),
            variant=cfg.get("variant"),
            workers=int(cfg.get("workers", 1)),
            out=cfg.get("out"),
            csv_dir=cfg.get("csv_dir"),
            catalog_path=cfg.get("catalog_path"),
            entry_params=dict(cfg.get("entry_params", {})),
        )

    @classmethod
    def from_yaml(cls, path) -> "RunConfig":
        with open(path) as fh:
            cfg = yaml.safe_load(fh) or {}
        if not isinstance(cfg, dict):
            raise ConfigError("run config must be a mapping")
        return cls.from_mapping(cfg)

    def to_dict(self) -> dict:
        return {
            "entries": list(self.entries),
            "operations": self.operations,
            "seed": self.seed,
            "tol_scale": self.tol_scale,
            "variant": self.variant,
            "workers": self.workers,
            "out": self.out,
            "csv_dir": self.csv_dir,
            "catalog_path": self.catalog_path,
            "entry_params": dict(self.entry_params),
        }


# ---------------------------------------------------------------------------
# operation runners


def _resolve_point(values, params):
    return np.array([
        v if isinstance(v, (int, float)) else float(compile_scalar(str(v), (), params)(()))
        for v in values
    ], dtype=float)


def _region_for(entry: CatalogEntry, config: dict):
    if "region" in config:
        return _build_region(config["region"], entry.chart.coord_names, entry.params)
    return entry.audit_region


def circular_orbit_state(chart, r0: float):
    """Initial data of the circular timelike orbit at radius r0 (needs r0 > 3M).

    The balance (v^phi / v^t)^2 = M / r0^3 cancels the radial acceleration;
    v^t then follows from unit normalization of a static spherical metric.
    """
    mass = float(chart.params["M"])
    if r0 <= 3.0 * mass:
        raise ConfigError("circular timelike orbits need r0 > 3M")
    x0 = np.array([0.0, r0, np.pi / 2.0, 0.0])
    g = metric_at(chart, x0)
    f = -float(g[0, 0])
    vt = 1.0 / np.sqrt(f - mass / r0)
    vphi = vt * np.sqrt(mass / r0**3)
    return x0, np.array([vt, 0.0, 0.0, vphi])


def _run_infinitesimal(entry, config, seed, tol_scale, workers):
    verdict = infinitesimal_audit(
        entry.chart,
        entry.surface,
        _region_for(entry, config),
        n_points=int(config.get("n_points", 20)),
        n_vectors=int(config.get("n_vectors", 8)),
        variant=config.get("variant", "all"),
        seed=seed,
        tol_scale=tol_scale,
        workers=workers,
    )
    return verdict.to_dict()


def _run_probe(entry, config, seed, tol_scale, workers):
    region = _region_for(entry, config)
    if "at" in config:
        points = [_resolve_point(config["at"], entry.params)]
    else:
        points = surface_points(
            entry.chart, entry.surface, region, int(config.get("n_points", 4)), seed=seed
        )
    reports = []
    for k, p0 in enumerate(points):
        reports.append(
            local_convexity_probe(
                entry.chart,
                entry.surface,
                p0,
                radius=config.get("radius"),
                n_dirs=int(config.get("n_dirs", 6)),
                variant=config.get("variant", "all"),
                seed=seed + 1000 * k,
                length_scale=entry.length_scale,
            )
        )
    return {
        "probes": [r.to_dict() for r in reports],
        "conclusions": sorted({r.conclusion for r in reports}),
    }


def _run_quasiconv(entry, config, seed, tol_scale, workers):
    side = int(config.get("side", 1))
    s_max = float(config.get("s_max", 1.0))
    chart, surface = entry.chart, entry.surface
    trajectories = []
    if config.get("mode") == "circular_orbit":
        x0, v0 = circular_orbit_state(chart, float(entry.params.get("r0", 4.0)))
        trajectories.append(
            integrate_geodesic(chart, x0, v0, s_max, 1e-11, max_step=s_max / 32.0)
        )
    else:
        points = surface_points(
            entry.chart, surface, _region_for(entry, config),
            int(config.get("n_geodesics", 4)), seed=seed,
        )
        rng = np.random.default_rng(seed + 17)
        for p0 in points:
            batch = tangent_sample(chart, surface, p0, "all", count=1, rng=rng)
            if not batch.samples:
                continue
            trajectories.append(
                integrate_geodesic(
                    chart, p0, batch.samples[0].v, s_max, 1e-11, max_step=s_max / 32.0
                )
            )
    witnesses = [
        quasiconv_witness(chart, surface, traj, side=side) for traj in trajectories
    ]
    return {
        "witnesses": [w.to_dict() for w in witnesses],
        "max_abs_phi": max((w.max_abs_phi for w in witnesses), default=0.0),
        "max_c": max((w.c for w in witnesses), default=0.0),
        "any_no_finite_c": any(w.no_finite_c for w in witnesses),
    }


def _run_geometric(entry, config, seed, tol_scale, workers):
    omega = entry.omega
    if omega is None:
        raise ConfigError(f"entry {entry.id} has no omega region for geometric checks")
    if "bounds" in config:
        lo, hi = config["bounds"]
        omega = FuncRegion(omega.contains, bounds=(lo, hi), label="bounded")
    verdict = geometric_convexity_check(
        entry.chart,
        omega,
        entry.surface,
        n_pairs=int(config.get("n_pairs", 60)),
        seed=seed,
        touch_tol=float(config.get("touch_tol", 1e-8)),
        workers=workers,
    )
    return verdict.to_dict()


def _run_causal_search(entry, config, seed, tol_scale, workers):
    if entry.omega is None:
        raise ConfigError(f"entry {entry.id} has no omega region for causal search")
    p = _resolve_point(config["p"], entry.params)
    q = _resolve_point(config["q"], entry.params)
    params = CausalSearchParams(
        n_starts=config.get("n_starts"),
        seed=seed,
        relation_attempts=int(config.get("relation_attempts", 32)),
    )
    result = max_causal_geodesic(entry.chart, entry.omega, p, q, params)
    return result.to_dict()


def _run_christoffel_value(entry, config, seed, tol_scale, workers):
    at = _resolve_point(config["at"], entry.params)
    l, i, j = (int(k) for k in config["index"])
    gamma = christoffel_at(entry.chart, at)
    return {"value": float(gamma[l, i, j]), "index": [l, i, j]}


def _run_metric_value(entry, config, seed, tol_scale, workers):
    at = _resolve_point(config["at"], entry.params)
    g = metric_at(entry.chart, at)
    return {"matrix": g.tolist(), "matrix_diag": np.diag(g).tolist()}


_RUNNERS = {
    "infinitesimal_audit": _run_infinitesimal,
    "probe": _run_probe,
    "quasiconv": _run_quasiconv,
    "geometric": _run_geometric,
    "causal_search": _run_causal_search,
    "christoffel_value": _run_christoffel_value,
    "metric_value": _run_metric_value,
}


# ---------------------------------------------------------------------------
# expectation checking


def check_expectation(expect: dict, result: dict) -> tuple[str, str]:
    """Compare a result dict against an expectation; (status, detail)."""
    flags = result.get("flags", [])
    anticipated_flags = set(expect.get("flags_include", []))
    if "inconclusive" in flags and "inconclusive" not in anticipated_flags:
        return "inconclusive", "operation flagged itself inconclusive"
    if "vacuous" in flags and not anticipated_flags:
        return "inconclusive", "verdict vacuous (no samples)"

    problems = []
    for key, wanted in expect.items():
        if key == "tol":
            continue
        if key == "sign":
            if result.get("sign") != wanted:
                problems.append(f"sign={result.get('sign')!r}, expected {wanted!r}")
        elif key == "flags_include":
            missing = [f for f in wanted if f not in flags]
            if missing:
                problems.append(f"flags missing {missing}")
        elif key == "flags_any_prefix":
            for prefix in wanted:
                if not any(f.startswith(prefix) for f in flags):
                    problems.append(f"no flag with prefix {prefix!r}")
        elif key == "conclusions":
            got = result.get("conclusions", [])
            extra = [c for c in got if c not in wanted]
            if extra or not got:
                problems.append(f"conclusions={got}, allowed {wanted}")
        elif key == "conclusion":
            got = result.get("probes", [{}])[0].get("conclusion")
            if got != wanted:
                problems.append(f"conclusion={got!r}, expected {wanted!r}")
        elif key == "status":
            if result.get("status") != wanted:
                problems.append(f"status={result.get('status')!r}, expected {wanted!r}")
        elif key == "length":
            tol = float(expect.get("tol", 1e-9))
            got = float(result.get("length", float("nan")))
            if not abs(got - wanted) <= tol * max(1.0, abs(wanted)):
                problems.append(f"length={got!r}, expected {wanted!r} +- rel {tol}")
        elif key == "value":
            tol = float(expect.get("tol", 1e-9))
            got = float(result.get("value", float("nan")))
            if not abs(got - wanted) <= tol * max(1.0, abs(wanted)):
                problems.append(f"value={got!r}, expected {wanted!r}")
        elif key == "matrix_diag":
            tol = float(expect.get("tol", 1e-9))
            got = result.get("matrix_diag", [])
            if len(got) != len(wanted) or any(
                abs(a - b) > tol * max(1.0, abs(b)) for a, b in zip(got, wanted)
            ):
                problems.append(f"matrix_diag={got}, expected {wanted}")
        elif key == "max_abs_phi_below":
            got = float(result.get("max_abs_phi", float("inf")))
            if not got <= wanted:
                problems.append(f"max_abs_phi={got!r} > {wanted!r}")
        elif key == "finite_c":
            if bool(result.get("any_no_finite_c", False)) == bool(wanted):
                problems.append("no finite c fitted" if wanted else "finite c fitted")
        elif key == "min_witnesses":
            got = len(result.get("details", {}).get("witnesses", []))
            if got < wanted:
                problems.append(f"{got} witnesses, expected >= {wanted}")
        else:
            problems.append(f"unknown expectation key {key!r}")
    if problems:
        return "mismatch", "; ".join(problems)
    return "met", ""


# ---------------------------------------------------------------------------
# drive a run


def _items_for_entry(entry: CatalogEntry, config: RunConfig):
    if config.operations is not None:
        items = []
        for op_cfg in config.operations:
            items.append(
                Expectation(
                    op=op_cfg["op"],
                    config=dict(op_cfg.get("config", {})),
                    expect=dict(op_cfg.get("expect", {})),
                    provenance=op_cfg.get("provenance", "TRIVIAL"),
                    oracle=op_cfg.get("oracle", ""),
                )
            )
        return items
    return list(entry.expected)


def run_audit(config: RunConfig) -> tuple[dict, int]:
    """Execute a run config; returns (report dict, exit status)."""
    t_start = time.perf_counter()
    entry_reports = []
    n_met = n_mismatch = n_inconclusive = 0
    for entry_id in config.entries:
        entry = load_catalog_entry(
            entry_id, params=config.entry_params.get(entry_id), path=config.catalog_path
        )
        records = []
        for idx, item in enumerate(_items_for_entry(entry, config)):
            op_config = dict(item.config)
            if config.variant is not None and "variant" in op_config:
                op_config["variant"] = config.variant
            runner = _RUNNERS.get(item.op)
            if runner is None:
                raise ConfigError(f"unknown operation {item.op!r}")
            t_op = time.perf_counter()
            result = runner(entry, op_config, config.seed + idx, config.tol_scale, config.workers)
            elapsed = time.perf_counter() - t_op
            if item.expect:
                status, detail = check_expectation(item.expect, result)
            else:
                status, detail = "met", "no expectation attached"
            if status == "met":
                n_met += 1
            elif status == "mismatch":
                n_mismatch += 1
            else:
                n_inconclusive += 1
            records.append(
                {
                    "op": item.op,
                    "config": op_config,
                    "expected": item.expect,
                    "provenance": item.provenance,
                    "oracle": item.oracle,
                    "result": result,
                    "check": {"status": status, "detail": detail},
                    "timing": {"seconds": elapsed},
                }
            )
        entry_reports.append(
            {"id": entry.id, "family": entry.family, "params": entry.params, "records": records}
        )

    report = {
        "schema": 1,
        "tool": {"name": "geoconvex", "version": __version__},
        "config": config.to_dict(),
        "entries": entry_reports,
        "summary": {
            "checks_met": n_met,
            "checks_mismatched": n_mismatch,
            "checks_inconclusive": n_inconclusive,
        },
        "timing": {"total_seconds": time.perf_counter() - t_start},
    }
    if n_mismatch:
        code = EXIT_MISMATCH
    elif n_inconclusive:
        code = EXIT_INCONCLUSIVE
    else:
        code = EXIT_OK
    return report, code


def strip_timing(report: dict) -> dict:
    """Copy of a report with every timing field removed (for byte comparisons)."""
    clean = json.loads(json.dumps(report))
    clean.pop("timing", None)
    for entry in clean.get("entries", []):
        for record in entry.get("records", []):
            record.pop("timing", None)
    return clean


def write_report(report: dict, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")


def render_catalog_table(family: Optional[str] = None, path: Optional[str] = None) -> str:
    """Deterministic listing of catalog entries and expectation digests."""
    from .catalog import load_catalog

    rows = []
    for entry_id, cfg in sorted(load_catalog(path).items()):
        fam = cfg.get("family", "")
        if family and family != fam:
            continue
        digests = "; ".join(
            f"{e['op']}→{_short_expect(e.get('expect', {}))}" for e in cfg.get("expected", [])
        )
        rows.append((entry_id, fam, digests))
    if not rows:
        return "no catalog entries match\n"
    width_id = max(len(r[0]) for r in rows)
    width_fam = max(len(r[1]) for r in rows)
    lines = [f"{'id':<{width_id}}  {'family':<{width_fam}}  expectations"]
    for entry_id, fam, digests in rows:
        lines.append(f"{entry_id:<{width_id}}  {fam:<{width_fam}}  {digests}")
    return "\n".join(lines) + "\n"


def _short_expect(expect: dict) -> str:
    for key in ("sign", "conclusion", "conclusions", "status", "value", "max_abs_phi_below"):
        if key in expect:
            return f"{expect[key]}"
    return ",".join(sorted(expect)) or "(run only)"


class RunError(GeoConvexError):
    pass
