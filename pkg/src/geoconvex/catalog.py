"""Analytic catalog: charts, hypersurfaces, regions and expected verdicts.

Entries live in ``data/catalog.yaml`` and are the toolkit's regression
corpus: every expectation carries a provenance tag (TRIVIAL / DERIVED / PAPER)
and, for DERIVED, the name of the independent oracle that produced the
expected value.  User catalogs in the same format load through the same
functions.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .charts import AllSpace, Box, ExprRegion, MetricChart, Region, chart_from_config
from .errors import ConfigError, UnknownId
from .expressions import compile_scalar
from .surfaces import LevelSetHypersurface

__all__ = [
    "Expectation",
    "CatalogEntry",
    "catalog_ids",
    "load_catalog_entry",
    "load_catalog",
]

_PROVENANCE = {"TRIVIAL", "DERIVED", "PAPER"}


@dataclass(frozen=True)
class Expectation:
    op: str
    config: dict
    expect: dict
    provenance: str
    oracle: str = ""

    def digest(self) -> str:
        parts = [f"{k}={self.expect[k]}" for k in sorted(self.expect)]
        return f"{self.op}[{self.config.get('variant', 'all')}]: " + ", ".join(parts)


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    family: str
    chart: MetricChart
    surface: Optional[LevelSetHypersurface]
    audit_region: Optional[Region]
    omega: Optional[Region]
    params: dict
    length_scale: float
    notes: str
    expected: tuple[Expectation, ...]


def _resolve_number(value, params) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    return float(compile_scalar(str(value), (), params)(()))


def _build_region(cfg, coord_names, params) -> Region:
    if cfg is None:
        return AllSpace()
    kind = cfg.get("type", "box")
    lo = [_resolve_number(v, params) for v in cfg.get("lo", [])]
    hi = [_resolve_number(v, params) for v in cfg.get("hi", [])]
    if kind == "box":
        return Box(lo, hi)
    if kind == "expr":
        bounds = (lo, hi) if lo else None
        return ExprRegion(cfg["expr"], coord_names, bounds=bounds, params=params)
    raise ConfigError(f"unknown region type {kind!r}")


def _data_text() -> str:
    return (
        importlib.resources.files("geoconvex").joinpath("data/catalog.yaml").read_text()
    )


def load_catalog(path: Optional[str] = None) -> dict[str, dict]:
    """Raw catalog mapping id -> entry config."""
    if path is None:
        raw = yaml.safe_load(_data_text())
    else:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    entries = {}
    for item in raw:
        entries[item["id"]] = item
    return entries


def catalog_ids(path: Optional[str] = None) -> list[str]:
    return list(load_catalog(path).keys())


def _build_entry(cfg: dict, params_override: Optional[dict]) -> CatalogEntry:
    params = dict(cfg.get("params", {}))
    if params_override:
        params.update(params_override)
    chart_cfg = dict(cfg["chart"])
    chart = chart_from_config(chart_cfg)
    coord_names = chart.coord_names

    surface = None
    if "surface" in cfg:
        scfg = cfg["surface"]
        surface = LevelSetHypersurface(
            phi=compile_scalar(scfg["phi"], coord_names, params),
            grad_tol=float(scfg.get("grad_tol", 1e-7)),
            name=f"{cfg['id']}:phi",
        )

    audit_region = _build_region(cfg.get("audit_region"), coord_names, params)
    omega = _build_region(cfg["omega"], coord_names, params) if "omega" in cfg else None

    expected = []
    for ecfg in cfg.get("expected", []):
        provenance = ecfg.get("provenance", "")
        if provenance not in _PROVENANCE:
            raise ConfigError(
                f"entry {cfg['id']}: expectation provenance must be one of {_PROVENANCE}"
            )
        oracle = ecfg.get("oracle", "")
        if provenance == "DERIVED" and not oracle:
            raise ConfigError(
                f"entry {cfg['id']}: DERIVED expectation must name its oracle"
            )
        expected.append(
            Expectation(
                op=ecfg["op"],
                config=dict(ecfg.get("config", {})),
                expect=dict(ecfg.get("expect", {})),
                provenance=provenance,
                oracle=oracle,
            )
        )

    return CatalogEntry(
        id=cfg["id"],
        family=cfg.get("family", chart.name),
        chart=chart,
        surface=surface,
        audit_region=audit_region,
        omega=omega,
        params=params,
        length_scale=float(cfg.get("length_scale", 1.0)),
        notes=cfg.get("notes", ""),
        expected=tuple(expected),
    )


def load_catalog_entry(
    entry_id: str, params: Optional[dict] = None, path: Optional[str] = None
) -> CatalogEntry:
    """Fully constructed chart + surface/region + expectations for an id."""
    entries = load_catalog(path)
    if entry_id not in entries:
        raise UnknownId(f"unknown catalog id {entry_id!r}; known: {sorted(entries)}")
    return _build_entry(entries[entry_id], params)
