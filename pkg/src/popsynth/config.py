"""Pipeline configuration (JSON).

Relative input paths are resolved against the directory holding the config
file.  See README.md for the full schema.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import ipf, ipu
from .assignment import DEFAULT_ADHERENCE, DiscreteDistribution
from .errors import ConfigError, InputFileError, ParseError
from .geo import DEFAULT_MAX_ATTEMPTS, DISTANCES
from .synthesis import AdminUnit

INPUT_KEYS = ("household_marginals", "person_marginals", "seed_sample", "boundary",
              "density_grid", "job_table", "prevalence")
U64_MAX = 2**64 - 1


@dataclass(frozen=True)
class WorkplaceCategory:
    category: str
    per_unit: int
    job_labels: tuple


@dataclass
class PipelineConfig:
    region: str
    seed: int
    inputs: dict
    admin_units: list
    region_code: int = 5
    ipf_enabled: bool = True
    ipf_tol: float = ipf.DEFAULT_TOL
    ipf_max_iters: int = ipf.DEFAULT_MAX_ITERS
    ipu_tol: float = ipu.DEFAULT_TOL
    ipu_max_iters: int = ipu.DEFAULT_MAX_ITERS
    noise_half_width: Optional[float] = None
    max_attempts_per_point: int = DEFAULT_MAX_ATTEMPTS
    distance: str = "euclidean"
    schools_per_unit: int = 0
    public_places_per_unit: int = 0
    workplaces: list = field(default_factory=list)
    homebound_rates: dict = field(default_factory=dict)
    homebound_labels: tuple = ("Unemployed", "Homemaker")
    retirement_age: int = 60
    infant_age: int = 3
    adult_age: int = 18
    adherence: DiscreteDistribution = DEFAULT_ADHERENCE
    metrics_subsample: Optional[int] = 2000
    source_path: Optional[Path] = None

    def input_path(self, key):
        return self.inputs[key]


def _get(d, key, kind, default=None, required=False, where="config"):
    if key not in d:
        if required:
            raise ConfigError(f"{where}: missing required key {key!r}")
        return default
    v = d[key]
    if kind is float and isinstance(v, int) and not isinstance(v, bool):
        v = float(v)
    if v is not None and not isinstance(v, kind) or isinstance(v, bool) and kind is not bool:
        raise ConfigError(f"{where}: {key!r} must be {getattr(kind, '__name__', kind)}")
    return v


def _count(v, name):
    if not isinstance(v, int) or isinstance(v, bool) or v < 0:
        raise ConfigError(f"{name} must be a non-negative integer")
    return v


def _prob(v, name):
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not 0 <= v <= 1:
        raise ConfigError(f"{name} must be a probability in [0, 1]")
    return float(v)


def parse_config(doc, base_dir=Path(".")):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    region = _get(doc, "region", str, required=True)
    seed = doc.get("seed")
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed <= U64_MAX:
        raise ConfigError("config: 'seed' must be present and an unsigned 64-bit integer")

    raw_inputs = _get(doc, "inputs", dict, required=True)
    inputs = {}
    for key in INPUT_KEYS:
        p = _get(raw_inputs, key, str, required=True, where="inputs")
        path = Path(p)
        inputs[key] = path if path.is_absolute() else base_dir / path

    units = []
    for i, u in enumerate(_get(doc, "admin_units", list, required=True)):
        where = f"admin_units[{i}]"
        if not isinstance(u, dict):
            raise ConfigError(f"{where} must be an object")
        share = _get(u, "share", float, 1.0, where=where)
        if share < 0:
            raise ConfigError(f"{where}: share must be >= 0")
        units.append(AdminUnit(_get(u, "name", str, required=True, where=where),
                               _get(u, "lat", float, required=True, where=where),
                               _get(u, "lon", float, required=True, where=where), share))
    if not units:
        raise ConfigError("config: admin_units is empty")

    cfg = PipelineConfig(region=region, seed=seed, inputs=inputs, admin_units=units)
    cfg.region_code = _count(doc.get("region_code", cfg.region_code), "region_code")

    sect = _get(doc, "ipf", dict, {})
    cfg.ipf_enabled = _get(sect, "enabled", bool, True, where="ipf")
    cfg.ipf_tol = _get(sect, "tol", float, cfg.ipf_tol, where="ipf")
    cfg.ipf_max_iters = _count(sect.get("max_iters", cfg.ipf_max_iters), "ipf.max_iters")
    sect = _get(doc, "ipu", dict, {})
    cfg.ipu_tol = _get(sect, "tol", float, cfg.ipu_tol, where="ipu")
    cfg.ipu_max_iters = _count(sect.get("max_iters", cfg.ipu_max_iters), "ipu.max_iters")
    if cfg.ipf_tol <= 0 or cfg.ipu_tol <= 0:
        raise ConfigError("tolerances must be positive")
    if cfg.ipf_max_iters < 1 or cfg.ipu_max_iters < 1:
        raise ConfigError("iteration caps must be >= 1")

    sect = _get(doc, "geo", dict, {})
    cfg.noise_half_width = _get(sect, "noise_half_width", float, None, where="geo")
    if cfg.noise_half_width is not None and cfg.noise_half_width < 0:
        raise ConfigError("geo.noise_half_width must be >= 0")
    cfg.max_attempts_per_point = _count(sect.get("max_attempts_per_point", DEFAULT_MAX_ATTEMPTS),
                                        "geo.max_attempts_per_point")
    cfg.distance = _get(sect, "distance", str, "euclidean", where="geo")
    if cfg.distance not in DISTANCES:
        raise ConfigError(f"geo.distance must be one of {sorted(DISTANCES)}")

    sect = _get(doc, "facilities", dict, {})
    cfg.schools_per_unit = _count(sect.get("schools_per_unit", 0), "facilities.schools_per_unit")
    cfg.public_places_per_unit = _count(sect.get("public_places_per_unit", 0),
                                        "facilities.public_places_per_unit")
    for i, w in enumerate(_get(sect, "workplaces", list, [], where="facilities")):
        where = f"facilities.workplaces[{i}]"
        labels = _get(w, "job_labels", list, required=True, where=where)
        if not all(isinstance(x, str) for x in labels):
            raise ConfigError(f"{where}: job_labels must be strings")
        cfg.workplaces.append(WorkplaceCategory(
            _get(w, "category", str, required=True, where=where),
            _count(w.get("per_unit", 0), f"{where}.per_unit"), tuple(labels)))

    sect = _get(doc, "homebound", dict, {})
    rates = _get(sect, "rates", dict, {}, where="homebound")
    cfg.homebound_rates = {k: _prob(v, f"homebound.rates.{k}") for k, v in rates.items()}
    cfg.homebound_labels = tuple(_get(sect, "labels", list, list(cfg.homebound_labels), where="homebound"))
    cfg.retirement_age = _count(sect.get("retirement_age", cfg.retirement_age), "homebound.retirement_age")
    cfg.infant_age = _count(sect.get("infant_age", cfg.infant_age), "homebound.infant_age")
    cfg.adult_age = _count(doc.get("adult_age", cfg.adult_age), "adult_age")

    sect = _get(doc, "adherence", dict, None)
    if sect is not None:
        values = _get(sect, "values", list, required=True, where="adherence")
        probs = _get(sect, "probabilities", list, required=True, where="adherence")
        for v in values:
            _prob(v, "adherence value")
        for p in probs:
            _prob(p, "adherence probability")
        cfg.adherence = DiscreteDistribution(tuple(values), tuple(float(p) for p in probs))

    sect = _get(doc, "metrics", dict, {})
    sub = sect.get("subsample", cfg.metrics_subsample)
    cfg.metrics_subsample = None if sub is None else _count(sub, "metrics.subsample")
    return cfg


def load_config(path, seed=None):
    """Load and validate a config file; ``seed`` overrides the configured seed."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read config ({exc.strerror})", path) from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    if seed is not None and isinstance(doc, dict):
        doc = dict(doc, seed=seed)
    try:
        cfg = parse_config(doc, path.parent)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg.source_path = path
    return cfg
