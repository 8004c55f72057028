"""Loaders for every external input of a synthesis run.

All tabular inputs are UTF-8 CSV files with a mandatory header row; the region
boundary is a GeoJSON Polygon.  Loaders are pure: they read the file, validate
it and return immutable domain objects, raising a
:class:`~popsynth.errors.ValidationError` subclass that names the file and the
offending line (or GeoJSON ring) on bad input.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputFileError, ParseError, ValidationError

log = logging.getLogger(__name__)

MARGINAL_HEADER = ("attribute", "category", "target")
SEED_HEADER = ("hh_id", "age", "sex", "height", "weight", "religion", "caste", "job_label")
GRID_HEADER = ("lat", "lon", "cell_size", "density")

TOTAL_RTOL = 1e-6

AGE_RANGE = (0, 120)
HEIGHT_MAX = 272.0
WEIGHT_MAX = 500.0


# --------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class MarginalSet:
    """Target marginal vectors, one per categorical dimension."""

    dimensions: tuple[tuple[str, tuple[str, ...]], ...]
    targets: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if not self.dimensions:
            raise ValidationError("no dimensions")
        if len(self.targets) != len(self.dimensions):
            raise ValidationError("one target vector is required per dimension")
        for (name, cats), tgt in zip(self.dimensions, self.targets):
            if len(cats) == 0:
                raise ValidationError(f"dimension {name!r} has no categories")
            if len(cats) != len(tgt):
                raise ValidationError(
                    f"dimension {name!r}: {len(cats)} categories but {len(tgt)} targets")
            if any((not math.isfinite(t)) or t < 0 for t in tgt):
                raise ValidationError(f"dimension {name!r}: targets must be finite and >= 0")
        totals = [sum(t) for t in self.targets]
        ref = max(totals)
        for i, tot in enumerate(totals):
            if abs(tot - totals[0]) > TOTAL_RTOL * max(ref, 1.0):
                raise ValidationError(
                    f"inconsistent dimension totals: {self.dimensions[0][0]!r} sums to "
                    f"{totals[0]:g} but {self.dimensions[i][0]!r} sums to {tot:g}")

    @property
    def names(self):
        return [name for name, _ in self.dimensions]

    @property
    def shape(self):
        return tuple(len(cats) for _, cats in self.dimensions)

    @property
    def total(self):
        return float(sum(self.targets[0]))

    def index(self, name):
        return self.names.index(name)

    def categories(self, name):
        return self.dimensions[self.index(name)][1]

    def target_array(self, i):
        return np.asarray(self.targets[i], dtype=float)

    def scaled(self, factor):
        return MarginalSet(self.dimensions, tuple(tuple(t * factor for t in tg) for tg in self.targets))


@dataclass(frozen=True)
class SeedPerson:
    age: int
    sex: str
    height: float
    weight: float
    religion: str
    caste: str
    job_label: str

    def attribute(self, name):
        return getattr(self, name)


PERSON_ATTRIBUTES = ("age", "sex", "height", "weight", "religion", "caste", "job_label")


@dataclass(frozen=True)
class SeedHousehold:
    hh_id: str
    members: tuple[SeedPerson, ...]

    # Household-level attributes; religion and caste are taken from the first
    # listed member (the household head in survey extracts).
    def attribute(self, name):
        if name == "size":
            return len(self.members)
        if name in ("religion", "caste"):
            return getattr(self.members[0], name)
        raise KeyError(name)


HOUSEHOLD_ATTRIBUTES = ("size", "religion", "caste")


@dataclass(frozen=True)
class MicroSample:
    households: tuple[SeedHousehold, ...]

    def __post_init__(self):
        for hh in self.households:
            if not hh.members:
                raise ValidationError(f"household {hh.hh_id!r} has no members")

    @property
    def persons(self):
        return [p for hh in self.households for p in hh.members]

    def __len__(self):
        return len(self.households)


@dataclass(frozen=True)
class GeoBoundary:
    """Polygon with optional holes; rings are ``(lat, lon)`` tuples, implicitly closed."""

    outer: tuple[tuple[float, float], ...]
    holes: tuple[tuple[tuple[float, float], ...], ...] = ()

    def __post_init__(self):
        for k, ring in enumerate((self.outer,) + tuple(self.holes)):
            if len(ring) < 3:
                label = "outer ring" if k == 0 else f"hole {k - 1}"
                raise ValidationError(f"{label} has fewer than 3 distinct vertices")

    def rings(self):
        return (self.outer,) + tuple(self.holes)

    def bbox(self):
        lat = [p[0] for p in self.outer]
        lon = [p[1] for p in self.outer]
        return min(lat), min(lon), max(lat), max(lon)


@dataclass(frozen=True, eq=False)
class DensityGrid:
    lat: np.ndarray
    lon: np.ndarray
    cell_size: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        n = len(self.lat)
        if not (len(self.lon) == len(self.cell_size) == len(self.density) == n):
            raise ValidationError("density grid columns have different lengths")
        if np.any(self.density < 0):
            raise ValidationError("negative density")

    def __len__(self):
        return len(self.lat)

    def __eq__(self, other):
        if not isinstance(other, DensityGrid):
            return NotImplemented
        return all(np.array_equal(getattr(self, f), getattr(other, f))
                   for f in ("lat", "lon", "cell_size", "density"))

    @classmethod
    def from_cells(cls, cells):
        arr = np.asarray(cells, dtype=float).reshape(-1, 4)
        return cls(arr[:, 0].copy(), arr[:, 1].copy(), arr[:, 2].copy(), arr[:, 3].copy())


# --------------------------------------------------------------------------
# CSV helpers


def _open_csv(path, required, allow_extra=False):
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read file ({exc.strerror})", path) from exc
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        fh.close()
        return path, None, None, iter(())
    header = [h.strip() for h in header]
    missing = [c for c in required if c not in header]
    if missing:
        fh.close()
        raise ParseError(f"missing column(s) {', '.join(missing)}; expected header "
                         f"{','.join(required)}", path, 1)
    extra = [c for c in header if c not in required]
    if extra:
        if not allow_extra:
            fh.close()
            raise ParseError(f"unexpected column(s) {', '.join(extra)}", path, 1)
        log.warning("%s: ignoring column(s) %s", path, ", ".join(extra))
    cols = {c: header.index(c) for c in required}

    def rows():
        with fh:
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not cell.strip() for cell in row):
                    continue
                if len(row) != len(header):
                    raise ParseError(f"expected {len(header)} fields, got {len(row)}", path, lineno)
                yield lineno, {c: row[i].strip() for c, i in cols.items()}

    return path, header, cols, rows()


def _number(text, name, path, line):
    try:
        val = float(text)
    except ValueError:
        raise ParseError(f"{name} is not a number: {text!r}", path, line) from None
    if not math.isfinite(val):
        raise ParseError(f"{name} must be finite", path, line)
    return val


# --------------------------------------------------------------------------
# loaders


def load_marginals(path):
    """Read ``attribute,category,target`` rows into a :class:`MarginalSet`.

    Dimensions and their categories keep first-appearance order.
    """
    path, header, _, rows = _open_csv(path, MARGINAL_HEADER)
    order = []
    cats = {}
    tgts = {}
    for line, rec in rows:
        attr, cat = rec["attribute"], rec["category"]
        if not attr or not cat:
            raise ParseError("empty attribute or category", path, line)
        target = _number(rec["target"], "target", path, line)
        if target < 0:
            raise ParseError(f"negative target {target:g}", path, line)
        if attr not in cats:
            order.append(attr)
            cats[attr] = []
            tgts[attr] = []
        if cat in cats[attr]:
            raise ParseError(f"duplicate category {attr}={cat}", path, line)
        cats[attr].append(cat)
        tgts[attr].append(target)
    if not order:
        raise ValidationError(f"{path}: no dimensions")
    try:
        return MarginalSet(
            tuple((a, tuple(cats[a])) for a in order),
            tuple(tuple(tgts[a]) for a in order),
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def load_seed_sample(path):
    """Read the seed micro-sample, grouping persons by ``hh_id``."""
    path, header, _, rows = _open_csv(path, SEED_HEADER, allow_extra=True)
    groups = {}
    for line, rec in rows:
        hh_id = rec["hh_id"]
        if not hh_id:
            raise ParseError("empty hh_id", path, line)
        age = _number(rec["age"], "age", path, line)
        if not age.is_integer():
            raise ParseError(f"age must be an integer, got {rec['age']!r}", path, line)
        if not AGE_RANGE[0] <= age <= AGE_RANGE[1]:
            raise ParseError(f"age {age:g} outside [0, 120]", path, line)
        height = _number(rec["height"], "height", path, line)
        if not 0 < height <= HEIGHT_MAX:
            raise ParseError(f"height {height:g} outside (0, {HEIGHT_MAX:g}]", path, line)
        weight = _number(rec["weight"], "weight", path, line)
        if not 0 < weight <= WEIGHT_MAX:
            raise ParseError(f"weight {weight:g} outside (0, {WEIGHT_MAX:g}]", path, line)
        for col in ("sex", "religion", "caste", "job_label"):
            if not rec[col]:
                raise ParseError(f"empty {col}", path, line)
        person = SeedPerson(int(age), rec["sex"], height, weight,
                            rec["religion"], rec["caste"], rec["job_label"])
        groups.setdefault(hh_id, []).append(person)
    return MicroSample(tuple(SeedHousehold(h, tuple(m)) for h, m in groups.items()))


def _ring(coords, path, label):
    if not isinstance(coords, list):
        raise ValidationError(f"{path}: {label} is not a coordinate list")
    pts = []
    for c in coords:
        if not (isinstance(c, list) and len(c) >= 2
                and all(isinstance(v, (int, float)) for v in c[:2])):
            raise ValidationError(f"{path}: {label} has a malformed position {c!r}")
        lon, lat = float(c[0]), float(c[1])
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise ValidationError(f"{path}: {label} position {c!r} outside WGS84 range")
        pt = (lat, lon)
        if pts and pts[-1] == pt:
            continue
        pts.append(pt)
    while len(pts) > 1 and pts[-1] == pts[0]:
        pts.pop()
    if len(pts) < 3:
        raise ValidationError(f"{path}: {label} has fewer than 3 distinct vertices")
    return tuple(pts)


def load_boundary(path):
    """Read a GeoJSON Polygon (bare geometry, Feature, or one-feature collection).

    GeoJSON positions are ``[lon, lat]``; the returned rings are ``(lat, lon)``.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputFileError(f"cannot read file ({exc.strerror})", path) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", path, exc.lineno) from None
    geom = doc
    if isinstance(geom, dict) and geom.get("type") == "FeatureCollection":
        feats = geom.get("features") or []
        if len(feats) != 1:
            raise ValidationError(f"{path}: expected exactly one feature, found {len(feats)}")
        geom = feats[0]
    if isinstance(geom, dict) and geom.get("type") == "Feature":
        geom = geom.get("geometry")
    gtype = geom.get("type") if isinstance(geom, dict) else None
    if gtype != "Polygon":
        raise ValidationError(f"{path}: unsupported geometry {gtype!r}; only Polygon is accepted")
    rings = geom.get("coordinates")
    if not isinstance(rings, list) or not rings:
        raise ValidationError(f"{path}: Polygon has no rings")
    outer = _ring(rings[0], path, "outer ring")
    holes = tuple(_ring(r, path, f"hole {i}") for i, r in enumerate(rings[1:]))
    return GeoBoundary(outer, holes)


def load_density_grid(path):
    """Read ``lat,lon,cell_size,density`` rows; zero-density cells are kept."""
    path, header, _, rows = _open_csv(path, GRID_HEADER)
    cells = []
    for line, rec in rows:
        lat = _number(rec["lat"], "lat", path, line)
        lon = _number(rec["lon"], "lon", path, line)
        size = _number(rec["cell_size"], "cell_size", path, line)
        dens = _number(rec["density"], "density", path, line)
        if not (-90 <= lat <= 90 and -180 <= lon <= 180):
            raise ParseError(f"cell centre ({lat:g}, {lon:g}) outside WGS84 range", path, line)
        if size <= 0:
            raise ParseError(f"cell_size must be positive, got {size:g}", path, line)
        if dens < 0:
            raise ParseError(f"negative density {dens:g}", path, line)
        cells.append((lat, lon, size, dens))
    return DensityGrid.from_cells(cells)
