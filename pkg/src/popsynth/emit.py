"""Population CSV and run manifest."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .assignment import CONDITIONS
from .errors import IncompletePopulationError, InputFileError, OutputError, ParseError
from .synthesis import Household, Person, Population

OUTPUT_COLUMNS = (
    "Age", "SexLabel", "Height", "Weight", "HHID", "H_Lat", "H_Lon", "District",
    "AdminUnitName", "AdminUnitLatitude", "AdminUnitLongitude", "Religion", "Caste",
    "JobLabel", "JobID", "WorkPlaceID", "W_Lat", "W_Lon", "essential_worker",
    "Adherence_to_Intervention", "PublicTransport_Jobs", "school_id", "school_lat",
    "school_long", "public_place_id", "public_place_lat", "public_place_long",
    "Agent_ID", "PSUID",
) + tuple(f"M_{c}" for c in CONDITIONS)

HEADER_LINE = ",".join(OUTPUT_COLUMNS)

_PERSON_FIELDS = {
    "job_label": "JobLabel", "job_id": "JobID", "essential_worker": "essential_worker",
    "public_transport": "PublicTransport_Jobs", "adherence": "Adherence_to_Intervention",
    "comorbidities": "M_*",
}


def fmt_float(v):
    """Shortest round-trip decimal; absent values are ``nan``."""
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def _missing_fields(pop):
    hh = pop.household_index()
    missing = {}

    def note(field, agent):
        missing.setdefault(field, []).append(agent)

    for p in pop.persons:
        for attr, col in _PERSON_FIELDS.items():
            if getattr(p, attr) is None:
                note(col, p.agent_id)
        house = hh.get(p.hhid)
        if house is None:
            note("HHID", p.agent_id)
            continue
        if house.admin_unit is None:
            note("AdminUnitName", p.agent_id)
        if math.isnan(house.home_lat) or math.isnan(house.home_lon):
            note("H_Lat/H_Lon", p.agent_id)
    return missing


def person_row(p, house, district):
    m = p.comorbidities
    return [
        str(p.age), p.sex, fmt_float(p.height), fmt_float(p.weight), str(p.hhid),
        fmt_float(house.home_lat), fmt_float(house.home_lon), district,
        house.admin_unit, fmt_float(house.admin_lat), fmt_float(house.admin_lon),
        p.religion, p.caste, p.job_label, str(p.job_id), str(p.workplace_id),
        fmt_float(p.w_lat), fmt_float(p.w_lon), str(p.essential_worker),
        fmt_float(p.adherence), str(p.public_transport), str(p.school_id),
        fmt_float(p.school_lat), fmt_float(p.school_lon), str(p.public_place_id),
        fmt_float(p.public_place_lat), fmt_float(p.public_place_lon),
        str(p.agent_id), str(p.psuid),
    ] + [str(m[c]) for c in CONDITIONS]


def write_population(pop, path, district=None):
    """Write one row per person in Agent_ID order; returns the row count.

    Raises IncompletePopulationError if any pipeline stage left a field unset.
    """
    missing = _missing_fields(pop)
    if missing:
        desc = "; ".join(f"{f} ({len(a)} persons, e.g. Agent_ID {a[0]})" for f, a in missing.items())
        raise IncompletePopulationError(f"population is missing fields: {desc}")
    district = pop.region if district is None else district
    hh = pop.household_index()
    persons = sorted(pop.persons, key=lambda p: p.agent_id)
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(OUTPUT_COLUMNS)
            for p in persons:
                w.writerow(person_row(p, hh[p.hhid], district))
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc
    return len(persons)


def _float(text):
    return float(text)


def read_population(path):
    """Parse a population CSV written by :func:`write_population`."""
    path = Path(path)
    try:
        fh = path.open(newline="", encoding="utf-8")
    except OSError as exc:
        raise InputFileError(f"cannot read file ({exc.strerror})", path) from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != OUTPUT_COLUMNS:
            raise ParseError("header does not match the population schema", path, 1)
        pop = Population()
        households = {}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(OUTPUT_COLUMNS):
                raise ParseError(f"expected {len(OUTPUT_COLUMNS)} fields, got {len(row)}", path, lineno)
            r = dict(zip(OUTPUT_COLUMNS, row))
            try:
                hhid = int(r["HHID"])
                house = households.get(hhid)
                if house is None:
                    house = Household(
                        hhid=hhid, psuid=int(r["PSUID"]), admin_unit=r["AdminUnitName"],
                        admin_lat=_float(r["AdminUnitLatitude"]), admin_lon=_float(r["AdminUnitLongitude"]),
                        home_lat=_float(r["H_Lat"]), home_lon=_float(r["H_Lon"]))
                    households[hhid] = house
                    pop.households.append(house)
                p = Person(
                    agent_id=int(r["Agent_ID"]), hhid=hhid, psuid=int(r["PSUID"]),
                    age=int(r["Age"]), sex=r["SexLabel"], height=_float(r["Height"]),
                    weight=_float(r["Weight"]), religion=r["Religion"], caste=r["Caste"],
                    job_label=r["JobLabel"], job_id=int(r["JobID"]),
                    workplace_id=int(r["WorkPlaceID"]), w_lat=_float(r["W_Lat"]), w_lon=_float(r["W_Lon"]),
                    school_id=int(r["school_id"]), school_lat=_float(r["school_lat"]),
                    school_lon=_float(r["school_long"]), public_place_id=int(r["public_place_id"]),
                    public_place_lat=_float(r["public_place_lat"]),
                    public_place_lon=_float(r["public_place_long"]),
                    essential_worker=int(r["essential_worker"]),
                    public_transport=int(r["PublicTransport_Jobs"]),
                    adherence=_float(r["Adherence_to_Intervention"]),
                    comorbidities={c: int(r[f"M_{c}"]) for c in CONDITIONS},
                    homebound=r["JobLabel"] == "Homebound",
                )
            except ValueError as exc:
                raise ParseError(f"bad value: {exc}", path, lineno) from None
            pop.region = r["District"]
            house.members.append(p.agent_id)
            pop.persons.append(p)
    return pop


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(seed, region, inputs, convergence, metrics=None, counts=None, timestamp=None):
    """Assemble the manifest dict.

    ``inputs`` maps an input name to its path; ``convergence`` maps a stage
    name to a ConvergenceReport (or None when the stage was skipped).
    """
    return {
        "tool": "popsynth",
        "version": __version__,
        "created_utc": timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
        "region": region,
        "inputs": {k: {"path": str(p), "sha256": file_digest(p)} for k, p in sorted(inputs.items())},
        "convergence": {k: (v.to_dict() if v is not None else None) for k, v in convergence.items()},
        "counts": counts or {},
        "metrics": metrics.to_dict() if metrics is not None else None,
    }


def write_manifest(path, seed, region, inputs, convergence, metrics=None, counts=None, timestamp=None):
    manifest = build_manifest(seed, region, inputs, convergence, metrics, counts, timestamp)
    try:
        Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror}") from exc
    return manifest
