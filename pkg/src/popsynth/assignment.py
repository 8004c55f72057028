"""Per-person attributes: activity status, job, facilities, flags, comorbidities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import geo
from .bands import label_matches
from .errors import ConfigError, ParseError, ValidationError
from .ingest import _number, _open_csv

STUDENT = "Student"
HOMEBOUND = "Homebound"
STUDENT_ID = 199
HOMEBOUND_ID = 0
RESERVED = {STUDENT: STUDENT_ID, HOMEBOUND: HOMEBOUND_ID}

ADULT_AGE = 18
INFANT_AGE = 3
RETIREMENT_AGE = 60
DISTANCE_EPS = 1e-6

CONDITIONS = ("Fever", "Diarrhea", "Cataract", "Heart_disease", "Diabetes",
              "Leprosy", "Cancer", "Asthma", "Paralysis", "Epilepsy")

JOB_HEADER = ("job_label", "job_id", "sex", "age_band", "weight", "essential", "public_transport")
PREVALENCE_HEADER = ("condition", "sex", "age_band", "probability")

# Facility IDs: kind prefix followed by a sequence number; 0 means "none".
ID_PREFIX = {
    "school": 2001 * 10**9,
    "workplace": 2001 * 10**9 + 10**8,
    "public_place": 3001 * 10**9,
}


# --------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class JobRow:
    job_label: str
    job_id: int
    sex: str
    age_band: str
    weight: float
    essential: int
    public_transport: int


class JobTable:
    """Job labels with sampling weights conditional on sex and age band.

    Rows may use ``*`` for sex or age band.  Each label has one job ID and one
    pair of essential/public-transport flags.  The reserved labels Student
    (199) and Homebound (0) are never sampled; when absent from the table they
    get zero flags.
    """

    def __init__(self, rows):
        self.rows = tuple(rows)
        self._flags = {}
        self._ids = {}
        by_id = {}
        for r in self.rows:
            if r.weight < 0 or not math.isfinite(r.weight):
                raise ValidationError(f"job {r.job_label!r}: weight must be finite and >= 0")
            if r.job_label in RESERVED and r.job_id != RESERVED[r.job_label]:
                raise ValidationError(
                    f"job {r.job_label!r} must use reserved ID {RESERVED[r.job_label]}")
            if r.job_id in RESERVED.values() and r.job_label not in RESERVED:
                raise ValidationError(f"job ID {r.job_id} is reserved")
            if by_id.setdefault(r.job_id, r.job_label) != r.job_label:
                raise ValidationError(f"job ID {r.job_id} used by {by_id[r.job_id]!r} and {r.job_label!r}")
            if self._ids.setdefault(r.job_label, r.job_id) != r.job_id:
                raise ValidationError(f"job {r.job_label!r} has more than one job ID")
            flags = (r.essential, r.public_transport)
            if self._flags.setdefault(r.job_label, flags) != flags:
                raise ValidationError(f"job {r.job_label!r} has inconsistent flags")
        for label, jid in RESERVED.items():
            self._ids.setdefault(label, jid)
            self._flags.setdefault(label, (0, 0))

    @classmethod
    def simple(cls, jobs):
        """Build a table from ``(label, id, weight, essential, public_transport)`` tuples."""
        return cls(JobRow(lab, jid, "*", "*", w, e, t) for lab, jid, w, e, t in jobs)

    @property
    def labels(self):
        return list(self._ids)

    def job_id(self, label):
        return self._ids[label]

    def flags(self, label):
        try:
            return self._flags[label]
        except KeyError:
            raise ValidationError(f"job label {label!r} is not in the job table") from None

    def choices(self, sex, age):
        """Sampleable labels and their weights for one (sex, age)."""
        weights = {}
        for r in self.rows:
            if r.job_label in RESERVED:
                continue
            if label_matches(r.sex, sex) and label_matches(r.age_band, age):
                weights[r.job_label] = weights.get(r.job_label, 0.0) + r.weight
        labels = list(weights)
        return labels, np.array([weights[k] for k in labels])


def _flag(text, name, path, line):
    if text not in ("0", "1"):
        raise ParseError(f"{name} must be 0 or 1, got {text!r}", path, line)
    return int(text)


def load_job_table(path):
    path, header, _, rows = _open_csv(path, JOB_HEADER)
    out = []
    for line, rec in rows:
        jid = _number(rec["job_id"], "job_id", path, line)
        if not jid.is_integer() or jid < 0:
            raise ParseError(f"job_id must be a non-negative integer, got {rec['job_id']!r}", path, line)
        w = _number(rec["weight"], "weight", path, line)
        if w < 0:
            raise ParseError(f"negative weight {w:g}", path, line)
        out.append(JobRow(rec["job_label"], int(jid), rec["sex"] or "*", rec["age_band"] or "*", w,
                          _flag(rec["essential"], "essential", path, line),
                          _flag(rec["public_transport"], "public_transport", path, line)))
    try:
        return JobTable(out)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


@dataclass(frozen=True)
class PrevalenceRow:
    condition: str
    sex: str
    age_band: str
    probability: float


class PrevalenceTable:
    """Per-condition probabilities by sex and age band; the first matching row wins."""

    def __init__(self, rows=()):
        self.rows = tuple(rows)
        for r in self.rows:
            if r.condition not in CONDITIONS:
                raise ValidationError(f"unknown condition {r.condition!r}")
            if not 0 <= r.probability <= 1:
                raise ValidationError(f"{r.condition}: probability {r.probability} outside [0, 1]")

    @classmethod
    def constant(cls, probabilities):
        return cls(PrevalenceRow(c, "*", "*", p) for c, p in probabilities.items())

    def probability(self, condition, sex, age):
        for r in self.rows:
            if r.condition == condition and label_matches(r.sex, sex) and label_matches(r.age_band, age):
                return r.probability
        return 0.0


def load_prevalence(path):
    path, header, _, rows = _open_csv(path, PREVALENCE_HEADER)
    out = []
    for line, rec in rows:
        if rec["condition"] not in CONDITIONS:
            raise ParseError(f"unknown condition {rec['condition']!r}", path, line)
        p = _number(rec["probability"], "probability", path, line)
        if not 0 <= p <= 1:
            raise ParseError(f"probability {p:g} outside [0, 1]", path, line)
        out.append(PrevalenceRow(rec["condition"], rec["sex"] or "*", rec["age_band"] or "*", p))
    return PrevalenceTable(out)


@dataclass(frozen=True)
class DiscreteDistribution:
    values: tuple
    probabilities: tuple

    def __post_init__(self):
        if len(self.values) != len(self.probabilities) or not self.values:
            raise ConfigError("distribution needs one probability per value")
        p = np.asarray(self.probabilities, dtype=float)
        if np.any(p < 0) or not np.isclose(p.sum(), 1.0, rtol=0, atol=1e-9):
            raise ConfigError("distribution probabilities must be >= 0 and sum to 1")

    @classmethod
    def point_mass(cls, value):
        return cls((value,), (1.0,))

    def sample(self, rng, size):
        p = np.asarray(self.probabilities, dtype=float)
        idx = rng.choice(len(self.values), size=size, p=p / p.sum())
        return [self.values[i] for i in idx.tolist()]


# Uniform over 0, 0.1, ..., 1.0.
DEFAULT_ADHERENCE = DiscreteDistribution(tuple(round(k / 10, 1) for k in range(11)), (1 / 11,) * 11)


# --------------------------------------------------------------------------
# activity status and jobs


def assign_homebound(persons, rates, rng, retirement_age=RETIREMENT_AGE,
                     homebound_labels=("Unemployed", "Homemaker"),
                     adult_age=ADULT_AGE, infant_age=INFANT_AGE):
    """Mark home-bound persons.

    Infants (``age < infant_age``), persons past ``retirement_age`` and adults
    whose survey job label is in ``homebound_labels`` are always home-bound.
    Other working-age adults are home-bound with the per-sex probability in
    ``rates``.
    """
    for sex, r in rates.items():
        if not 0 <= r <= 1:
            raise ConfigError(f"home-bound rate for {sex!r} outside [0, 1]")
    forced_labels = {s.lower() for s in homebound_labels}
    u = rng.random(len(persons))
    for person, ui in zip(persons, u.tolist()):
        if person.age < infant_age or person.age > retirement_age:
            hb = True
        elif person.age < adult_age:
            hb = False
        elif person.seed_job_label.lower() in forced_labels:
            hb = True
        else:
            if person.sex not in rates:
                raise ConfigError(f"no home-bound rate configured for sex {person.sex!r}")
            hb = ui < rates[person.sex]
        person.homebound = hb
        if hb:
            _set_homebound(person)
    return persons


def _set_homebound(person):
    person.job_label = HOMEBOUND
    person.job_id = HOMEBOUND_ID
    person.workplace_id = 0
    person.w_lat = person.w_lon = math.nan


def assign_job_labels(persons, jobs, rng, adult_age=ADULT_AGE):
    """Label minors as students and draw a job for every other non-home-bound adult."""
    groups = {}
    for person in persons:
        if person.homebound:
            _set_homebound(person)
        elif person.age < adult_age:
            person.job_label = STUDENT
            person.job_id = STUDENT_ID
        else:
            groups.setdefault((person.sex, person.age), []).append(person)
    for (sex, age), members in groups.items():
        labels, w = jobs.choices(sex, age)
        if not labels or not w.sum() > 0:
            raise ConfigError(f"job table has no positive weight for sex={sex!r} age={age}")
        picks = rng.choice(len(labels), size=len(members), p=w / w.sum())
        for person, k in zip(members, picks.tolist()):
            person.job_label = labels[k]
            person.job_id = jobs.job_id(labels[k])
    return persons


def is_employed(person):
    return bool(person.job_label) and person.job_label not in RESERVED


# --------------------------------------------------------------------------
# facilities


@dataclass(frozen=True)
class Facility:
    facility_id: int
    kind: str
    lat: float
    lon: float
    admin_unit: str = ""
    category: str = ""
    allowed_job_labels: frozenset = field(default_factory=frozenset)


def place_facilities(kind, counts_per_unit, grid, boundary, rng, first_seq=1,
                     category="", allowed_job_labels=(), noise_half_width=None,
                     max_attempts_per_point=geo.DEFAULT_MAX_ATTEMPTS):
    """Locate facilities by density-weighted sampling and mint their IDs.

    ``counts_per_unit`` maps admin-unit name to the number of facilities to
    create for it.  IDs are ``ID_PREFIX[kind] + sequence`` starting at
    ``first_seq``.
    """
    if kind not in ID_PREFIX:
        raise ConfigError(f"unknown facility kind {kind!r}")
    names = []
    for unit, c in counts_per_unit.items():
        if c < 0:
            raise ConfigError(f"negative {kind} count for unit {unit!r}")
        names.extend([unit] * int(c))
    if not names:
        return []
    locs = geo.sample_locations(grid, boundary, len(names), rng, noise_half_width=noise_half_width,
                                max_attempts_per_point=max_attempts_per_point)
    allowed = frozenset(allowed_job_labels)
    return [Facility(ID_PREFIX[kind] + first_seq + i, kind, float(locs.lat[i]), float(locs.lon[i]),
                     unit, category, allowed)
            for i, unit in enumerate(names)]


def choose_inverse_distance(home_lat, home_lon, fac_lat, fac_lon, rng,
                            metric="euclidean", eps=DISTANCE_EPS):
    """For each home, draw one facility index with probability proportional to
    ``1 / max(distance, eps)``."""
    dist_fn = geo.DISTANCES[metric]
    hl = np.asarray(home_lat, dtype=float)[:, None]
    ho = np.asarray(home_lon, dtype=float)[:, None]
    d = dist_fn(hl, ho, np.asarray(fac_lat, dtype=float)[None, :], np.asarray(fac_lon, dtype=float)[None, :])
    w = 1.0 / np.maximum(d, eps)
    cum = np.cumsum(w, axis=1)
    u = rng.random(hl.shape[0]) * cum[:, -1]
    idx = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(idx, w.shape[1] - 1)


def _homes(pop, persons):
    hh = pop.household_index()
    lat = np.array([hh[p.hhid].home_lat for p in persons])
    lon = np.array([hh[p.hhid].home_lon for p in persons])
    return lat, lon


def assign_school(person, home, schools, rng, metric="euclidean"):
    """Single-person form of :func:`assign_schools`; ``home`` is a GeoPoint."""
    if not schools:
        raise ConfigError("students present but no schools configured")
    k = choose_inverse_distance([home.lat], [home.lon], [s.lat for s in schools],
                                [s.lon for s in schools], rng, metric)[0]
    s = schools[int(k)]
    person.school_id, person.school_lat, person.school_lon = s.facility_id, s.lat, s.lon
    return s


def assign_schools(pop, schools, rng, metric="euclidean"):
    students = []
    for p in pop.persons:
        if p.job_label == STUDENT:
            students.append(p)
        else:
            p.school_id, p.school_lat, p.school_lon = 0, math.nan, math.nan
    if not students:
        return pop
    if not schools:
        raise ConfigError("students present but no schools configured")
    lat, lon = _homes(pop, students)
    picks = choose_inverse_distance(lat, lon, [s.lat for s in schools], [s.lon for s in schools], rng, metric)
    for p, k in zip(students, picks.tolist()):
        s = schools[k]
        p.school_id, p.school_lat, p.school_lon = s.facility_id, s.lat, s.lon
    return pop


def assign_workplace(person, home, workplaces, rng, metric="euclidean"):
    """Single-person form of :func:`assign_workplaces`; ``home`` is a GeoPoint."""
    if not is_employed(person):
        person.workplace_id, person.w_lat, person.w_lon = 0, math.nan, math.nan
        return None
    cand = [w for w in workplaces if person.job_label in w.allowed_job_labels]
    if not cand:
        raise ConfigError(f"no workplace accepts job label {person.job_label!r}")
    k = choose_inverse_distance([home.lat], [home.lon], [w.lat for w in cand],
                                [w.lon for w in cand], rng, metric)[0]
    w = cand[int(k)]
    person.workplace_id, person.w_lat, person.w_lon = w.facility_id, w.lat, w.lon
    return w


def assign_workplaces(pop, workplaces, rng, metric="euclidean"):
    """Pick a workplace for every employed person among those allowing their job label."""
    by_label = {}
    for p in pop.persons:
        if is_employed(p):
            by_label.setdefault(p.job_label, []).append(p)
        else:
            p.workplace_id, p.w_lat, p.w_lon = 0, math.nan, math.nan
    for label, members in by_label.items():
        cand = [w for w in workplaces if label in w.allowed_job_labels]
        if not cand:
            raise ConfigError(f"no workplace accepts job label {label!r}")
        lat, lon = _homes(pop, members)
        picks = choose_inverse_distance(lat, lon, [w.lat for w in cand], [w.lon for w in cand], rng, metric)
        for p, k in zip(members, picks.tolist()):
            w = cand[k]
            p.workplace_id, p.w_lat, p.w_lon = w.facility_id, w.lat, w.lon
    return pop


def assign_public_places(pop, places, rng, metric="euclidean"):
    if not places or not pop.persons:
        return pop
    lat, lon = _homes(pop, pop.persons)
    picks = choose_inverse_distance(lat, lon, [f.lat for f in places], [f.lon for f in places], rng, metric)
    for p, k in zip(pop.persons, picks.tolist()):
        f = places[k]
        p.public_place_id, p.public_place_lat, p.public_place_lon = f.facility_id, f.lat, f.lon
    return pop


# --------------------------------------------------------------------------
# flags and health


def assign_flags(persons, jobs, adherence, rng):
    for v in adherence.values:
        if not 0 <= v <= 1:
            raise ConfigError(f"adherence value {v} outside [0, 1]")
    for p in persons:
        if p.job_label is None:
            raise ValidationError(f"person {p.agent_id} has no job label")
        p.essential_worker, p.public_transport = jobs.flags(p.job_label)
    for p, a in zip(persons, adherence.sample(rng, len(persons))):
        p.adherence = a
    return persons


def assign_comorbidities(persons, prevalence, rng):
    n = len(persons)
    cache = {}
    for p in persons:
        key = (p.sex, p.age)
        if key not in cache:
            cache[key] = [prevalence.probability(c, p.sex, p.age) for c in CONDITIONS]
    probs = np.array([cache[(p.sex, p.age)] for p in persons])
    draws = rng.random((n, len(CONDITIONS)))
    flags = (draws < probs.reshape(n, len(CONDITIONS))).astype(int)
    for p, row in zip(persons, flags.tolist()):
        p.comorbidities = dict(zip(CONDITIONS, row))
    return persons
