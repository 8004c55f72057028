"""Integer population from fitted household weights."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigError, ValidationError

ID_BLOCK = 10**10
NAN = float("nan")


@dataclass
class Household:
    hhid: int
    psuid: int
    members: list = field(default_factory=list)
    admin_unit: Optional[str] = None
    admin_lat: float = NAN
    admin_lon: float = NAN
    home_lat: float = NAN
    home_lon: float = NAN


@dataclass
class Person:
    agent_id: int
    hhid: int
    psuid: int
    age: int
    sex: str
    height: float
    weight: float
    religion: str
    caste: str
    seed_job_label: str = ""
    job_label: Optional[str] = None
    job_id: Optional[int] = None
    workplace_id: int = 0
    w_lat: float = NAN
    w_lon: float = NAN
    school_id: int = 0
    school_lat: float = NAN
    school_lon: float = NAN
    public_place_id: int = 0
    public_place_lat: float = NAN
    public_place_lon: float = NAN
    essential_worker: Optional[int] = None
    public_transport: Optional[int] = None
    adherence: Optional[float] = None
    comorbidities: Optional[dict] = None
    homebound: bool = False

    def attribute(self, name):
        return getattr(self, name)


@dataclass
class Population:
    households: list = field(default_factory=list)
    persons: list = field(default_factory=list)
    region: str = ""

    def __len__(self):
        return len(self.persons)

    def household_index(self):
        return {hh.hhid: hh for hh in self.households}


@dataclass(frozen=True)
class AdminUnit:
    name: str
    lat: float
    lon: float
    share: float = 1.0


def integerize(weights, rng):
    """Truncate-replicate-sample rounding of household weights.

    Every household gets ``floor(w)`` replicas; the remaining
    ``round(sum(w)) - sum(floor(w))`` replicas go to distinct households drawn
    without replacement with probability proportional to the fractional parts.
    """
    w = np.asarray(weights, dtype=float)
    if w.size == 0:
        return np.zeros(0, dtype=np.int64)
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite and >= 0")
    base = np.floor(w)
    frac = w - base
    counts = base.astype(np.int64)
    total = int(math.floor(float(w.sum()) + 0.5))
    residual = total - int(counts.sum())
    cand = np.flatnonzero(frac > 0)
    residual = min(max(residual, 0), cand.size)
    if residual:
        p = frac[cand] / frac[cand].sum()
        picked = rng.choice(cand, size=residual, replace=False, p=p)
        counts[picked] += 1
    return counts


def expand_population(sample, counts, region_code=5, region=""):
    """Clone each sample household ``counts[j]`` times with fresh IDs.

    Member attributes are copied verbatim, so every clone keeps the joint
    age/sex structure of its source household.  ``psuid`` is the 1-based index
    of the source household.
    """
    counts = np.asarray(counts)
    if counts.shape != (len(sample.households),):
        raise ValidationError(
            f"{counts.size} replication counts for {len(sample.households)} sample households")
    if np.any(counts < 0):
        raise ValidationError("replication counts must be >= 0")
    prefix = int(region_code) * ID_BLOCK
    pop = Population(region=region)
    next_hh = next_agent = 1
    for j, (hh, n) in enumerate(zip(sample.households, counts.tolist())):
        for _ in range(n):
            house = Household(hhid=prefix + next_hh, psuid=j + 1)
            next_hh += 1
            for m in hh.members:
                person = Person(
                    agent_id=prefix + next_agent, hhid=house.hhid, psuid=j + 1,
                    age=m.age, sex=m.sex, height=m.height, weight=m.weight,
                    religion=m.religion, caste=m.caste, seed_job_label=m.job_label,
                )
                next_agent += 1
                house.members.append(person.agent_id)
                pop.persons.append(person)
            pop.households.append(house)
    return pop


def allocate_admin_units(households, admin_units, rng):
    """Assign each household to a unit with probability proportional to its share.

    Returns the chosen unit index per household; the household records are
    updated in place with the unit name and centroid.
    """
    if not admin_units:
        raise ConfigError("admin unit list is empty")
    shares = np.array([u.share for u in admin_units], dtype=float)
    if np.any(shares < 0) or not shares.sum() > 0:
        raise ConfigError("admin unit shares must be >= 0 with a positive sum")
    idx = rng.choice(len(admin_units), size=len(households), p=shares / shares.sum())
    for hh, k in zip(households, idx.tolist()):
        unit = admin_units[k]
        hh.admin_unit = unit.name
        hh.admin_lat = unit.lat
        hh.admin_lon = unit.lon
    return idx
