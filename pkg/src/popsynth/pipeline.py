"""End-to-end generation run.

Stage order: ingest, IPF (optional), IPU, integerize, expand, allocate admin
units, geolocate homes, place facilities, assign attributes, verify.
Every randomised stage draws from its own stream derived from the run seed,
so changing one stage's consumption never shifts another stage's draws.
"""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import assignment, geo, ingest
from .bands import label_matches
from .errors import SpecError
from .ipf import ContingencyTable, fit_ipf
from .ipu import HOUSEHOLD, PERSON, Constraint, ConstraintSpec, build_incidence, fit_ipu
from .metrics import compare_populations
from .synthesis import allocate_admin_units, expand_population, integerize

log = logging.getLogger(__name__)

STAGES = ("integerize", "admin_units", "homes", "schools", "workplaces", "public_places",
          "homebound", "jobs", "school_choice", "workplace_choice", "public_place_choice",
          "flags", "comorbidities", "metrics")


def stage_rng(seed, stage):
    """Independent generator for one stage of a run."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(STAGES.index(stage),))
    return np.random.default_rng(ss)


@contextmanager
def _timed(stage, counts):
    t0 = time.perf_counter()
    yield counts
    extra = " ".join(f"{k}={v}" for k, v in counts.items())
    log.info("stage %-14s %7.3fs %s", stage, time.perf_counter() - t0, extra)


@dataclass
class Inputs:
    household_marginals: ingest.MarginalSet
    person_marginals: ingest.MarginalSet
    sample: ingest.MicroSample
    boundary: ingest.GeoBoundary
    grid: ingest.DensityGrid
    jobs: assignment.JobTable
    prevalence: assignment.PrevalenceTable


@dataclass
class RunResult:
    inputs: Inputs
    population: object
    convergence: dict
    metrics: object = None
    facilities: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)


def load_inputs(cfg):
    p = cfg.inputs
    return Inputs(
        household_marginals=ingest.load_marginals(p["household_marginals"]),
        person_marginals=ingest.load_marginals(p["person_marginals"]),
        sample=ingest.load_seed_sample(p["seed_sample"]),
        boundary=ingest.load_boundary(p["boundary"]),
        grid=ingest.load_density_grid(p["density_grid"]),
        jobs=assignment.load_job_table(p["job_table"]),
        prevalence=assignment.load_prevalence(p["prevalence"]),
    )


def _category_index(dim, cats, value):
    for k, c in enumerate(cats):
        if label_matches(c, value):
            return k
    raise SpecError(f"value {value!r} matches no category of dimension {dim!r}")


def seed_table(records, marginals):
    """Cross-tabulate records over the marginal dimensions (unit weights)."""
    values = np.zeros(marginals.shape)
    for rec in records:
        idx = []
        for dim, cats in marginals.dimensions:
            try:
                value = rec.attribute(dim)
            except (KeyError, AttributeError):
                raise SpecError(f"marginal dimension {dim!r} is not a record attribute") from None
            idx.append(_category_index(dim, cats, value))
        values[tuple(idx)] += 1.0
    return ContingencyTable(list(zip(marginals.names, marginals.shape)), values)


def marginal_constraints(marginals, level):
    prefix = "hh" if level == HOUSEHOLD else "person"
    out = []
    for d, (dim, cats) in enumerate(marginals.dimensions):
        for c, t in zip(cats, marginals.targets[d]):
            out.append(Constraint(f"{prefix}:{dim}={c}", level, ((dim, c),), float(t)))
    return out


def joint_constraints(table, categories):
    """One person constraint per positive cell of a fitted joint table."""
    out = []
    names = table.names
    for idx in zip(*np.nonzero(table.values > 0)):
        conds = tuple((names[d], categories[d][k]) for d, k in enumerate(idx))
        label = "&".join(f"{a}={c}" for a, c in conds)
        out.append(Constraint(f"person:{label}", PERSON, conds, float(table.values[idx])))
    return out


def build_constraints(inputs, cfg):
    hh = marginal_constraints(inputs.household_marginals, HOUSEHOLD)
    pm = inputs.person_marginals
    ipf_report = None
    if cfg.ipf_enabled:
        seed = seed_table(inputs.sample.persons, pm)
        fitted, ipf_report = fit_ipf(seed, pm, cfg.ipf_tol, cfg.ipf_max_iters)
        person = joint_constraints(fitted, [c for _, c in pm.dimensions])
    else:
        person = marginal_constraints(pm, PERSON)
    return ConstraintSpec.from_levels(hh, person), ipf_report


def facility_counts(cfg, per_unit):
    return {u.name: per_unit for u in cfg.admin_units}


def run_generation(cfg, with_metrics=True):
    """Run every generation stage for ``cfg``; returns a :class:`RunResult`."""
    counts = {}
    with _timed("ingest", {}) as c:
        inputs = load_inputs(cfg)
        c.update(households=len(inputs.sample), persons=len(inputs.sample.persons), cells=len(inputs.grid))

    with _timed("fit", {}) as c:
        spec, ipf_report = build_constraints(inputs, cfg)
        incidence = build_incidence(inputs.sample, spec)
        weights, ipu_report = fit_ipu(incidence, spec.targets, cfg.ipu_tol, cfg.ipu_max_iters)
        c.update(constraints=len(spec), ipu_iters=ipu_report.iterations,
                 delta=f"{ipu_report.max_deviation:.4g}")

    with _timed("expand", {}) as c:
        reps = integerize(weights, stage_rng(cfg.seed, "integerize"))
        pop = expand_population(inputs.sample, reps, cfg.region_code, cfg.region)
        allocate_admin_units(pop.households, cfg.admin_units, stage_rng(cfg.seed, "admin_units"))
        c.update(households=len(pop.households), persons=len(pop.persons))
    counts.update(households=len(pop.households), persons=len(pop.persons))

    geo_kw = dict(noise_half_width=cfg.noise_half_width, max_attempts_per_point=cfg.max_attempts_per_point)
    with _timed("geolocate", {}) as c:
        locs = geo.sample_locations(inputs.grid, inputs.boundary, len(pop.households),
                                    stage_rng(cfg.seed, "homes"), **geo_kw)
        for hh, la, lo in zip(pop.households, locs.lat.tolist(), locs.lon.tolist()):
            hh.home_lat, hh.home_lon = la, lo
        c.update(homes=len(locs))

    with _timed("facilities", {}) as c:
        schools = assignment.place_facilities(
            "school", facility_counts(cfg, cfg.schools_per_unit), inputs.grid, inputs.boundary,
            stage_rng(cfg.seed, "schools"), **geo_kw)
        works = []
        rng = stage_rng(cfg.seed, "workplaces")
        for cat in cfg.workplaces:
            works += assignment.place_facilities(
                "workplace", facility_counts(cfg, cat.per_unit), inputs.grid, inputs.boundary, rng,
                first_seq=len(works) + 1, category=cat.category, allowed_job_labels=cat.job_labels,
                **geo_kw)
        places = assignment.place_facilities(
            "public_place", facility_counts(cfg, cfg.public_places_per_unit), inputs.grid,
            inputs.boundary, stage_rng(cfg.seed, "public_places"), **geo_kw)
        c.update(schools=len(schools), workplaces=len(works), public_places=len(places))
    counts.update(schools=len(schools), workplaces=len(works), public_places=len(places))

    with _timed("assign", {}) as c:
        persons = pop.persons
        assignment.assign_homebound(persons, cfg.homebound_rates, stage_rng(cfg.seed, "homebound"),
                                    retirement_age=cfg.retirement_age,
                                    homebound_labels=cfg.homebound_labels,
                                    adult_age=cfg.adult_age, infant_age=cfg.infant_age)
        assignment.assign_job_labels(persons, inputs.jobs, stage_rng(cfg.seed, "jobs"),
                                     adult_age=cfg.adult_age)
        assignment.assign_schools(pop, schools, stage_rng(cfg.seed, "school_choice"), cfg.distance)
        assignment.assign_workplaces(pop, works, stage_rng(cfg.seed, "workplace_choice"), cfg.distance)
        assignment.assign_public_places(pop, places, stage_rng(cfg.seed, "public_place_choice"),
                                        cfg.distance)
        assignment.assign_flags(persons, inputs.jobs, cfg.adherence, stage_rng(cfg.seed, "flags"))
        assignment.assign_comorbidities(persons, inputs.prevalence, stage_rng(cfg.seed, "comorbidities"))
        hb = sum(p.homebound for p in persons)
        st = sum(p.job_label == assignment.STUDENT for p in persons)
        c.update(homebound=hb, students=st, employed=len(persons) - hb - st)

    result = RunResult(inputs, pop, {"ipf": ipf_report, "ipu": ipu_report},
                       facilities={"school": schools, "workplace": works, "public_place": places},
                       counts=counts)
    if with_metrics:
        with _timed("verify", {}) as c:
            result.metrics = verify(inputs.sample, pop, cfg)
            c.update(comparisons=len(result.metrics.entries))
    return result


def verify(sample, pop, cfg):
    return compare_populations(sample, pop, subsample=cfg.metrics_subsample,
                               rng=stage_rng(cfg.seed, "metrics"))
